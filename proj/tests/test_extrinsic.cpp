#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "tamed/extrinsic.hpp"

using namespace tamed;
using namespace tamed::extrinsic;
using tamed::discretize::triangulate;
using tamed::surface::catalog;
using tamed::surface::ParametricImmersion;

namespace {

// Origin-centered round sphere: the degenerate compact counterexample where
// the radial direction is everywhere normal.
ParametricImmersion origin_sphere(double a) {
    ParametricImmersion imm;
    imm.name = "origin_sphere";
    imm.domain = {0.0, 2 * M_PI, 0.05, M_PI - 0.05, true, 2 * M_PI};
    imm.F = [a](double u, double v) {
        Vec out(3);
        out << a * std::sin(v) * std::cos(u), a * std::sin(v) * std::sin(u), a * std::cos(v);
        return out;
    };
    return imm;
}

// Catenoid normal defect along a meridian, closed form.
double catenoid_defect(double v) {
    const double R = std::hypot(std::cosh(v), v);
    return std::abs(std::cosh(v) - v * std::sinh(v)) / (R * std::cosh(v));
}

// Frozen 1D-quadrature oracles (r -> value), computed before the build.
struct Oracle {
    double r, value;
};
constexpr Oracle kCatenoidArea[] = {{4, 86.10802378379401},
                                    {10, 589.0999906380024},
                                    {20, 2448.5185430245288},
                                    {40, 9957.137917217404}};
constexpr Oracle kCatenoidLength[] = {{4, 44.05160114577787},
                                      {10, 120.08086896882244},
                                      {20, 247.0572296801355},
                                      {40, 499.6380026227617}};
constexpr Oracle kHelicoidArea[] = {{4, 103.70194396149842},    {5.4, 237.89044323648955},
                                    {7.3, 560.7760955126003},   {9.8, 1317.1285977698692},
                                    {13.2, 3158.2197088397666}, {17.8, 7653.78427758925},
                                    {24, 18627.138853847508},   {32, 43969.23645890767}};
constexpr Oracle kParaboloidArea[] = {{2, 11.456054233648548}, {3, 23.638202516821455},
                                      {4, 38.75871271171191},  {5, 56.3309768026069},
                                      {6, 76.04631249369396},  {8, 121.09712678996519},
                                      {10, 172.72925361980347}, {12, 230.18053032860868}};

}  // namespace

TEST_CASE("gradient decomposition: plane, sphere, catenoid ends") {
    auto plane = catalog("plane");
    for (auto [u, v] : {std::pair{1.0, 0.0}, {0.3, -2.0}, {5.0, 4.0}}) {
        auto g = gradient_decomposition(plane, u, v);
        CHECK(g.grad_R_norm == Catch::Approx(1.0).margin(1e-12));
        CHECK(g.normal_defect <= 1e-12);
    }

    auto sph = origin_sphere(1.5);
    for (auto [u, v] : {std::pair{0.7, 1.2}, {2.0, 0.4}}) {
        auto g = gradient_decomposition(sph, u, v);
        CHECK(g.grad_R_norm <= 1e-7);
        CHECK(g.normal_defect == Catch::Approx(1.0).margin(1e-7));
    }

    auto cat = catalog("catenoid");
    for (double v : {1.0, 2.0, 4.0, 6.0}) {
        auto g = gradient_decomposition(cat, 0.0, v);
        CHECK(g.grad_R_norm * g.grad_R_norm + g.normal_defect * g.normal_defect ==
              Catch::Approx(1.0).margin(1e-12));
        CHECK(g.normal_defect == Catch::Approx(catenoid_defect(v)).margin(1e-10));
    }
    // Planar ends: the defect decays (0.109 at v=4, below 0.05 by v=6).
    CHECK(gradient_decomposition(cat, 0.0, 4.0).normal_defect ==
          Catch::Approx(0.10859990478583105).margin(1e-10));
    CHECK(gradient_decomposition(cat, 0.0, 6.0).normal_defect <= 0.05);

    CHECK_THROWS_AS(gradient_decomposition(plane, 0.0, 0.0), workbench_error);
}

TEST_CASE("pointwise identity |grad R|^2 + |grad^perp rho|^2 = 1 across the catalog") {
    for (const char* name : {"catenoid", "enneper", "hyperboloid_sheet", "paraboloid"}) {
        auto imm = catalog(name);
        for (int i = 0; i < 100; ++i) {
            const double u = -2.0 + 4.0 * (i % 10) / 9.0;
            const double v = -2.0 + 4.0 * (i / 10) / 9.0;
            if (imm.position(u, v).norm() < 1e-6) continue;
            auto g = gradient_decomposition(imm, u, v);
            CHECK(g.grad_R_norm * g.grad_R_norm + g.normal_defect * g.normal_defect ==
                  Catch::Approx(1.0).margin(1e-10));
        }
    }
}

TEST_CASE("level sets: plane circle, catenoid two ends, helicoid growth") {
    auto plane_mesh = triangulate(catalog("plane"), {-1.5, 1.5, -1.5, 1.5}, 256, 256);
    auto circle = level_set(plane_mesh, 1.0);
    CHECK(circle.components() == 1);
    CHECK(circle.total_length == Catch::Approx(2 * M_PI).epsilon(0.005));

    auto cat_mesh = triangulate(catalog("catenoid"), {0, 2 * M_PI, -3.2, 3.2}, 256, 256);
    auto two = level_set(cat_mesh, 10.0);
    CHECK(two.components() == 2);
    CHECK(two.total_length == Catch::Approx(120.08086896882244).epsilon(0.02));

    auto heli_mesh = triangulate(catalog("helicoid", 1.0), {-11, 11, -11, 11}, 256, 256);
    const double L5 = level_set(heli_mesh, 5.0).total_length;
    const double L10 = level_set(heli_mesh, 10.0).total_length;
    CHECK(L5 >= 2.0 * (2.0 * 5.0));
    CHECK(L10 / L5 >= 2.8);  // superlinear perimeter growth

    CHECK(level_set(plane_mesh, 100.0).components() == 0);  // empty level is valid
}

TEST_CASE("growth curve on the plane: quadratic area, linear perimeter") {
    auto mesh = triangulate(catalog("plane"), {-8.8, 8.8, -8.8, 8.8}, 256, 256);
    std::vector<double> radii;
    for (int r = 1; r <= 8; ++r) radii.push_back(r);
    auto g = growth_curve(mesh, radii);
    for (std::size_t i = 0; i < g.radii.size(); ++i) {
        CHECK(g.area[i] / (g.radii[i] * g.radii[i]) == Catch::Approx(M_PI).epsilon(0.005));
        CHECK(g.perimeter[i] / g.radii[i] == Catch::Approx(2 * M_PI).epsilon(0.005));
        CHECK(g.min_grad_R_outside[i] == Catch::Approx(1.0).margin(1e-9));
        CHECK(std::abs(g.curvature_integral[i]) <= 1e-8);
    }
    auto fit = fit_growth(g, 1.0);
    CHECK(fit.p_area == Catch::Approx(2.0).margin(0.01));
    CHECK(fit.q_perim == Catch::Approx(1.0).margin(0.01));
    CHECK(fit.C1 == Catch::Approx(M_PI).epsilon(0.01));
    CHECK(fit.C0 == Catch::Approx(M_PI).epsilon(0.01));
    CHECK(fit.Ct0 == Catch::Approx(2 * M_PI).epsilon(0.01));
}

TEST_CASE("growth curve on the catenoid matches the quadrature oracles") {
    auto imm = catalog("catenoid");
    auto mesh = triangulate(imm, window_for_radius(imm, 40.0), 256, 256);
    std::vector<double> radii;
    for (const auto& o : kCatenoidArea) radii.push_back(o.r);
    auto g = growth_curve(mesh, radii);
    for (std::size_t i = 0; i < radii.size(); ++i) {
        CHECK(g.area[i] == Catch::Approx(kCatenoidArea[i].value).epsilon(0.02));
        CHECK(g.perimeter[i] == Catch::Approx(kCatenoidLength[i].value).epsilon(0.02));
    }
    // Tail ratios approach the two-planar-ends limits.
    CHECK(g.area.back() / (40.0 * 40.0) == Catch::Approx(2 * M_PI).epsilon(0.05));
    CHECK(g.perimeter.back() / 40.0 == Catch::Approx(4 * M_PI).epsilon(0.05));
    // Catenoid curvature integrals are negative and settle near -4 pi.
    CHECK(g.curvature_integral.back() == Catch::Approx(-4 * M_PI).epsilon(0.01));

    // min |grad R| outside D_r stays away from zero and trends upward.
    for (std::size_t i = 0; i < g.radii.size(); ++i) CHECK(g.min_grad_R_outside[i] > 0.9);
    for (std::size_t i = 1; i < g.radii.size(); ++i)
        CHECK(g.min_grad_R_outside[i] >= g.min_grad_R_outside[i - 1] - 1e-9);
}

TEST_CASE("helicoid growth: cubic area, superlinear perimeter") {
    auto imm = catalog("helicoid", 1.0);
    auto mesh = triangulate(imm, {-33.5, 33.5, -33.5, 33.5}, 256, 256);
    std::vector<double> radii;
    for (const auto& o : kHelicoidArea) radii.push_back(o.r);
    auto g = growth_curve(mesh, radii);
    for (std::size_t i = 0; i < radii.size(); ++i)
        CHECK(g.area[i] == Catch::Approx(kHelicoidArea[i].value).epsilon(0.03));
    auto fit = fit_growth(g, 0.5);
    CHECK(fit.p_area >= 2.7);
    CHECK(fit.p_area <= 3.3);
    const std::size_t n = g.radii.size();
    const double tail_first = g.perimeter[n / 2] / g.radii[n / 2];
    const double tail_last = g.perimeter[n - 1] / g.radii[n - 1];
    CHECK(tail_last / tail_first >= 2.0);
}

TEST_CASE("paraboloid growth: sub-quadratic exponent from the oracle") {
    auto imm = catalog("paraboloid");
    auto mesh = triangulate(imm, window_for_radius(imm, 12.0), 256, 256);
    std::vector<double> radii;
    for (const auto& o : kParaboloidArea) radii.push_back(o.r);
    auto g = growth_curve(mesh, radii);
    for (std::size_t i = 0; i < radii.size(); ++i)
        CHECK(g.area[i] == Catch::Approx(kParaboloidArea[i].value).epsilon(0.02));
    // The area-element quadrature oracle gives exponent ~1.6 on this grid.
    auto fit = fit_growth(g, 0.5);
    CHECK(fit.p_area >= 1.45);
    CHECK(fit.p_area <= 1.75);
}

TEST_CASE("growth curve window truncation") {
    auto mesh = triangulate(catalog("plane"), {-5, 5, -5, 5}, 64, 64);
    auto g = growth_curve(mesh, {3.0, 10.0});
    CHECK(g.truncated);
    CHECK(g.radii == std::vector<double>{3.0});
    CHECK(g.dropped_radii == std::vector<double>{10.0});
    CHECK_THROWS_AS(growth_curve(mesh, {10.0, 20.0}), workbench_error);
}

TEST_CASE("tamedness verdicts across the catalog") {
    // Plane: identically zero.
    {
        auto mesh = triangulate(catalog("plane"), {-22, 22, -22, 22}, 128, 128);
        auto rep = tamedness_estimate(mesh, {4, 8, 12, 16, 20}, 0.3);
        CHECK(rep.verdict == Verdict::tamed);
        CHECK(rep.a_estimate <= 1e-12);
        REQUIRE(rep.t_c.has_value());
        CHECK(*rep.t_c == 4.0);
    }
    // Catenoid: a -> 0, strongly tamed as well.
    {
        auto imm = catalog("catenoid");
        auto mesh = triangulate(imm, window_for_radius(imm, 40.0), 256, 256);
        TamednessOptions opts;
        opts.strong_epsilon = 0.1;
        auto rep = tamedness_estimate(mesh, {4, 8, 12, 16, 20, 24, 28, 32, 36, 40}, 0.7, opts);
        CHECK(rep.verdict == Verdict::tamed);
        CHECK(rep.a_estimate <= 0.05);
        for (std::size_t i = 1; i < rep.a_i.size(); ++i) CHECK(rep.a_i[i] <= rep.a_i[i - 1] + 1e-12);
        REQUIRE(rep.strong.has_value());
        CHECK(rep.strong->tail_sup <= 0.2);
    }
    // Hyperboloid sheet with slope 1/sqrt(2): a == slope.
    {
        auto imm = catalog("hyperboloid_sheet", 1.0 / std::sqrt(2.0));
        auto mesh = triangulate(imm, window_for_radius(imm, 14.0), 256, 256);
        auto rep = tamedness_estimate(mesh, {2, 4, 6, 8, 10, 12, 14}, 0.85);
        CHECK(rep.verdict == Verdict::tamed);
        CHECK(rep.a_estimate == Catch::Approx(1.0 / std::sqrt(2.0)).margin(0.05));
        REQUIRE(rep.t_c.has_value());
    }
    // Helicoid: rho |alpha| is unbounded along the axis.
    {
        auto imm = catalog("helicoid", 1.0);
        auto mesh = triangulate(imm, {-33, 33, -33, 33}, 128, 128);
        auto rep = tamedness_estimate(mesh, {4, 8, 12, 16, 20, 24, 28}, 0.3);
        CHECK(rep.verdict == Verdict::not_tamed);
        CHECK(rep.a_i.back() >= 1.0);
        CHECK_FALSE(rep.t_c.has_value());
    }
    // Paraboloid: rho |alpha| grows like rho/2.
    {
        auto imm = catalog("paraboloid");
        auto mesh = triangulate(imm, window_for_radius(imm, 12.0), 128, 128);
        auto rep = tamedness_estimate(mesh, {2, 4, 6, 8, 10, 12}, 0.3);
        CHECK(rep.verdict == Verdict::not_tamed);
    }
    // Compact sphere: the finite-window functional stays >= 1. The chart
    // boundary next to the pole makes every radius formally truncated.
    {
        auto sph = catalog("sphere", 1.0);
        auto mesh = triangulate(sph, {0, 2 * M_PI, sph.domain.v0, sph.domain.v1}, 128, 128);
        TamednessOptions opts;
        opts.allow_truncated = true;
        auto rep = tamedness_estimate(mesh, {0.5, 1.0, 1.5, 1.9}, 0.3, opts);
        CHECK(rep.verdict == Verdict::not_tamed);
        CHECK(rep.truncated);
    }
}

TEST_CASE("coarea identity residuals") {
    auto plane_mesh = triangulate(catalog("plane"), {-2.5, 2.5, -2.5, 2.5}, 256, 256);
    CHECK(coarea_check(catalog("plane"), plane_mesh, 1.0, 2.0) <= 1e-2);

    auto cat = catalog("catenoid");
    auto cat_mesh = triangulate(cat, window_for_radius(cat, 11.0), 256, 256);
    CHECK(coarea_check(cat, cat_mesh, 5.0, 10.0) <= 2e-2);

    auto sph = catalog("sphere", 1.0);
    auto sph_mesh = triangulate(sph, {0, 2 * M_PI, sph.domain.v0, sph.domain.v1}, 256, 256);
    CHECK(coarea_check(sph, sph_mesh, 0.6, 1.4) <= 2e-2);
}

TEST_CASE("divergence identity residuals") {
    auto plane_mesh = triangulate(catalog("plane"), {-2.5, 2.5, -2.5, 2.5}, 256, 256);
    CHECK(divergence_check(catalog("plane"), plane_mesh, 2.0) <= 1e-2);

    auto cat = catalog("catenoid");
    auto cat_mesh = triangulate(cat, window_for_radius(cat, 11.0), 256, 256);
    CHECK(divergence_check(cat, cat_mesh, 10.0) <= 2e-2);  // minimal: Lap R^2 == 4

    auto par = catalog("paraboloid");
    auto par_mesh = triangulate(par, window_for_radius(par, 7.0), 256, 256);
    CHECK(divergence_check(par, par_mesh, 6.0) <= 3e-2);
}

TEST_CASE("radial flow on the plane: straight rays") {
    auto plane = catalog("plane");
    auto traj = radial_flow(plane, 1.0, 0.0, 9.0, 0.01);
    for (const auto& s : traj.samples) {
        CHECK(s.psi == Catch::Approx(1.0).margin(1e-12));
        CHECK(s.sin_beta <= 1e-9);
        CHECK(s.R == Catch::Approx(1.0 + s.t).margin(1e-9));
    }
    const auto& last = traj.samples.back();
    CHECK(last.u == Catch::Approx(10.0).margin(1e-9));
    CHECK(std::abs(last.v) <= 1e-12);
}

TEST_CASE("radial flow on the catenoid: unit radial speed and step refinement") {
    auto cat = catalog("catenoid");
    auto start = point_on_level(cat, 0.3, 1.2, 2.0);
    CHECK(cat.position(start[0], start[1]).norm() == Catch::Approx(2.0).margin(1e-10));

    auto traj = radial_flow(cat, start[0], start[1], 38.0, 0.01);
    for (const auto& s : traj.samples) {
        CHECK(s.R == Catch::Approx(2.0 + s.t).margin(1e-3));
        CHECK(s.psi * s.psi + s.sin_beta * s.sin_beta == Catch::Approx(1.0).margin(1e-12));
    }
    // Reference integration at step/10 agrees at the endpoint.
    auto ref = radial_flow(cat, start[0], start[1], 38.0, 0.001);
    CHECK(traj.samples.back().v == Catch::Approx(ref.samples.back().v).margin(1e-6));
    CHECK(traj.samples.back().R == Catch::Approx(ref.samples.back().R).margin(1e-6));
}

TEST_CASE("flow angle bound: tamed cases hold, helicoid violates") {
    // Catenoid from r0 = 6 (beyond the compact core for c = 0.3).
    auto cat = catalog("catenoid");
    for (double u0 : {0.0, 1.0, 2.5}) {
        for (double sgn : {1.0, -1.0}) {
            auto start = point_on_level(cat, u0, sgn * 2.0, 6.0);
            auto traj = radial_flow(cat, start[0], start[1], 30.0, 0.01);
            auto res = flow_bound_check(traj, 0.3, 6.0);
            CHECK(res.holds);
        }
    }
    // Hyperboloid sheet, slope tamed below c = 0.8.
    auto hyp = catalog("hyperboloid_sheet", 1.0 / std::sqrt(2.0));
    for (double ang : {0.0, 0.8, 1.9, 3.1}) {
        auto start = point_on_level(hyp, 1.4 * std::cos(ang), 1.4 * std::sin(ang), 2.0);
        auto traj = radial_flow(hyp, start[0], start[1], 16.0, 0.01);
        auto res = flow_bound_check(traj, 0.8, 2.0);
        CHECK(res.holds);
    }
    // Helicoid started near the axis: the bound fails for small c.
    auto heli = catalog("helicoid", 1.0);
    auto start = point_on_level(heli, 5.0, 0.2, 5.0);
    auto traj = radial_flow(heli, start[0], start[1], 25.0, 0.005);
    auto res = flow_bound_check(traj, 0.2, 5.0);
    CHECK_FALSE(res.holds);
    CHECK(res.max_violation > 0.1);
}

TEST_CASE("critical point scan") {
    auto plane_mesh = triangulate(catalog("plane"), {-4, 4, -4, 4}, 128, 128);
    CHECK(critical_point_scan(plane_mesh, 1.0).min_grad_R == Catch::Approx(1.0).margin(1e-12));

    auto cat = catalog("catenoid");
    auto cat_mesh = triangulate(cat, {0, 2 * M_PI, -4, 4}, 128, 128);
    CHECK(critical_point_scan(cat_mesh, 2.0).min_grad_R > 0.9);

    auto sph = catalog("sphere", 1.0);
    auto sph_mesh = triangulate(sph, {0, 2 * M_PI, sph.domain.v0, sph.domain.v1}, 128, 128);
    auto scan = critical_point_scan(sph_mesh, 1.0);
    CHECK(scan.min_grad_R <= 0.05);  // far pole of the tangent sphere is critical
    CHECK(scan.v <= 0.1);
}
