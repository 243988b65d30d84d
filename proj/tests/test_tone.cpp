#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "tamed/tone.hpp"

using namespace tamed;
using namespace tamed::tone;
using tamed::discretize::triangulate;
using tamed::extrinsic::tamedness_estimate;
using tamed::extrinsic::window_for_radius;
using tamed::surface::catalog;

namespace {
constexpr double kLambdaDisk = 5.783185962946785;  // j_{0,1}^2, pre-build shooting oracle
}

TEST_CASE("flat disk eigenvalue within 3 percent at reference resolution") {
    auto mesh = triangulate(catalog("plane"), {-1.1, 1.1, -1.1, 1.1}, 256, 256);
    auto res = dirichlet_lambda1_mesh(mesh, 1.0);
    CHECK(res.lambda1 == Catch::Approx(kLambdaDisk).epsilon(0.03));
    CHECK(res.rayleigh_residual <= 1e-6);
    CHECK(res.component_lambdas.size() == 1);
    // Principal eigenvector keeps one sign on the interior.
    const double mn = res.eigenvector.minCoeff(), mx = res.eigenvector.maxCoeff();
    CHECK(mn * mx > 0.0);
}

TEST_CASE("flat disk scaling: lambda(D_2r) / lambda(D_r) = 1/4") {
    auto m1 = triangulate(catalog("plane"), {-1.1, 1.1, -1.1, 1.1}, 256, 256);
    auto m2 = triangulate(catalog("plane"), {-2.2, 2.2, -2.2, 2.2}, 256, 256);
    const double l1 = dirichlet_lambda1_mesh(m1, 1.0).lambda1;
    const double l2 = dirichlet_lambda1_mesh(m2, 2.0).lambda1;
    CHECK(l2 / l1 == Catch::Approx(0.25).margin(0.02));
}

TEST_CASE("flat disk eigenvalue error halves when resolution doubles") {
    auto err_at = [](int n) {
        auto mesh = triangulate(catalog("plane"), {-1.1, 1.1, -1.1, 1.1}, n, n);
        return std::abs(dirichlet_lambda1_mesh(mesh, 1.0).lambda1 - kLambdaDisk);
    };
    CHECK(err_at(256) <= 0.7 * err_at(128));
}

TEST_CASE("monotonicity under region inclusion on one background mesh") {
    auto mesh = triangulate(catalog("plane"), {-3.3, 3.3, -3.3, 3.3}, 192, 192);
    double prev = std::numeric_limits<double>::infinity();
    for (double r : {1.0, 1.5, 2.0, 2.5, 3.0}) {
        const double lam = dirichlet_lambda1_mesh(mesh, r).lambda1;
        CHECK(lam < prev);
        prev = lam;
    }
}

TEST_CASE("catenoid extrinsic ball: positive eigenvalue, annular region") {
    auto cat = catalog("catenoid");
    auto mesh = triangulate(cat, window_for_radius(cat, 11.0), 192, 192);
    auto res = dirichlet_lambda1_mesh(mesh, 10.0);
    CHECK(res.lambda1 > 0.0);
    CHECK(res.lambda1 < 1.0);
    CHECK(res.rayleigh_residual <= 1e-6);
}

TEST_CASE("Barta sandwich: transplant equality case and generic trials") {
    auto mesh = triangulate(catalog("plane"), {-1.1, 1.1, -1.1, 1.1}, 192, 192);
    const auto ef = comparison::dirichlet_eigen_ball(2, 1.0);

    auto eq = barta_sandwich_check(mesh, 1.0,
                                   [&](double, double, double R) { return ef.v_at(R); });
    CHECK(eq.inf_ratio <= eq.lambda1_mesh * (1 + 1e-9));
    CHECK(eq.sup_ratio >= eq.lambda1_mesh * (1 - 1e-9));
    CHECK(eq.inf_ratio == Catch::Approx(eq.lambda1_mesh).epsilon(0.05));
    CHECK(eq.sup_ratio == Catch::Approx(eq.lambda1_mesh).epsilon(0.05));

    auto parab = barta_sandwich_check(mesh, 1.0, [](double, double, double R) {
        return 1.0 - R * R;
    });
    CHECK(parab.inf_ratio <= parab.lambda1_mesh * (1 + 1e-9));
    CHECK(parab.sup_ratio >= parab.lambda1_mesh * (1 - 1e-9));

    // Random positive bumps, still vanishing at the clamped boundary.
    std::mt19937 rng(2024);
    std::uniform_real_distribution<double> amp(0.05, 0.45), freq(1.0, 3.0);
    for (int k = 0; k < 5; ++k) {
        const double a = amp(rng), fu = freq(rng), fv = freq(rng);
        auto res = barta_sandwich_check(mesh, 1.0, [&](double u, double v, double R) {
            return (1.0 - R * R) * (1.0 + a * std::sin(fu * u + 0.3) * std::sin(fv * v - 0.2));
        });
        CHECK(res.inf_ratio <= res.lambda1_mesh * (1 + 1e-9));
        CHECK(res.sup_ratio >= res.lambda1_mesh * (1 - 1e-9));
    }

    CHECK_THROWS_AS(barta_sandwich_check(
                        mesh, 1.0, [](double, double, double R) { return std::cos(4.0 * R); }),
                    workbench_error);
}

TEST_CASE("Barta sandwich with the transplanted profile on the catenoid") {
    auto cat = catalog("catenoid");
    auto mesh = triangulate(cat, window_for_radius(cat, 11.0), 192, 192);
    const auto ef = comparison::dirichlet_eigen_ball(2, 10.0);
    auto res = barta_sandwich_check(mesh, 10.0,
                                    [&](double, double, double R) { return ef.v_at(R); });
    CHECK(res.inf_ratio <= res.lambda1_mesh * (1 + 1e-9));
    CHECK(res.sup_ratio >= res.lambda1_mesh * (1 - 1e-9));
}

TEST_CASE("transplant bound on the plane reproduces the l = 6 arithmetic") {
    auto mesh = triangulate(catalog("plane"), {-22, 22, -22, 22}, 128, 128);
    auto tamed_rep = tamedness_estimate(mesh, {2, 4, 8, 12, 16, 20}, 0.1);
    REQUIRE(tamed_rep.verdict == extrinsic::Verdict::tamed);
    REQUIRE(tamed_rep.t_c.has_value());
    CHECK(*tamed_rep.t_c == 2.0);

    auto est = barta_transplant_bound(2, tamed_rep, 0.1, mesh, 8.0);
    CHECK(est.l_used == 6);  // ceil((4 + 0.1)/(1 - 0.01)) + 1
    CHECK(est.H0 == 0.0);
    const auto ef = comparison::dirichlet_eigen_ball(6, 8.0);
    CHECK(est.prefactor == Catch::Approx(1.0 + 4.0 / ef.v_at(2.0)).epsilon(1e-6));
    CHECK(est.lambda1_barta == Catch::Approx(est.prefactor * ef.lambda1).epsilon(1e-9));

    // lambda_1(r) scaling carries to the bound; v(t_c) grows with r, so the
    // ratio sits at or below 1/4.
    auto est2 = barta_transplant_bound(2, tamed_rep, 0.1, mesh, 16.0);
    const double ratio = est2.lambda1_barta / est.lambda1_barta;
    CHECK(ratio <= 0.25 + 1e-9);
    CHECK(ratio >= 0.15);
}

TEST_CASE("transplant bound hypothesis checks") {
    auto heli = catalog("helicoid", 1.0);
    auto hmesh = triangulate(heli, {-33, 33, -33, 33}, 96, 96);
    auto bad = tamedness_estimate(hmesh, {4, 8, 12, 16, 20, 24, 28}, 0.3);
    CHECK_THROWS_AS(barta_transplant_bound(2, bad, 0.3, hmesh, 20.0), workbench_error);

    auto mesh = triangulate(catalog("plane"), {-22, 22, -22, 22}, 96, 96);
    auto rep = tamedness_estimate(mesh, {2, 4, 8, 12, 16, 20}, 0.1);
    CHECK_THROWS_AS(barta_transplant_bound(2, rep, 0.1, mesh, 1.0), workbench_error);
}

TEST_CASE("tone decay on the plane: inverse-square law") {
    auto mesh = triangulate(catalog("plane"), {-18, 18, -18, 18}, 128, 128);
    auto tamed_rep = tamedness_estimate(mesh, {2, 4, 8, 12, 16}, 0.1);
    auto rep = tone_decay_report(catalog("plane"), {4, 8, 16}, tamed_rep, 0.1, 192);
    REQUIRE(rep.estimates.size() == 3);
    for (const auto& est : rep.estimates) {
        const double exact = kLambdaDisk / (est.r * est.r);
        CHECK(est.lambda1_mesh == Catch::Approx(exact).epsilon(0.03));
        CHECK(est.lambda1_barta >= est.lambda1_mesh);
    }
    CHECK(rep.fitted_exponent == Catch::Approx(-2.0).margin(0.1));
}
