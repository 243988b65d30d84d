#pragma once

// Total curvature, Gauss-Bonnet on extrinsic annuli, the geodesic-curvature
// sandwich, and the Chern-Osserman verification pipeline.

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

#include "tamed/discretize.hpp"
#include "tamed/extrinsic.hpp"
#include "tamed/surface.hpp"
#include "tamed/types.hpp"

namespace tamed::integrals {

using discretize::SampledSurface;
using extrinsic::GrowthCurve;
using extrinsic::TamednessReport;
using surface::ParametricImmersion;

enum class CurvatureVerdict { finite, minus_infinity, plus_infinity, oscillating };

inline const char* to_string(CurvatureVerdict v) {
    switch (v) {
        case CurvatureVerdict::finite: return "finite";
        case CurvatureVerdict::minus_infinity: return "minus_infinity";
        case CurvatureVerdict::plus_infinity: return "plus_infinity";
        default: return "oscillating";
    }
}

struct TotalCurvature {
    std::vector<double> sequence;  // int_{D_r} K dA per radius
    CurvatureVerdict verdict = CurvatureVerdict::oscillating;
    double extrapolated = 0;       // tail average, meaningful for finite verdicts
};

inline TotalCurvature total_curvature(const GrowthCurve& growth, double finite_tol = 0.08) {
    const auto& seq = growth.curvature_integral;
    if (seq.size() < 4) fail(errc::bad_argument, "total_curvature: too few radii");
    TotalCurvature out;
    out.sequence = seq;

    const std::size_t tail = std::max<std::size_t>(3, seq.size() / 3);
    const std::size_t from = seq.size() - tail;
    double lo = seq[from], hi = seq[from];
    for (std::size_t i = from; i < seq.size(); ++i) {
        lo = std::min(lo, seq[i]);
        hi = std::max(hi, seq[i]);
    }
    const double scale = std::abs(seq.back()) + 1.0;
    if ((hi - lo) / scale <= finite_tol) {
        out.verdict = CurvatureVerdict::finite;
        double acc = 0;
        const std::size_t navg = std::min<std::size_t>(3, tail);
        for (std::size_t i = seq.size() - navg; i < seq.size(); ++i) acc += seq[i];
        out.extrapolated = acc / navg;
        return out;
    }

    bool decreasing = true, increasing = true;
    for (std::size_t i = from + 1; i < seq.size(); ++i) {
        decreasing &= seq[i] < seq[i - 1];
        increasing &= seq[i] > seq[i - 1];
    }
    if (decreasing)
        out.verdict = CurvatureVerdict::minus_infinity;
    else if (increasing)
        out.verdict = CurvatureVerdict::plus_infinity;
    else
        out.verdict = CurvatureVerdict::oscillating;
    out.extrapolated = seq.back();
    return out;
}

struct KgSample {
    double u = 0, v = 0;
    double kg = 0;
    double length = 0;  // weight of this sample (segment length)
};

namespace detail {

// k_g of the extrinsic sphere dD_r at one parameter point, by the radial
// formula (1/|grad R|)(1/r + <grad^perp rho, alpha(e, e)>) with e the unit
// level-tangent.
inline double kg_radial_formula(const ParametricImmersion& imm, double u, double v, double r) {
    const surface::PointGeometry p = surface::point_geometry(imm, u, v);
    const surface::Jet2 jet = imm.jet(u, v);
    const double R = p.position.norm();
    const Vec ur = p.position / R;
    const double det = p.det_g();
    const double Ru = ur.dot(jet.Fu), Rv = ur.dot(jet.Fv);  // dR covariant components
    const double cu = (p.g22 * Ru - p.g12 * Rv) / det;
    const double cv = (-p.g12 * Ru + p.g11 * Rv) / det;
    const double psi = std::sqrt(std::max(cu * Ru + cv * Rv, 0.0));
    if (psi < 1e-9) fail(errc::critical_point, "kg: |grad R| vanished at a sample");
    const Vec nperp = ur - cu * jet.Fu - cv * jet.Fv;

    // Level-curve direction: annihilates dR.
    double eu = -Rv, ev = Ru;
    const double elen2 = eu * eu * p.g11 + 2.0 * eu * ev * p.g12 + ev * ev * p.g22;
    const double inv = 1.0 / std::sqrt(elen2);
    eu *= inv;
    ev *= inv;
    const Vec aee = eu * eu * p.alpha11 + 2.0 * eu * ev * p.alpha12 + ev * ev * p.alpha22;
    return (1.0 / psi) * (1.0 / r + nperp.dot(aee));
}

// Independent curve-based evaluator: second derivative of the arclength
// parametrized level curve, projected on the outward conormal.
inline double kg_curve_based(const ParametricImmersion& imm, double u, double v, double r,
                             double ds) {
    auto level_dir = [&](double uu, double vv) {
        const surface::Jet2 jet = imm.jet(uu, vv);
        const Vec pos = jet.F;
        const Vec ur = pos / pos.norm();
        const double Ru = ur.dot(jet.Fu), Rv = ur.dot(jet.Fv);
        const double g11 = jet.Fu.squaredNorm(), g12 = jet.Fu.dot(jet.Fv),
                     g22 = jet.Fv.squaredNorm();
        double eu = -Rv, ev = Ru;
        const double n = std::sqrt(eu * eu * g11 + 2 * eu * ev * g12 + ev * ev * g22);
        return std::array<double, 2>{eu / n, ev / n};
    };
    auto step_along = [&](double sgn) {
        auto d = level_dir(u, v);
        double uu = u + sgn * ds * d[0];
        double vv = v + sgn * ds * d[1];
        auto on = extrinsic::point_on_level(imm, uu, vv, r);
        return imm.position(on[0], on[1]);
    };
    const Vec x0 = imm.position(u, v);
    const Vec xp = step_along(1.0), xm = step_along(-1.0);
    const Vec xdd = (xp - 2.0 * x0 + xm) / (ds * ds);

    const auto rd = extrinsic::detail::radial_data(imm, u, v);
    const Vec conormal = (rd.cu * rd.jet.Fu + rd.cv * rd.jet.Fv) / rd.psi;
    return -xdd.dot(conormal);
}

}  // namespace detail

inline std::vector<KgSample> geodesic_curvature_level(const ParametricImmersion& imm,
                                                      const SampledSurface& mesh, double r,
                                                      int max_samples = 512) {
    const extrinsic::LevelSet ls = extrinsic::level_set(mesh, r);
    std::vector<KgSample> out;
    const int stride = std::max<std::size_t>(1, ls.segments.size() / max_samples);
    for (std::size_t i = 0; i < ls.segments.size(); i += stride) {
        const auto& seg = ls.segments[i];
        out.push_back({seg.u, seg.v, detail::kg_radial_formula(imm, seg.u, seg.v, ls.r),
                       seg.length});
    }
    return out;
}

struct KgSandwich {
    bool holds = false;
    double lower = 0, upper = 0;
    double min_kg = 0, max_kg = 0;
};

inline KgSandwich kg_sandwich_check(const ParametricImmersion& imm, const SampledSurface& mesh,
                                    double r, double c, const comparison::RadiusFn& delta,
                                    double tol = 1e-9) {
    const auto lam = comparison::lambda_c(c, delta, r);
    if (!lam.entered)
        fail(errc::hypothesis_violation, "kg_sandwich_check: Lambda_c >= 1 at this radius");
    const double L = lam.value;
    KgSandwich out;
    out.lower = (1.0 - c * L) / r;
    out.upper = (1.0 + c * L) / (r * std::sqrt(1.0 - L * L));
    const auto samples = geodesic_curvature_level(imm, mesh, r);
    if (samples.empty()) fail(errc::empty_range, "kg_sandwich_check: empty level set");
    out.min_kg = out.max_kg = samples.front().kg;
    for (const auto& s : samples) {
        out.min_kg = std::min(out.min_kg, s.kg);
        out.max_kg = std::max(out.max_kg, s.kg);
    }
    out.holds = out.min_kg >= out.lower - tol && out.max_kg <= out.upper + tol;
    return out;
}

// V - E + F of the sub-complex of triangles selected by `keep`.
template <typename TriPred>
int euler_characteristic(const SampledSurface& m, TriPred&& keep) {
    std::vector<std::pair<int, int>> edges;
    std::vector<int> verts;
    long faces = 0;
    for (std::size_t k = 0; k < m.tris.size(); ++k) {
        if (!keep(k)) continue;
        ++faces;
        const auto& t = m.tris[k];
        for (int e = 0; e < 3; ++e) {
            int a = t[e], b = t[(e + 1) % 3];
            if (a > b) std::swap(a, b);
            edges.emplace_back(a, b);
            verts.push_back(t[e]);
        }
    }
    if (faces == 0) fail(errc::empty_range, "euler_characteristic: empty region");
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
    std::sort(verts.begin(), verts.end());
    verts.erase(std::unique(verts.begin(), verts.end()), verts.end());
    return static_cast<int>(verts.size()) - static_cast<int>(edges.size()) +
           static_cast<int>(faces);
}

inline int euler_characteristic_disk(const SampledSurface& m, double r) {
    return euler_characteristic(m, [&](std::size_t k) {
        const auto& t = m.tris[k];
        return m.verts[t[0]].R <= r && m.verts[t[1]].R <= r && m.verts[t[2]].R <= r;
    });
}

struct AnnulusReport {
    double r1 = 0, r2 = 0;
    double curvature_integral = 0;
    double kg_inner = 0, kg_outer = 0;  // integrals of k_g over the two boundaries
    double gb_residual = 0;             // |int K - (kg_inner - kg_outer)|
    int euler_char = 0;
    bool critical_warning = false;
};

inline AnnulusReport gauss_bonnet_annulus(const ParametricImmersion& imm,
                                          const SampledSurface& mesh, double r1, double r2) {
    if (!(r1 < r2)) fail(errc::bad_argument, "gauss_bonnet_annulus: need r1 < r2");
    AnnulusReport rep;
    rep.r1 = r1;
    rep.r2 = r2;

    std::vector<double> kfield(mesh.verts.size()), phi(mesh.verts.size());
    for (std::size_t i = 0; i < mesh.verts.size(); ++i) kfield[i] = mesh.verts[i].K;
    auto intK_disk = [&](double r) {
        for (std::size_t i = 0; i < mesh.verts.size(); ++i) phi[i] = mesh.verts[i].R - r;
        return discretize::region_integral_level(mesh, kfield, phi);
    };
    rep.curvature_integral = intK_disk(r2) - intK_disk(r1);

    auto kg_integral = [&](double r) {
        double acc = 0;
        for (const auto& s : geodesic_curvature_level(imm, mesh, r, 1 << 20))
            acc += s.kg * s.length;
        return acc;
    };
    rep.kg_inner = kg_integral(r1);
    rep.kg_outer = kg_integral(r2);
    rep.gb_residual = std::abs(rep.curvature_integral - (rep.kg_inner - rep.kg_outer));

    rep.euler_char = euler_characteristic(mesh, [&](std::size_t k) {
        const auto& t = mesh.tris[k];
        for (int e = 0; e < 3; ++e) {
            const double R = mesh.verts[t[e]].R;
            if (R < r1 || R > r2) return false;
        }
        return true;
    });

    for (const auto& vd : mesh.verts)
        if (vd.R > r1 && vd.R < r2 && vd.grad_R < 1e-3) {
            rep.critical_warning = true;
            break;
        }
    return rep;
}

enum class L2Verdict { finite, infinite };

struct AlphaL2 {
    std::vector<double> sequence;
    L2Verdict verdict = L2Verdict::finite;
};

inline AlphaL2 alpha_l2_integral(const SampledSurface& mesh, const std::vector<double>& radii,
                                 double finite_tol = 0.05) {
    AlphaL2 out;
    std::vector<double> field(mesh.verts.size()), phi(mesh.verts.size());
    for (std::size_t i = 0; i < mesh.verts.size(); ++i)
        field[i] = mesh.verts[i].alpha_norm * mesh.verts[i].alpha_norm;
    for (double r : radii) {
        for (std::size_t i = 0; i < mesh.verts.size(); ++i) phi[i] = mesh.verts[i].R - r;
        out.sequence.push_back(discretize::region_integral_level(mesh, field, phi));
    }
    const std::size_t n = out.sequence.size();
    const std::size_t tail = std::max<std::size_t>(2, n / 3);
    const double last = out.sequence.back();
    const double first_tail = out.sequence[n - tail];
    out.verdict = (last - first_tail) / (std::abs(last) + 1.0) <= finite_tol
                      ? L2Verdict::finite
                      : L2Verdict::infinite;
    return out;
}

struct WhiteCheck {
    long nearest_multiple = 0;
    double residual = 0;
};

inline WhiteCheck white_multiple_check(double total_curvature_value) {
    WhiteCheck out;
    out.nearest_multiple = std::llround(total_curvature_value / (2.0 * M_PI));
    out.residual = std::abs(total_curvature_value - 2.0 * M_PI * out.nearest_multiple);
    return out;
}

// Ends counted as connected components of the largest-radius level set.
inline int count_ends(const SampledSurface& mesh, double r) {
    return extrinsic::level_set(mesh, r).components();
}

struct ChernOssermanOptions {
    double slack = 0.05;
    double tail_fraction = 0.5;
    bool assume_tamed = false;  // run the sandwich even without a tamed verdict
};

struct ChernOssermanReport {
    int chi = 0;
    int chi_mesh = 0;
    double total_curvature = 0;
    double middle = 0;       // 2 pi chi - int K
    double lower = 0;        // (1 - a^2) * Ct0
    double upper = 0;        // tail value of A(D_t)/(t^2/2)
    double shiohama = 0;     // intrinsic-ball ratio at the largest safe radius
    long white_nearest = 0;
    double white_residual = 0;
    double slack = 0.05;
    double a_estimate = 0;
    bool sandwich_ok = false;
    bool shiohama_ok = false;
};

inline ChernOssermanReport chern_osserman_check(const ParametricImmersion& imm, int chi,
                                                const GrowthCurve& growth,
                                                const TamednessReport& tamed,
                                                const SampledSurface& mesh,
                                                const ChernOssermanOptions& opts = {}) {
    const TotalCurvature tc = total_curvature(growth);
    if (tc.verdict != CurvatureVerdict::finite)
        fail(errc::hypothesis_violation,
             "chern_osserman_check: hypothesis failed: total curvature verdict is not finite");
    if (tamed.verdict != extrinsic::Verdict::tamed && !opts.assume_tamed)
        fail(errc::hypothesis_violation,
             "chern_osserman_check: hypothesis failed: tamed verdict not established");

    ChernOssermanReport rep;
    rep.chi = chi;
    rep.slack = opts.slack;
    rep.total_curvature = tc.extrapolated;
    rep.middle = 2.0 * M_PI * chi - tc.extrapolated;
    rep.a_estimate = std::min(tamed.a_estimate, 1.0);

    const auto fit = extrinsic::fit_growth(growth, opts.tail_fraction);
    rep.lower = (1.0 - rep.a_estimate * rep.a_estimate) * fit.Ct0;
    const double r_last = growth.radii.back();
    rep.upper = growth.area.back() / (0.5 * r_last * r_last);

    // Shiohama limit: intrinsic-ball area ratio at the largest radius the
    // window supports.
    const auto field = discretize::intrinsic_distance(mesh, mesh.basepoint_vertex());
    double rho_safe = std::numeric_limits<double>::infinity();
    for (int vid = 0; vid < static_cast<int>(mesh.verts.size()); ++vid)
        if (mesh.on_window_boundary(vid)) rho_safe = std::min(rho_safe, field.rho[vid]);
    const double t = 0.95 * rho_safe;
    std::vector<double> phi(mesh.verts.size());
    for (std::size_t i = 0; i < mesh.verts.size(); ++i) phi[i] = field.rho[i] - t;
    rep.shiohama = discretize::region_area_level(mesh, phi) / (0.5 * t * t);

    const auto white = white_multiple_check(tc.extrapolated);
    rep.white_nearest = white.nearest_multiple;
    rep.white_residual = white.residual;

    rep.chi_mesh = euler_characteristic_disk(mesh, r_last);
    rep.sandwich_ok = rep.lower <= rep.middle * (1.0 + opts.slack) + 1e-12 &&
                      rep.middle <= rep.upper * (1.0 + opts.slack) + 1e-12;
    rep.shiohama_ok = std::abs(rep.shiohama - rep.middle) <= 0.1 * std::abs(rep.middle);
    return rep;
}

}  // namespace tamed::integrals
