#pragma once

// Everything built on the extrinsic distance R = |F|: the gradient split,
// level-set extraction, area/perimeter growth curves, tamedness estimation,
// coarea and divergence identities, and the radial flow with its angle bound.

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "tamed/comparison.hpp"
#include "tamed/discretize.hpp"
#include "tamed/surface.hpp"
#include "tamed/types.hpp"

namespace tamed::extrinsic {

using discretize::SampledSurface;
using discretize::Window;
using surface::ParametricImmersion;

struct GradientSplit {
    double grad_R_norm = 0;
    double normal_defect = 0;
};

namespace detail {

// Contravariant components of grad R in the chart, together with |grad R|,
// the defect and R itself.
struct RadialData {
    double R = 0;
    double cu = 0, cv = 0;  // parameter components of grad R
    double psi = 0;         // |grad R|
    double defect = 0;
    surface::Jet2 jet;
};

inline RadialData radial_data(const ParametricImmersion& imm, double u, double v) {
    RadialData d;
    d.jet = imm.jet(u, v);
    d.R = d.jet.F.norm();
    if (d.R <= 1e-14) return d;
    const Vec ur = d.jet.F / d.R;
    const double g11 = d.jet.Fu.squaredNorm();
    const double g12 = d.jet.Fu.dot(d.jet.Fv);
    const double g22 = d.jet.Fv.squaredNorm();
    const double det = g11 * g22 - g12 * g12;
    const double bu = ur.dot(d.jet.Fu), bv = ur.dot(d.jet.Fv);
    d.cu = (g22 * bu - g12 * bv) / det;
    d.cv = (-g12 * bu + g11 * bv) / det;
    const double psi2 = d.cu * bu + d.cv * bv;
    d.psi = std::sqrt(std::clamp(psi2, 0.0, 1.0));
    d.defect = (ur - d.cu * d.jet.Fu - d.cv * d.jet.Fv).norm();
    return d;
}

}  // namespace detail

inline GradientSplit gradient_decomposition(const ParametricImmersion& imm, double u, double v,
                                            double pole_tol = 1e-9) {
    const auto d = detail::radial_data(imm, u, v);
    if (d.R <= pole_tol) fail(errc::pole_neighborhood, "gradient_decomposition: pole neighborhood");
    return {d.psi, d.defect};
}

struct LevelSegment {
    double u = 0, v = 0;   // parameter midpoint
    double length = 0;     // ambient chord length
    int polyline = -1;     // owning component
};

struct LevelSet {
    double r = 0;          // possibly nudged radius actually used
    bool nudged = false;
    std::vector<std::vector<std::array<double, 2>>> polylines;  // parameter points
    std::vector<LevelSegment> segments;
    double total_length = 0;

    int components() const { return static_cast<int>(polylines.size()); }
};

// Marching-triangles contouring of R - r over the sampled mesh. A radius that
// passes within tolerance of a vertex value is nudged by +1e-6 r.
inline LevelSet level_set(const SampledSurface& m, double r, double nudge_rel = 1e-6) {
    LevelSet out;
    out.r = r;
    for (int attempt = 0; attempt < 4; ++attempt) {
        bool clash = false;
        for (const auto& vd : m.verts)
            if (std::abs(vd.R - out.r) < 1e-12 * std::max(1.0, out.r)) {
                clash = true;
                break;
            }
        if (!clash) break;
        out.r *= 1.0 + nudge_rel;
        out.nudged = true;
    }

    struct Crossing {
        double u, v;
        Vec pos;
    };
    const double period = m.window.u1 - m.window.u0;
    auto cross_point = [&](int a, int b) -> Crossing {
        const auto& va = m.verts[a];
        const auto& vb = m.verts[b];
        const double fa = va.R - out.r, fb = vb.R - out.r;
        const double s = fa / (fa - fb);
        double ua = va.u, ub = vb.u;
        if (m.periodic_u && std::abs(ua - ub) > 0.5 * period) (ua < ub ? ua : ub) += period;
        Crossing c;
        c.u = (1.0 - s) * ua + s * ub;
        c.v = (1.0 - s) * va.v + s * vb.v;
        c.pos = (1.0 - s) * va.pos + s * vb.pos;
        return c;
    };

    // Per-triangle segments keyed by their crossing edges.
    struct Seg {
        long e0, e1;
        Crossing p0, p1;
    };
    std::vector<Seg> segs;
    auto edge_key = [&](int a, int b) {
        if (a > b) std::swap(a, b);
        return static_cast<long>(a) * static_cast<long>(m.verts.size()) + b;
    };
    for (const auto& t : m.tris) {
        int hit = 0;
        long keys[3];
        Crossing pts[3];
        for (int e = 0; e < 3; ++e) {
            const int a = t[e], b = t[(e + 1) % 3];
            const bool ia = m.verts[a].R <= out.r, ib = m.verts[b].R <= out.r;
            if (ia != ib) {
                keys[hit] = edge_key(a, b);
                pts[hit] = cross_point(a, b);
                ++hit;
            }
        }
        if (hit == 2) segs.push_back({keys[0], keys[1], pts[0], pts[1]});
    }

    // Chain segments into polylines via shared crossing edges.
    std::map<long, std::vector<int>> by_edge;
    for (int i = 0; i < static_cast<int>(segs.size()); ++i) {
        by_edge[segs[i].e0].push_back(i);
        by_edge[segs[i].e1].push_back(i);
    }
    std::vector<char> used(segs.size(), 0);
    for (int start = 0; start < static_cast<int>(segs.size()); ++start) {
        if (used[start]) continue;
        // Walk forward from the start segment.
        std::vector<int> chain{start};
        used[start] = 1;
        long head = segs[start].e1, tail = segs[start].e0;
        for (int dir = 0; dir < 2; ++dir) {
            long at = dir == 0 ? head : tail;
            while (true) {
                int next = -1;
                for (int cand : by_edge[at])
                    if (!used[cand]) {
                        next = cand;
                        break;
                    }
                if (next < 0) break;
                used[next] = 1;
                if (dir == 0)
                    chain.push_back(next);
                else
                    chain.insert(chain.begin(), next);
                at = segs[next].e0 == at ? segs[next].e1 : segs[next].e0;
            }
        }
        std::vector<std::array<double, 2>> poly;
        const int comp = static_cast<int>(out.polylines.size());
        for (int idx : chain) {
            const auto& s = segs[idx];
            LevelSegment ls;
            ls.u = 0.5 * (s.p0.u + s.p1.u);
            ls.v = 0.5 * (s.p0.v + s.p1.v);
            ls.length = (s.p0.pos - s.p1.pos).norm();
            ls.polyline = comp;
            out.total_length += ls.length;
            out.segments.push_back(ls);
            poly.push_back({s.p0.u, s.p0.v});
        }
        if (!chain.empty()) {
            const auto& last = segs[chain.back()];
            poly.push_back({last.p1.u, last.p1.v});
            out.polylines.push_back(std::move(poly));
        }
    }
    return out;
}

struct GrowthCurve {
    std::vector<double> radii;
    std::vector<double> area;
    std::vector<double> perimeter;
    std::vector<double> curvature_integral;
    std::vector<double> min_grad_R_outside;
    bool truncated = false;               // some requested radii exceeded the window
    std::vector<double> dropped_radii;
};

inline GrowthCurve growth_curve(const SampledSurface& m, const std::vector<double>& radii) {
    GrowthCurve g;
    const double safe = m.max_safe_radius();
    for (double r : radii) {
        if (r > safe) {
            g.truncated = true;
            g.dropped_radii.push_back(r);
            continue;
        }
        g.radii.push_back(r);
    }
    if (g.radii.empty())
        fail(errc::window_truncation, "growth_curve: window truncation (no radius fits the window)");

    std::vector<double> phi(m.verts.size());
    std::vector<double> kfield(m.verts.size());
    for (std::size_t i = 0; i < m.verts.size(); ++i) kfield[i] = m.verts[i].K;
    for (double r : g.radii) {
        for (std::size_t i = 0; i < m.verts.size(); ++i) phi[i] = m.verts[i].R - r;
        g.area.push_back(discretize::region_area_level(m, phi));
        g.perimeter.push_back(level_set(m, r).total_length);
        g.curvature_integral.push_back(discretize::region_integral_level(m, kfield, phi));
        double mn = 1.0;
        for (const auto& vd : m.verts)
            if (vd.R > r) mn = std::min(mn, vd.grad_R);
        g.min_grad_R_outside.push_back(mn);
    }
    return g;
}

inline GrowthCurve growth_curve(const ParametricImmersion& imm, const Window& window,
                                int resolution, const std::vector<double>& radii) {
    return growth_curve(discretize::triangulate(imm, window, resolution, resolution), radii);
}

struct GrowthFit {
    double p_area = 0, C1 = 0, C0 = 0;
    double q_perim = 0, Ct1 = 0, Ct0 = 0;
};

inline GrowthFit fit_growth(const GrowthCurve& g, double tail_fraction) {
    const std::size_t n = g.radii.size();
    const std::size_t tail =
        std::max<std::size_t>(4, static_cast<std::size_t>(std::ceil(n * tail_fraction)));
    if (tail > n) fail(errc::bad_argument, "fit_growth: need >= 4 tail points");
    const std::size_t from = n - tail;
    std::vector<double> lr, la, lp;
    GrowthFit fit;
    fit.C1 = fit.Ct1 = 0.0;
    fit.C0 = fit.Ct0 = std::numeric_limits<double>::infinity();
    for (std::size_t i = from; i < n; ++i) {
        if (!(g.area[i] > 0.0) || !(g.perimeter[i] > 0.0))
            fail(errc::bad_argument, "fit_growth: non-positive tail values");
        lr.push_back(std::log(g.radii[i]));
        la.push_back(std::log(g.area[i]));
        lp.push_back(std::log(g.perimeter[i]));
        fit.C1 = std::max(fit.C1, g.area[i] / (g.radii[i] * g.radii[i]));
        fit.C0 = std::min(fit.C0, g.area[i] / (g.radii[i] * g.radii[i]));
        fit.Ct1 = std::max(fit.Ct1, g.perimeter[i] / g.radii[i]);
        fit.Ct0 = std::min(fit.Ct0, g.perimeter[i] / g.radii[i]);
    }
    fit.p_area = num::least_squares(lr, la).slope;
    fit.q_perim = num::least_squares(lr, lp).slope;
    return fit;
}

enum class Verdict { tamed, not_tamed, inconclusive };

inline const char* to_string(Verdict v) {
    switch (v) {
        case Verdict::tamed: return "tamed";
        case Verdict::not_tamed: return "not_tamed";
        default: return "inconclusive";
    }
}

struct StrongTamedness {
    double epsilon = 0;
    double tail_sup = 0;
};

struct TamednessReport {
    std::vector<double> exhaustion_radii;
    std::vector<double> a_i;
    double a_estimate = 0;
    Verdict verdict = Verdict::inconclusive;
    std::optional<double> t_c;        // first radius with tail sup < c
    double c = 0;                      // the requested c
    std::optional<StrongTamedness> strong;
    bool truncated = false;
    bool exhausted_window = false;     // some tail sets had no sample points
    double slack = 0.05;
};

struct TamednessOptions {
    double slack = 0.05;
    std::optional<double> strong_epsilon;
    // Keep radii beyond the window-safe bound (compact surfaces whose chart
    // boundary sits next to the pole); the report still flags truncation.
    bool allow_truncated = false;
};

inline TamednessReport tamedness_estimate(const SampledSurface& m,
                                          const std::vector<double>& exhaustion_radii, double c,
                                          const TamednessOptions& opts = {}) {
    if (!(c > 0.0 && c < 1.0)) fail(errc::bad_argument, "tamedness_estimate: c must lie in (0,1)");
    TamednessReport rep;
    rep.c = c;
    rep.slack = opts.slack;
    const double safe = m.max_safe_radius();
    for (double r : exhaustion_radii) {
        if (r > safe) {
            rep.truncated = true;
            if (!opts.allow_truncated) continue;
        }
        rep.exhaustion_radii.push_back(r);
    }
    if (rep.exhaustion_radii.empty())
        fail(errc::window_truncation, "tamedness_estimate: window truncation");

    const auto field = discretize::intrinsic_distance(m, m.basepoint_vertex());
    std::vector<double> prod(m.verts.size());
    for (std::size_t i = 0; i < m.verts.size(); ++i) prod[i] = field.rho[i] * m.verts[i].alpha_norm;

    for (double r : rep.exhaustion_radii) {
        double sup = 0;
        bool any = false;
        for (std::size_t i = 0; i < m.verts.size(); ++i)
            if (m.verts[i].R > r) {
                sup = std::max(sup, prod[i]);
                any = true;
            }
        if (!any) rep.exhausted_window = true;
        rep.a_i.push_back(sup);
        if (!rep.t_c && sup < c) rep.t_c = r;
    }
    rep.a_estimate = rep.a_i.back();

    const std::size_t n = rep.a_i.size();
    const std::size_t third = (n + 2) / 3, half = (n + 1) / 2;
    bool tail_below = true, tail_at_least_one = true;
    for (std::size_t i = n - third; i < n; ++i) tail_below &= rep.a_i[i] < 1.0 - opts.slack;
    for (std::size_t i = n - half; i < n; ++i) tail_at_least_one &= rep.a_i[i] >= 1.0;
    if (rep.exhausted_window)
        rep.verdict = Verdict::inconclusive;  // exhaustion ran out of surface (compact case)
    else if (tail_below)
        rep.verdict = Verdict::tamed;
    else if (tail_at_least_one)
        rep.verdict = Verdict::not_tamed;
    else
        rep.verdict = Verdict::inconclusive;

    if (opts.strong_epsilon) {
        StrongTamedness st;
        st.epsilon = *opts.strong_epsilon;
        const double r_last = rep.exhaustion_radii.back();
        for (std::size_t i = 0; i < m.verts.size(); ++i)
            if (m.verts[i].R > r_last)
                st.tail_sup = std::max(
                    st.tail_sup, std::pow(field.rho[i], 1.0 + st.epsilon) * m.verts[i].alpha_norm);
        rep.strong = st;
    }
    return rep;
}

// |A(D_r2) - A(D_r1) - int_r1^r2 int_{dD_s} 1/|grad R| dL ds| / A(D_r2).
inline double coarea_check(const ParametricImmersion& imm, const SampledSurface& m, double r1,
                           double r2, int radius_nodes = 32) {
    if (!(r1 < r2)) fail(errc::bad_argument, "coarea_check: need r1 < r2");
    std::vector<double> phi(m.verts.size());
    auto area_at = [&](double r) {
        for (std::size_t i = 0; i < m.verts.size(); ++i) phi[i] = m.verts[i].R - r;
        return discretize::region_area_level(m, phi);
    };
    const double dA = area_at(r2) - area_at(r1);
    auto inner = [&](double s) {
        const LevelSet ls = level_set(m, s);
        double acc = 0;
        for (const auto& seg : ls.segments) {
            auto d = detail::radial_data(imm, seg.u, seg.v);
            if (d.psi < 1e-6) {
                // Critical-level sample: nudge the radius once and re-extract.
                const LevelSet retry = level_set(m, s * (1.0 + 1e-6));
                double acc2 = 0;
                for (const auto& s2 : retry.segments) {
                    auto d2 = detail::radial_data(imm, s2.u, s2.v);
                    acc2 += s2.length / std::max(d2.psi, 1e-6);
                }
                return acc2;
            }
            acc += seg.length / d.psi;
        }
        return acc;
    };
    const double integral = num::simpson(inner, r1, r2, radius_nodes);
    return std::abs(dA - integral) / area_at(r2);
}

// |int_{D_t} Lap R^2 dA - 2 t int_{dD_t} |grad R| dL| / (2 t L(dD_t)),
// with Lap R^2 = 4 (1 + R <grad rho, H>) evaluated pointwise.
inline double divergence_check(const ParametricImmersion& imm, const SampledSurface& m, double t) {
    std::vector<double> phi(m.verts.size()), integrand(m.verts.size());
    for (std::size_t i = 0; i < m.verts.size(); ++i) {
        phi[i] = m.verts[i].R - t;
        integrand[i] = 4.0 * (1.0 + m.verts[i].R * m.verts[i].H_dot_ur);
    }
    const double lhs = discretize::region_integral_level(m, integrand, phi);
    const LevelSet ls = level_set(m, t);
    if (ls.segments.empty()) fail(errc::empty_range, "divergence_check: empty level set");
    double flux = 0, length = 0;
    for (const auto& seg : ls.segments) {
        const auto d = detail::radial_data(imm, seg.u, seg.v);
        flux += seg.length * d.psi;
        length += seg.length;
    }
    const double rhs = 2.0 * t * flux;
    return std::abs(lhs - rhs) / (2.0 * t * length);
}

struct FlowSample {
    double t = 0;
    double u = 0, v = 0;
    double R = 0;
    double psi = 0;
    double sin_beta = 0;
};

struct FlowTrajectory {
    double r0 = 0;
    std::vector<FlowSample> samples;
};

// Newton walk along grad R to land on the level R = r.
inline std::array<double, 2> point_on_level(const ParametricImmersion& imm, double u, double v,
                                            double r) {
    for (int it = 0; it < 60; ++it) {
        const auto d = detail::radial_data(imm, u, v);
        if (d.psi < 1e-9) fail(errc::critical_point, "point_on_level: vanishing |grad R|");
        const double err = d.R - r;
        if (std::abs(err) < 1e-12 * std::max(1.0, r)) break;
        const double s = -err / (d.psi * d.psi);
        u = imm.wrap_u(u + s * d.cu);
        v = v + s * d.cv;
    }
    return {u, v};
}

// Integral curve of grad R / |grad R|^2: R grows at unit rate along it.
inline FlowTrajectory radial_flow(const ParametricImmersion& imm, double u0, double v0,
                                  double t_end, double step, double psi_tol = 1e-6) {
    FlowTrajectory traj;
    const int n = std::max(1, static_cast<int>(std::llround(t_end / step)));
    const double h = t_end / n;
    std::array<double, 2> y{u0, v0};
    auto field = [&](double, const std::array<double, 2>& x) {
        const auto d = detail::radial_data(imm, x[0], x[1]);
        if (d.psi < psi_tol)
            fail(errc::critical_point, "radial_flow: critical point encountered");
        const double inv = 1.0 / (d.psi * d.psi);
        return std::array<double, 2>{d.cu * inv, d.cv * inv};
    };
    auto record = [&](double t, const std::array<double, 2>& x) {
        const auto d = detail::radial_data(imm, x[0], x[1]);
        traj.samples.push_back({t, x[0], x[1], d.R, d.psi, d.defect});
    };
    traj.r0 = detail::radial_data(imm, u0, v0).R;
    record(0.0, y);
    for (int i = 0; i < n; ++i) {
        y = num::rk4_step(field, i * h, y, h);
        y[0] = imm.wrap_u(y[0]);
        if (!imm.domain.contains(y[0], y[1]))
            fail(errc::domain_exit, "radial_flow: trajectory left the chart domain");
        record((i + 1) * h, y);
    }
    return traj;
}

struct FlowBoundResult {
    bool holds = false;
    double max_violation = 0;  // max of sin(beta) - bound along the trajectory
};

// sin beta(xi(t)) <= h(r0)/h(t + r0) (sin beta(0) - c) + c pointwise; for the
// flat ambient case h(t) = t.
inline FlowBoundResult flow_bound_check(const FlowTrajectory& traj, double c, double r0,
                                        const comparison::ComparisonProfile* h_profile = nullptr,
                                        double tol = 1e-6) {
    if (traj.samples.empty()) fail(errc::bad_argument, "flow_bound_check: empty trajectory");
    const double sb0 = traj.samples.front().sin_beta;
    auto h_of = [&](double s) { return h_profile ? h_profile->h_at(s) : s; };
    FlowBoundResult out;
    for (const auto& s : traj.samples) {
        const double bound = h_of(r0) / h_of(s.t + r0) * (sb0 - c) + c;
        out.max_violation = std::max(out.max_violation, s.sin_beta - bound);
    }
    out.holds = out.max_violation <= tol;
    return out;
}

struct CriticalScan {
    double min_grad_R = 1.0;
    double u = 0, v = 0;
};

inline CriticalScan critical_point_scan(const SampledSurface& m, double r0) {
    CriticalScan out;
    bool any = false;
    for (const auto& vd : m.verts)
        if (vd.R > r0 && (!any || vd.grad_R < out.min_grad_R)) {
            any = true;
            out.min_grad_R = vd.grad_R;
            out.u = vd.u;
            out.v = vd.v;
        }
    if (!any) fail(errc::empty_range, "critical_point_scan: nothing outside r0");
    return out;
}

// Parameter window that covers the extrinsic ball of radius r_max with some
// margin; closed-form per catalog family, numeric expansion otherwise.
inline Window window_for_radius(const ParametricImmersion& imm, double r_max,
                                double margin = 1.1) {
    const double r = r_max * margin;
    const std::string& n = imm.name;
    if (n == "plane") return {-r, r, -r, r};
    if (n == "catenoid") {
        const double v = std::acosh(std::max(r, 1.001)) + 0.15;
        return {0.0, 2.0 * M_PI, -v, v};
    }
    if (n == "helicoid") {
        const double c = imm.param;
        return {-r / c, r / c, -r, r};
    }
    if (n == "enneper") {
        // R(rho, 0)^2 = rho^2 (rho^4 + 3 rho^2 + 9) / 9, increasing in rho.
        double lo = 0.0, hi = std::cbrt(3.0 * r) + 3.0;
        for (int it = 0; it < 200; ++it) {
            const double mid = 0.5 * (lo + hi);
            const double R2 = mid * mid * (std::pow(mid, 4) + 3.0 * mid * mid + 9.0) / 9.0;
            (R2 < r * r ? lo : hi) = mid;
        }
        return {-hi, hi, -hi, hi};
    }
    if (n == "paraboloid") {
        const double rho = std::sqrt(2.0 * (std::sqrt(1.0 + r * r) - 1.0)) + 0.5;
        return {-rho, rho, -rho, rho};
    }
    if (n == "hyperboloid_sheet") {
        const double c = imm.param;
        const double rho = std::sqrt(std::max(r * r - c * c, 1.0) / (1.0 + c * c)) + 0.5;
        return {-rho, rho, -rho, rho};
    }
    if (n == "sphere") return {imm.domain.u0, imm.domain.u1, imm.domain.v0, imm.domain.v1};
    // Generic: grow a centered square until the boundary clears r.
    double half = 1.0;
    const auto bp = imm.basepoint;
    for (int it = 0; it < 60; ++it) {
        double min_boundary = std::numeric_limits<double>::infinity();
        for (int k = 0; k <= 32; ++k) {
            const double s = -half + 2.0 * half * k / 32;
            for (auto [uu, vv] : {std::pair{bp[0] + s, bp[1] - half}, {bp[0] + s, bp[1] + half},
                                  {bp[0] - half, bp[1] + s}, {bp[0] + half, bp[1] + s}}) {
                if (!imm.domain.contains(uu, vv)) continue;
                min_boundary = std::min(min_boundary, imm.position(uu, vv).norm());
            }
        }
        if (min_boundary > r) break;
        half *= 1.4;
    }
    return {bp[0] - half, bp[0] + half, bp[1] - half, bp[1] + half};
}

}  // namespace tamed::extrinsic
