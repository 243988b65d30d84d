#pragma once

// Radial comparison geometry: Jacobi profiles h'' = G h, admissibility checks,
// Kasue's normal-defect envelope, and radial Dirichlet eigenfunctions of
// Euclidean balls (the transplant ingredient of the tone bounds).

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <vector>

#include "tamed/types.hpp"

namespace tamed::comparison {

using RadiusFn = std::function<double(double)>;

struct ComparisonProfile {
    RadiusFn G;
    std::vector<double> t;        // grid, t[0] = 0
    std::vector<double> h;        // Jacobi solution, h(0)=0
    std::vector<double> h_prime;  // h'(0)=1
    double grid_step = 0.0;
    double positivity_horizon = 0.0;  // largest grid t with h > 0 on (0, t]
    bool truncated = false;           // h hit zero before the requested t_max

    double h_at(double s) const { return interp(h, s); }
    double h_prime_at(double s) const { return interp(h_prime, s); }

    // Max over interior nodes of |h'' - G h| with h'' from second differences.
    // The truncation part of this residual scales like O(step^2).
    double max_jacobi_residual() const {
        double worst = 0.0;
        for (std::size_t i = 1; i + 1 < t.size(); ++i) {
            const double second = (h[i + 1] - 2.0 * h[i] + h[i - 1]) / (grid_step * grid_step);
            worst = std::max(worst, std::abs(second - G(t[i]) * h[i]));
        }
        return worst;
    }

private:
    double interp(const std::vector<double>& f, double s) const {
        if (t.empty()) fail(errc::bad_argument, "empty comparison profile");
        if (s <= t.front()) return f.front();
        if (s >= t.back()) return f.back();
        const double x = s / grid_step;
        const auto i = static_cast<std::size_t>(x);
        const double w = x - static_cast<double>(i);
        return (1.0 - w) * f[i] + w * f[std::min(i + 1, f.size() - 1)];
    }
};

// h'' - G h = 0, h(0) = 0, h'(0) = 1, fixed-step RK4.
// A removable singularity of G at t = 0 is tolerated: the G*h product is taken
// as 0 whenever h = 0, and G is never evaluated at exactly t = 0 with h != 0.
inline ComparisonProfile solve_jacobi(const RadiusFn& G, double t_max, double step) {
    if (!(t_max > 0.0) || !(step > 0.0)) fail(errc::bad_argument, "solve_jacobi: t_max and step must be positive");
    const int n = std::max(2, static_cast<int>(std::llround(t_max / step)));
    const double h_step = t_max / n;

    auto rhs = [&G](double s, const std::array<double, 2>& y) {
        return std::array<double, 2>{y[1], y[0] == 0.0 ? 0.0 : G(s) * y[0]};
    };

    ComparisonProfile out;
    out.G = G;
    out.grid_step = h_step;
    out.t.reserve(n + 1);
    out.h.reserve(n + 1);
    out.h_prime.reserve(n + 1);
    std::array<double, 2> y{0.0, 1.0};
    out.t.push_back(0.0);
    out.h.push_back(y[0]);
    out.h_prime.push_back(y[1]);
    for (int i = 0; i < n; ++i) {
        y = num::rk4_step(rhs, i * h_step, y, h_step);
        if (!std::isfinite(y[0]) || !std::isfinite(y[1]) || std::abs(y[0]) > 1e150)
            fail(errc::solution_escaped, "solve_jacobi: solution escaped before t_max");
        const double ti = (i + 1) * h_step;
        if (y[0] <= 0.0) {
            out.truncated = true;
            break;
        }
        out.t.push_back(ti);
        out.h.push_back(y[0]);
        out.h_prime.push_back(y[1]);
    }
    out.positivity_horizon = out.t.back();
    return out;
}

struct BmrResult {
    bool holds = false;
    double sup_value = 0.0;
    bool tail_assumed_zero = true;
};

// sup_t t * int_t^inf G_-(s) ds <= 1/4 test. The tail beyond t_max is either
// assumed zero or extended by a declared power-law exponent p (G_- ~ s^p).
inline BmrResult check_bmr(const RadiusFn& G, double t_max,
                           std::optional<double> tail_exponent = std::nullopt) {
    if (!(t_max > 0.0)) fail(errc::bad_argument, "check_bmr: t_max must be positive");
    const int n = 4096;
    const double dt = t_max / n;
    std::vector<double> gm(n + 1);
    for (int i = 0; i <= n; ++i) gm[i] = std::max(-G(i * dt), 0.0);

    double tail = 0.0;
    BmrResult res;
    if (tail_exponent) {
        res.tail_assumed_zero = false;
        const double p = *tail_exponent;
        if (gm[n] > 0.0) {
            if (p >= -1.0) fail(errc::tail_divergent, "check_bmr: declared tail is not integrable");
            tail = gm[n] * t_max / (-p - 1.0);
        }
    }

    // Suffix integral by trapezoid, then the sup of t * integral.
    std::vector<double> suffix(n + 1, tail);
    for (int i = n - 1; i >= 0; --i) suffix[i] = suffix[i + 1] + 0.5 * (gm[i] + gm[i + 1]) * dt;
    for (int i = 0; i <= n; ++i) res.sup_value = std::max(res.sup_value, i * dt * suffix[i]);
    res.holds = res.sup_value <= 0.25 + 1e-12;
    return res;
}

struct DecayLemmaResult {
    bool premise_holds = false;   // h''/h = G <= 2/t^2 on the grid
    double max_t_logderiv = 0.0;  // max of t h'/h
};

inline DecayLemmaResult quadratic_decay_lemma_check(const ComparisonProfile& profile) {
    DecayLemmaResult res;
    res.premise_holds = true;
    for (std::size_t i = 1; i < profile.t.size(); ++i) {
        const double ti = profile.t[i];
        if (profile.G(ti) * ti * ti > 2.0 * (1.0 + 1e-12) + 1e-12) res.premise_holds = false;
        res.max_t_logderiv = std::max(res.max_t_logderiv, ti * profile.h_prime[i] / profile.h[i]);
    }
    return res;
}

// Solution of S'' + kappa S = 0, S(0)=0, S'(0)=1.
inline double s_kappa(double kappa, double t) {
    if (t < 0.0) fail(errc::bad_argument, "s_kappa: t must be nonnegative");
    if (kappa == 0.0) return t;
    if (kappa < 0.0) {
        const double s = std::sqrt(-kappa);
        return std::sinh(s * t) / s;
    }
    const double s = std::sqrt(kappa);
    return std::sin(s * t) / s;
}

struct KasueBound {
    double value = 0.0;
    bool clamped = false;
};

// delta(R) + (1/S_kappa(R)) * int_r^R S_kappa(s) k(s) ds, clamped to [0, 1].
inline KasueBound kasue_bound(double kappa, const RadiusFn& k, double r, double R,
                              const RadiusFn& delta) {
    if (!(r < R) || !(r > 0.0)) fail(errc::empty_range, "kasue_bound: empty integration range");
    const double integral =
        num::simpson([&](double s) { return s_kappa(kappa, s) * k(s); }, r, R, 4000);
    KasueBound out;
    out.value = delta(R) + integral / s_kappa(kappa, R);
    if (out.value < 0.0 || out.value > 1.0) {
        out.clamped = true;
        out.value = std::clamp(out.value, 0.0, 1.0);
    }
    return out;
}

struct LambdaC {
    double value = 0.0;
    bool entered = false;  // Lambda_c < 1: comparison regime entered
};

inline LambdaC lambda_c(double c, const RadiusFn& delta, double t) {
    if (!(c > 0.0 && c < 1.0)) fail(errc::bad_argument, "lambda_c: c must lie in (0,1)");
    LambdaC out;
    out.value = delta(t) + c;
    out.entered = out.value < 1.0;
    return out;
}

struct RadialEigenfunction {
    int l = 0;
    double r = 0.0;
    double lambda1 = 0.0;
    std::vector<double> t;
    std::vector<double> v;
    std::vector<double> v_prime;

    double v_at(double s) const { return interp(v, s); }
    double v_prime_at(double s) const { return interp(v_prime, s); }

private:
    double interp(const std::vector<double>& f, double s) const {
        if (t.size() < 2) fail(errc::bad_argument, "empty eigenfunction profile");
        if (s <= t.front()) return f.front();
        if (s >= t.back()) return f.back();
        const double step = t[1] - t[0];
        const double x = s / step;
        const auto i = static_cast<std::size_t>(x);
        const double w = x - static_cast<double>(i);
        return (1.0 - w) * f[i] + w * f[std::min(i + 1, f.size() - 1)];
    }
};

namespace detail {

// Integrate v'' + (l-1) v'/t + lam v = 0, v(0)=1, v'(0)=0 up to t = r.
// The 1/t singularity is regularized by the series start v = 1 - lam t^2/(2l).
// Returns v(r); optionally records the profile and whether v crossed zero
// strictly inside (0, r).
inline double shoot_radial(int l, double r, double lam, int steps,
                           RadialEigenfunction* record = nullptr,
                           bool* interior_zero = nullptr) {
    const double h = r / steps;
    double t0 = h;
    std::array<double, 2> y{1.0 - lam * t0 * t0 / (2.0 * l), -lam * t0 / l};
    auto rhs = [l, lam](double s, const std::array<double, 2>& y) {
        return std::array<double, 2>{y[1], -(l - 1) * y[1] / s - lam * y[0]};
    };
    const int sample_stride = std::max(1, steps / 2000);
    if (record) {
        record->t.assign(1, 0.0);
        record->v.assign(1, 1.0);
        record->v_prime.assign(1, 0.0);
    }
    if (interior_zero) *interior_zero = false;
    for (int i = 1; i < steps; ++i) {
        y = num::rk4_step(rhs, i * h, y, h);
        if (interior_zero && y[0] < 0.0 && (i + 1) < steps) *interior_zero = true;
        if (record && ((i + 1) % sample_stride == 0 || i + 1 == steps)) {
            record->t.push_back((i + 1) * h);
            record->v.push_back(y[0]);
            record->v_prime.push_back(y[1]);
        }
    }
    return y[0];
}

}  // namespace detail

// Principal Dirichlet eigenpair of the radius-r ball in R^l via shooting and
// bisection on lambda.
inline RadialEigenfunction dirichlet_eigen_ball(int l, double r) {
    if (l < 2) fail(errc::bad_argument, "dirichlet_eigen_ball: l must be >= 2");
    if (!(r > 0.0)) fail(errc::bad_argument, "dirichlet_eigen_ball: r must be positive");

    // McMahon estimate of the first Bessel zero j_{l/2-1,1} to size the scan.
    const double nu = 0.5 * l - 1.0;
    const double j_est = nu + 1.8557571 * std::cbrt(std::max(nu, 0.5)) + 1.5;
    const double lam_est = j_est * j_est / (r * r);

    const int coarse_steps = 2000;
    double lam_lo = 1e-6 / (r * r);
    double v_lo = detail::shoot_radial(l, r, lam_lo, coarse_steps);
    const double dlam = lam_est / 60.0;
    double lam_hi = lam_lo;
    double v_hi = v_lo;
    bool bracketed = false;
    for (int i = 0; i < 100000; ++i) {
        lam_hi = lam_lo + dlam;
        v_hi = detail::shoot_radial(l, r, lam_hi, coarse_steps);
        if (v_lo > 0.0 && v_hi <= 0.0) {
            bracketed = true;
            break;
        }
        lam_lo = lam_hi;
        v_lo = v_hi;
    }
    if (!bracketed) fail(errc::no_bracket, "dirichlet_eigen_ball: no sign change in lambda bracket");

    const int fine_steps = 8000;
    double a = lam_lo, b = lam_hi;
    for (int it = 0; it < 200 && (b - a) > 1e-15 * b; ++it) {
        const double mid = 0.5 * (a + b);
        if (detail::shoot_radial(l, r, mid, fine_steps) > 0.0)
            a = mid;
        else
            b = mid;
    }

    RadialEigenfunction ef;
    ef.l = l;
    ef.r = r;
    ef.lambda1 = 0.5 * (a + b);
    bool interior_zero = false;
    detail::shoot_radial(l, r, ef.lambda1, fine_steps, &ef, &interior_zero);
    if (interior_zero) fail(errc::no_bracket, "dirichlet_eigen_ball: bracketed a higher mode");
    // Clamp the boundary sample onto the Dirichlet condition.
    ef.v.back() = 0.0;
    return ef;
}

struct VSlopeResult {
    bool holds = false;
    double max_ratio = 0.0;  // max of -v'(t)/t
};

inline VSlopeResult v_slope_lemma_check(const RadialEigenfunction& ef, double tol = 1e-6) {
    VSlopeResult res;
    for (std::size_t i = 1; i < ef.t.size(); ++i)
        res.max_ratio = std::max(res.max_ratio, -ef.v_prime[i] / ef.t[i]);
    res.holds = res.max_ratio <= ef.lambda1 * (1.0 + tol);
    return res;
}

}  // namespace tamed::comparison
