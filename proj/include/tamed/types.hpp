#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace tamed {

// Ambient vector, dimension decided at runtime but small (n <= 8): stack storage.
using Vec = Eigen::Matrix<double, Eigen::Dynamic, 1, Eigen::AutoAlign, 8, 1>;

enum class errc {
    unknown_surface,
    degenerate_metric,
    pole_neighborhood,
    window_truncation,
    hypothesis_violation,
    empty_range,
    no_bracket,
    tail_divergent,
    solution_escaped,
    critical_point,
    domain_exit,
    bad_argument,
    schema,
};

class workbench_error : public std::runtime_error {
public:
    workbench_error(errc code, const std::string& what)
        : std::runtime_error(what), code_(code) {}
    errc code() const noexcept { return code_; }

private:
    errc code_;
};

[[noreturn]] inline void fail(errc code, const std::string& what) {
    throw workbench_error(code, what);
}

// Shared numeric tolerances. Defaults chosen for the reference resolutions
// used by the test suite; all exposed through RunConfig.
struct Tolerances {
    double ode_residual = 1e-8;   // absolute, at reference step
    double geometry = 1e-10;      // orthogonality / identity checks
    double pole = 1e-9;           // "too close to the pole" radius
    double level_nudge = 1e-6;    // relative nudge for critical level values
    double lemma = 1e-9;          // slack for report-only lemma checks
};

namespace num {

// Composite Simpson on a callable; n is rounded up to an even count.
inline double simpson(const std::function<double(double)>& f, double a, double b, int n = 512) {
    if (b <= a) return 0.0;
    if (n % 2) ++n;
    const double h = (b - a) / n;
    double acc = f(a) + f(b);
    for (int i = 1; i < n; ++i) acc += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
    return acc * h / 3.0;
}

// One classical RK4 step for y' = f(t, y) with small fixed-size state.
template <std::size_t N, typename F>
std::array<double, N> rk4_step(const F& f, double t, const std::array<double, N>& y, double h) {
    auto scale_add = [](const std::array<double, N>& base, const std::array<double, N>& k, double s) {
        std::array<double, N> out;
        for (std::size_t i = 0; i < N; ++i) out[i] = base[i] + s * k[i];
        return out;
    };
    const auto k1 = f(t, y);
    const auto k2 = f(t + 0.5 * h, scale_add(y, k1, 0.5 * h));
    const auto k3 = f(t + 0.5 * h, scale_add(y, k2, 0.5 * h));
    const auto k4 = f(t + h, scale_add(y, k3, h));
    std::array<double, N> out;
    for (std::size_t i = 0; i < N; ++i)
        out[i] = y[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    return out;
}

struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
};

inline LineFit least_squares(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2) fail(errc::bad_argument, "least_squares: need >= 2 points");
    const double n = static_cast<double>(x.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    const double denom = n * sxx - sx * sx;
    if (std::abs(denom) < 1e-300) fail(errc::bad_argument, "least_squares: degenerate abscissae");
    LineFit fit;
    fit.slope = (n * sxy - sx * sy) / denom;
    fit.intercept = (sy - fit.slope * sx) / n;
    return fit;
}

inline std::uint64_t fnv1a(const std::string& data) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : data) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

}  // namespace num
}  // namespace tamed
