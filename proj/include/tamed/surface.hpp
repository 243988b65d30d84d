#pragma once

// Closed-form parametric immersions into R^n and exact pointwise extrinsic
// geometry: first/second fundamental forms, Gauss curvature, mean curvature
// vector and the norm of the second fundamental form.

#include <array>
#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "tamed/types.hpp"

namespace tamed::surface {

struct Domain {
    double u0 = 0.0, u1 = 0.0;
    double v0 = 0.0, v1 = 0.0;
    bool u_periodic = false;
    double period = 0.0;

    bool contains(double u, double v, double slack = 1e-12) const {
        const bool u_ok = u_periodic || (u >= u0 - slack && u <= u1 + slack);
        return u_ok && v >= v0 - slack && v <= v1 + slack;
    }
};

// Value and derivatives of the chart at one parameter point.
struct Jet2 {
    Vec F, Fu, Fv, Fuu, Fuv, Fvv;
};

struct ParametricImmersion {
    std::string name;
    int ambient_dim = 3;
    Domain domain;
    std::function<Vec(double, double)> F;
    // Optional closed-form derivative oracles; central differences otherwise.
    std::function<std::pair<Vec, Vec>(double, double)> dF;
    std::function<std::array<Vec, 3>(double, double)> d2F;  // Fuu, Fuv, Fvv
    double fd_step = 1e-5;
    std::array<double, 2> basepoint{0.0, 0.0};  // (u,v) whose image is nearest the origin
    std::optional<int> known_chi;
    bool known_minimal = false;
    double param = 0.0;  // catalog shape parameter (radius / pitch / slope)

    Vec position(double u, double v) const { return F(u, v); }

    Jet2 jet(double u, double v) const {
        Jet2 j;
        j.F = F(u, v);
        if (dF) {
            auto [fu, fv] = dF(u, v);
            j.Fu = fu;
            j.Fv = fv;
        } else {
            const double h = fd_step;
            j.Fu = (F(u + h, v) - F(u - h, v)) / (2.0 * h);
            j.Fv = (F(u, v + h) - F(u, v - h)) / (2.0 * h);
        }
        if (d2F) {
            auto d2 = d2F(u, v);
            j.Fuu = d2[0];
            j.Fuv = d2[1];
            j.Fvv = d2[2];
        } else {
            const double h = fd_step;
            j.Fuu = (F(u + h, v) - 2.0 * j.F + F(u - h, v)) / (h * h);
            j.Fvv = (F(u, v + h) - 2.0 * j.F + F(u, v - h)) / (h * h);
            j.Fuv = (F(u + h, v + h) - F(u + h, v - h) - F(u - h, v + h) + F(u - h, v - h)) /
                    (4.0 * h * h);
        }
        return j;
    }

    double wrap_u(double u) const {
        if (!domain.u_periodic) return u;
        double w = std::fmod(u - domain.u0, domain.period);
        if (w < 0) w += domain.period;
        return domain.u0 + w;
    }
};

struct PointGeometry {
    Vec position;
    double g11 = 0, g12 = 0, g22 = 0;
    Vec alpha11, alpha12, alpha22;  // normal-valued second fundamental form
    double K = 0;                   // Gauss curvature (Gauss equation route)
    Vec H;                          // mean curvature vector, trace/2
    double alpha_norm = 0;

    double det_g() const { return g11 * g22 - g12 * g12; }
};

inline PointGeometry point_geometry(const ParametricImmersion& imm, double u, double v,
                                    double det_tol = 1e-14) {
    const Jet2 j = imm.jet(u, v);
    PointGeometry p;
    p.position = j.F;
    p.g11 = j.Fu.dot(j.Fu);
    p.g12 = j.Fu.dot(j.Fv);
    p.g22 = j.Fv.dot(j.Fv);
    const double det = p.det_g();
    if (!(det > det_tol * std::max(1.0, p.g11 * p.g22)))
        fail(errc::degenerate_metric, imm.name + ": not an immersion here (degenerate metric)");

    // Normal projection: subtract the tangential component of each second
    // derivative, solving the 2x2 metric system directly.
    const double inv11 = p.g22 / det, inv12 = -p.g12 / det, inv22 = p.g11 / det;
    auto normal_part = [&](const Vec& w) -> Vec {
        const double bu = w.dot(j.Fu), bv = w.dot(j.Fv);
        const double cu = inv11 * bu + inv12 * bv;
        const double cv = inv12 * bu + inv22 * bv;
        return w - cu * j.Fu - cv * j.Fv;
    };
    p.alpha11 = normal_part(j.Fuu);
    p.alpha12 = normal_part(j.Fuv);
    p.alpha22 = normal_part(j.Fvv);

    p.K = (p.alpha11.dot(p.alpha22) - p.alpha12.squaredNorm()) / det;
    p.H = 0.5 * (inv11 * p.alpha11 + 2.0 * inv12 * p.alpha12 + inv22 * p.alpha22);

    // ||alpha||^2 = g^{ik} g^{jl} <a_ij, a_kl>
    const Vec* A[2][2] = {{&p.alpha11, &p.alpha12}, {&p.alpha12, &p.alpha22}};
    const double B[2][2] = {{inv11, inv12}, {inv12, inv22}};
    double n2 = 0.0;
    for (int i = 0; i < 2; ++i)
        for (int jj = 0; jj < 2; ++jj)
            for (int k = 0; k < 2; ++k)
                for (int ll = 0; ll < 2; ++ll)
                    n2 += B[i][k] * B[jj][ll] * A[i][jj]->dot(*A[k][ll]);
    p.alpha_norm = std::sqrt(std::max(n2, 0.0));
    return p;
}

namespace detail {

inline Vec v3(double x, double y, double z) {
    Vec out(3);
    out << x, y, z;
    return out;
}

}  // namespace detail

// Named immersion catalog. `param` is the sphere radius a, the helicoid pitch
// c, or the hyperboloid slope c; ignored elsewhere.
inline ParametricImmersion catalog(const std::string& name, double param = 1.0) {
    using detail::v3;
    ParametricImmersion imm;
    imm.name = name;
    imm.param = param;

    if (name == "plane") {
        imm.domain = {-50.0, 50.0, -50.0, 50.0, false, 0.0};
        imm.F = [](double u, double v) { return v3(u, v, 0.0); };
        imm.dF = [](double, double) { return std::make_pair(v3(1, 0, 0), v3(0, 1, 0)); };
        imm.d2F = [](double, double) {
            return std::array<Vec, 3>{v3(0, 0, 0), v3(0, 0, 0), v3(0, 0, 0)};
        };
        imm.known_chi = 1;
        imm.known_minimal = true;
    } else if (name == "catenoid") {
        imm.domain = {0.0, 2.0 * M_PI, -6.0, 6.0, true, 2.0 * M_PI};
        imm.F = [](double u, double v) {
            return v3(std::cosh(v) * std::cos(u), std::cosh(v) * std::sin(u), v);
        };
        imm.dF = [](double u, double v) {
            return std::make_pair(v3(-std::cosh(v) * std::sin(u), std::cosh(v) * std::cos(u), 0.0),
                                  v3(std::sinh(v) * std::cos(u), std::sinh(v) * std::sin(u), 1.0));
        };
        imm.d2F = [](double u, double v) {
            return std::array<Vec, 3>{
                v3(-std::cosh(v) * std::cos(u), -std::cosh(v) * std::sin(u), 0.0),
                v3(-std::sinh(v) * std::sin(u), std::sinh(v) * std::cos(u), 0.0),
                v3(std::cosh(v) * std::cos(u), std::cosh(v) * std::sin(u), 0.0)};
        };
        imm.known_chi = 0;
        imm.known_minimal = true;
    } else if (name == "helicoid") {
        const double c = param;
        imm.domain = {-40.0, 40.0, -40.0, 40.0, false, 0.0};
        imm.F = [c](double u, double v) { return v3(v * std::cos(u), v * std::sin(u), c * u); };
        imm.dF = [c](double u, double v) {
            return std::make_pair(v3(-v * std::sin(u), v * std::cos(u), c),
                                  v3(std::cos(u), std::sin(u), 0.0));
        };
        imm.d2F = [](double u, double v) {
            return std::array<Vec, 3>{v3(-v * std::cos(u), -v * std::sin(u), 0.0),
                                      v3(-std::sin(u), std::cos(u), 0.0), v3(0, 0, 0)};
        };
        imm.known_chi = 1;
        imm.known_minimal = true;
    } else if (name == "enneper") {
        imm.domain = {-25.0, 25.0, -25.0, 25.0, false, 0.0};
        imm.F = [](double u, double v) {
            return v3(u - u * u * u / 3.0 + u * v * v, -v + v * v * v / 3.0 - u * u * v,
                      u * u - v * v);
        };
        imm.dF = [](double u, double v) {
            return std::make_pair(v3(1.0 - u * u + v * v, -2.0 * u * v, 2.0 * u),
                                  v3(2.0 * u * v, -1.0 + v * v - u * u, -2.0 * v));
        };
        imm.d2F = [](double u, double v) {
            return std::array<Vec, 3>{v3(-2.0 * u, -2.0 * v, 2.0), v3(2.0 * v, -2.0 * u, 0.0),
                                      v3(2.0 * u, 2.0 * v, -2.0)};
        };
        imm.known_chi = 1;
        imm.known_minimal = true;
    } else if (name == "sphere") {
        // Radius a, tangent to the origin at the south pole v = pi, centered
        // at (0, 0, a). Poles excluded by the default window.
        const double a = param;
        imm.domain = {0.0, 2.0 * M_PI, 0.05, M_PI - 0.05, true, 2.0 * M_PI};
        imm.F = [a](double u, double v) {
            return v3(a * std::sin(v) * std::cos(u), a * std::sin(v) * std::sin(u),
                      a * (1.0 + std::cos(v)));
        };
        imm.dF = [a](double u, double v) {
            return std::make_pair(v3(-a * std::sin(v) * std::sin(u), a * std::sin(v) * std::cos(u), 0.0),
                                  v3(a * std::cos(v) * std::cos(u), a * std::cos(v) * std::sin(u),
                                     -a * std::sin(v)));
        };
        imm.d2F = [a](double u, double v) {
            return std::array<Vec, 3>{
                v3(-a * std::sin(v) * std::cos(u), -a * std::sin(v) * std::sin(u), 0.0),
                v3(-a * std::cos(v) * std::sin(u), a * std::cos(v) * std::cos(u), 0.0),
                v3(-a * std::sin(v) * std::cos(u), -a * std::sin(v) * std::sin(u),
                   -a * std::cos(v))};
        };
        imm.basepoint = {0.0, M_PI - 0.05};
        imm.known_chi = 2;
    } else if (name == "paraboloid") {
        imm.domain = {-20.0, 20.0, -20.0, 20.0, false, 0.0};
        imm.F = [](double u, double v) { return v3(u, v, 0.5 * (u * u + v * v)); };
        imm.dF = [](double u, double v) {
            return std::make_pair(v3(1, 0, u), v3(0, 1, v));
        };
        imm.d2F = [](double, double) {
            return std::array<Vec, 3>{v3(0, 0, 1), v3(0, 0, 0), v3(0, 0, 1)};
        };
        imm.known_chi = 1;
    } else if (name == "hyperboloid_sheet") {
        const double c = param;
        imm.domain = {-40.0, 40.0, -40.0, 40.0, false, 0.0};
        auto w = [](double u, double v) { return std::sqrt(1.0 + u * u + v * v); };
        imm.F = [c, w](double u, double v) { return v3(u, v, c * w(u, v)); };
        imm.dF = [c, w](double u, double v) {
            const double s = w(u, v);
            return std::make_pair(v3(1, 0, c * u / s), v3(0, 1, c * v / s));
        };
        imm.d2F = [c, w](double u, double v) {
            const double s = w(u, v);
            const double s3 = s * s * s;
            return std::array<Vec, 3>{v3(0, 0, c * (s * s - u * u) / s3),
                                      v3(0, 0, -c * u * v / s3),
                                      v3(0, 0, c * (s * s - v * v) / s3)};
        };
        imm.known_chi = 1;
    } else {
        fail(errc::unknown_surface, "unknown surface: " + name);
    }
    return imm;
}

// Graph immersion (u, v, f(u, v)); derivatives by central differences unless
// the caller supplies oracles afterwards.
inline ParametricImmersion make_graph(std::function<double(double, double)> f, Domain domain,
                                      double fd_step = 1e-5) {
    ParametricImmersion imm;
    imm.name = "graph";
    imm.domain = domain;
    imm.fd_step = fd_step;
    imm.F = [f = std::move(f)](double u, double v) { return detail::v3(u, v, f(u, v)); };
    return imm;
}

// Ambient isometry Q x + shift applied to an immersion (invariance tests).
inline ParametricImmersion transformed(const ParametricImmersion& base,
                                       const Eigen::MatrixXd& Q, const Vec& shift) {
    ParametricImmersion imm = base;
    imm.name = base.name + "_moved";
    imm.F = [F = base.F, Q, shift](double u, double v) -> Vec { return Q * F(u, v) + shift; };
    if (base.dF)
        imm.dF = [dF = base.dF, Q](double u, double v) {
            auto [fu, fv] = dF(u, v);
            return std::make_pair(Vec(Q * fu), Vec(Q * fv));
        };
    if (base.d2F)
        imm.d2F = [d2F = base.d2F, Q](double u, double v) {
            auto d = d2F(u, v);
            return std::array<Vec, 3>{Vec(Q * d[0]), Vec(Q * d[1]), Vec(Q * d[2])};
        };
    return imm;
}

// Same surface with zero coordinates appended (codimension sanity checks).
inline ParametricImmersion embedded(const ParametricImmersion& base, int extra_dims) {
    ParametricImmersion imm = base;
    imm.ambient_dim = base.ambient_dim + extra_dims;
    auto pad = [n = imm.ambient_dim](const Vec& x) {
        Vec out = Vec::Zero(n);
        out.head(x.size()) = x;
        return out;
    };
    imm.name = base.name + "_embedded";
    imm.F = [F = base.F, pad](double u, double v) { return pad(F(u, v)); };
    if (base.dF)
        imm.dF = [dF = base.dF, pad](double u, double v) {
            auto [fu, fv] = dF(u, v);
            return std::make_pair(pad(fu), pad(fv));
        };
    if (base.d2F)
        imm.d2F = [d2F = base.d2F, pad](double u, double v) {
            auto d = d2F(u, v);
            return std::array<Vec, 3>{pad(d[0]), pad(d[1]), pad(d[2])};
        };
    return imm;
}

// Coarse grid scan plus golden-ratio refinement for the parameter point whose
// image is nearest the ambient origin. Catalog surfaces set this analytically.
inline std::array<double, 2> find_basepoint(const ParametricImmersion& imm, int grid = 64) {
    double best = std::numeric_limits<double>::infinity();
    std::array<double, 2> arg{imm.domain.u0, imm.domain.v0};
    for (int i = 0; i <= grid; ++i)
        for (int j = 0; j <= grid; ++j) {
            const double u = imm.domain.u0 + (imm.domain.u1 - imm.domain.u0) * i / grid;
            const double v = imm.domain.v0 + (imm.domain.v1 - imm.domain.v0) * j / grid;
            const double d = imm.position(u, v).squaredNorm();
            if (d < best) {
                best = d;
                arg = {u, v};
            }
        }
    // Local coordinate-descent refinement.
    double span_u = (imm.domain.u1 - imm.domain.u0) / grid;
    double span_v = (imm.domain.v1 - imm.domain.v0) / grid;
    for (int it = 0; it < 60; ++it) {
        for (int axis = 0; axis < 2; ++axis) {
            const double step = axis == 0 ? span_u : span_v;
            for (double s : {-step, step}) {
                std::array<double, 2> cand = arg;
                cand[axis] += s;
                if (!imm.domain.contains(cand[0], cand[1])) continue;
                const double d = imm.position(cand[0], cand[1]).squaredNorm();
                if (d < best) {
                    best = d;
                    arg = cand;
                }
            }
        }
        span_u *= 0.6;
        span_v *= 0.6;
    }
    return arg;
}

// Pointwise ||alpha|| along a parameter path, paired with a distance proxy:
// the caller's values if given, else accumulated ambient arc length.
inline std::vector<std::pair<double, double>> alpha_norm_profile(
    const ParametricImmersion& imm, const std::vector<std::array<double, 2>>& path,
    const std::vector<double>* distances = nullptr) {
    if (distances && distances->size() != path.size())
        fail(errc::bad_argument, "alpha_norm_profile: distance proxy size mismatch");
    std::vector<std::pair<double, double>> out;
    out.reserve(path.size());
    double arc = 0.0;
    Vec prev;
    for (std::size_t i = 0; i < path.size(); ++i) {
        const auto [u, v] = path[i];
        const PointGeometry p = point_geometry(imm, u, v);
        if (i > 0) arc += (p.position - prev).norm();
        prev = p.position;
        out.emplace_back(distances ? (*distances)[i] : arc, p.alpha_norm);
    }
    return out;
}

}  // namespace tamed::surface
