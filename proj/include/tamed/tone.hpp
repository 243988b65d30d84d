#pragma once

// Fundamental-tone machinery: discrete Dirichlet eigenvalues of extrinsic
// balls (P1 elements, consistent mass, shifted inverse iteration) and the
// transplanted radial-eigenfunction upper bound.

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <vector>

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include "tamed/comparison.hpp"
#include "tamed/discretize.hpp"
#include "tamed/extrinsic.hpp"
#include "tamed/types.hpp"

namespace tamed::tone {

using discretize::SampledSurface;
using extrinsic::TamednessReport;
using surface::ParametricImmersion;

using SpMat = Eigen::SparseMatrix<double>;

// Dirichlet P1 system on the sub-mesh {R <= r}: whole triangles only,
// boundary vertices clamped by row/column deletion.
struct DirichletRegion {
    std::vector<int> dof_of_vert;   // -1 outside / clamped
    std::vector<int> vert_of_dof;
    std::vector<int> component_of_dof;
    int n_components = 0;
    SpMat K, M;
};

namespace detail {

inline DirichletRegion build_region(const SampledSurface& m, double r) {
    DirichletRegion reg;
    const auto n_verts = static_cast<int>(m.verts.size());
    std::vector<char> in_region(n_verts, 0);
    for (int i = 0; i < n_verts; ++i) in_region[i] = m.verts[i].R <= r;

    std::vector<char> keep_tri(m.tris.size(), 0);
    for (std::size_t k = 0; k < m.tris.size(); ++k) {
        const auto& t = m.tris[k];
        keep_tri[k] = in_region[t[0]] && in_region[t[1]] && in_region[t[2]];
    }

    // A region vertex is interior when every incident mesh triangle is kept
    // and it does not sit on the window boundary.
    std::vector<char> interior(n_verts, 0);
    for (int i = 0; i < n_verts; ++i)
        interior[i] = in_region[i] && !m.on_window_boundary(i);
    for (std::size_t k = 0; k < m.tris.size(); ++k)
        if (!keep_tri[k])
            for (int e = 0; e < 3; ++e) interior[m.tris[k][e]] = 0;

    reg.dof_of_vert.assign(n_verts, -1);
    for (int i = 0; i < n_verts; ++i)
        if (interior[i]) {
            reg.dof_of_vert[i] = static_cast<int>(reg.vert_of_dof.size());
            reg.vert_of_dof.push_back(i);
        }
    const int ndof = static_cast<int>(reg.vert_of_dof.size());
    if (ndof < 10) fail(errc::empty_range, "dirichlet region has fewer than 10 interior vertices");

    std::vector<Eigen::Triplet<double>> kt, mt;
    kt.reserve(m.tris.size() * 9);
    mt.reserve(m.tris.size() * 9);
    for (std::size_t k = 0; k < m.tris.size(); ++k) {
        if (!keep_tri[k]) continue;
        const auto& t = m.tris[k];
        const Vec& p0 = m.verts[t[0]].pos;
        const Vec& p1 = m.verts[t[1]].pos;
        const Vec& p2 = m.verts[t[2]].pos;
        const double area = m.tri_area[k];
        // Cotangent weights from ambient edge geometry.
        double cot[3];
        const Vec* P[3] = {&p0, &p1, &p2};
        for (int c = 0; c < 3; ++c) {
            const Vec e1 = *P[(c + 1) % 3] - *P[c];
            const Vec e2 = *P[(c + 2) % 3] - *P[c];
            cot[c] = e1.dot(e2) / (2.0 * area);
        }
        const int dof[3] = {reg.dof_of_vert[t[0]], reg.dof_of_vert[t[1]], reg.dof_of_vert[t[2]]};
        for (int c = 0; c < 3; ++c) {
            const int i = (c + 1) % 3, j = (c + 2) % 3;
            const double w = 0.5 * cot[c];
            if (dof[i] >= 0) kt.emplace_back(dof[i], dof[i], w);
            if (dof[j] >= 0) kt.emplace_back(dof[j], dof[j], w);
            if (dof[i] >= 0 && dof[j] >= 0) {
                kt.emplace_back(dof[i], dof[j], -w);
                kt.emplace_back(dof[j], dof[i], -w);
            }
        }
        for (int a = 0; a < 3; ++a)
            for (int b = 0; b < 3; ++b) {
                if (dof[a] < 0 || dof[b] < 0) continue;
                mt.emplace_back(dof[a], dof[b], area / 12.0 * (a == b ? 2.0 : 1.0));
            }
    }
    reg.K.resize(ndof, ndof);
    reg.M.resize(ndof, ndof);
    reg.K.setFromTriplets(kt.begin(), kt.end());
    reg.M.setFromTriplets(mt.begin(), mt.end());

    // Connected components of the interior-DOF graph (through K's sparsity).
    reg.component_of_dof.assign(ndof, -1);
    for (int seed = 0; seed < ndof; ++seed) {
        if (reg.component_of_dof[seed] >= 0) continue;
        const int comp = reg.n_components++;
        std::vector<int> stack{seed};
        reg.component_of_dof[seed] = comp;
        while (!stack.empty()) {
            const int at = stack.back();
            stack.pop_back();
            for (SpMat::InnerIterator it(reg.K, at); it; ++it)
                if (reg.component_of_dof[it.row()] < 0) {
                    reg.component_of_dof[it.row()] = comp;
                    stack.push_back(static_cast<int>(it.row()));
                }
        }
    }
    return reg;
}

struct EigResult {
    double lambda = 0;
    double rayleigh_residual = 0;
    Eigen::VectorXd vec;
};

// Smallest eigenpair of K x = lambda M x by inverse iteration with the
// deterministic all-ones start vector.
inline EigResult smallest_eig(const SpMat& K, const SpMat& M, double rel_tol = 1e-8,
                              int max_iter = 500) {
    Eigen::SimplicialLDLT<SpMat> solver(K);
    if (solver.info() != Eigen::Success)
        fail(errc::bad_argument, "dirichlet eigensolve: factorization failed");
    Eigen::VectorXd x = Eigen::VectorXd::Ones(K.rows());
    double lambda = 0, prev = -1;
    for (int it = 0; it < max_iter; ++it) {
        x = solver.solve(M * x);
        const double mn = std::sqrt(x.dot(M * x));
        x /= mn;
        lambda = x.dot(K * x);
        if (prev > 0 && std::abs(lambda - prev) <= rel_tol * lambda) break;
        prev = lambda;
    }
    EigResult res;
    res.lambda = lambda;
    res.rayleigh_residual = std::abs(x.dot(K * x) / x.dot(M * x) - lambda);
    res.vec = x;
    return res;
}

}  // namespace detail

struct MeshEigen {
    double lambda1 = 0;
    double rayleigh_residual = 0;
    std::vector<double> component_lambdas;  // one per connected component
    std::vector<int> interior_vertices;
    Eigen::VectorXd eigenvector;            // of the minimizing component
};

inline MeshEigen dirichlet_lambda1_mesh(const SampledSurface& m, double r) {
    const auto reg = detail::build_region(m, r);
    MeshEigen out;
    out.interior_vertices = reg.vert_of_dof;
    if (reg.n_components == 1) {
        const auto res = detail::smallest_eig(reg.K, reg.M);
        out.lambda1 = res.lambda;
        out.rayleigh_residual = res.rayleigh_residual;
        out.component_lambdas = {res.lambda};
        out.eigenvector = res.vec;
        return out;
    }
    out.lambda1 = std::numeric_limits<double>::infinity();
    for (int comp = 0; comp < reg.n_components; ++comp) {
        std::vector<int> idx;
        for (int d = 0; d < static_cast<int>(reg.component_of_dof.size()); ++d)
            if (reg.component_of_dof[d] == comp) idx.push_back(d);
        if (idx.size() < 10) continue;
        SpMat Kc(idx.size(), idx.size()), Mc(idx.size(), idx.size());
        std::vector<int> pos(reg.component_of_dof.size(), -1);
        for (std::size_t i = 0; i < idx.size(); ++i) pos[idx[i]] = static_cast<int>(i);
        std::vector<Eigen::Triplet<double>> kt, mt;
        for (int d : idx)
            for (SpMat::InnerIterator it(reg.K, d); it; ++it)
                if (pos[it.row()] >= 0) kt.emplace_back(pos[it.row()], pos[d], it.value());
        for (int d : idx)
            for (SpMat::InnerIterator it(reg.M, d); it; ++it)
                if (pos[it.row()] >= 0) mt.emplace_back(pos[it.row()], pos[d], it.value());
        Kc.setFromTriplets(kt.begin(), kt.end());
        Mc.setFromTriplets(mt.begin(), mt.end());
        const auto res = detail::smallest_eig(Kc, Mc);
        out.component_lambdas.push_back(res.lambda);
        if (res.lambda < out.lambda1) {
            out.lambda1 = res.lambda;
            out.rayleigh_residual = res.rayleigh_residual;
        }
    }
    if (out.component_lambdas.empty())
        fail(errc::empty_range, "dirichlet_lambda1_mesh: no usable component");
    return out;
}

struct BartaSandwich {
    double inf_ratio = 0;
    double sup_ratio = 0;
    double lambda1_mesh = 0;
};

// Discrete Barta containment: ratios (K f)_i / (M f)_i at interior vertices
// bracket the discrete lambda_1 for any positive trial vanishing on the
// boundary.
inline BartaSandwich barta_sandwich_check(const SampledSurface& m, double r,
                                          const std::function<double(double, double, double)>& trial) {
    const auto reg = detail::build_region(m, r);
    Eigen::VectorXd f(reg.vert_of_dof.size());
    for (std::size_t d = 0; d < reg.vert_of_dof.size(); ++d) {
        const auto& vd = m.verts[reg.vert_of_dof[d]];
        f[d] = trial(vd.u, vd.v, vd.R);
        if (!(f[d] > 0.0))
            fail(errc::bad_argument, "barta_sandwich_check: trial <= 0 at an interior vertex");
    }
    const Eigen::VectorXd Kf = reg.K * f;
    const Eigen::VectorXd Mf = reg.M * f;
    BartaSandwich out;
    out.inf_ratio = std::numeric_limits<double>::infinity();
    out.sup_ratio = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < f.size(); ++i) {
        const double ratio = Kf[i] / Mf[i];
        out.inf_ratio = std::min(out.inf_ratio, ratio);
        out.sup_ratio = std::max(out.sup_ratio, ratio);
    }
    out.lambda1_mesh = dirichlet_lambda1_mesh(m, r).lambda1;
    return out;
}

struct SpectralEstimate {
    double r = 0;
    double lambda1_mesh = 0;
    double lambda1_barta = 0;
    int l_used = 0;
    double t_c = 0;
    double H0 = 0;
    double v_at_tc = 0;
    double prefactor = 0;
};

// Transplanted-eigenfunction upper bound for lambda_1(D_r):
//   [1 + (2m + H0)/v(t_c)] * lambda_1(B_r in R^l),
// l the smallest integer with 2m - (l-1)(1 - Lambda_c(t_c)^2) + c <= 0.
inline SpectralEstimate barta_transplant_bound(int m_dim, const TamednessReport& tamed, double c,
                                               const SampledSurface& mesh, double r) {
    if (tamed.verdict != extrinsic::Verdict::tamed)
        fail(errc::hypothesis_violation, "barta_transplant_bound: tamed verdict required");
    if (!(c > tamed.a_estimate && c < 1.0))
        fail(errc::hypothesis_violation, "barta_transplant_bound: need c in (a_estimate, 1)");
    if (!tamed.t_c)
        fail(errc::hypothesis_violation, "barta_transplant_bound: no t_c for this c");
    const double t_c = *tamed.t_c;
    if (!(t_c < r))
        fail(errc::hypothesis_violation, "barta_transplant_bound: ball smaller than compact core");

    // Default delta from the radial-flow decay shape: sin beta_max(t_c) * t_c / t.
    double sin_beta_max = 0;
    for (const auto& vd : mesh.verts)
        if (vd.R >= t_c && vd.R <= 1.05 * t_c) sin_beta_max = std::max(sin_beta_max, vd.defect);
    const double lam_tc = sin_beta_max + c;  // Lambda_c(t_c) with the default delta
    if (!(lam_tc < 1.0))
        fail(errc::hypothesis_violation,
             "barta_transplant_bound: comparison regime not yet entered (Lambda_c >= 1)");

    SpectralEstimate est;
    est.r = r;
    est.t_c = t_c;
    const double gap = 1.0 - lam_tc * lam_tc;
    est.l_used = 1 + static_cast<int>(std::ceil((2.0 * m_dim + c) / gap));
    est.l_used = std::max(est.l_used, 2);

    const auto ef = comparison::dirichlet_eigen_ball(est.l_used, r);
    est.v_at_tc = ef.v_at(t_c);
    if (!(est.v_at_tc > 0.0))
        fail(errc::hypothesis_violation, "barta_transplant_bound: v(t_c) not positive");

    est.H0 = 0.0;
    if (!mesh.imm.known_minimal)
        for (const auto& vd : mesh.verts)
            if (vd.R <= t_c) est.H0 = std::max(est.H0, vd.R * vd.H_norm);

    est.prefactor = 1.0 + (2.0 * m_dim + est.H0) / est.v_at_tc;
    est.lambda1_barta = est.prefactor * ef.lambda1;
    return est;
}

struct ToneReport {
    std::vector<SpectralEstimate> estimates;
    double fitted_exponent = 0;  // log-log slope of lambda1_mesh vs r
};

// Per-radius mesh eigenvalue and transplant bound, each on a window sized to
// its own radius so the boundary-resolution error stays proportional.
inline ToneReport tone_decay_report(const ParametricImmersion& imm,
                                    const std::vector<double>& radii,
                                    const TamednessReport& tamed, double c, int resolution = 256) {
    ToneReport rep;
    std::vector<double> lr, ll;
    for (double r : radii) {
        const auto window = extrinsic::window_for_radius(imm, r);
        const auto mesh = discretize::triangulate(imm, window, resolution, resolution);
        SpectralEstimate est = barta_transplant_bound(2, tamed, c, mesh, r);
        est.lambda1_mesh = dirichlet_lambda1_mesh(mesh, r).lambda1;
        rep.estimates.push_back(est);
        lr.push_back(std::log(r));
        ll.push_back(std::log(est.lambda1_mesh));
    }
    if (lr.size() >= 2) rep.fitted_exponent = num::least_squares(lr, ll).slope;
    return rep;
}

}  // namespace tamed::tone
