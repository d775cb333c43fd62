// ADMM splitting for min Tr(G s) over {s >= 0, Tr s = 1, s^T >= 0}.
//
// The partial transpose is an isometry in the Hilbert-Schmidt norm, so the
// s-update reduces to a projection onto the spectraplex and the t-update to a
// PSD projection. A feasible primal point is recovered by mixing in I/d, and
// any Z >= 0 certifies the lower bound lambda_min(G - Z^T).

#include "qrel/free_sets.hpp"
#include "qrel/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace qrel {

namespace {

using Index = Eigen::Index;

/// Euclidean projection of v onto {x >= 0, sum x = 1}.
RealVector project_simplex(const RealVector& v) {
    std::vector<double> u(v.data(), v.data() + v.size());
    std::sort(u.begin(), u.end(), std::greater<>());
    double cumsum = 0, theta = 0;
    for(std::size_t i = 0; i < u.size(); ++i) {
        cumsum += u[i];
        double t = (cumsum - 1.0) / static_cast<double>(i + 1);
        if(u[i] - t > 0) theta = t;
    }
    return (v.array() - theta).cwiseMax(0.0).matrix();
}

Matrix project_spectraplex(const Matrix& h) {
    auto spec = spectrum((h + h.adjoint()) / 2.0);
    RealVector w = project_simplex(spec.values);
    return spec.vectors * w.asDiagonal() * spec.vectors.adjoint();
}

struct Candidate {
    Matrix state;
    double primal;
};

Candidate feasible_point(const Matrix& s, const Matrix& g, const SystemLayout& layout, const std::vector<std::size_t>& transposed) {
    const Index d = s.rows();
    Matrix sym = (s + s.adjoint()) / 2.0;
    double lo = min_eigenvalue(partial_transpose(sym, layout, transposed));
    double slo = min_eigenvalue(sym);
    double worst = std::min(lo, slo);
    Matrix out = sym;
    if(worst < 0) {
        double p = -worst / (1.0 / static_cast<double>(d) - worst);
        out = (1 - p) * sym + p * Matrix::Identity(d, d) / static_cast<double>(d);
    }
    out /= out.trace().real();
    return {out, (g.array() * out.array().conjugate()).sum().real()};
}

double dual_bound(const Matrix& z, const Matrix& g, const SystemLayout& layout, const std::vector<std::size_t>& transposed) {
    Matrix zp = project_psd(z);
    return min_eigenvalue(g - partial_transpose(zp, layout, transposed));
}

}  // namespace

PptLinearSolution solve_ppt_linear(const HermitianOperator& g, const PptStates& set, const OracleConfig& cfg) {
    const SystemLayout& layout = set.layout;
    const auto& tp = set.transposed;
    if(static_cast<std::size_t>(g.dim()) != layout.total()) throw InvalidArgument("PPT oracle: operator does not match layout");
    const Matrix& gm = g.matrix();
    const Index d = gm.rows();

    const double scale = std::max(trace_norm(gm) / static_cast<double>(d), 1e-12);
    double step = scale;  // ADMM penalty, in units of G
    const double target = cfg.ppt_gap * std::max(1.0, scale);

    // unconstrained-by-PPT bound is a valid dual start (Z = 0)
    double best_dual = min_eigenvalue(gm);
    Candidate best{Matrix::Identity(d, d) / static_cast<double>(d), gm.trace().real() / static_cast<double>(d)};

    Matrix t = Matrix::Identity(d, d) / static_cast<double>(d);
    Matrix u = Matrix::Zero(d, d);
    Matrix s = t;
    PptLinearSolution out;
    int it = 0;
    for(; it < cfg.ppt_max_iter; ++it) {
        s = project_spectraplex(Matrix(partial_transpose(Matrix(t - u), layout, tp) - gm / step));
        Matrix st = partial_transpose(s, layout, tp);
        Matrix t_prev = t;
        t = project_psd(st + u);
        u += st - t;

        // residual balancing
        if(it % 10 == 9) {
            const double r_primal = (st - t).norm();
            const double r_dual = (t - t_prev).norm();
            if(r_primal > 10 * r_dual) {
                step *= 2;
                u /= 2;
            } else if(r_dual > 10 * r_primal) {
                step /= 2;
                u *= 2;
            }
        }

        if(it % 20 == 19 || it + 1 == cfg.ppt_max_iter) {
            Candidate c = feasible_point(s, gm, layout, tp);
            if(c.primal < best.primal) best = c;
            // the scaled dual variable y = step * u pairs with the constraint s^T - t = 0; Z = -y
            best_dual = std::max(best_dual, dual_bound(Matrix(-step * u), gm, layout, tp));
            if(best.primal - best_dual <= target) {
                out.converged = true;
                ++it;
                break;
            }
        }
    }
    out.state = DensityOperator(best.state, layout);
    out.primal = g.pair(out.state);
    out.dual = std::min(best_dual, out.primal);
    out.iterations = it;
    return out;
}

}  // namespace qrel
