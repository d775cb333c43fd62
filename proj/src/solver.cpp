#include "qrel/solver.hpp"
#include "qrel/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace qrel {

using Index = Eigen::Index;

HermitianOperator relent_gradient(const DensityOperator& rho, const DensityOperator& sigma, double tol) {
    if(rho.dim() != sigma.dim()) throw InvalidArgument("relent_gradient: dimension mismatch");
    auto proj = support_projector(sigma, tol);
    double leak = rho.trace() - rho.pair(proj);
    if(leak > tol) throw SupportViolation("relent_gradient: supp(rho) not contained in supp(sigma); D is infinite");
    // drop the (sub-threshold) weight outside the support before differentiating
    HermitianOperator inside(Matrix(proj.matrix() * rho.matrix() * proj.matrix()), rho.layout());
    auto dlog = frechet_log(sigma, inside, tol);
    const Index d = rho.dim();
    return HermitianOperator(Matrix(Matrix::Identity(d, d) - dlog.matrix()), rho.layout());
}

namespace {

/// D(rho || .) with rho's spectrum computed once.
class Objective {
public:
    Objective(const DensityOperator& rho, double tol) : rho_(rho), spec_(spectrum(rho.matrix())), tol_(tol) {
        for(Index i = 0; i < spec_.values.size(); ++i) {
            double p = spec_.values(i);
            if(p > 0) rho_log_rho_ += p * std::log(p);
        }
    }

    double operator()(const Matrix& sigma) const {
        auto s = spectrum(sigma);
        const double cut = tol_ * std::max(s.values.maxCoeff(), 0.0);
        Eigen::MatrixXd overlap = (spec_.vectors.adjoint() * s.vectors).cwiseAbs2();
        double cross = 0, leak = 0;
        for(Index i = 0; i < spec_.values.size(); ++i) {
            const double p = spec_.values(i);
            if(p <= 0) continue;
            for(Index j = 0; j < s.values.size(); ++j) {
                const double q = s.values(j);
                if(q > cut && q > 0)
                    cross += p * overlap(i, j) * std::log(q);
                else
                    leak += p * overlap(i, j);
            }
        }
        if(leak > tol_) return std::numeric_limits<double>::infinity();
        return rho_log_rho_ - cross + sigma.trace().real() - rho_.trace();
    }

private:
    const DensityOperator& rho_;
    Spectrum spec_;
    double tol_;
    double rho_log_rho_ = 0;
};

/// Golden-section minimization of a convex phi on [a, b]; the endpoints are
/// also tried. Returns (argmin, min).
template<typename Phi>
std::pair<double, double> golden_section(const Phi& phi, double a, double b, int evals) {
    const double inv_phi = (std::sqrt(5.0) - 1) / 2;
    const double lo = a, hi = b;
    double c = b - inv_phi * (b - a), d = a + inv_phi * (b - a);
    double fc = phi(c), fd = phi(d);
    for(int k = 2; k < evals; ++k) {
        if(fc <= fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = phi(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = phi(d);
        }
    }
    auto best = fc <= fd ? std::make_pair(c, fc) : std::make_pair(d, fd);
    for(double x : {lo, hi}) {
        double fx = phi(x);
        if(fx < best.second) best = {x, fx};
    }
    return best;
}

/// Convex combination of atoms (all members of the free set).
struct ActiveSet {
    std::vector<Matrix> atoms;
    std::vector<double> weights;

    Matrix combination() const {
        Matrix s = Matrix::Zero(atoms.front().rows(), atoms.front().cols());
        for(std::size_t i = 0; i < atoms.size(); ++i) s += weights[i] * atoms[i];
        return (s + s.adjoint()) / 2.0;
    }

    /// Index of an atom equal to m (entrywise within 1e-12), or atoms.size().
    std::size_t find(const Matrix& m) const {
        for(std::size_t i = 0; i < atoms.size(); ++i)
            if((atoms[i] - m).cwiseAbs().maxCoeff() < 1e-12) return i;
        return atoms.size();
    }

    void prune() {
        std::size_t out = 0;
        for(std::size_t i = 0; i < atoms.size(); ++i) {
            if(weights[i] <= 0) continue;
            atoms[out] = std::move(atoms[i]);
            weights[out] = weights[i];
            ++out;
        }
        atoms.resize(out);
        weights.resize(out);
    }
};

std::uint64_t iteration_seed(std::uint64_t seed, int k) {
    // splitmix64 step
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * static_cast<std::uint64_t>(k + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// I/d, or the vertex average for hulls; a member of the set with the largest support.
Matrix centre(const FreeSetModel& model) {
    const auto d = static_cast<Index>(model.layout().total());
    if(const auto* hull = std::get_if<ConvexHull>(&model.variant())) {
        Matrix c = Matrix::Zero(d, d);
        for(const auto& v : hull->vertices) c += v.matrix();
        return c / static_cast<double>(hull->vertices.size());
    }
    return Matrix::Identity(d, d) / static_cast<double>(d);
}

Matrix initial_point(const FreeSetModel& model, const SolverConfig& cfg, const Matrix& faithful) {
    const auto d = static_cast<Index>(model.layout().total());
    Matrix acc = Matrix::Zero(d, d);
    const int samples = std::max(cfg.init_samples, 1);
    for(int i = 0; i < samples; ++i) acc += sample_free_state(model, iteration_seed(cfg.oracle.seed, -1 - i)).matrix();
    acc /= static_cast<double>(samples);
    return (1 - cfg.faithful_blend) * acc + cfg.faithful_blend * faithful;
}

}  // namespace

SolverResult free_distance(const DensityOperator& rho, const FreeSetModel& model, const SolverConfig& cfg) {
    if(static_cast<std::size_t>(rho.dim()) != model.layout().total())
        throw InvalidArgument("state of dimension " + std::to_string(rho.dim()) + " does not match model layout " + model.layout().to_string());
    if(!(cfg.stop_gap > 0)) throw InvalidArgument("stopping gap must be positive");
    const SystemLayout& layout = model.layout();
    const Objective f(rho, cfg.support_tol);
    SolverResult out;

    if(const auto* hull = std::get_if<ConvexHull>(&model.variant()); hull && hull->vertices.size() == 1) {
        const auto& omega = hull->vertices.front();
        out.value = relative_entropy(rho, omega, cfg.support_tol);
        out.sigma_star = DensityOperator(omega.matrix(), layout);
        out.upper = out.lower = out.value.value();
        out.converged = out.certified = true;
        return out;
    }

    const Matrix mid = centre(model);
    ActiveSet active{{initial_point(model, cfg, mid)}, {1.0}};
    Matrix sigma = active.atoms.front();
    double fval = f(sigma);
    if(!cfg.warm_atoms.empty()) {
        if(cfg.warm_atoms.size() != cfg.warm_weights.size()) throw InvalidArgument("warm start: atoms and weights differ in length");
        ActiveSet warm{cfg.warm_atoms, cfg.warm_weights};
        // keep the faithful start inside with a small weight
        for(auto& w : warm.weights) w *= 1 - cfg.faithful_blend;
        warm.atoms.push_back(sigma);
        warm.weights.push_back(cfg.faithful_blend);
        warm.prune();
        Matrix s = warm.combination();
        if(s.rows() == sigma.rows() && std::abs(s.trace().real() - 1) < 1e-8) {
            double fw = f(s);
            if(fw < fval) {
                active = std::move(warm);
                sigma = std::move(s);
                fval = fw;
            }
        }
    }
    out.certified = !model.is_separable() && !model.is_pi_separable();
    if(std::isinf(fval)) {
        out.sigma_star = DensityOperator(sigma, layout);
        if(model.is_hull()) {
            // sigma has every vertex with positive weight, so its support is the largest in the hull
            out.value = ExtendedReal::infinity();
            out.upper = out.lower = std::numeric_limits<double>::infinity();
            out.converged = true;
            out.diagnostic = "supp(rho) not contained in the support of any hull element";
            return out;
        }
        throw SupportViolation("initial free state is not faithful");
    }

    double lower = -std::numeric_limits<double>::infinity();
    double mu = std::max(cfg.mix_start, 0.0);
    int k = 0;
    for(; k < cfg.max_iter; ++k) {
        HermitianOperator grad = relent_gradient(rho, DensityOperator(sigma, layout), cfg.support_tol);
        OracleConfig oc = cfg.oracle;
        oc.seed = iteration_seed(cfg.oracle.seed, k);
        LmoResult vertex = lmo(grad, model, oc);
        out.flagged = out.flagged || vertex.flagged;

        const double at_sigma = grad.pair(DensityOperator(sigma, layout));
        const double gap = at_sigma - vertex.value;
        lower = std::max(lower, fval - (at_sigma - vertex.floor));
        out.upper_history.push_back(fval);
        out.gap_history.push_back(gap);
        if(fval - lower <= cfg.stop_gap) {
            out.converged = true;
            break;
        }

        // restricted gap over (1 - mu) F + mu C
        const double at_mid = (grad.matrix().array() * mid.array().conjugate()).sum().real();
        if(mu > cfg.mix_min && at_sigma - ((1 - mu) * vertex.value + mu * at_mid) <= 0.25 * cfg.stop_gap) mu = std::max(mu / 10, cfg.mix_min);

        // Frank-Wolfe step on the segment (1 - lambda) v + lambda sigma
        const Matrix v = (1 - mu) * vertex.vertex.matrix() + mu * mid;
        auto [lam, fnew] = golden_section([&](double t) { return f(Matrix((1 - t) * v + t * sigma)); }, 1e-9, 1 - 1e-9, cfg.line_search_evals);
        if(fnew < fval) {
            for(auto& w : active.weights) w *= lam;
            std::size_t at = active.find(v);
            if(at == active.atoms.size()) {
                active.atoms.push_back(v);
                active.weights.push_back(1 - lam);
            } else {
                active.weights[at] += 1 - lam;
            }
            sigma = active.combination();
            fval = f(sigma);
        }

        // pairwise corrections inside the hull of the atoms found so far
        for(int c = 0; c < cfg.corrective_steps && active.atoms.size() > 1; ++c) {
            DensityOperator current(sigma, layout);
            HermitianOperator g = relent_gradient(rho, current, cfg.support_tol);
            std::size_t toward = 0, away = 0;
            double lo = std::numeric_limits<double>::infinity(), hi = -lo;
            for(std::size_t a = 0; a < active.atoms.size(); ++a) {
                double val = (g.matrix().array() * active.atoms[a].array().conjugate()).sum().real();
                if(val < lo) {
                    lo = val;
                    toward = a;
                }
                if(val > hi) {
                    hi = val;
                    away = a;
                }
            }
            if(hi - lo <= 0.1 * cfg.stop_gap || toward == away) break;
            const Matrix dir = active.atoms[toward] - active.atoms[away];
            const double wmax = active.weights[away];
            auto [gamma, fpair] = golden_section([&](double t) { return f(Matrix(sigma + t * dir)); }, 0.0, wmax, cfg.corrective_evals);
            if(!(fpair < fval)) break;
            active.weights[toward] += gamma;
            active.weights[away] -= gamma;
            if(gamma >= wmax) active.weights[away] = 0;
            active.prune();
            sigma = active.combination();
            fval = f(sigma);
        }
    }

    out.iterations = k;
    out.sigma_star = DensityOperator(sigma, layout);
    out.upper = fval;
    out.lower = std::min(lower, fval);
    out.fw_gap = out.upper - out.lower;
    out.value = fval;
    out.atoms = std::move(active.atoms);
    out.weights = std::move(active.weights);
    if(!out.converged) out.diagnostic = "iteration cap reached with gap " + std::to_string(out.fw_gap);
    if(out.flagged) out.diagnostic += (out.diagnostic.empty() ? "" : "; ") + std::string("oracle subsolver hit its iteration cap");
    return out;
}

}  // namespace qrel
