#include "qrel/entropy.hpp"
#include "qrel/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>

namespace qrel {

ExtendedReal operator*(double c, ExtendedReal a) {
    if(a.is_infinite()) return c == 0 ? ExtendedReal(0.0) : a;
    return ExtendedReal(c * a.value_);
}

std::string ExtendedReal::format(int precision) const {
    if(is_infinite()) return "inf";
    double v = value_;
    // avoid printing "-0.000000"
    if(std::abs(v) < 0.5 * std::pow(10.0, -precision)) v = 0.0;
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*f", precision, v);
    return buf;
}

double eta(double x) {
    return x > 0 ? -x * std::log(x) : 0.0;
}

ExtendedReal von_neumann_entropy(const PositiveOperator& p) {
    double tr = p.trace();
    if(tr <= 0) return 0.0;
    auto spec = spectrum(p.matrix());
    double s = 0;
    for(Eigen::Index i = 0; i < spec.values.size(); ++i) s += eta(spec.values(i));
    return s - eta(tr);
}

namespace {

void check_same_dim(const PositiveOperator& a, const PositiveOperator& b) {
    if(a.dim() != b.dim()) throw InvalidArgument("relative entropy of operators with different dimension");
}

}  // namespace

ExtendedReal relative_entropy(const PositiveOperator& rho, const PositiveOperator& sigma, double tol) {
    check_same_dim(rho, sigma);
    auto r = spectrum(rho.matrix());
    auto s = spectrum(sigma.matrix());
    const double smax = std::max(s.values.maxCoeff(), 0.0);
    const double cut = tol * smax;

    // overlaps |<phi_i|chi_j>|^2
    Eigen::MatrixXd overlap = (r.vectors.adjoint() * s.vectors).cwiseAbs2();
    double leak = 0;
    double cross = 0;
    double rho_log_rho = 0;
    for(Eigen::Index i = 0; i < r.values.size(); ++i) {
        const double p = std::max(r.values(i), 0.0);
        if(p <= 0) continue;
        rho_log_rho += p * std::log(p);
        for(Eigen::Index j = 0; j < s.values.size(); ++j) {
            const double q = s.values(j);
            if(q > cut && q > 0)
                cross += p * overlap(i, j) * std::log(q);
            else
                leak += p * overlap(i, j);
        }
    }
    if(leak > tol) return ExtendedReal::infinity();
    return rho_log_rho - cross + sigma.trace() - rho.trace();
}

ExtendedReal cross_entropy(const PositiveOperator& rho, const PositiveOperator& sigma, double tol) {
    check_same_dim(rho, sigma);
    auto proj = support_projector(sigma, tol);
    double leak = rho.trace() - rho.pair(proj);
    if(leak > tol) return ExtendedReal::infinity();
    auto log_sigma = log_on_support(sigma, tol);
    return -rho.pair(log_sigma);
}

ExtendedReal relative_entropy_expansion(const PositiveOperator& rho, const PositiveOperator& sigma, double tol) {
    ExtendedReal ce = cross_entropy(rho, sigma, tol);
    if(ce.is_infinite()) return ce;
    double tr = rho.trace();
    return ce.value() - von_neumann_entropy(rho).value() - eta(tr) + sigma.trace() - tr;
}

MutualInformation mutual_information(const DensityOperator& rho) {
    std::vector<std::vector<std::size_t>> groups;
    for(std::size_t p = 0; p < rho.layout().parties(); ++p) groups.push_back({p});
    return mutual_information(rho, groups);
}

MutualInformation mutual_information(const DensityOperator& rho, const std::vector<std::vector<std::size_t>>& groups) {
    const auto& layout = rho.layout();
    if(groups.size() < 2) throw InvalidArgument("mutual information needs at least two parties");
    std::vector<std::size_t> order;
    std::set<std::size_t> seen;
    for(const auto& g : groups) {
        if(g.empty()) throw InvalidArgument("mutual information: empty group");
        for(auto p : g) {
            if(p >= layout.parties()) throw InvalidArgument("mutual information: party index out of range");
            if(!seen.insert(p).second) throw InvalidArgument("mutual information: groups overlap");
            order.push_back(p);
        }
    }
    if(seen.size() != layout.parties()) throw InvalidArgument("mutual information: groups do not cover all parties");

    // bring rho into group order so the product of marginals lines up
    DensityOperator ordered(permute_subsystems(rho.matrix(), layout, order), layout.sublayout(order));
    std::vector<DensityOperator> marginals;
    double marginal_entropy = 0;
    for(const auto& g : groups) {
        marginals.push_back(partial_trace(rho, g));
        marginal_entropy += von_neumann_entropy(marginals.back()).value();
    }
    DensityOperator product = tensor(marginals);

    MutualInformation out;
    out.value = relative_entropy(ordered, DensityOperator(product.matrix(), ordered.layout()));
    out.entropy_sum = marginal_entropy - von_neumann_entropy(rho).value();
    if(out.value.is_finite()) out.discrepancy = std::abs(out.value.value() - out.entropy_sum.value());
    return out;
}

FidenResidual fiden_residual(const DensityOperator& rho, const DensityOperator& omega_a, const DensityOperator& omega_b, double tol) {
    if(rho.layout().parties() != 2) throw InvalidArgument("fiden_residual expects a bipartite state");
    auto rho_a = partial_trace(rho, {0});
    auto rho_b = partial_trace(rho, {1});
    if(rho_a.dim() != omega_a.dim() || rho_b.dim() != omega_b.dim()) throw InvalidArgument("fiden_residual: incompatible layouts");

    FidenResidual out;
    DensityOperator product(kron(omega_a.matrix(), omega_b.matrix()), rho.layout());
    out.lhs = relative_entropy(rho, product, tol);
    out.rhs = relative_entropy(rho_a, omega_a, tol) + relative_entropy(rho_b, omega_b, tol) + mutual_information(rho).value;
    if(out.lhs.is_finite() && out.rhs.is_finite()) {
        out.verdict = IdentityVerdict::Finite;
        out.residual = std::abs(out.lhs.value() - out.rhs.value());
    } else if(out.lhs.is_infinite() && out.rhs.is_infinite()) {
        out.verdict = IdentityVerdict::BothInfinite;
    } else {
        out.verdict = IdentityVerdict::Mismatch;
        out.residual = std::numeric_limits<double>::infinity();
    }
    return out;
}

std::string to_string(IdentityVerdict v) {
    switch(v) {
        case IdentityVerdict::Finite: return "finite";
        case IdentityVerdict::BothInfinite: return "both-infinite";
        case IdentityVerdict::Mismatch: return "mismatch";
    }
    return "?";
}

}  // namespace qrel
