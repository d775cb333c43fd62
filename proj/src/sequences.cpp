#include "qrel/sequences.hpp"
#include "qrel/linalg.hpp"
#include "qrel/random.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace qrel {

using Index = Eigen::Index;

namespace {

constexpr double kKrausSlack = 1e-10;
constexpr double kDegenerateNorm = 1e-12;
constexpr double kDominanceSlack = 1e-12;
constexpr int kDominanceAttempts = 1000;

std::string fmt(double x) {
    std::ostringstream os;
    os.precision(17);
    os << x;
    return os.str();
}

/// Last index after which trace distances are non-increasing.
std::size_t declared_burn_in(const std::vector<double>& dist) {
    std::size_t burn = 0;
    for(std::size_t i = 1; i < dist.size(); ++i)
        if(dist[i] > dist[i - 1] + 1e-12) burn = i;  // dist[i] is rho_{i+1}
    return burn;
}

}  // namespace

// ---------------------------------------------------------------- Kraus operations

KrausOperation::KrausOperation(std::vector<Matrix> kraus, SystemLayout input, SystemLayout output)
    : kraus_(std::move(kraus)), input_(std::move(input)), output_(std::move(output)) {
    if(kraus_.empty()) throw InvalidArgument("quantum operation without Kraus operators");
    for(const auto& k : kraus_)
        if(static_cast<std::size_t>(k.rows()) != output_.total() || static_cast<std::size_t>(k.cols()) != input_.total())
            throw InvalidArgument("Kraus operator shape does not match input/output layouts");
    if(kraus_norm() > 1 + kKrausSlack) throw InvalidArgument("Kraus operators are not trace non-increasing (sum K^dagger K exceeds I)");
}

KrausOperation KrausOperation::identity(const SystemLayout& layout) {
    auto d = static_cast<Index>(layout.total());
    return KrausOperation({Matrix::Identity(d, d)}, layout, layout);
}

KrausOperation KrausOperation::local_unitary(const std::vector<Matrix>& unitaries, const SystemLayout& layout) {
    if(unitaries.size() != layout.parties()) throw InvalidArgument("one unitary per party expected");
    Matrix u = Matrix::Ones(1, 1);
    for(std::size_t p = 0; p < unitaries.size(); ++p) {
        if(static_cast<std::size_t>(unitaries[p].rows()) != layout.dim(p)) throw InvalidArgument("local unitary of wrong dimension");
        u = kron(u, unitaries[p]);
    }
    return KrausOperation({u}, layout, layout);
}

double KrausOperation::kraus_norm() const {
    Matrix s = Matrix::Zero(kraus_.front().cols(), kraus_.front().cols());
    for(const auto& k : kraus_) s += k.adjoint() * k;
    return Eigen::SelfAdjointEigenSolver<Matrix>(s, Eigen::EigenvaluesOnly).eigenvalues().maxCoeff();
}

Matrix KrausOperation::apply(const Matrix& rho) const {
    Matrix out = Matrix::Zero(kraus_.front().rows(), kraus_.front().rows());
    for(const auto& k : kraus_) out += k * rho * k.adjoint();
    return (out + out.adjoint()) / 2.0;
}

PositiveOperator KrausOperation::apply(const PositiveOperator& rho) const {
    if(!(rho.layout() == input_) && static_cast<std::size_t>(rho.dim()) != input_.total())
        throw InvalidArgument("operation input does not match the state");
    return PositiveOperator(apply(rho.matrix()), output_);
}

Matrix KrausOperation::choi() const {
    const auto din = static_cast<Index>(input_.total());
    const auto dout = static_cast<Index>(output_.total());
    Matrix c = Matrix::Zero(din * dout, din * dout);
    for(Index i = 0; i < din; ++i)
        for(Index j = 0; j < din; ++j) {
            Matrix eij = Matrix::Zero(din, din);
            eij(i, j) = 1;
            Matrix out = Matrix::Zero(dout, dout);
            for(const auto& k : kraus_) out += k * eij * k.adjoint();
            c.block(i * dout, j * dout, dout, dout) = out;
        }
    return c;
}

std::string to_string(ConeCheck c) {
    switch(c) {
        case ConeCheck::Verified: return "verified";
        case ConeCheck::Violated: return "violated";
        case ConeCheck::Undetermined: return "undetermined";
    }
    return "?";
}

// ---------------------------------------------------------------- sequences

std::vector<double> StateSequence::trace_distances() const {
    std::vector<double> out;
    for(const auto& r : prefix) out.push_back(trace_distance(r, limit));
    return out;
}

void validate_sequence(const StateSequence& seq) {
    if(seq.prefix.empty()) throw InvalidArgument("sequence prefix is empty");
    for(const auto& r : seq.prefix)
        if(!(r.layout() == seq.limit.layout())) throw InvalidArgument("sequence states do not share one layout");
    auto dist = seq.trace_distances();
    for(std::size_t i = seq.burn_in + 1; i < dist.size(); ++i)
        if(dist[i] > dist[i - 1] + 1e-12)
            throw InvalidArgument("trace distance to the limit increases at n = " + std::to_string(i + 1) + " after burn-in " + std::to_string(seq.burn_in));
}

StateSequence gen_constant(const DensityOperator& rho, std::size_t n) {
    if(n == 0) throw InvalidArgument("sequence length must be positive");
    StateSequence seq;
    seq.prefix.assign(n, rho);
    seq.limit = rho;
    seq.family = "constant";
    seq.premise = ConstantPremise{};
    return seq;
}

StateSequence gen_dominated(const DensityOperator& sigma, double c, std::size_t n, std::uint64_t seed, double delta) {
    if(n == 0) throw InvalidArgument("sequence length must be positive");
    if(!(c > 0 && c <= 1)) throw InvalidArgument("domination constant must lie in (0, 1]");
    if(delta < 0) throw InvalidArgument("perturbation size must be non-negative");
    const Index d = sigma.dim();
    StateSequence seq;
    seq.family = "dominated";
    seq.parameters = {{"c", fmt(c)}, {"delta", fmt(delta)}, {"seed", std::to_string(seed)}};
    seq.limit = sigma;
    for(std::size_t k = 1; k <= n; ++k) {
        Rng rng = make_rng(seed, k);
        const double size = delta / static_cast<double>(k);
        bool ok = false;
        for(int attempt = 0; attempt < kDominanceAttempts && !ok; ++attempt) {
            Matrix delta_n = Matrix::Zero(d, d);
            if(size > 0) {
                Matrix h = random_hermitian(d, rng);
                h -= (h.trace().real() / static_cast<double>(d)) * Matrix::Identity(d, d);
                delta_n = h * (size / trace_norm(h));
            }
            Matrix rho = sigma.matrix() + delta_n;
            if(min_eigenvalue(rho) < 0) continue;
            if(min_eigenvalue(sigma.matrix() - c * rho) < -kDominanceSlack) continue;
            seq.prefix.emplace_back(rho, sigma.layout());
            ok = true;
        }
        if(!ok) throw Error("gen_dominated: no dominated perturbation found for n = " + std::to_string(k) + " within " + std::to_string(kDominanceAttempts) + " draws");
    }
    seq.premise = DominancePremise{sigma, c};
    return seq;
}

StateSequence gen_mixture(SequencePtr a, SequencePtr b, std::vector<double> weights, double limit_weight) {
    if(!a || !b) throw InvalidArgument("gen_mixture: missing component sequence");
    if(a->size() != b->size() || weights.size() != a->size()) throw InvalidArgument("gen_mixture: length mismatch");
    if(!(a->layout() == b->layout())) throw InvalidArgument("gen_mixture: layouts differ");
    for(double p : weights)
        if(p < 0 || p > 1) throw InvalidArgument("gen_mixture: weight outside [0,1]");
    if(limit_weight < 0 || limit_weight > 1) throw InvalidArgument("gen_mixture: limit weight outside [0,1]");
    StateSequence seq;
    seq.family = "mixture";
    seq.parameters = {{"p0", fmt(limit_weight)}, {"a", a->family}, {"b", b->family}};
    for(std::size_t i = 0; i < weights.size(); ++i) seq.prefix.push_back(mix(a->prefix[i], b->prefix[i], weights[i]));
    seq.limit = mix(a->limit, b->limit, limit_weight);
    seq.burn_in = declared_burn_in(seq.trace_distances());
    seq.premise = MixturePremise{std::move(a), std::move(b), std::move(weights), limit_weight};
    return seq;
}

StateSequence gen_pushforward(SequencePtr base, std::vector<KrausOperation> ops, const KrausOperation& limit_op,
                              const std::vector<std::pair<FreeSetModel, FreeSetModel>>& check_models, std::uint64_t seed) {
    if(!base) throw InvalidArgument("gen_pushforward: missing input sequence");
    if(ops.size() != base->size()) throw InvalidArgument("gen_pushforward: one operation per sequence index expected");
    PushforwardPremise premise;
    StateSequence seq;
    seq.family = "pushforward";
    seq.parameters = {{"base", base->family}, {"kraus", std::to_string(limit_op.kraus().size())}};

    auto push = [&](const KrausOperation& op, const DensityOperator& rho, double& norm) {
        if(op.input().total() != base->layout().total()) throw InvalidArgument("gen_pushforward: operation input does not match the sequence");
        if(op.kraus_norm() > 1 + kKrausSlack) throw InvalidArgument("gen_pushforward: operation is not trace non-increasing");
        Matrix out = op.apply(rho.matrix());
        norm = out.trace().real();
        if(norm < kDegenerateNorm) throw Error("gen_pushforward: degenerate operation, Tr Phi(rho) = " + fmt(norm));
        return DensityOperator(Matrix(out / norm), op.output());
    };
    for(std::size_t i = 0; i < ops.size(); ++i) {
        double c = 0;
        seq.prefix.push_back(push(ops[i], base->prefix[i], c));
        premise.norms.push_back(c);
    }
    seq.limit = push(limit_op, base->limit, premise.limit_norm);

    for(std::size_t m = 0; m < check_models.size(); ++m) {
        const auto& [in, out] = check_models[m];
        ConeCheck worst = ConeCheck::Verified;
        for(std::size_t i = 0; i <= ops.size(); ++i) {
            const KrausOperation& op = i < ops.size() ? ops[i] : limit_op;
            ConeCheck c = check_free_cone(op, in, out, 8, seed + 7919 * (i + 1) + m);
            if(c == ConeCheck::Violated) {
                worst = c;
                break;
            }
            if(c == ConeCheck::Undetermined) worst = c;
        }
        premise.cone[out.describe()] = worst;
    }
    premise.base = std::move(base);
    premise.ops = std::move(ops);
    premise.limit_op = std::make_shared<KrausOperation>(limit_op);
    seq.burn_in = declared_burn_in(seq.trace_distances());
    seq.premise = std::move(premise);
    return seq;
}

Vector embedded_max_entangled(std::size_t d, std::size_t ambient) {
    if(d == 0 || d > ambient) throw InvalidArgument("embedded dimension exceeds the ambient factor");
    const auto D = static_cast<Index>(ambient);
    Vector v = Vector::Zero(D * D);
    for(Index i = 0; i < static_cast<Index>(d); ++i) v(i * D + i) = 1.0 / std::sqrt(static_cast<double>(d));
    return v;
}

StateSequence gen_lsc_gap(const std::vector<std::size_t>& dims, const std::vector<double>& weights) {
    if(dims.empty() || dims.size() != weights.size()) throw InvalidArgument("gen_lsc_gap: dimension and weight schedules must have equal, positive length");
    for(std::size_t i = 0; i < dims.size(); ++i) {
        if(dims[i] < 1) throw InvalidArgument("gen_lsc_gap: dimensions must be positive");
        if(i && dims[i] < dims[i - 1]) throw InvalidArgument("gen_lsc_gap: dimension schedule must be non-decreasing");
        if(weights[i] < 0 || weights[i] > 1) throw InvalidArgument("gen_lsc_gap: weights must lie in [0,1]");
    }
    const std::size_t ambient = *std::max_element(dims.begin(), dims.end());
    if(ambient > kLscAmbientCap) throw InvalidArgument("gen_lsc_gap: schedule exceeds the ambient cap of " + std::to_string(kLscAmbientCap) + " per factor");
    const std::size_t D = std::max<std::size_t>(ambient, 2);
    SystemLayout layout({D, D});
    Vector zero = Vector::Zero(static_cast<Index>(D * D));
    zero(0) = 1;
    const Matrix product = zero * zero.adjoint();

    StateSequence seq;
    seq.family = "lsc_gap";
    seq.parameters = {{"ambient", std::to_string(D)}};
    for(std::size_t i = 0; i < dims.size(); ++i) {
        Vector phi = embedded_max_entangled(dims[i], D);
        seq.prefix.emplace_back(Matrix((1 - weights[i]) * product + weights[i] * phi * phi.adjoint()), layout);
    }
    seq.limit = DensityOperator(product, layout);
    seq.burn_in = declared_burn_in(seq.trace_distances());
    seq.premise = LscGapPremise{dims, weights};
    return seq;
}

// ---------------------------------------------------------------- free-cone checks

namespace {

/// Realignment test: K = A (x) B across the cut `block` | rest.
bool product_across(const Matrix& k, const SystemLayout& in, const SystemLayout& out, const std::vector<std::size_t>& block) {
    if(in.parties() != out.parties()) return false;
    std::vector<std::size_t> rest;
    for(std::size_t p = 0; p < in.parties(); ++p)
        if(std::find(block.begin(), block.end(), p) == block.end()) rest.push_back(p);
    if(rest.empty() || block.empty()) return true;
    std::vector<std::size_t> order = block;
    order.insert(order.end(), rest.begin(), rest.end());
    // view K as a vector in (out (x) in) with parties interleaved per original party
    std::vector<std::size_t> joint_dims;
    for(std::size_t p = 0; p < in.parties(); ++p) joint_dims.push_back(out.dim(p));
    for(std::size_t p = 0; p < in.parties(); ++p) joint_dims.push_back(in.dim(p));
    SystemLayout joint(joint_dims);
    Vector flat(k.size());
    for(Index r = 0; r < k.rows(); ++r)
        for(Index c = 0; c < k.cols(); ++c) flat(r * k.cols() + c) = k(r, c);
    std::vector<std::size_t> perm;
    const std::size_t m = in.parties();
    for(auto p : block) perm.push_back(p);
    for(auto p : block) perm.push_back(m + p);
    for(auto p : rest) perm.push_back(p);
    for(auto p : rest) perm.push_back(m + p);
    Vector arranged = permute_subsystems(flat, joint, perm);
    std::size_t left = 1;
    for(auto p : block) left *= out.dim(p) * in.dim(p);
    Matrix realigned = Eigen::Map<const Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
        arranged.data(), static_cast<Index>(left), arranged.size() / static_cast<Index>(left));
    Eigen::JacobiSVD<Matrix> svd(realigned);
    auto s = svd.singularValues();
    return s.size() < 2 || s(1) <= 1e-10 * std::max(s(0), 1e-300);
}

bool fully_local(const KrausOperation& op) {
    for(const auto& k : op.kraus())
        for(std::size_t p = 0; p < op.input().parties(); ++p)
            if(!product_across(k, op.input(), op.output(), {p})) return false;
    return true;
}

bool pure_product_across(const Vector& psi, const SystemLayout& layout, const Partition& partition) {
    Vector u = psi / psi.norm();
    DensityOperator rho = DensityOperator::pure(u, layout);
    for(const auto& block : partition.blocks()) {
        if(block.size() == layout.parties()) continue;
        Matrix r = partial_trace(rho.matrix(), layout, block);
        if((r * r).trace().real() < 1 - 1e-9) return false;
    }
    return true;
}

std::vector<Partition> partitions_of(const FreeSetModel& model) {
    if(const auto* pi = std::get_if<PiSeparable>(&model.variant())) return pi->partitions.partitions();
    if(const auto* ppt = std::get_if<PptStates>(&model.variant())) {
        std::vector<std::size_t> rest;
        for(std::size_t p = 0; p < ppt->layout.parties(); ++p)
            if(std::find(ppt->transposed.begin(), ppt->transposed.end(), p) == ppt->transposed.end()) rest.push_back(p);
        return {Partition({ppt->transposed, rest}, ppt->layout.parties())};
    }
    return {Partition::finest(model.layout().parties())};
}

}  // namespace

ConeCheck check_free_cone(const KrausOperation& op, const FreeSetModel& in, const FreeSetModel& out, int samples, std::uint64_t seed) {
    if(op.input().total() != in.layout().total() || op.output().total() != out.layout().total())
        throw InvalidArgument("free-cone check: models do not match the operation");
    const SystemLayout& lin = in.layout();
    const SystemLayout& lout = out.layout();
    const bool same_kind = in.describe() == out.describe() && lin.parties() == lout.parties();
    if(same_kind && !in.is_hull() && fully_local(KrausOperation(op.kraus(), lin, lout))) return ConeCheck::Verified;

    if(in.is_hull() || out.is_hull() || in.is_ppt()) {
        // necessary condition only: outputs of sampled free states must pass PPT across the output cuts
        if(out.is_hull()) return ConeCheck::Undetermined;
        for(int s = 0; s < samples; ++s) {
            auto omega = sample_free_state(in, seed + static_cast<std::uint64_t>(s));
            Matrix y = op.apply(omega.matrix());
            double t = y.trace().real();
            if(t < kDegenerateNorm) continue;
            DensityOperator state(Matrix(y / t), lout);
            for(const auto& part : partitions_of(out))
                if(part.blocks().size() == 2 && !is_ppt(state, part.blocks().back(), 1e-9)) return ConeCheck::Violated;
        }
        return ConeCheck::Undetermined;
    }

    // extreme points of (pi-)separable inputs are block-product pure states; Phi maps
    // them into cone(F_out) if every Kraus image is a product across some output partition
    const auto in_parts = partitions_of(in);
    const auto out_parts = partitions_of(out);
    bool all_product = true;
    for(int s = 0; s < samples && all_product; ++s) {
        Rng rng = make_rng(seed, static_cast<std::uint64_t>(s));
        const auto grouping = group_layout(lin, in_parts[static_cast<std::size_t>(s) % in_parts.size()]);
        ProductPureState product{{}, grouping};
        for(std::size_t j = 0; j < grouping.grouped.parties(); ++j)
            product.factors.push_back(random_unit_vector(static_cast<Index>(grouping.grouped.dim(j)), rng));
        Vector psi = product.vector();
        for(const auto& k : op.kraus()) {
            Vector img = k * psi;
            if(img.squaredNorm() < kDegenerateNorm) continue;
            bool ok = std::any_of(out_parts.begin(), out_parts.end(), [&](const Partition& p) { return pure_product_across(img, lout, p); });
            if(!ok) {
                all_product = false;
                break;
            }
        }
    }
    if(all_product) return ConeCheck::Verified;
    for(int s = 0; s < samples; ++s) {
        auto omega = sample_free_state(in, seed + static_cast<std::uint64_t>(s));
        Matrix y = op.apply(omega.matrix());
        double t = y.trace().real();
        if(t < kDegenerateNorm) continue;
        DensityOperator state(Matrix(y / t), lout);
        if(out.is_separable())
            for(std::size_t p = 0; p < lout.parties(); ++p)
                if(lout.parties() > 1 && !is_ppt(state, {p}, 1e-9)) return ConeCheck::Violated;
    }
    return ConeCheck::Undetermined;
}

}  // namespace qrel
