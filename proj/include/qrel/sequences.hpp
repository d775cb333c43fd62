#pragma once

#include "qrel/free_sets.hpp"
#include "qrel/operators.hpp"

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <variant>
#include <vector>

namespace qrel {

/// Completely positive trace-non-increasing map given by Kraus operators.
class KrausOperation {
public:
    KrausOperation(std::vector<Matrix> kraus, SystemLayout input, SystemLayout output);

    static KrausOperation identity(const SystemLayout& layout);
    /// Conjugation by a product of local unitaries (one per party).
    static KrausOperation local_unitary(const std::vector<Matrix>& unitaries, const SystemLayout& layout);

    const std::vector<Matrix>& kraus() const { return kraus_; }
    const SystemLayout& input() const { return input_; }
    const SystemLayout& output() const { return output_; }

    /// Largest eigenvalue of sum K^dagger K.
    double kraus_norm() const;

    Matrix apply(const Matrix& rho) const;
    PositiveOperator apply(const PositiveOperator& rho) const;

    /// Choi matrix sum_ij |i><j| (x) Phi(|i><j|).
    Matrix choi() const;

private:
    std::vector<Matrix> kraus_;
    SystemLayout input_;
    SystemLayout output_;
};

/// Outcome of testing Phi(F_A) inside cone(F_B) on sampled free states.
enum class ConeCheck { Verified, Violated, Undetermined };
std::string to_string(ConeCheck c);

struct StateSequence;
using SequencePtr = std::shared_ptr<const StateSequence>;

struct ConstantPremise {};

struct DominancePremise {
    DensityOperator sigma;
    double c = 1.0;
};

struct MixturePremise {
    SequencePtr a;
    SequencePtr b;
    std::vector<double> weights;  // p_1..p_N
    double limit_weight = 0.0;    // p_0
};

struct PushforwardPremise {
    SequencePtr base;
    std::vector<KrausOperation> ops;  // Phi_1..Phi_N
    std::shared_ptr<const KrausOperation> limit_op;  // Phi_0
    std::vector<double> norms;        // c_n = Tr Phi_n(rho_n), n = 1..N
    double limit_norm = 0.0;          // c_0
    std::map<std::string, ConeCheck> cone;  // by model description
};

struct LscGapPremise {
    std::vector<std::size_t> dims;
    std::vector<double> weights;
};

using Premise = std::variant<ConstantPremise, DominancePremise, MixturePremise, PushforwardPremise, LscGapPremise>;

/// Finite prefix rho_1..rho_N of a sequence converging to `limit`, together with
/// the premise its generator established.
struct StateSequence {
    std::vector<DensityOperator> prefix;
    DensityOperator limit;
    std::string family;
    std::map<std::string, std::string> parameters;
    std::size_t burn_in = 0;  // trace distance to the limit is non-increasing for n > burn_in
    Premise premise;

    std::size_t size() const { return prefix.size(); }
    const SystemLayout& layout() const { return limit.layout(); }
    /// n = 0 is the limit, n = 1..N the prefix.
    const DensityOperator& at(std::size_t n) const { return n == 0 ? limit : prefix.at(n - 1); }

    std::vector<double> trace_distances() const;
};

/// Structural checks: shared layout, non-empty prefix, monotone trace distance after burn-in.
void validate_sequence(const StateSequence& seq);

/// rho_n = rho for every n.
StateSequence gen_constant(const DensityOperator& rho, std::size_t n);

/// rho_n = sigma + Delta_n with traceless Hermitian Delta_n of trace norm delta/n and
/// sigma - c rho_n >= -1e-12; limit sigma.
StateSequence gen_dominated(const DensityOperator& sigma, double c, std::size_t n, std::uint64_t seed, double delta = 0.05);

/// rho_n = p_n A_n + (1 - p_n) B_n; limit p_0 A_0 + (1 - p_0) B_0.
StateSequence gen_mixture(SequencePtr a, SequencePtr b, std::vector<double> weights, double limit_weight);

/// Normalized pushforwards c_n^{-1} Phi_n(rho_n), limit c_0^{-1} Phi_0(rho_0). Free-cone
/// preservation is tested for every model in `check_models` (input model, output model).
StateSequence gen_pushforward(SequencePtr seq, std::vector<KrausOperation> ops, const KrausOperation& limit_op,
                              const std::vector<std::pair<FreeSetModel, FreeSetModel>>& check_models = {}, std::uint64_t seed = 1);

/// Maximal ambient factor dimension for gen_lsc_gap.
inline constexpr std::size_t kLscAmbientCap = 4;

/// rho_n = (1 - eps_n)|00><00| + eps_n Phi+_{d_n} on a fixed [D, D] layout, D = max d_n.
StateSequence gen_lsc_gap(const std::vector<std::size_t>& dims, const std::vector<double>& weights);

/// Phi+ of local dimension d embedded in C^D (x) C^D.
Vector embedded_max_entangled(std::size_t d, std::size_t ambient);

/// Tests Phi(F_in) inside cone(F_out) on `samples` free states of the input model.
ConeCheck check_free_cone(const KrausOperation& op, const FreeSetModel& in, const FreeSetModel& out, int samples, std::uint64_t seed);

}  // namespace qrel
