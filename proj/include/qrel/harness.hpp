#pragma once

#include "qrel/sequences.hpp"
#include "qrel/solver.hpp"

#include <optional>
#include <string>
#include <vector>

namespace qrel {

/// Witnesses omega_1..omega_N, omega_0, each asserted to lie in the free set.
struct WitnessSequence {
    std::vector<DensityOperator> prefix;
    DensityOperator limit;
    std::vector<std::string> notes;  // membership note per element, limit last

    const DensityOperator& at(std::size_t n) const { return n == 0 ? limit : prefix.at(n - 1); }
};

/// omega_n = product of the single-party marginals of rho_n (always fully separable).
WitnessSequence marginal_product_witness(const StateSequence& seq);

enum class ConditionVerdict { Holds, Fails, InfiniteValues };
std::string to_string(ConditionVerdict v);

struct WitnessReport {
    std::vector<ExtendedReal> relative_entropy;  // D(rho_n || omega_n), index 0 = limit
    std::vector<ExtendedReal> cross_entropy;     // Tr rho_n(-ln omega_n)
    ConditionVerdict relative_entropy_condition = ConditionVerdict::Fails;
    ConditionVerdict cross_entropy_condition = ConditionVerdict::Fails;
};

/// Tail check of lim D(rho_n || omega_n) = D(rho_0 || omega_0) < inf and of the
/// cross-entropy version, over the last `tail` indices with tolerance `tol`.
WitnessReport check_witness_condition(const StateSequence& seq, const WitnessSequence& wit, double tol, std::size_t tail = 3);

struct HarnessConfig {
    SolverConfig solver;
    double tau = 5e-3;   // nats
    std::size_t tail = 3;
};

enum class Observed { Yes, No, Inconclusive };
enum class Predicted { Converges, NoPrediction };
std::string to_string(Observed o);
std::string to_string(Predicted p);

struct ReportRow {
    std::size_t n = 0;  // 0 = limit
    double trace_distance = 0.0;
    double lower = 0.0;
    double upper = 0.0;
    double gap = 0.0;
    double mutual_information = 0.0;
};

struct ModelReport {
    std::string model;
    std::vector<ReportRow> rows;  // n = 1..N, then n = 0
    Observed observed = Observed::Inconclusive;
    Predicted predicted = Predicted::NoPrediction;
    std::vector<std::string> clauses;  // sufficient conditions that fired
    bool agreement = true;             // a "converges" prediction was not contradicted by "no"
    double separation = 0.0;           // min over tail of the bracket separation from the limit
    bool lsc_ok = true;                // value at the limit <= min tail upper bound + tau
    bool flagged = false;

    const ReportRow& limit_row() const { return rows.back(); }
};

struct PremiseCheck {
    std::string name;
    bool passed = false;
    std::string detail;
};

struct ImplicationCheck {
    std::string premise_model;
    std::string conclusion_model;
    Observed premise = Observed::Inconclusive;
    Observed conclusion = Observed::Inconclusive;
    bool violated = false;  // premise yes, conclusion no
};

struct ConvergenceReport {
    std::string family;
    std::vector<ModelReport> models;
    std::vector<PremiseCheck> premises;
    std::vector<ImplicationCheck> implications;  // separable -> pi / PPT
    std::vector<std::string> nesting_violations;

    const ModelReport* find(const std::string& model) const;
    bool ok() const;  // premises hold, no agreement/implication/nesting violations
};

/// Verdict from finite-prefix brackets: "yes" when every tail window agrees with
/// the limit within tau, "inconclusive" when any relevant gap exceeds tau/2.
Observed observe(const std::vector<ReportRow>& rows, double tau, std::size_t tail);

/// Re-validates the premise a generator established (eigenchecks, normalization, Kraus bounds).
std::vector<PremiseCheck> revalidate(const StateSequence& seq);

/// Which sufficient conditions predict convergence of D_F along seq. `tau`/`tail`
/// set the finite surrogate for the mutual-information clause.
std::vector<std::string> predicted_clauses(const StateSequence& seq, const FreeSetModel& model, double tau, std::size_t tail);

ConvergenceReport run_continuity_harness(const StateSequence& seq, const std::vector<FreeSetModel>& models, const HarnessConfig& cfg,
                                         const std::vector<std::string>& asserted_clauses = {});

struct MarginalReport {
    std::vector<std::size_t> block;
    std::vector<std::size_t> complement;
    std::vector<ReportRow> block_rows;       // E_R of the B-marginals
    std::vector<ReportRow> complement_rows;  // E_R of the complementary marginals
    std::vector<double> cut_information;     // I(B : B-bar), index 0 = limit
    Observed joint = Observed::Inconclusive;
    Observed block_observed = Observed::Inconclusive;
    Observed complement_observed = Observed::Inconclusive;
    bool cut_information_converges = false;
    // forward: joint convergence predicts both marginals converge
    Predicted forward_predicted = Predicted::NoPrediction;
    // backward: both marginals and the cut information predict joint convergence
    Predicted backward_predicted = Predicted::NoPrediction;
    bool forward_agreement = true;
    bool backward_agreement = true;
};

/// E_R along the B and complementary marginals plus I(B:B-bar), with the
/// predicted/observed pairs for both directions (joint <-> marginals).
MarginalReport marginal_reports(const StateSequence& seq, const std::vector<std::size_t>& block, const HarnessConfig& cfg);

}  // namespace qrel
