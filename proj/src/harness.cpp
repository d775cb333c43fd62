#include "qrel/harness.hpp"
#include "qrel/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace qrel {

namespace {

constexpr double kPremiseTol = 1e-12;
constexpr double kMatchTol = 1e-10;

double max_abs(const Matrix& m) {
    return m.size() ? m.cwiseAbs().maxCoeff() : 0.0;
}

ExtendedReal mi_or_zero(const DensityOperator& rho) {
    if(rho.layout().parties() < 2) return 0.0;
    return mutual_information(rho).value;
}

/// Tail indices n = N-tail+1 .. N (at least 1).
std::vector<std::size_t> tail_indices(std::size_t n, std::size_t tail) {
    std::vector<std::size_t> out;
    std::size_t start = n > tail ? n - tail + 1 : 1;
    for(std::size_t i = start; i <= n; ++i) out.push_back(i);
    return out;
}

bool finite_free_distance(const DensityOperator& rho, const FreeSetModel& model) {
    if(const auto* hull = std::get_if<ConvexHull>(&model.variant())) {
        Matrix avg = Matrix::Zero(rho.dim(), rho.dim());
        for(const auto& v : hull->vertices) avg += v.matrix();
        avg /= static_cast<double>(hull->vertices.size());
        return relative_entropy(rho, DensityOperator(avg, rho.layout())).is_finite();
    }
    return true;  // I/d is free and D(rho || I/d) <= ln d
}

void append_premises(std::vector<PremiseCheck>& out, const std::vector<PremiseCheck>& sub, const std::string& prefix) {
    for(auto c : sub) {
        c.name = prefix + c.name;
        out.push_back(std::move(c));
    }
}

struct SolvedRows {
    std::vector<ReportRow> rows;
    bool flagged = false;
};

SolvedRows solve_rows(const StateSequence& seq, const FreeSetModel& model, const HarnessConfig& cfg, bool with_mi) {
    SolvedRows out;
    auto dist = seq.trace_distances();
    SolverConfig sc = cfg.solver;
    for(std::size_t k = 1; k <= seq.size() + 1; ++k) {
        const std::size_t n = k <= seq.size() ? k : 0;
        const DensityOperator& rho = seq.at(n);
        auto result = free_distance(rho, model, sc);
        sc.warm_atoms = result.atoms;
        sc.warm_weights = result.weights;
        out.flagged = out.flagged || result.flagged;
        ReportRow row;
        row.n = n;
        row.trace_distance = n ? dist[n - 1] : 0.0;
        row.lower = result.lower;
        row.upper = result.upper;
        row.gap = result.fw_gap;
        if(with_mi) row.mutual_information = mi_or_zero(rho).value();
        out.rows.push_back(row);
    }
    return out;
}

StateSequence marginal_sequence(const StateSequence& seq, const std::vector<std::size_t>& keep) {
    StateSequence out;
    for(const auto& r : seq.prefix) out.prefix.push_back(partial_trace(r, keep));
    out.limit = partial_trace(seq.limit, keep);
    out.family = "marginal(" + seq.family + ")";
    out.premise = ConstantPremise{};
    return out;
}

}  // namespace

// ---------------------------------------------------------------- witnesses

WitnessSequence marginal_product_witness(const StateSequence& seq) {
    WitnessSequence wit;
    auto product = [](const DensityOperator& rho) {
        std::vector<DensityOperator> marginals;
        for(std::size_t p = 0; p < rho.layout().parties(); ++p) marginals.push_back(partial_trace(rho, {p}));
        return tensor(marginals);
    };
    for(const auto& r : seq.prefix) {
        wit.prefix.push_back(product(r));
        wit.notes.emplace_back("product of single-party marginals: fully separable");
    }
    wit.limit = product(seq.limit);
    wit.notes.emplace_back("product of single-party marginals: fully separable");
    return wit;
}

std::string to_string(ConditionVerdict v) {
    switch(v) {
        case ConditionVerdict::Holds: return "holds";
        case ConditionVerdict::Fails: return "fails";
        case ConditionVerdict::InfiniteValues: return "infinite-values-encountered";
    }
    return "?";
}

WitnessReport check_witness_condition(const StateSequence& seq, const WitnessSequence& wit, double tol, std::size_t tail) {
    if(wit.prefix.size() != seq.size()) throw InvalidArgument("witness and state sequences differ in length");
    if(wit.notes.size() != wit.prefix.size() + 1) throw InvalidArgument("every witness needs a membership note");
    WitnessReport rep;
    for(std::size_t n = 0; n <= seq.size(); ++n) {
        if(wit.at(n).dim() != seq.at(n).dim()) throw InvalidArgument("witness layout differs from the state layout");
        rep.relative_entropy.push_back(relative_entropy(seq.at(n), wit.at(n)));
        rep.cross_entropy.push_back(cross_entropy(seq.at(n), wit.at(n)));
    }
    auto verdict = [&](const std::vector<ExtendedReal>& values) {
        if(std::any_of(values.begin(), values.end(), [](ExtendedReal v) { return v.is_infinite(); })) return ConditionVerdict::InfiniteValues;
        for(auto n : tail_indices(seq.size(), tail))
            if(std::abs(values[n].value() - values[0].value()) > tol) return ConditionVerdict::Fails;
        return ConditionVerdict::Holds;
    };
    rep.relative_entropy_condition = verdict(rep.relative_entropy);
    rep.cross_entropy_condition = verdict(rep.cross_entropy);
    return rep;
}

// ---------------------------------------------------------------- verdicts

std::string to_string(Observed o) {
    switch(o) {
        case Observed::Yes: return "yes";
        case Observed::No: return "no";
        case Observed::Inconclusive: return "inconclusive";
    }
    return "?";
}

std::string to_string(Predicted p) {
    return p == Predicted::Converges ? "converges" : "no-prediction";
}

Observed observe(const std::vector<ReportRow>& rows, double tau, std::size_t tail) {
    if(rows.size() < 2) throw InvalidArgument("observe needs prefix rows and a limit row");
    const std::size_t n = rows.size() - 1;
    const ReportRow& limit = rows.back();
    auto idx = tail_indices(n, tail);
    if(limit.gap > tau / 2) return Observed::Inconclusive;
    for(auto i : idx)
        if(rows[i - 1].gap > tau / 2) return Observed::Inconclusive;
    // every window [s, N] of the tail must agree with the limit
    for(auto s : idx) {
        for(std::size_t i = s; i <= n; ++i)
            if(std::abs(rows[i - 1].upper - limit.upper) > tau) return Observed::No;
    }
    return Observed::Yes;
}

// ---------------------------------------------------------------- premises

std::vector<PremiseCheck> revalidate(const StateSequence& seq) {
    std::vector<PremiseCheck> out;
    {
        PremiseCheck c{"states", true, ""};
        for(std::size_t n = 0; n <= seq.size(); ++n) {
            const auto& r = seq.at(n);
            if(std::abs(r.trace() - 1) > kMatchTol || min_eigenvalue(r.matrix()) < -kPremiseTol || !(r.layout() == seq.layout())) {
                c.passed = false;
                c.detail = "state n = " + std::to_string(n) + " is not a normalized PSD state on the shared layout";
                break;
            }
        }
        out.push_back(c);
    }
    {
        PremiseCheck c{"trace-distance", true, ""};
        try {
            validate_sequence(seq);
        } catch(const Error& e) {
            c.passed = false;
            c.detail = e.what();
        }
        out.push_back(c);
    }
    std::visit(
        [&](const auto& p) {
            using T = std::decay_t<decltype(p)>;
            if constexpr(std::is_same_v<T, ConstantPremise>) {
                // nothing beyond the state checks
            } else if constexpr(std::is_same_v<T, DominancePremise>) {
                PremiseCheck c{"dominance", true, ""};
                double worst = std::numeric_limits<double>::infinity();
                for(std::size_t n = 0; n <= seq.size(); ++n)
                    worst = std::min(worst, min_eigenvalue(p.sigma.matrix() - p.c * seq.at(n).matrix()));
                c.passed = worst >= -kPremiseTol;
                c.detail = "min eig(sigma - c rho_n) = " + std::to_string(worst);
                out.push_back(c);
            } else if constexpr(std::is_same_v<T, MixturePremise>) {
                PremiseCheck c{"mixture", true, ""};
                double worst = max_abs(seq.limit.matrix() - (p.limit_weight * p.a->limit.matrix() + (1 - p.limit_weight) * p.b->limit.matrix()));
                for(std::size_t i = 0; i < seq.size(); ++i)
                    worst = std::max(worst, max_abs(seq.prefix[i].matrix() - (p.weights[i] * p.a->prefix[i].matrix() + (1 - p.weights[i]) * p.b->prefix[i].matrix())));
                c.passed = worst <= kMatchTol;
                c.detail = "max deviation " + std::to_string(worst);
                out.push_back(c);
                append_premises(out, revalidate(*p.a), "a.");
                append_premises(out, revalidate(*p.b), "b.");
            } else if constexpr(std::is_same_v<T, PushforwardPremise>) {
                PremiseCheck kraus{"kraus-bound", true, ""};
                PremiseCheck norm{"pushforward", true, ""};
                for(std::size_t n = 0; n <= seq.size(); ++n) {
                    const KrausOperation& op = n ? p.ops[n - 1] : *p.limit_op;
                    if(op.kraus_norm() > 1 + 1e-10) {
                        kraus.passed = false;
                        kraus.detail = "sum K^dagger K exceeds I at n = " + std::to_string(n);
                    }
                    Matrix y = op.apply(p.base->at(n).matrix());
                    double c = y.trace().real();
                    double recorded = n ? p.norms[n - 1] : p.limit_norm;
                    if(c < 1e-12 || std::abs(c - recorded) > kMatchTol || max_abs(Matrix(y / c) - seq.at(n).matrix()) > kMatchTol) {
                        norm.passed = false;
                        norm.detail = "normalized pushforward mismatch at n = " + std::to_string(n);
                    }
                }
                out.push_back(kraus);
                out.push_back(norm);
                append_premises(out, revalidate(*p.base), "base.");
            } else if constexpr(std::is_same_v<T, LscGapPremise>) {
                PremiseCheck c{"lsc-gap", true, ""};
                const std::size_t D = seq.layout().dim(0);
                Vector zero = Vector::Zero(static_cast<Eigen::Index>(D * D));
                zero(0) = 1;
                for(std::size_t i = 0; i < seq.size(); ++i) {
                    Vector phi = embedded_max_entangled(p.dims[i], D);
                    Matrix expect = (1 - p.weights[i]) * zero * zero.adjoint() + p.weights[i] * phi * phi.adjoint();
                    if(max_abs(expect - seq.prefix[i].matrix()) > kMatchTol) {
                        c.passed = false;
                        c.detail = "state n = " + std::to_string(i + 1) + " deviates from its construction";
                    }
                }
                out.push_back(c);
            }
        },
        seq.premise);
    return out;
}

// ---------------------------------------------------------------- predictions

std::vector<std::string> predicted_clauses(const StateSequence& seq, const FreeSetModel& model, double tau, std::size_t tail) {
    std::vector<std::string> clauses;
    auto premises_hold = [&] {
        auto checks = revalidate(seq);
        return std::all_of(checks.begin(), checks.end(), [](const PremiseCheck& c) { return c.passed; });
    };

    std::visit(
        [&](const auto& p) {
            using T = std::decay_t<decltype(p)>;
            if constexpr(std::is_same_v<T, ConstantPremise>) {
                if(seq.family == "constant" && finite_free_distance(seq.limit, model)) clauses.emplace_back("constant");
            } else if constexpr(std::is_same_v<T, DominancePremise>) {
                if(premises_hold() && finite_free_distance(p.sigma, model)) clauses.emplace_back("dominated");
            } else if constexpr(std::is_same_v<T, MixturePremise>) {
                if(!predicted_clauses(*p.a, model, tau, tail).empty() && !predicted_clauses(*p.b, model, tau, tail).empty() && premises_hold())
                    clauses.emplace_back("mixture");
            } else if constexpr(std::is_same_v<T, PushforwardPremise>) {
                auto cone = p.cone.find(model.describe());
                bool preserved = cone != p.cone.end() && cone->second == ConeCheck::Verified;
                bool same_layout = p.base->layout() == seq.layout();
                if(preserved && same_layout && !predicted_clauses(*p.base, model, tau, tail).empty()) {
                    // strong convergence surrogate: Choi matrices of the tail close to the limit operation
                    const Matrix limit_choi = p.limit_op->choi();
                    bool strong = true;
                    for(auto n : tail_indices(seq.size(), tail))
                        strong = strong && trace_norm(p.ops[n - 1].choi() - limit_choi) / static_cast<double>(seq.layout().total()) <= tau;
                    if(strong && premises_hold()) clauses.emplace_back("pushforward");
                }
            }
        },
        seq.premise);

    // total correlation: the product of marginals is a witness whenever it is free
    if(!model.is_hull() && seq.layout().parties() >= 2) {
        auto i0 = mutual_information(seq.limit).value;
        bool holds = i0.is_finite();
        for(auto n : tail_indices(seq.size(), tail)) {
            if(!holds) break;
            auto in = mutual_information(seq.at(n)).value;
            holds = in.is_finite() && std::abs(in.value() - i0.value()) <= tau;
        }
        if(holds) clauses.emplace_back("mutual-information");
    }

    // a converging separable distance carries over to every superset of the separable states
    if((model.is_pi_separable() || model.is_ppt()) && seq.layout().parties() >= 2) {
        auto sep = predicted_clauses(seq, FreeSetModel::separable(seq.layout()), tau, tail);
        if(!sep.empty() && clauses.empty()) clauses.emplace_back("inclusion:separable");
    }
    return clauses;
}

// ---------------------------------------------------------------- harness

const ModelReport* ConvergenceReport::find(const std::string& model) const {
    for(const auto& m : models)
        if(m.model == model) return &m;
    return nullptr;
}

bool ConvergenceReport::ok() const {
    for(const auto& p : premises)
        if(!p.passed) return false;
    for(const auto& m : models)
        if(!m.agreement || !m.lsc_ok) return false;
    for(const auto& i : implications)
        if(i.violated) return false;
    return nesting_violations.empty();
}

ConvergenceReport run_continuity_harness(const StateSequence& seq, const std::vector<FreeSetModel>& models, const HarnessConfig& cfg,
                                         const std::vector<std::string>& asserted_clauses) {
    ConvergenceReport rep;
    rep.family = seq.family;
    rep.premises = revalidate(seq);
    for(const auto& model : models)
        if(model.layout().total() != seq.layout().total())
            throw InvalidArgument("model " + model.describe() + " does not match the sequence layout " + seq.layout().to_string());

    for(const auto& model : models) {
        ModelReport m;
        m.model = model.describe();
        auto solved = solve_rows(seq, model, cfg, true);
        m.rows = std::move(solved.rows);
        m.flagged = solved.flagged;
        m.observed = observe(m.rows, cfg.tau, cfg.tail);
        m.clauses = predicted_clauses(seq, model, cfg.tau, cfg.tail);
        for(const auto& a : asserted_clauses) m.clauses.push_back("asserted:" + a);
        m.predicted = m.clauses.empty() ? Predicted::NoPrediction : Predicted::Converges;
        m.agreement = !(m.predicted == Predicted::Converges && m.observed == Observed::No);

        const ReportRow& limit = m.limit_row();
        m.separation = std::numeric_limits<double>::infinity();
        double min_tail_upper = std::numeric_limits<double>::infinity();
        for(auto n : tail_indices(seq.size(), cfg.tail)) {
            const ReportRow& r = m.rows[n - 1];
            m.separation = std::min(m.separation, std::max(r.lower - limit.upper, limit.lower - r.upper));
            min_tail_upper = std::min(min_tail_upper, r.upper);
        }
        m.lsc_ok = limit.lower <= min_tail_upper + cfg.tau;
        rep.models.push_back(std::move(m));
    }

    const ModelReport* sep = nullptr;
    for(std::size_t i = 0; i < models.size(); ++i)
        if(models[i].is_separable()) sep = &rep.models[i];
    if(sep) {
        for(std::size_t i = 0; i < models.size(); ++i) {
            if(!models[i].is_pi_separable() && !models[i].is_ppt()) continue;
            const ModelReport& other = rep.models[i];
            ImplicationCheck chk{sep->model, other.model, sep->observed, other.observed, false};
            chk.violated = chk.premise == Observed::Yes && chk.conclusion == Observed::No;
            rep.implications.push_back(chk);
            // superset => smaller distance, up to the two gaps
            for(std::size_t r = 0; r < other.rows.size(); ++r) {
                const ReportRow& a = other.rows[r];
                const ReportRow& b = sep->rows[r];
                if(a.upper > b.upper + a.gap + b.gap + 1e-9)
                    rep.nesting_violations.push_back(other.model + " exceeds separable at n = " + std::to_string(a.n));
            }
        }
    }
    return rep;
}

MarginalReport marginal_reports(const StateSequence& seq, const std::vector<std::size_t>& block, const HarnessConfig& cfg) {
    const std::size_t m = seq.layout().parties();
    if(block.empty() || block.size() >= m) throw InvalidArgument("marginal block must be a nontrivial proper subset of the parties");
    MarginalReport rep;
    rep.block = block;
    std::sort(rep.block.begin(), rep.block.end());
    for(std::size_t p = 0; p < m; ++p)
        if(std::find(rep.block.begin(), rep.block.end(), p) == rep.block.end()) rep.complement.push_back(p);
    if(rep.block.size() != block.size() || rep.block.back() >= m) throw InvalidArgument("marginal block has repeated or out-of-range parties");

    auto block_seq = marginal_sequence(seq, rep.block);
    auto comp_seq = marginal_sequence(seq, rep.complement);
    rep.block_rows = solve_rows(block_seq, FreeSetModel::separable(block_seq.layout()), cfg, true).rows;
    rep.complement_rows = solve_rows(comp_seq, FreeSetModel::separable(comp_seq.layout()), cfg, true).rows;
    auto joint_rows = solve_rows(seq, FreeSetModel::separable(seq.layout()), cfg, false).rows;

    for(std::size_t n = 0; n <= seq.size(); ++n) rep.cut_information.push_back(mutual_information(seq.at(n), {rep.block, rep.complement}).value.value());

    rep.joint = observe(joint_rows, cfg.tau, cfg.tail);
    rep.block_observed = observe(rep.block_rows, cfg.tau, cfg.tail);
    rep.complement_observed = observe(rep.complement_rows, cfg.tau, cfg.tail);
    rep.cut_information_converges = true;
    for(auto n : tail_indices(seq.size(), cfg.tail))
        rep.cut_information_converges = rep.cut_information_converges && std::abs(rep.cut_information[n] - rep.cut_information[0]) <= cfg.tau;

    rep.forward_predicted = rep.joint == Observed::Yes ? Predicted::Converges : Predicted::NoPrediction;
    rep.forward_agreement = !(rep.forward_predicted == Predicted::Converges && (rep.block_observed == Observed::No || rep.complement_observed == Observed::No));
    rep.backward_predicted = rep.block_observed == Observed::Yes && rep.complement_observed == Observed::Yes && rep.cut_information_converges
                                 ? Predicted::Converges
                                 : Predicted::NoPrediction;
    rep.backward_agreement = !(rep.backward_predicted == Predicted::Converges && rep.joint == Observed::No);
    return rep;
}

}  // namespace qrel
