#include "qrel/entropy.hpp"
#include "qrel/harness.hpp"
#include "qrel/linalg.hpp"
#include "qrel/random.hpp"

#include "../oracles.hpp"

#include <doctest.h>

#include <algorithm>

using namespace qrel;

namespace {

ReportRow row(std::size_t n, double lower, double upper) {
    ReportRow r;
    r.n = n;
    r.lower = lower;
    r.upper = upper;
    r.gap = upper - lower;
    return r;
}

bool has(const std::vector<std::string>& v, const std::string& s) {
    return std::find(v.begin(), v.end(), s) != v.end();
}

}  // namespace

TEST_CASE("finite-prefix verdicts") {
    const double tau = 5e-3;
    std::vector<ReportRow> yes{row(1, 0.3, 0.3005), row(2, 0.2, 0.2005), row(3, 0.101, 0.1012), row(4, 0.1005, 0.1008), row(5, 0.1, 0.1003), row(0, 0.1, 0.1002)};
    CHECK(observe(yes, tau, 3) == Observed::Yes);

    auto no = yes;
    no[3] = row(4, 0.2, 0.2002);
    CHECK(observe(no, tau, 3) == Observed::No);

    auto wide = yes;
    wide[4] = row(5, 0.09, 0.1003);
    CHECK(observe(wide, tau, 3) == Observed::Inconclusive);
    auto wide_limit = yes;
    wide_limit.back() = row(0, 0.09, 0.1);
    CHECK(observe(wide_limit, tau, 3) == Observed::Inconclusive);

    // rows outside the tail do not matter
    CHECK(observe(yes, tau, 1) == Observed::Yes);
    CHECK_THROWS_AS(observe({row(0, 0, 0)}, tau, 3), InvalidArgument);
}

TEST_CASE("marginal-product witness reproduces the mutual information") {
    Rng rng = make_rng(61);
    auto seq = gen_dominated(random_state(SystemLayout({2, 2}), rng), 0.5, 6, 4, 0.02);
    auto wit = marginal_product_witness(seq);
    auto rep = check_witness_condition(seq, wit, 5e-3, 3);
    for(std::size_t n = 0; n <= seq.size(); ++n) {
        const Matrix& r = seq.at(n).matrix();
        Matrix prod = oracle::kron(oracle::trace_b(r, 2, 2), oracle::trace_a(r, 2, 2));
        CHECK(rep.relative_entropy[n].value() == doctest::Approx(oracle::relent(r, prod)).epsilon(1e-9));
        CHECK(rep.relative_entropy[n].value() == doctest::Approx(mutual_information(seq.at(n)).value.value()).epsilon(1e-9));
        CHECK(rep.cross_entropy[n].value() == doctest::Approx(-(r * oracle::logm(prod)).trace().real()).epsilon(1e-9));
    }
    CHECK(rep.relative_entropy_condition == ConditionVerdict::Holds);
    CHECK(rep.cross_entropy_condition == ConditionVerdict::Holds);
}

TEST_CASE("witness condition with infinite values") {
    Vector phi = oracle::max_entangled(2);
    SystemLayout l({2, 2});
    auto seq = gen_constant(DensityOperator::pure(phi, l), 4);
    Vector zero = Vector::Zero(4);
    zero(0) = 1;
    WitnessSequence wit;
    for(int i = 0; i < 4; ++i) {
        wit.prefix.push_back(DensityOperator::pure(zero, l));
        wit.notes.emplace_back("product pure state");
    }
    wit.limit = DensityOperator::pure(zero, l);
    wit.notes.emplace_back("product pure state");
    auto rep = check_witness_condition(seq, wit, 5e-3, 3);
    CHECK(rep.relative_entropy_condition == ConditionVerdict::InfiniteValues);
    CHECK(rep.relative_entropy[0].is_infinite());
    wit.notes.pop_back();
    CHECK_THROWS_AS(check_witness_condition(seq, wit, 5e-3, 3), InvalidArgument);
}

TEST_CASE("premise revalidation") {
    Rng rng = make_rng(62);
    auto seq = gen_dominated(random_state(SystemLayout({2, 2}), rng), 0.5, 5, 4, 0.02);
    for(const auto& c : revalidate(seq)) CHECK_MESSAGE(c.passed, c.name);
    auto broken = seq;
    broken.prefix[2] = random_state(SystemLayout({2, 2}), rng);
    auto checks = revalidate(broken);
    CHECK(std::any_of(checks.begin(), checks.end(), [](const PremiseCheck& c) { return !c.passed; }));

    auto lsc = gen_lsc_gap({2, 3, 4}, {0.6, 0.46, 0.4});
    for(const auto& c : revalidate(lsc)) CHECK_MESSAGE(c.passed, c.name);
}

TEST_CASE("predicted clauses") {
    Rng rng = make_rng(63);
    SystemLayout l({2, 2});
    auto sep = FreeSetModel::separable(l);
    auto cst = gen_constant(random_state(l, rng), 4);
    CHECK(has(predicted_clauses(cst, sep, 5e-3, 3), "constant"));
    CHECK(has(predicted_clauses(cst, sep, 5e-3, 3), "mutual-information"));

    auto dom = gen_dominated(random_state(l, rng), 0.5, 6, 4, 0.02);
    CHECK(has(predicted_clauses(dom, sep, 5e-3, 3), "dominated"));
    CHECK(has(predicted_clauses(dom, FreeSetModel::ppt(l), 5e-3, 3), "dominated"));

    auto lsc = gen_lsc_gap({2, 3, 4}, {0.6, 0.46, 0.4});
    CHECK(predicted_clauses(lsc, FreeSetModel::separable(lsc.layout()), 5e-3, 3).empty());
}

TEST_CASE("harness on a constant sequence") {
    Rng rng = make_rng(64);
    SystemLayout l({2, 2});
    auto rho = mix(DensityOperator::pure(oracle::max_entangled(2), l), random_state(l, rng), 0.7);
    auto seq = gen_constant(rho, 3);
    HarnessConfig cfg;
    auto rep = run_continuity_harness(seq, {FreeSetModel::separable(l), FreeSetModel::ppt(l)}, cfg);
    CHECK(rep.ok());
    REQUIRE(rep.models.size() == 2);
    for(const auto& m : rep.models) {
        INFO(m.model);
        CHECK(m.observed == Observed::Yes);
        CHECK(m.predicted == Predicted::Converges);
        CHECK(m.rows.size() == 4);
        CHECK(m.rows.back().n == 0);
        for(const auto& r : m.rows) {
            CHECK(r.gap <= cfg.tau / 2);
            CHECK(r.mutual_information == doctest::Approx(mutual_information(rho).value.value()));
        }
    }
    // separable >= PPT distance, and the implication separable -> PPT holds
    const auto* s = rep.find(FreeSetModel::separable(l).describe());
    const auto* p = rep.find(FreeSetModel::ppt(l).describe());
    REQUIRE(s);
    REQUIRE(p);
    CHECK(s->limit_row().upper >= p->limit_row().lower - 1e-9);
    CHECK(rep.nesting_violations.empty());
    REQUIRE(rep.implications.size() == 1);
    CHECK_FALSE(rep.implications[0].violated);
    CHECK_THROWS_AS(run_continuity_harness(seq, {FreeSetModel::separable(SystemLayout({2, 3}))}, cfg), InvalidArgument);
}
