#include "qrel/verify.hpp"
#include "qrel/entropy.hpp"
#include "qrel/linalg.hpp"
#include "qrel/random.hpp"

#include <algorithm>
#include <cmath>

namespace qrel {

namespace {

using Index = Eigen::Index;

constexpr double kIdentityTol = 1e-8;
constexpr double kScalingTol = 1e-9;
constexpr double kProcessingTol = 1e-8;

SystemLayout bipartite(int i) {
    return i % 2 ? SystemLayout({2, 3}) : SystemLayout({2, 2});
}

/// Every 5th instance gets a rank-deficient reference to exercise the +inf branch.
Index reference_rank(int i) {
    return i % 5 == 4 ? 1 : 0;
}

void record(SuiteResult& s, bool ok, double residual) {
    ok ? ++s.passed : ++s.failed;
    if(std::isfinite(residual)) s.worst = std::max(s.worst, residual);
}

/// |a - b| with inf - inf = 0; inf when exactly one side is infinite.
double mismatch(ExtendedReal a, ExtendedReal b) {
    if(a.is_infinite() || b.is_infinite()) return a.is_infinite() == b.is_infinite() ? 0.0 : std::numeric_limits<double>::infinity();
    return std::abs(a.value() - b.value());
}

SuiteResult product_reference_suite(std::uint64_t seed, int count) {
    SuiteResult s{"product-reference"};
    for(int i = 0; i < count; ++i) {
        Rng rng = make_rng(seed, 100 + static_cast<std::uint64_t>(i));
        auto layout = bipartite(i);
        auto rho = random_state(layout, rng);
        auto wa = random_state(layout.sublayout({0}), rng, reference_rank(i));
        auto wb = random_state(layout.sublayout({1}), rng);
        auto r = fiden_residual(rho, wa, wb);
        bool ok = r.verdict == IdentityVerdict::BothInfinite || (r.verdict == IdentityVerdict::Finite && r.residual <= kIdentityTol);
        record(s, ok, r.residual);
    }
    return s;
}

SuiteResult expansion_suite(std::uint64_t seed, int count) {
    SuiteResult s{"expansion"};
    for(int i = 0; i < count; ++i) {
        Rng rng = make_rng(seed, 200 + static_cast<std::uint64_t>(i));
        auto layout = bipartite(i);
        auto rho = random_state(layout, rng, i % 3 == 2 ? 2 : 0);
        auto sigma = random_state(layout, rng, reference_rank(i));
        // unnormalized inputs too
        const double a = 0.5 + (i % 4), b = 0.25 + (i % 3);
        double err = mismatch(relative_entropy(rho.scaled(a), sigma.scaled(b)), relative_entropy_expansion(rho.scaled(a), sigma.scaled(b)));
        record(s, err <= kIdentityTol, err);
    }
    return s;
}

SuiteResult scaling_suite(std::uint64_t seed, int count) {
    SuiteResult s{"scaling"};
    for(int i = 0; i < count; ++i) {
        Rng rng = make_rng(seed, 300 + static_cast<std::uint64_t>(i));
        auto layout = bipartite(i);
        auto rho = random_state(layout, rng);
        auto sigma = random_state(layout, rng);
        const ExtendedReal d = relative_entropy(rho, sigma);
        double err = 0;
        for(double c : {0.1, 1.0, 7.0}) err = std::max(err, mismatch(relative_entropy(rho.scaled(c), sigma.scaled(c)), c * d));
        const double c = 3.0;
        const ExtendedReal shifted = d - rho.trace() * std::log(c) + (c - 1) * sigma.trace();
        err = std::max(err, mismatch(relative_entropy(rho, sigma.scaled(c)), shifted));
        record(s, err <= kScalingTol, err);
    }
    return s;
}

/// rho -> Tr_E V rho V^dagger for a random isometry V: C^d -> C^d' (x) C^e.
Matrix random_channel_apply(const Matrix& isometry, const Matrix& rho, Index out, Index env) {
    Matrix big = isometry * rho * isometry.adjoint();
    return partial_trace(big, SystemLayout({static_cast<std::size_t>(out), static_cast<std::size_t>(env)}), {0});
}

SuiteResult processing_suite(std::uint64_t seed, int count) {
    SuiteResult s{"data-processing"};
    for(int i = 0; i < count; ++i) {
        Rng rng = make_rng(seed, 400 + static_cast<std::uint64_t>(i));
        auto layout = bipartite(i);
        auto rho = random_state(layout, rng);
        auto sigma = random_state(layout, rng);
        const ExtendedReal before = relative_entropy(rho, sigma);

        double excess = -std::numeric_limits<double>::infinity();
        auto check = [&](const PositiveOperator& a, const PositiveOperator& b) {
            ExtendedReal after = relative_entropy(a, b);
            if(after.is_infinite()) {
                excess = std::numeric_limits<double>::infinity();
                return;
            }
            excess = std::max(excess, after.value() - before.value());
        };
        check(partial_trace(rho, {0}), partial_trace(sigma, {0}));
        check(partial_trace(rho, {1}), partial_trace(sigma, {1}));

        const Index d = rho.dim(), out = 2 + i % 3, env = 3;
        Matrix v = random_unitary(out * env, rng).leftCols(d);
        check(PositiveOperator(random_channel_apply(v, rho.matrix(), out, env)), PositiveOperator(random_channel_apply(v, sigma.matrix(), out, env)));
        record(s, excess <= kProcessingTol, std::max(excess, 0.0));
    }
    return s;
}

}  // namespace

std::vector<SuiteResult> run_identity_suites(std::uint64_t seed, int count) {
    if(count < 1) throw InvalidArgument("identity suites need at least one instance");
    return {product_reference_suite(seed, count), expansion_suite(seed, count), scaling_suite(seed, count), processing_suite(seed, count)};
}

}  // namespace qrel
