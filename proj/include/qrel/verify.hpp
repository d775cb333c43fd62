#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace qrel {

struct SuiteResult {
    std::string name;
    int passed = 0;
    int failed = 0;
    double worst = 0.0;  // largest residual seen (finite cases)
};

/// Randomized identity suites on bipartite 2x2 and 2x3 states: product-reference
/// (D(r || wA (x) wB) split into marginal terms plus I(A:B)), expansion,
/// scaling and data-processing. `count` states per suite.
std::vector<SuiteResult> run_identity_suites(std::uint64_t seed, int count = 200);

}  // namespace qrel
