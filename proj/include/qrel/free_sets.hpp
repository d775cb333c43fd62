#pragma once

#include "qrel/operators.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace qrel {

struct OracleConfig {
    int restarts = 32;
    int sweeps = 200;
    std::uint64_t seed = 1;
    double tol = 1e-13;          // per-sweep improvement that ends alternating updates
    int ppt_max_iter = 20000;    // ADMM iteration cap for the PPT subproblem
    double ppt_gap = 1e-7;       // primal-dual gap target for the PPT subproblem
};

struct FullySeparable {
    SystemLayout layout;
};

struct PiSeparable {
    SystemLayout layout;
    PartitionSet partitions;
};

/// Bipartite PPT set: states whose partial transpose over `transposed` (0-based
/// parties) is PSD. The transposed parties form one side of the cut.
struct PptStates {
    SystemLayout layout;
    std::vector<std::size_t> transposed;
};

struct ConvexHull {
    std::vector<DensityOperator> vertices;
};

/// Tagged description of a convex set of free states.
class FreeSetModel {
public:
    using Variant = std::variant<FullySeparable, PiSeparable, PptStates, ConvexHull>;

    static FreeSetModel separable(const SystemLayout& layout);
    static FreeSetModel pi_separable(const SystemLayout& layout, PartitionSet partitions);
    /// Defaults to transposing the last party.
    static FreeSetModel ppt(const SystemLayout& layout, std::vector<std::size_t> transposed = {});
    static FreeSetModel hull(std::vector<DensityOperator> vertices);

    const Variant& variant() const { return variant_; }
    const SystemLayout& layout() const;
    /// "separable", "ppt", "pi:{{1,2},{3}}|{{1},{2,3}}", "hull[3]".
    std::string describe() const;

    bool is_separable() const { return std::holds_alternative<FullySeparable>(variant_); }
    bool is_pi_separable() const { return std::holds_alternative<PiSeparable>(variant_); }
    bool is_ppt() const { return std::holds_alternative<PptStates>(variant_); }
    bool is_hull() const { return std::holds_alternative<ConvexHull>(variant_); }

    /// Whether I/d belongs to the set (so faithful iterates are available).
    bool contains_maximally_mixed() const { return !is_hull(); }

private:
    explicit FreeSetModel(Variant v) : variant_(std::move(v)) {}
    Variant variant_;
};

/// Coarse-grained layout obtained by joining the parties of each block.
///
/// `order` lists the original parties block by block; operators are brought
/// into the grouped layout by permute_subsystems(.., original, order).
struct GroupedLayout {
    SystemLayout grouped;
    std::vector<std::size_t> order;
    SystemLayout fine;  // original dims in `order`
};

GroupedLayout group_layout(const SystemLayout& layout, const Partition& partition);

/// One unit vector per block of a grouping.
struct ProductPureState {
    std::vector<Vector> factors;
    GroupedLayout grouping;

    /// Full state vector in the original party order.
    Vector vector() const;
    DensityOperator state(const SystemLayout& original) const;
};

struct ProductSearch {
    ProductPureState best;
    double value = 0.0;
    std::vector<double> running_best;  // best value after each restart
};

/// Minimizes <psi|G|psi> over product vectors across the parties of `layout` by
/// alternating smallest-eigenvector updates, keeping the best of cfg.restarts
/// random starts.
ProductSearch closest_product_state(const HermitianOperator& g, const SystemLayout& layout, const OracleConfig& cfg);

/// Same over products across the blocks of `partition`.
ProductSearch closest_product_state(const HermitianOperator& g, const SystemLayout& layout, const Partition& partition, const OracleConfig& cfg);

/// Linear minimization min Tr(G s) over the PPT set.
struct PptLinearSolution {
    DensityOperator state;  // feasible: PSD, unit trace, PSD partial transpose
    double primal = 0.0;    // Tr(G state)
    double dual = 0.0;      // certified lower bound on the minimum
    int iterations = 0;
    bool converged = false;
};

PptLinearSolution solve_ppt_linear(const HermitianOperator& g, const PptStates& set, const OracleConfig& cfg);

struct LmoResult {
    DensityOperator vertex;
    double value = 0.0;   // Tr(G vertex)
    double floor = 0.0;   // lower bound on min Tr(G s) over the set (== value unless certified otherwise)
    bool certified = false;  // floor is a proven bound (hull, PPT)
    bool flagged = false;    // subsolver hit its iteration cap
    std::optional<std::size_t> hull_index;
};

LmoResult lmo(const HermitianOperator& g, const FreeSetModel& model, const OracleConfig& cfg);

/// Random element of the model's set.
DensityOperator sample_free_state(const FreeSetModel& model, std::uint64_t seed);

/// Membership test for the PPT condition within `tol` on the smallest eigenvalue.
bool is_ppt(const DensityOperator& rho, const std::vector<std::size_t>& transposed, double tol = 1e-12);

}  // namespace qrel
