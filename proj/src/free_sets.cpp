#include "qrel/free_sets.hpp"
#include "qrel/linalg.hpp"
#include "qrel/random.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace qrel {

using Index = Eigen::Index;

FreeSetModel FreeSetModel::separable(const SystemLayout& layout) {
    return FreeSetModel(FullySeparable{layout});
}

FreeSetModel FreeSetModel::pi_separable(const SystemLayout& layout, PartitionSet partitions) {
    if(partitions.parties() != layout.parties())
        throw InvalidArgument("partition set is over " + std::to_string(partitions.parties()) + " parties, layout has " + std::to_string(layout.parties()));
    return FreeSetModel(PiSeparable{layout, std::move(partitions)});
}

FreeSetModel FreeSetModel::ppt(const SystemLayout& layout, std::vector<std::size_t> transposed) {
    if(layout.parties() < 2) throw InvalidArgument("PPT set needs at least two parties");
    if(transposed.empty()) transposed = {layout.parties() - 1};
    std::sort(transposed.begin(), transposed.end());
    transposed.erase(std::unique(transposed.begin(), transposed.end()), transposed.end());
    for(auto p : transposed)
        if(p >= layout.parties()) throw InvalidArgument("PPT transposed party out of range");
    if(transposed.size() >= layout.parties()) throw InvalidArgument("PPT transposed block must be a proper subset of the parties");
    return FreeSetModel(PptStates{layout, std::move(transposed)});
}

FreeSetModel FreeSetModel::hull(std::vector<DensityOperator> vertices) {
    if(vertices.empty()) throw InvalidArgument("convex hull of an empty list");
    for(const auto& v : vertices)
        if(v.dim() != vertices.front().dim()) throw InvalidArgument("hull vertices of different dimension");
    return FreeSetModel(ConvexHull{std::move(vertices)});
}

const SystemLayout& FreeSetModel::layout() const {
    return std::visit(
        [](const auto& m) -> const SystemLayout& {
            using T = std::decay_t<decltype(m)>;
            if constexpr(std::is_same_v<T, ConvexHull>)
                return m.vertices.front().layout();
            else
                return m.layout;
        },
        variant_);
}

std::string FreeSetModel::describe() const {
    return std::visit(
        [](const auto& m) -> std::string {
            using T = std::decay_t<decltype(m)>;
            if constexpr(std::is_same_v<T, FullySeparable>) {
                return "separable";
            } else if constexpr(std::is_same_v<T, PiSeparable>) {
                return "pi:" + m.partitions.to_string();
            } else if constexpr(std::is_same_v<T, PptStates>) {
                if(m.transposed.size() == 1 && m.transposed.front() == m.layout.parties() - 1) return "ppt";
                std::string out = "ppt:";
                for(std::size_t i = 0; i < m.transposed.size(); ++i) {
                    if(i) out += ',';
                    out += std::to_string(m.transposed[i] + 1);
                }
                return out;
            } else {
                return "hull[" + std::to_string(m.vertices.size()) + "]";
            }
        },
        variant_);
}

// ---------------------------------------------------------------- product states

GroupedLayout group_layout(const SystemLayout& layout, const Partition& partition) {
    if(partition.parties() != layout.parties())
        throw InvalidArgument("partition over " + std::to_string(partition.parties()) + " parties does not fit layout " + layout.to_string());
    GroupedLayout out;
    std::vector<std::size_t> dims;
    for(const auto& block : partition.blocks()) {
        std::size_t d = 1;
        for(auto p : block) {
            d *= layout.dim(p);
            out.order.push_back(p);
        }
        dims.push_back(d);
    }
    out.grouped = SystemLayout(dims);
    out.fine = layout.sublayout(out.order);
    return out;
}

Vector ProductPureState::vector() const {
    Vector psi = factors.front();
    for(std::size_t j = 1; j < factors.size(); ++j) psi = kron(psi, factors[j]);
    // psi lives in the block order; undo the grouping permutation
    std::vector<std::size_t> inverse(grouping.order.size());
    for(std::size_t k = 0; k < grouping.order.size(); ++k) inverse[grouping.order[k]] = k;
    return permute_subsystems(psi, grouping.fine, inverse);
}

DensityOperator ProductPureState::state(const SystemLayout& original) const {
    return DensityOperator::pure(vector(), original);
}

namespace {

/// Columns psi_1 (x) .. (x) e_a (x) .. (x) psi_m for a = 0..d_j-1.
Matrix embedding(const std::vector<Vector>& factors, std::size_t j) {
    Matrix left = Matrix::Ones(1, 1);
    for(std::size_t k = 0; k < j; ++k) left = kron(left, Matrix(factors[k]));
    Matrix right = Matrix::Ones(1, 1);
    for(std::size_t k = j + 1; k < factors.size(); ++k) right = kron(right, Matrix(factors[k]));
    Index dj = factors[j].size();
    return kron(kron(left, Matrix(Matrix::Identity(dj, dj))), right);
}

double expectation(const Matrix& g, const std::vector<Vector>& factors) {
    Vector psi = factors.front();
    for(std::size_t j = 1; j < factors.size(); ++j) psi = kron(psi, factors[j]);
    return (psi.adjoint() * g * psi)(0, 0).real();
}

Vector smallest_eigenvector(const Matrix& m) {
    Eigen::SelfAdjointEigenSolver<Matrix> solver((m + m.adjoint()) / 2.0);
    Vector v = solver.eigenvectors().col(0);
    // fix the global phase so results are reproducible across equal-value ties
    Index k;
    v.cwiseAbs().maxCoeff(&k);
    Complex ph = v(k) / std::abs(v(k));
    return v / ph;
}

}  // namespace

ProductSearch closest_product_state(const HermitianOperator& g, const SystemLayout& layout, const OracleConfig& cfg) {
    return closest_product_state(g, layout, Partition::finest(layout.parties()), cfg);
}

ProductSearch closest_product_state(const HermitianOperator& g, const SystemLayout& layout, const Partition& partition, const OracleConfig& cfg) {
    if(static_cast<std::size_t>(g.dim()) != layout.total()) throw InvalidArgument("operator does not match layout " + layout.to_string());
    if(cfg.restarts < 1) throw InvalidArgument("oracle needs at least one restart");
    GroupedLayout grouping = group_layout(layout, partition);
    const Matrix gg = permute_subsystems(g.matrix(), layout, grouping.order);
    const std::size_t blocks = grouping.grouped.parties();

    ProductSearch out;
    out.value = std::numeric_limits<double>::infinity();
    for(int r = 0; r < cfg.restarts; ++r) {
        Rng rng = make_rng(cfg.seed, static_cast<std::uint64_t>(r));
        std::vector<Vector> factors;
        for(std::size_t j = 0; j < blocks; ++j) factors.push_back(random_unit_vector(static_cast<Index>(grouping.grouped.dim(j)), rng));

        double value = expectation(gg, factors);
        for(int sweep = 0; sweep < cfg.sweeps; ++sweep) {
            for(std::size_t j = 0; j < blocks; ++j) {
                Matrix v = embedding(factors, j);
                factors[j] = smallest_eigenvector(v.adjoint() * gg * v);
            }
            double next = expectation(gg, factors);
            bool done = value - next <= cfg.tol * std::max(1.0, std::abs(value));
            value = next;
            if(done || blocks == 1) break;
        }
        if(value < out.value) {
            out.value = value;
            out.best = ProductPureState{factors, grouping};
        }
        out.running_best.push_back(out.value);
    }
    return out;
}

// ---------------------------------------------------------------- oracles

LmoResult lmo(const HermitianOperator& g, const FreeSetModel& model, const OracleConfig& cfg) {
    if(static_cast<std::size_t>(g.dim()) != model.layout().total()) throw InvalidArgument("gradient does not match the model's layout");
    return std::visit(
        [&](const auto& m) -> LmoResult {
            using T = std::decay_t<decltype(m)>;
            LmoResult out;
            if constexpr(std::is_same_v<T, ConvexHull>) {
                std::size_t best = 0;
                double best_value = std::numeric_limits<double>::infinity();
                for(std::size_t i = 0; i < m.vertices.size(); ++i) {
                    double v = g.pair(m.vertices[i]);
                    if(v < best_value) {
                        best_value = v;
                        best = i;
                    }
                }
                out.vertex = m.vertices[best];
                out.value = out.floor = best_value;
                out.certified = true;
                out.hull_index = best;
            } else if constexpr(std::is_same_v<T, PptStates>) {
                auto sol = solve_ppt_linear(g, m, cfg);
                out.vertex = sol.state;
                out.value = sol.primal;
                out.floor = sol.dual;
                out.certified = true;
                out.flagged = !sol.converged;
            } else {
                std::vector<Partition> parts;
                if constexpr(std::is_same_v<T, FullySeparable>)
                    parts.push_back(Partition::finest(m.layout.parties()));
                else
                    parts = m.partitions.partitions();
                double best_value = std::numeric_limits<double>::infinity();
                for(const auto& p : parts) {
                    auto search = closest_product_state(g, m.layout, p, cfg);
                    if(search.value < best_value) {
                        best_value = search.value;
                        out.vertex = search.best.state(m.layout);
                    }
                }
                out.value = g.pair(out.vertex);
                out.floor = out.value;
            }
            return out;
        },
        model.variant());
}

bool is_ppt(const DensityOperator& rho, const std::vector<std::size_t>& transposed, double tol) {
    return min_eigenvalue(partial_transpose(rho.matrix(), rho.layout(), transposed)) >= -tol;
}

namespace {

std::vector<double> dirichlet(std::size_t n, Rng& rng) {
    std::exponential_distribution<double> e(1.0);
    std::vector<double> w(n);
    double s = 0;
    for(auto& x : w) s += (x = e(rng));
    for(auto& x : w) x /= s;
    return w;
}

constexpr int kPptSampleCap = 10000;

}  // namespace

DensityOperator sample_free_state(const FreeSetModel& model, std::uint64_t seed) {
    Rng rng = make_rng(seed, 0x5a4d);
    const SystemLayout& layout = model.layout();
    const auto d = static_cast<Index>(layout.total());
    return std::visit(
        [&](const auto& m) -> DensityOperator {
            using T = std::decay_t<decltype(m)>;
            if constexpr(std::is_same_v<T, ConvexHull>) {
                auto w = dirichlet(m.vertices.size(), rng);
                Matrix acc = Matrix::Zero(d, d);
                for(std::size_t i = 0; i < w.size(); ++i) acc += w[i] * m.vertices[i].matrix();
                return DensityOperator(acc, layout);
            } else if constexpr(std::is_same_v<T, PptStates>) {
                std::uniform_real_distribution<double> u(0.0, 1.0);
                for(int attempt = 0; attempt < kPptSampleCap; ++attempt) {
                    auto candidate = mix(DensityOperator::maximally_mixed(layout), random_state(layout, rng), u(rng));
                    if(is_ppt(candidate, m.transposed)) return candidate;
                }
                throw Error("PPT rejection sampling exceeded " + std::to_string(kPptSampleCap) + " attempts");
            } else {
                std::vector<Partition> parts;
                if constexpr(std::is_same_v<T, FullySeparable>)
                    parts.push_back(Partition::finest(layout.parties()));
                else
                    parts = m.partitions.partitions();
                const std::size_t terms = static_cast<std::size_t>(d) + 1;
                auto w = dirichlet(terms, rng);
                std::uniform_int_distribution<std::size_t> pick(0, parts.size() - 1);
                Matrix acc = Matrix::Zero(d, d);
                for(std::size_t t = 0; t < terms; ++t) {
                    const auto grouping = group_layout(layout, parts[pick(rng)]);
                    ProductPureState product{{}, grouping};
                    for(std::size_t j = 0; j < grouping.grouped.parties(); ++j)
                        product.factors.push_back(random_unit_vector(static_cast<Index>(grouping.grouped.dim(j)), rng));
                    Vector psi = product.vector();
                    acc += w[t] * psi * psi.adjoint();
                }
                return DensityOperator(acc, layout);
            }
        },
        model.variant());
}

}  // namespace qrel
