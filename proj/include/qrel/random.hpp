#pragma once

#include "qrel/operators.hpp"

#include <cstdint>
#include <random>

namespace qrel {

using Rng = std::mt19937_64;

/// Independent stream for (seed, stream) pairs; used to derive per-restart and
/// per-index generators without a shared RNG.
Rng make_rng(std::uint64_t seed, std::uint64_t stream = 0);

/// Haar-random unit vector in C^d.
Vector random_unit_vector(Eigen::Index d, Rng& rng);

/// Haar-random unitary (QR of a Ginibre matrix with phase correction).
Matrix random_unitary(Eigen::Index d, Rng& rng);

/// Random Hermitian matrix with Gaussian entries, scaled to unit Frobenius norm.
Matrix random_hermitian(Eigen::Index d, Rng& rng);

/// Random state of the given rank (rank 0 means full rank), induced measure from
/// a Ginibre matrix.
DensityOperator random_state(const SystemLayout& layout, Rng& rng, Eigen::Index rank = 0);

/// Product of Haar-random pure states, one per party.
DensityOperator random_product_pure_state(const SystemLayout& layout, Rng& rng);

}  // namespace qrel
