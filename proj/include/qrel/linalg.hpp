#pragma once

#include "qrel/operators.hpp"

#include <functional>
#include <vector>

namespace qrel {

/// Eigendecomposition H = U diag(values) U^dagger, values ascending.
struct Spectrum {
    RealVector values;
    Matrix vectors;
};

Spectrum spectrum(const Matrix& h);

/// U f(Lambda) U^dagger. The caller chooses how f treats zero eigenvalues.
HermitianOperator spectral_apply(const HermitianOperator& h, const std::function<double(double)>& f);

/// Natural log restricted to the support (log of eigenvalues above tol * lambda_max, zero elsewhere).
HermitianOperator log_on_support(const PositiveOperator& p, double tol = 1e-10);

/// Relative degeneracy threshold of the divided-difference kernel.
inline constexpr double kFrechetDegeneracy = 1e-9;

/// Frechet derivative of the matrix logarithm at sigma applied to X.
///
/// In the eigenbasis of sigma the result is X_ij * (ln l_i - ln l_j) / (l_i - l_j), with
/// 2 / (l_i + l_j) on the diagonal and for pairs closer than 1e-9 * min(l_i, l_j). X may only
/// have weight inside supp(sigma) (relative cutoff `tol`); the map is computed on the
/// support and is self-adjoint in the Hilbert-Schmidt pairing.
HermitianOperator frechet_log(const PositiveOperator& sigma, const HermitianOperator& x, double tol = 1e-10);

/// Kronecker product A (x) B.
Matrix kron(const Matrix& a, const Matrix& b);
HermitianOperator tensor(const HermitianOperator& a, const HermitianOperator& b);
PositiveOperator tensor(const PositiveOperator& a, const PositiveOperator& b);
DensityOperator tensor(const DensityOperator& a, const DensityOperator& b);
DensityOperator tensor(const std::vector<DensityOperator>& factors);

/// Kronecker product of vectors.
Vector kron(const Vector& a, const Vector& b);

/// Traces out every party not in `keep` (0-based, any order; the result keeps the
/// listed order).
Matrix partial_trace(const Matrix& m, const SystemLayout& layout, const std::vector<std::size_t>& keep);
PositiveOperator partial_trace(const PositiveOperator& p, const std::vector<std::size_t>& keep);
DensityOperator partial_trace(const DensityOperator& rho, const std::vector<std::size_t>& keep);

/// Transposes the listed parties (0-based).
Matrix partial_transpose(const Matrix& m, const SystemLayout& layout, const std::vector<std::size_t>& parties);
HermitianOperator partial_transpose(const HermitianOperator& h, const std::vector<std::size_t>& parties);

/// Reorders tensor factors: new party k is old party perm[k].
Matrix permute_subsystems(const Matrix& m, const SystemLayout& layout, const std::vector<std::size_t>& perm);
Vector permute_subsystems(const Vector& v, const SystemLayout& layout, const std::vector<std::size_t>& perm);

/// Orthogonal projector onto eigenvectors with eigenvalue > tol * lambda_max.
HermitianOperator support_projector(const PositiveOperator& p, double tol);

/// Frobenius-norm projection of a Hermitian matrix onto the PSD cone.
Matrix project_psd(const Matrix& h);

}  // namespace qrel
