#pragma once

#include <Eigen/Dense>

#include <complex>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace qrel {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed input: wrong shapes, bad index sets, non-Hermitian matrices, ...
class InvalidArgument : public Error {
public:
    using Error::Error;
};

/// An operator has weight outside the support of another where that is not allowed.
class SupportViolation : public Error {
public:
    using Error::Error;
};

/// Ordered tensor-factor dimensions [d1, ..., dm] of a multipartite system.
class SystemLayout {
public:
    SystemLayout() = default;
    explicit SystemLayout(std::vector<std::size_t> dims);

    static SystemLayout single(std::size_t dim) { return SystemLayout({dim}); }

    const std::vector<std::size_t>& dims() const { return dims_; }
    std::size_t parties() const { return dims_.size(); }
    std::size_t dim(std::size_t party) const { return dims_.at(party); }
    std::size_t total() const;

    /// Layout of the factors listed in `parties`, in the given order.
    SystemLayout sublayout(const std::vector<std::size_t>& parties) const;

    std::string to_string() const;  // "2x2x3"
    static SystemLayout parse(const std::string& text);

    bool operator==(const SystemLayout&) const = default;

private:
    std::vector<std::size_t> dims_;
};

/// Disjoint blocks of 0-based party indices covering {0, ..., m-1}.
class Partition {
public:
    Partition() = default;
    Partition(std::vector<std::vector<std::size_t>> blocks, std::size_t parties);

    static Partition finest(std::size_t parties);

    const std::vector<std::vector<std::size_t>>& blocks() const { return blocks_; }
    std::size_t parties() const { return parties_; }
    bool is_finest() const { return blocks_.size() == parties_; }

    /// "{{1,2},{3}}" with 1-based indices, blocks sorted.
    std::string to_string() const;
    /// Parses "{{1,2},{3}}" (1-based).
    static Partition parse(const std::string& text, std::size_t parties);

    bool operator==(const Partition&) const = default;

private:
    std::vector<std::vector<std::size_t>> blocks_;
    std::size_t parties_ = 0;
};

/// Non-empty list of partitions of the same party set.
class PartitionSet {
public:
    explicit PartitionSet(std::vector<Partition> partitions);

    const std::vector<Partition>& partitions() const { return partitions_; }
    std::size_t parties() const { return partitions_.front().parties(); }
    bool contains_finest() const;

    /// "{{1,2},{3}}|{{1},{2,3}}"
    std::string to_string() const;
    static PartitionSet parse(const std::string& text, std::size_t parties);

private:
    std::vector<Partition> partitions_;
};

/// Complex square matrix with H = H^dagger.
///
/// Construction symmetrizes the input; an asymmetry above 1e-8 (relative to the
/// largest entry, floor 1) is rejected.
class HermitianOperator {
public:
    HermitianOperator() = default;
    explicit HermitianOperator(Matrix entries);
    HermitianOperator(Matrix entries, SystemLayout layout);

    const Matrix& matrix() const { return entries_; }
    Eigen::Index dim() const { return entries_.rows(); }
    const SystemLayout& layout() const { return layout_; }

    double trace() const { return entries_.trace().real(); }

    /// Hilbert-Schmidt pairing Tr(A B) for Hermitian A, B (always real).
    double pair(const HermitianOperator& other) const;

protected:
    Matrix entries_;
    SystemLayout layout_;
};

/// Positive semidefinite operator.
///
/// Eigenvalues in [-1e-10 ||A||, 0) are clipped to zero; anything more negative
/// is rejected.
class PositiveOperator : public HermitianOperator {
public:
    PositiveOperator() = default;
    explicit PositiveOperator(Matrix entries);
    PositiveOperator(Matrix entries, SystemLayout layout);
    explicit PositiveOperator(const HermitianOperator& h);

    static PositiveOperator zero(const SystemLayout& layout);

    PositiveOperator scaled(double c) const;
};

/// Unit-trace positive operator (trace within 1e-10) on a multipartite layout.
class DensityOperator : public PositiveOperator {
public:
    DensityOperator() = default;
    explicit DensityOperator(Matrix entries);
    DensityOperator(Matrix entries, SystemLayout layout);
    explicit DensityOperator(const PositiveOperator& p);

    static DensityOperator pure(const Vector& psi, const SystemLayout& layout);
    static DensityOperator maximally_mixed(const SystemLayout& layout);
    /// Divides a nonzero positive operator by its trace.
    static DensityOperator normalized(const PositiveOperator& p);

    /// Same matrix with a different (compatible) layout.
    DensityOperator with_layout(const SystemLayout& layout) const;
};

/// Convex combination p A + (1-p) B of two states on the same layout.
DensityOperator mix(const DensityOperator& a, const DensityOperator& b, double p);

/// Trace norm of a Hermitian matrix (sum of absolute eigenvalues).
double trace_norm(const Matrix& h);
double trace_distance(const HermitianOperator& a, const HermitianOperator& b);

/// Smallest eigenvalue of a Hermitian matrix.
double min_eigenvalue(const Matrix& h);

}  // namespace qrel
