#pragma once

#include "qrel/operators.hpp"

#include <limits>
#include <string>
#include <vector>

namespace qrel {

/// Real number or +infinity. Arithmetic follows the measure-theory convention
/// (+inf + finite = +inf); subtracting infinities is rejected.
class ExtendedReal {
public:
    constexpr ExtendedReal() = default;
    constexpr ExtendedReal(double v) : value_(v) {}  // NOLINT: implicit from finite reals
    static constexpr ExtendedReal infinity() { return ExtendedReal(std::numeric_limits<double>::infinity()); }

    bool is_finite() const { return value_ != std::numeric_limits<double>::infinity(); }
    bool is_infinite() const { return !is_finite(); }
    /// The finite value, or +inf as a double.
    double value() const { return value_; }

    /// Fixed 6-decimal rendering, "inf" for +infinity.
    std::string format(int precision = 6) const;

    friend ExtendedReal operator+(ExtendedReal a, ExtendedReal b) { return ExtendedReal(a.value_ + b.value_); }
    friend ExtendedReal operator-(ExtendedReal a, double b) { return ExtendedReal(a.value_ - b); }
    friend ExtendedReal operator*(double c, ExtendedReal a);
    friend bool operator==(ExtendedReal a, ExtendedReal b) { return a.value_ == b.value_; }
    friend auto operator<=>(ExtendedReal a, ExtendedReal b) { return a.value_ <=> b.value_; }

private:
    double value_ = 0.0;
};

/// Default relative support cutoff and leaked-weight threshold.
inline constexpr double kSupportTol = 1e-10;

/// eta(x) = -x ln x with eta(0) = 0.
double eta(double x);

/// Homogeneous extension S(p) = Tr eta(p) - eta(Tr p); zero at the zero operator.
ExtendedReal von_neumann_entropy(const PositiveOperator& p);

/// Lindblad relative entropy sum_i <phi_i| r ln r - r ln s + s - r |phi_i> over the
/// eigenbasis of r. Returns +inf when r leaks more than `tol` weight outside
/// supp(s) (support cut relative to lambda_max(s)); D(0||s) = Tr s.
ExtendedReal relative_entropy(const PositiveOperator& rho, const PositiveOperator& sigma, double tol = kSupportTol);

/// Tr r(-ln s) on supp(s); +inf on support leak.
ExtendedReal cross_entropy(const PositiveOperator& rho, const PositiveOperator& sigma, double tol = kSupportTol);

/// The expansion Tr r(-ln s) - S(r) - eta(Tr r) + Tr s - Tr r, computed from
/// log_on_support rather than the joint eigenbasis sum.
ExtendedReal relative_entropy_expansion(const PositiveOperator& rho, const PositiveOperator& sigma, double tol = kSupportTol);

struct MutualInformation {
    ExtendedReal value;         // D(rho || rho_1 (x) ... (x) rho_m)
    ExtendedReal entropy_sum;   // sum_k S(rho_k) - S(rho)
    double discrepancy = 0.0;   // |value - entropy_sum| when both finite
};

/// Total correlation across the parties of rho's layout (m >= 2).
MutualInformation mutual_information(const DensityOperator& rho);

/// Total correlation across the given groups of parties (0-based, disjoint, covering).
MutualInformation mutual_information(const DensityOperator& rho, const std::vector<std::vector<std::size_t>>& groups);

enum class IdentityVerdict { Finite, BothInfinite, Mismatch };

struct FidenResidual {
    IdentityVerdict verdict = IdentityVerdict::Finite;
    double residual = 0.0;  // |lhs - rhs| when finite
    ExtendedReal lhs;
    ExtendedReal rhs;
};

/// Checks D(r || wA (x) wB) = D(rA || wA) + D(rB || wB) + I(A:B) for a bipartite r.
FidenResidual fiden_residual(const DensityOperator& rho, const DensityOperator& omega_a, const DensityOperator& omega_b,
                             double tol = kSupportTol);

std::string to_string(IdentityVerdict v);

}  // namespace qrel
