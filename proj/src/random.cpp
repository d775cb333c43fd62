#include "qrel/random.hpp"
#include "qrel/linalg.hpp"

#include <cmath>

namespace qrel {

Rng make_rng(std::uint64_t seed, std::uint64_t stream) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32), static_cast<std::uint32_t>(stream),
                      static_cast<std::uint32_t>(stream >> 32), 0x9e3779b9u};
    return Rng(seq);
}

namespace {

Matrix ginibre(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
    std::normal_distribution<double> n(0.0, 1.0);
    Matrix g(rows, cols);
    for(Eigen::Index j = 0; j < cols; ++j)
        for(Eigen::Index i = 0; i < rows; ++i) {
            double re = n(rng);
            double im = n(rng);
            g(i, j) = Complex(re, im);
        }
    return g;
}

}  // namespace

Vector random_unit_vector(Eigen::Index d, Rng& rng) {
    Vector v = ginibre(d, 1, rng).col(0);
    return v / v.norm();
}

Matrix random_unitary(Eigen::Index d, Rng& rng) {
    Matrix g = ginibre(d, d, rng);
    Eigen::HouseholderQR<Matrix> qr(g);
    Matrix q = qr.householderQ();
    Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
    for(Eigen::Index i = 0; i < d; ++i) {
        Complex rii = r(i, i);
        double a = std::abs(rii);
        if(a > 0) q.col(i) *= rii / a;
    }
    return q;
}

Matrix random_hermitian(Eigen::Index d, Rng& rng) {
    Matrix g = ginibre(d, d, rng);
    Matrix h = (g + g.adjoint()) / 2.0;
    return h / h.norm();
}

DensityOperator random_state(const SystemLayout& layout, Rng& rng, Eigen::Index rank) {
    auto d = static_cast<Eigen::Index>(layout.total());
    if(rank <= 0 || rank > d) rank = d;
    Matrix g = ginibre(d, rank, rng);
    Matrix rho = g * g.adjoint();
    rho /= rho.trace().real();
    return DensityOperator(rho, layout);
}

DensityOperator random_product_pure_state(const SystemLayout& layout, Rng& rng) {
    Vector psi = random_unit_vector(static_cast<Eigen::Index>(layout.dim(0)), rng);
    for(std::size_t p = 1; p < layout.parties(); ++p) psi = kron(psi, random_unit_vector(static_cast<Eigen::Index>(layout.dim(p)), rng));
    return DensityOperator::pure(psi, layout);
}

}  // namespace qrel
