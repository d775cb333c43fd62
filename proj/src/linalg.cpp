#include "qrel/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace qrel {

namespace {

using Index = Eigen::Index;

/// Mixed-radix digits of a flat tensor index (party 0 most significant).
class Digits {
public:
    explicit Digits(const SystemLayout& layout) : dims_(layout.dims()), strides_(dims_.size()) {
        std::size_t s = 1;
        for(std::size_t k = dims_.size(); k-- > 0;) {
            strides_[k] = s;
            s *= dims_[k];
        }
    }

    std::size_t digit(std::size_t flat, std::size_t party) const { return (flat / strides_[party]) % dims_[party]; }
    std::size_t stride(std::size_t party) const { return strides_[party]; }

private:
    std::vector<std::size_t> dims_;
    std::vector<std::size_t> strides_;
};

void check_parties(const SystemLayout& layout, const std::vector<std::size_t>& parties, bool allow_empty = true) {
    if(!allow_empty && parties.empty()) throw InvalidArgument("empty party list");
    std::set<std::size_t> seen;
    for(auto p : parties) {
        if(p >= layout.parties()) throw InvalidArgument("party index " + std::to_string(p + 1) + " out of range for layout " + layout.to_string());
        if(!seen.insert(p).second) throw InvalidArgument("party index " + std::to_string(p + 1) + " repeated");
    }
}

void check_layout(const Matrix& m, const SystemLayout& layout) {
    if(static_cast<std::size_t>(m.rows()) != layout.total() || m.rows() != m.cols())
        throw InvalidArgument("matrix shape does not match layout " + layout.to_string());
}

}  // namespace

Spectrum spectrum(const Matrix& h) {
    Eigen::SelfAdjointEigenSolver<Matrix> solver(h);
    if(solver.info() != Eigen::Success) throw Error("eigendecomposition failed");
    return {solver.eigenvalues(), solver.eigenvectors()};
}

HermitianOperator spectral_apply(const HermitianOperator& h, const std::function<double(double)>& f) {
    auto spec = spectrum(h.matrix());
    RealVector fv = spec.values.unaryExpr([&](double x) { return f(x); });
    return HermitianOperator(Matrix(spec.vectors * fv.asDiagonal() * spec.vectors.adjoint()), h.layout());
}

HermitianOperator log_on_support(const PositiveOperator& p, double tol) {
    auto spec = spectrum(p.matrix());
    double cut = tol * std::max(spec.values.maxCoeff(), 0.0);
    RealVector fv = spec.values.unaryExpr([&](double x) { return x > cut && x > 0 ? std::log(x) : 0.0; });
    return HermitianOperator(Matrix(spec.vectors * fv.asDiagonal() * spec.vectors.adjoint()), p.layout());
}

HermitianOperator frechet_log(const PositiveOperator& sigma, const HermitianOperator& x, double tol) {
    if(sigma.dim() != x.dim()) throw InvalidArgument("frechet_log: dimension mismatch");
    auto spec = spectrum(sigma.matrix());
    const Index d = sigma.dim();
    const double lmax = spec.values.maxCoeff();
    if(!(lmax > 0)) throw SupportViolation("frechet_log: sigma is zero");
    const double cut = tol * lmax;

    Matrix xt = spec.vectors.adjoint() * x.matrix() * spec.vectors;
    const double scale = std::max(1.0, xt.cwiseAbs().maxCoeff());
    Matrix out = Matrix::Zero(d, d);
    for(Index i = 0; i < d; ++i) {
        const double li = spec.values(i);
        const bool in_i = li > cut;
        for(Index j = 0; j < d; ++j) {
            const double lj = spec.values(j);
            const bool in_j = lj > cut;
            if(!in_i || !in_j) {
                if(std::abs(xt(i, j)) > tol * scale)
                    throw SupportViolation("frechet_log: X has weight outside supp(sigma)");
                continue;
            }
            // (ln li - ln lj) / (li - lj), symmetric in i, j
            double kernel;
            if(i == j || std::abs(li - lj) < kFrechetDegeneracy * std::min(li, lj))
                kernel = 2.0 / (li + lj);
            else
                kernel = std::log1p((li - lj) / lj) / (li - lj);
            out(i, j) = xt(i, j) * kernel;
        }
    }
    return HermitianOperator(Matrix(spec.vectors * out * spec.vectors.adjoint()), sigma.layout());
}

Matrix kron(const Matrix& a, const Matrix& b) {
    Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for(Index i = 0; i < a.rows(); ++i)
        for(Index j = 0; j < a.cols(); ++j) out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

Vector kron(const Vector& a, const Vector& b) {
    Vector out(a.size() * b.size());
    for(Index i = 0; i < a.size(); ++i) out.segment(i * b.size(), b.size()) = a(i) * b;
    return out;
}

namespace {

SystemLayout joined(const SystemLayout& a, const SystemLayout& b) {
    auto dims = a.dims();
    dims.insert(dims.end(), b.dims().begin(), b.dims().end());
    return SystemLayout(dims);
}

}  // namespace

HermitianOperator tensor(const HermitianOperator& a, const HermitianOperator& b) {
    return HermitianOperator(kron(a.matrix(), b.matrix()), joined(a.layout(), b.layout()));
}

PositiveOperator tensor(const PositiveOperator& a, const PositiveOperator& b) {
    return PositiveOperator(kron(a.matrix(), b.matrix()), joined(a.layout(), b.layout()));
}

DensityOperator tensor(const DensityOperator& a, const DensityOperator& b) {
    return DensityOperator(kron(a.matrix(), b.matrix()), joined(a.layout(), b.layout()));
}

DensityOperator tensor(const std::vector<DensityOperator>& factors) {
    if(factors.empty()) throw InvalidArgument("tensor of an empty list");
    DensityOperator out = factors.front();
    for(std::size_t i = 1; i < factors.size(); ++i) out = tensor(out, factors[i]);
    return out;
}

Matrix partial_trace(const Matrix& m, const SystemLayout& layout, const std::vector<std::size_t>& keep) {
    check_layout(m, layout);
    check_parties(layout, keep);
    std::vector<std::size_t> traced;
    for(std::size_t p = 0; p < layout.parties(); ++p)
        if(std::find(keep.begin(), keep.end(), p) == keep.end()) traced.push_back(p);

    Digits full(layout);
    std::size_t dk = 1, dt = 1;
    for(auto p : keep) dk *= layout.dim(p);
    for(auto p : traced) dt *= layout.dim(p);
    const SystemLayout kept_layout = keep.empty() ? SystemLayout::single(1) : layout.sublayout(keep);
    const SystemLayout traced_layout = traced.empty() ? SystemLayout::single(1) : layout.sublayout(traced);
    Digits kd(kept_layout), td(traced_layout);

    // offsets in the full index for every kept / traced sub-index
    std::vector<std::size_t> koff(dk, 0), toff(dt, 0);
    for(std::size_t a = 0; a < dk; ++a)
        for(std::size_t k = 0; k < keep.size(); ++k) koff[a] += kd.digit(a, k) * full.stride(keep[k]);
    for(std::size_t t = 0; t < dt; ++t)
        for(std::size_t k = 0; k < traced.size(); ++k) toff[t] += td.digit(t, k) * full.stride(traced[k]);

    Matrix out = Matrix::Zero(static_cast<Index>(dk), static_cast<Index>(dk));
    for(std::size_t a = 0; a < dk; ++a)
        for(std::size_t b = 0; b < dk; ++b) {
            Complex s = 0;
            for(std::size_t t = 0; t < dt; ++t) s += m(static_cast<Index>(koff[a] + toff[t]), static_cast<Index>(koff[b] + toff[t]));
            out(static_cast<Index>(a), static_cast<Index>(b)) = s;
        }
    return out;
}

PositiveOperator partial_trace(const PositiveOperator& p, const std::vector<std::size_t>& keep) {
    check_parties(p.layout(), keep, false);
    return PositiveOperator(partial_trace(p.matrix(), p.layout(), keep), p.layout().sublayout(keep));
}

DensityOperator partial_trace(const DensityOperator& rho, const std::vector<std::size_t>& keep) {
    check_parties(rho.layout(), keep, false);
    return DensityOperator(partial_trace(rho.matrix(), rho.layout(), keep), rho.layout().sublayout(keep));
}

Matrix partial_transpose(const Matrix& m, const SystemLayout& layout, const std::vector<std::size_t>& parties) {
    check_layout(m, layout);
    check_parties(layout, parties);
    Digits dg(layout);
    const Index d = m.rows();
    Matrix out(d, d);
    for(Index i = 0; i < d; ++i)
        for(Index j = 0; j < d; ++j) {
            auto ui = static_cast<std::size_t>(i), uj = static_cast<std::size_t>(j);
            std::size_t ni = ui, nj = uj;
            for(auto p : parties) {
                auto di = dg.digit(ui, p), dj = dg.digit(uj, p);
                ni = ni - di * dg.stride(p) + dj * dg.stride(p);
                nj = nj - dj * dg.stride(p) + di * dg.stride(p);
            }
            out(static_cast<Index>(ni), static_cast<Index>(nj)) = m(i, j);
        }
    return out;
}

HermitianOperator partial_transpose(const HermitianOperator& h, const std::vector<std::size_t>& parties) {
    return HermitianOperator(partial_transpose(h.matrix(), h.layout(), parties), h.layout());
}

namespace {

std::vector<std::size_t> permutation_map(const SystemLayout& layout, const std::vector<std::size_t>& perm) {
    if(perm.size() != layout.parties()) throw InvalidArgument("permutation length does not match layout");
    check_parties(layout, perm);
    std::vector<std::size_t> new_dims;
    for(auto p : perm) new_dims.push_back(layout.dim(p));
    Digits od(layout), nd{SystemLayout(new_dims)};
    std::vector<std::size_t> map(layout.total());
    for(std::size_t n = 0; n < map.size(); ++n) {
        std::size_t old = 0;
        for(std::size_t k = 0; k < perm.size(); ++k) old += nd.digit(n, k) * od.stride(perm[k]);
        map[n] = old;
    }
    return map;
}

}  // namespace

Matrix permute_subsystems(const Matrix& m, const SystemLayout& layout, const std::vector<std::size_t>& perm) {
    check_layout(m, layout);
    auto map = permutation_map(layout, perm);
    const Index d = m.rows();
    Matrix out(d, d);
    for(Index i = 0; i < d; ++i)
        for(Index j = 0; j < d; ++j) out(i, j) = m(static_cast<Index>(map[i]), static_cast<Index>(map[j]));
    return out;
}

Vector permute_subsystems(const Vector& v, const SystemLayout& layout, const std::vector<std::size_t>& perm) {
    if(static_cast<std::size_t>(v.size()) != layout.total()) throw InvalidArgument("vector length does not match layout");
    auto map = permutation_map(layout, perm);
    Vector out(v.size());
    for(Index i = 0; i < v.size(); ++i) out(i) = v(static_cast<Index>(map[i]));
    return out;
}

HermitianOperator support_projector(const PositiveOperator& p, double tol) {
    if(!(tol > 0)) throw InvalidArgument("support tolerance must be positive");
    auto spec = spectrum(p.matrix());
    double cut = tol * std::max(spec.values.maxCoeff(), 0.0);
    RealVector ind = spec.values.unaryExpr([&](double x) { return x > cut && x > 0 ? 1.0 : 0.0; });
    return HermitianOperator(Matrix(spec.vectors * ind.asDiagonal() * spec.vectors.adjoint()), p.layout());
}

Matrix project_psd(const Matrix& h) {
    auto spec = spectrum((h + h.adjoint()) / 2.0);
    RealVector v = spec.values.cwiseMax(0.0);
    return spec.vectors * v.asDiagonal() * spec.vectors.adjoint();
}

}  // namespace qrel
