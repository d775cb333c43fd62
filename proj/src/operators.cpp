#include "qrel/operators.hpp"
#include "qrel/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <sstream>

namespace qrel {

namespace {

constexpr double kAsymmetryReject = 1e-8;
constexpr double kPsdClip = 1e-10;
constexpr double kUnitTrace = 1e-10;

void skip_spaces(const std::string& s, std::size_t& pos) {
    while(pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
}

void expect(const std::string& s, std::size_t& pos, char c) {
    skip_spaces(s, pos);
    if(pos >= s.size() || s[pos] != c)
        throw InvalidArgument("partition syntax: expected '" + std::string(1, c) + "' at offset " + std::to_string(pos) + " in \"" + s + "\"");
    ++pos;
}

}  // namespace

// ---------------------------------------------------------------- layouts

SystemLayout::SystemLayout(std::vector<std::size_t> dims) : dims_(std::move(dims)) {
    if(dims_.empty()) throw InvalidArgument("layout needs at least one factor");
    for(auto d : dims_)
        if(d == 0) throw InvalidArgument("layout factor of dimension 0");
}

std::size_t SystemLayout::total() const {
    return std::accumulate(dims_.begin(), dims_.end(), std::size_t{1}, std::multiplies<>());
}

SystemLayout SystemLayout::sublayout(const std::vector<std::size_t>& parties) const {
    std::vector<std::size_t> sub;
    for(auto p : parties) {
        if(p >= dims_.size()) throw InvalidArgument("party index " + std::to_string(p + 1) + " out of range");
        sub.push_back(dims_[p]);
    }
    return SystemLayout(sub);
}

std::string SystemLayout::to_string() const {
    std::string out;
    for(std::size_t i = 0; i < dims_.size(); ++i) {
        if(i) out += 'x';
        out += std::to_string(dims_[i]);
    }
    return out;
}

SystemLayout SystemLayout::parse(const std::string& text) {
    std::vector<std::size_t> dims;
    std::stringstream ss(text);
    std::string item;
    while(std::getline(ss, item, 'x')) {
        if(item.empty() || item.find_first_not_of("0123456789") != std::string::npos)
            throw InvalidArgument("bad dimension list \"" + text + "\" (expected e.g. 2x2)");
        dims.push_back(std::stoul(item));
    }
    return SystemLayout(dims);
}

Partition::Partition(std::vector<std::vector<std::size_t>> blocks, std::size_t parties) : parties_(parties) {
    if(blocks.empty()) throw InvalidArgument("partition without blocks");
    std::set<std::size_t> seen;
    for(auto& b : blocks) {
        if(b.empty()) throw InvalidArgument("partition with an empty block");
        std::sort(b.begin(), b.end());
        for(auto i : b) {
            if(i >= parties) throw InvalidArgument("partition index " + std::to_string(i + 1) + " out of range");
            if(!seen.insert(i).second) throw InvalidArgument("partition blocks overlap at index " + std::to_string(i + 1));
        }
    }
    if(seen.size() != parties) throw InvalidArgument("partition does not cover all parties");
    std::sort(blocks.begin(), blocks.end());
    blocks_ = std::move(blocks);
}

Partition Partition::finest(std::size_t parties) {
    std::vector<std::vector<std::size_t>> blocks;
    for(std::size_t i = 0; i < parties; ++i) blocks.push_back({i});
    return Partition(blocks, parties);
}

std::string Partition::to_string() const {
    std::string out = "{";
    for(std::size_t b = 0; b < blocks_.size(); ++b) {
        if(b) out += ',';
        out += '{';
        for(std::size_t i = 0; i < blocks_[b].size(); ++i) {
            if(i) out += ',';
            out += std::to_string(blocks_[b][i] + 1);
        }
        out += '}';
    }
    return out + "}";
}

Partition Partition::parse(const std::string& text, std::size_t parties) {
    std::size_t pos = 0;
    std::vector<std::vector<std::size_t>> blocks;
    expect(text, pos, '{');
    while(true) {
        expect(text, pos, '{');
        std::vector<std::size_t> block;
        while(true) {
            skip_spaces(text, pos);
            std::size_t start = pos;
            while(pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos]))) ++pos;
            if(start == pos) throw InvalidArgument("partition syntax: expected index in \"" + text + "\"");
            auto idx = std::stoul(text.substr(start, pos - start));
            if(idx == 0) throw InvalidArgument("partition indices are 1-based");
            block.push_back(idx - 1);
            skip_spaces(text, pos);
            if(pos < text.size() && text[pos] == ',') {
                ++pos;
                continue;
            }
            break;
        }
        expect(text, pos, '}');
        blocks.push_back(block);
        skip_spaces(text, pos);
        if(pos < text.size() && text[pos] == ',') {
            ++pos;
            continue;
        }
        break;
    }
    expect(text, pos, '}');
    skip_spaces(text, pos);
    if(pos != text.size()) throw InvalidArgument("trailing characters in partition \"" + text + "\"");
    return Partition(blocks, parties);
}

PartitionSet::PartitionSet(std::vector<Partition> partitions) : partitions_(std::move(partitions)) {
    if(partitions_.empty()) throw InvalidArgument("partition set must be non-empty");
    for(const auto& p : partitions_)
        if(p.parties() != partitions_.front().parties()) throw InvalidArgument("partitions of different party counts");
}

bool PartitionSet::contains_finest() const {
    return std::any_of(partitions_.begin(), partitions_.end(), [](const Partition& p) { return p.is_finest(); });
}

std::string PartitionSet::to_string() const {
    std::string out;
    for(std::size_t i = 0; i < partitions_.size(); ++i) {
        if(i) out += '|';
        out += partitions_[i].to_string();
    }
    return out;
}

PartitionSet PartitionSet::parse(const std::string& text, std::size_t parties) {
    std::vector<Partition> parts;
    std::stringstream ss(text);
    std::string item;
    while(std::getline(ss, item, '|')) parts.push_back(Partition::parse(item, parties));
    return PartitionSet(std::move(parts));
}

// ---------------------------------------------------------------- operators

HermitianOperator::HermitianOperator(Matrix entries) : HermitianOperator(entries, SystemLayout::single(static_cast<std::size_t>(entries.rows()))) {}

HermitianOperator::HermitianOperator(Matrix entries, SystemLayout layout) : layout_(std::move(layout)) {
    if(entries.rows() != entries.cols()) throw InvalidArgument("operator must be square");
    if(entries.rows() == 0) throw InvalidArgument("operator of dimension 0");
    if(layout_.total() != static_cast<std::size_t>(entries.rows()))
        throw InvalidArgument("layout " + layout_.to_string() + " does not match dimension " + std::to_string(entries.rows()));
    double scale = std::max(1.0, entries.cwiseAbs().maxCoeff());
    double asym = (entries - entries.adjoint()).cwiseAbs().maxCoeff();
    if(asym > kAsymmetryReject * scale) throw InvalidArgument("operator is not Hermitian (asymmetry " + std::to_string(asym) + ")");
    entries_ = (entries + entries.adjoint()) / 2.0;
}

double HermitianOperator::pair(const HermitianOperator& other) const {
    // Tr(AB) = sum_ij A_ij B_ji = sum_ij A_ij conj(B_ij) for Hermitian B
    return (entries_.array() * other.entries_.array().conjugate()).sum().real();
}

namespace {

Matrix clip_negative(const Matrix& m) {
    auto spec = spectrum(m);
    double norm = spec.values.cwiseAbs().maxCoeff();
    double lo = spec.values.minCoeff();
    if(lo >= 0) return m;
    if(lo < -kPsdClip * std::max(norm, 1e-300))
        throw InvalidArgument("operator is not positive semidefinite (eigenvalue " + std::to_string(lo) + ")");
    RealVector clipped = spec.values.cwiseMax(0.0);
    return spec.vectors * clipped.asDiagonal() * spec.vectors.adjoint();
}

}  // namespace

PositiveOperator::PositiveOperator(Matrix entries) : PositiveOperator(HermitianOperator(std::move(entries))) {}

PositiveOperator::PositiveOperator(Matrix entries, SystemLayout layout) : PositiveOperator(HermitianOperator(std::move(entries), std::move(layout))) {}

PositiveOperator::PositiveOperator(const HermitianOperator& h) : HermitianOperator(h) {
    if(entries_.cwiseAbs().maxCoeff() == 0.0) return;
    entries_ = clip_negative(entries_);
    entries_ = (entries_ + entries_.adjoint()) / 2.0;
}

PositiveOperator PositiveOperator::zero(const SystemLayout& layout) {
    auto d = static_cast<Eigen::Index>(layout.total());
    return PositiveOperator(Matrix::Zero(d, d), layout);
}

PositiveOperator PositiveOperator::scaled(double c) const {
    if(c < 0) throw InvalidArgument("negative scale for a positive operator");
    return PositiveOperator(Matrix(entries_ * c), layout_);
}

DensityOperator::DensityOperator(Matrix entries) : DensityOperator(PositiveOperator(std::move(entries))) {}

DensityOperator::DensityOperator(Matrix entries, SystemLayout layout) : DensityOperator(PositiveOperator(std::move(entries), std::move(layout))) {}

DensityOperator::DensityOperator(const PositiveOperator& p) : PositiveOperator(p) {
    if(std::abs(trace() - 1.0) > kUnitTrace) throw InvalidArgument("density operator must have unit trace (trace " + std::to_string(trace()) + ")");
}

DensityOperator DensityOperator::pure(const Vector& psi, const SystemLayout& layout) {
    double n = psi.norm();
    if(n == 0) throw InvalidArgument("zero vector is not a state");
    Vector u = psi / n;
    return DensityOperator(Matrix(u * u.adjoint()), layout);
}

DensityOperator DensityOperator::maximally_mixed(const SystemLayout& layout) {
    auto d = static_cast<Eigen::Index>(layout.total());
    return DensityOperator(Matrix(Matrix::Identity(d, d) / static_cast<double>(d)), layout);
}

DensityOperator DensityOperator::normalized(const PositiveOperator& p) {
    double t = p.trace();
    if(!(t > 0)) throw InvalidArgument("cannot normalize an operator with zero trace");
    return DensityOperator(Matrix(p.matrix() / t), p.layout());
}

DensityOperator DensityOperator::with_layout(const SystemLayout& layout) const {
    return DensityOperator(entries_, layout);
}

DensityOperator mix(const DensityOperator& a, const DensityOperator& b, double p) {
    if(!(a.layout() == b.layout())) throw InvalidArgument("mixing states on different layouts");
    if(p < 0 || p > 1) throw InvalidArgument("mixing weight outside [0,1]");
    return DensityOperator(Matrix(p * a.matrix() + (1 - p) * b.matrix()), a.layout());
}

double trace_norm(const Matrix& h) {
    return Eigen::SelfAdjointEigenSolver<Matrix>(h, Eigen::EigenvaluesOnly).eigenvalues().cwiseAbs().sum();
}

double trace_distance(const HermitianOperator& a, const HermitianOperator& b) {
    if(a.dim() != b.dim()) throw InvalidArgument("trace distance between operators of different dimension");
    return trace_norm(a.matrix() - b.matrix());
}

double min_eigenvalue(const Matrix& h) {
    return Eigen::SelfAdjointEigenSolver<Matrix>(h, Eigen::EigenvaluesOnly).eigenvalues().minCoeff();
}

}  // namespace qrel
