#include "qrel/linalg.hpp"
#include "qrel/random.hpp"
#include "qrel/solver.hpp"

#include "../oracles.hpp"

#include <doctest.h>

using namespace qrel;

namespace {

DensityOperator isotropic(double f) {
    Vector phi = oracle::max_entangled(2);
    Matrix p = phi * phi.adjoint();
    return DensityOperator(Matrix(f * p + (1 - f) * (Matrix::Identity(4, 4) - p) / 3.0), SystemLayout({2, 2}));
}

}  // namespace

TEST_CASE("gradient matches central differences") {
    Rng rng = make_rng(41);
    const double h = 1e-5;
    for(int t = 0; t < 10; ++t) {
        SystemLayout l({2, 2});
        auto rho = random_state(l, rng);
        auto sigma = mix(random_state(l, rng), DensityOperator::maximally_mixed(l), 0.9);
        Matrix x = random_hermitian(4, rng);
        auto f = [&](const Matrix& s) { return relative_entropy(rho, PositiveOperator(s, l)).value(); };
        double fd = (f(sigma.matrix() + h * x) - f(sigma.matrix() - h * x)) / (2 * h);
        double an = relent_gradient(rho, sigma).pair(HermitianOperator(x, l));
        CHECK(std::abs(an - fd) <= 1e-6 * std::abs(fd));
    }
}

TEST_CASE("gradient on ill-conditioned states against extrapolated differences") {
    Rng rng = make_rng(47);
    for(int t = 0; t < 10; ++t) {
        SystemLayout l({2, 2});
        auto rho = random_state(l, rng);
        auto sigma = random_state(l, rng);
        Matrix x = random_hermitian(4, rng);
        const double h = 1e-2 * min_eigenvalue(sigma.matrix());
        auto f = [&](const Matrix& s) { return oracle::relent(rho.matrix(), s) + s.trace().real() - 1; };
        auto diff = [&](double s) { return (f(sigma.matrix() + s * x) - f(sigma.matrix() - s * x)) / (2 * s); };
        double rich = (4 * diff(h / 2) - diff(h)) / 3;
        double an = relent_gradient(rho, sigma).pair(HermitianOperator(x, l));
        CHECK(std::abs(an - rich) <= 1e-7 * std::max(1.0, std::abs(rich)));
    }
}

TEST_CASE("gradient rejects support violations") {
    SystemLayout l({2});
    Matrix p0 = Matrix::Zero(2, 2), p1 = Matrix::Zero(2, 2);
    p0(0, 0) = 1;
    p1(1, 1) = 1;
    CHECK_THROWS_AS(relent_gradient(DensityOperator(p1, l), DensityOperator(p0, l)), SupportViolation);
}

TEST_CASE("Bell state distance to separable and PPT sets") {
    Vector phi = oracle::max_entangled(2);
    auto bell = DensityOperator::pure(phi, SystemLayout({2, 2}));
    for(auto model : {FreeSetModel::separable(bell.layout()), FreeSetModel::ppt(bell.layout())}) {
        auto r = free_distance(bell, model);
        INFO(model.describe());
        CHECK(r.converged);
        CHECK(r.lower <= std::log(2.0) + 1e-12);
        CHECK(r.upper >= std::log(2.0) - 1e-12);
        CHECK(r.fw_gap <= 5e-3);
        CHECK(r.fw_gap == doctest::Approx(r.upper - r.lower));
    }
}

TEST_CASE("isotropic states against the closed form") {
    for(double f : {0.6, 0.8, 0.95}) {
        auto rho = isotropic(f);
        const double exact = std::log(2.0) + f * std::log(f) + (1 - f) * std::log(1 - f);
        auto r = free_distance(rho, FreeSetModel::separable(rho.layout()));
        CHECK(r.lower <= exact + 1e-9);
        CHECK(r.upper >= exact - 1e-9);
        CHECK(r.fw_gap <= 1e-3);
    }
    // below the threshold the state is separable
    auto r = free_distance(isotropic(0.4), FreeSetModel::separable(SystemLayout({2, 2})));
    CHECK(r.upper <= 1e-3);
}

TEST_CASE("maximally correlated states against S(diag) - S(rho)") {
    Rng rng = make_rng(42);
    const int d = 3;
    SystemLayout l({3, 3});
    Matrix small = random_state(SystemLayout({3}), rng).matrix();
    Matrix rho = Matrix::Zero(9, 9);
    for(int i = 0; i < d; ++i)
        for(int j = 0; j < d; ++j) rho(i * d + i, j * d + j) = small(i, j);
    DensityOperator state(rho, l);
    const double exact = oracle::maximally_correlated_ree(rho, d);
    for(auto model : {FreeSetModel::separable(l), FreeSetModel::ppt(l)}) {
        auto r = free_distance(state, model);
        INFO(model.describe());
        CHECK(r.lower <= exact + 1e-9);
        CHECK(r.upper >= exact - 1e-9);
        CHECK(r.fw_gap <= 1e-3);
    }
}

TEST_CASE("bracket invariants along the iterations") {
    Rng rng = make_rng(43);
    auto rho = mix(isotropic(0.9), random_state(SystemLayout({2, 2}), rng), 0.8);
    auto r = free_distance(rho, FreeSetModel::separable(rho.layout()));
    for(double g : r.gap_history) CHECK(g >= -1e-10);
    for(std::size_t i = 1; i < r.upper_history.size(); ++i) CHECK(r.upper_history[i] <= r.upper_history[i - 1] + 1e-12);
    CHECK(r.upper == doctest::Approx(relative_entropy(rho, r.sigma_star).value()));
    double w = 0;
    for(double x : r.weights) w += x;
    CHECK(w == doctest::Approx(1.0));
}

TEST_CASE("hull bracket contains the simplex-grid minimum") {
    Rng rng = make_rng(44);
    SystemLayout l({2});
    auto relent_at = [](const DensityOperator& rho, const std::vector<DensityOperator>& v, const std::vector<double>& w) {
        Matrix s = Matrix::Zero(2, 2);
        for(std::size_t i = 0; i < v.size(); ++i) s += w[i] * v[i].matrix();
        return oracle::relent(rho.matrix(), s);
    };
    for(int t = 0; t < 5; ++t) {
        std::vector<DensityOperator> v{random_state(l, rng), random_state(l, rng)};
        auto rho = random_state(l, rng);
        double grid = oracle::simplex_minimum(2, 1e-4, [&](const std::vector<double>& w) { return relent_at(rho, v, w); });
        auto r = free_distance(rho, FreeSetModel::hull(v));
        CHECK(r.lower <= grid + 1e-6);
        CHECK(r.upper >= grid - 1e-6);
    }
    for(int t = 0; t < 5; ++t) {
        std::vector<DensityOperator> v{random_state(l, rng), random_state(l, rng), random_state(l, rng)};
        auto rho = random_state(l, rng);
        // coarse grid: its minimum only bounds the true minimum from above
        double grid = oracle::simplex_minimum(3, 1e-2, [&](const std::vector<double>& w) { return relent_at(rho, v, w); });
        auto r = free_distance(rho, FreeSetModel::hull(v));
        CHECK(r.lower <= grid + 1e-6);
        CHECK(r.upper >= r.lower);
    }
}

TEST_CASE("hull edge cases") {
    SystemLayout l({2});
    Rng rng = make_rng(45);
    auto rho = random_state(l, rng);
    auto omega = random_state(l, rng);
    auto single = free_distance(rho, FreeSetModel::hull({omega}));
    CHECK(single.value.value() == doctest::Approx(relative_entropy(rho, omega).value()));
    CHECK(single.fw_gap == 0.0);

    Matrix p0 = Matrix::Zero(2, 2), p1 = Matrix::Zero(2, 2);
    p0(0, 0) = 1;
    p1(0, 0) = 0.9;
    p1(0, 1) = p1(1, 0) = 0;
    p1(1, 1) = 0.1;
    // rho has weight on |1>, both vertices... one of them does not: hull contains a faithful state
    auto r = free_distance(rho, FreeSetModel::hull({DensityOperator(p0, l), DensityOperator(p1, l)}));
    CHECK(r.value.is_finite());
    auto inf = free_distance(rho, FreeSetModel::hull({DensityOperator(p0, l)}));
    CHECK(inf.value.is_infinite());
    auto inf2 = free_distance(rho, FreeSetModel::hull({DensityOperator(p0, l), DensityOperator(p0, l)}));
    CHECK(inf2.value.is_infinite());
}

TEST_CASE("free states have distance zero") {
    Rng rng = make_rng(46);
    SystemLayout l({2, 2});
    auto prod = tensor(random_state(SystemLayout({2}), rng), random_state(SystemLayout({2}), rng));
    auto r = free_distance(prod, FreeSetModel::separable(l));
    CHECK(r.upper <= 1e-3);
    CHECK(r.lower <= 1e-12);
}

TEST_CASE("optimal free state is stable across seeds for a faithful state") {
    auto rho = isotropic(0.85);
    SolverConfig a, b;
    a.oracle.seed = 3;
    b.oracle.seed = 77;
    a.stop_gap = b.stop_gap = 1e-4;
    a.max_iter = b.max_iter = 5000;
    auto ra = free_distance(rho, FreeSetModel::separable(rho.layout()), a);
    auto rb = free_distance(rho, FreeSetModel::separable(rho.layout()), b);
    REQUIRE(ra.converged);
    REQUIRE(rb.converged);
    CHECK(trace_distance(ra.sigma_star, rb.sigma_star) <= 1e-3);
    // the closest separable state is the isotropic state at the separability threshold
    auto closest = isotropic(0.5);
    CHECK(trace_distance(ra.sigma_star, closest) <= 1e-3);
    CHECK(trace_distance(rb.sigma_star, closest) <= 1e-3);
}

TEST_CASE("warm start reproduces the bracket") {
    auto rho = isotropic(0.7);
    auto model = FreeSetModel::separable(rho.layout());
    auto cold = free_distance(rho, model);
    SolverConfig cfg;
    cfg.warm_atoms = cold.atoms;
    cfg.warm_weights = cold.weights;
    auto warm = free_distance(rho, model, cfg);
    CHECK(warm.iterations <= cold.iterations);
    CHECK(std::abs(warm.upper - cold.upper) <= 1e-3);
}

TEST_CASE("dimension mismatch is rejected") {
    auto rho = isotropic(0.7);
    CHECK_THROWS_AS(free_distance(rho, FreeSetModel::separable(SystemLayout({2, 3}))), InvalidArgument);
}
