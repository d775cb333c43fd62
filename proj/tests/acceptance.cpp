#include "qrel/entropy.hpp"
#include "qrel/harness.hpp"
#include "qrel/linalg.hpp"
#include "qrel/random.hpp"
#include "qrel/solver.hpp"
#include "qrel/verify.hpp"

#include "oracles.hpp"

#include <chrono>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>

using namespace qrel;

namespace {

using Clock = std::chrono::steady_clock;

struct Outcome {
    bool pass = false;
    std::string detail;
};

int failures = 0;

void criterion(int id, const std::string& name, double budget_s, const std::function<Outcome()>& body) {
    auto t0 = Clock::now();
    Outcome o;
    try {
        o = body();
    } catch(const std::exception& e) {
        o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
    const bool in_time = secs < budget_s;
    const bool pass = o.pass && in_time;
    if(!pass) ++failures;
    std::printf("criterion %d: %s  %s  (%s; %.1f s of %.0f s)\n", id, pass ? "PASS" : "FAIL", name.c_str(), o.detail.c_str(), secs, budget_s);
    std::fflush(stdout);
}

std::string fmt(const char* f, double a) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, a);
    return buf;
}

// ---------------------------------------------------------------- 1

Outcome identities() {
    auto suites = run_identity_suites(2024, 200);
    std::ostringstream d;
    bool ok = true;
    for(const auto& s : suites) {
        if(s.name == "data-processing") continue;
        d << s.name << " " << s.passed << "/" << s.passed + s.failed << " max " << fmt("%.1e", s.worst) << "; ";
        ok = ok && s.failed == 0 && s.passed == 200;
    }
    // cross-check against Schur-Parlett logarithms on faithful states
    double worst = 0;
    for(int i = 0; i < 200; ++i) {
        Rng rng = make_rng(2024, 900 + i);
        SystemLayout l = i % 2 ? SystemLayout({2, 3}) : SystemLayout({2, 2});
        auto rho = random_state(l, rng);
        auto sigma = random_state(l, rng);
        worst = std::max(worst, std::abs(relative_entropy(rho, sigma).value() - oracle::relent(rho.matrix(), sigma.matrix())));
    }
    d << "logm oracle max " << fmt("%.1e", worst);
    return {ok && worst <= 1e-8, d.str()};
}

// ---------------------------------------------------------------- 2

Outcome gradient() {
    Rng rng = make_rng(2025);
    const double h = 1e-5;
    double worst = 0;
    SystemLayout l({2, 2});
    for(int t = 0; t < 50; ++t) {
        auto rho = mix(random_state(l, rng), DensityOperator::maximally_mixed(l), 0.9);
        auto sigma = mix(random_state(l, rng), DensityOperator::maximally_mixed(l), 0.9);
        Matrix x = random_hermitian(4, rng);
        auto f = [&](const Matrix& s) { return relative_entropy(rho, PositiveOperator(s, l)).value(); };
        const double fd = (f(sigma.matrix() + h * x) - f(sigma.matrix() - h * x)) / (2 * h);
        const double an = relent_gradient(rho, sigma).pair(HermitianOperator(x, l));
        worst = std::max(worst, std::abs(an - fd) / std::abs(fd));
    }
    return {worst <= 1e-6, "50 pairs, max relative error " + fmt("%.2e", worst)};
}

// ---------------------------------------------------------------- 3

/// D(rho || sigma) for 2x2 unit-trace sigma through a closed-form eigensolve.
struct QubitRelent {
    Matrix rho;
    double rho_log_rho;

    explicit QubitRelent(const Matrix& r) : rho(r) {
        Eigen::SelfAdjointEigenSolver<Matrix> es(r);
        rho_log_rho = 0;
        for(int i = 0; i < 2; ++i) {
            double p = es.eigenvalues()(i);
            if(p > 1e-300) rho_log_rho += p * std::log(p);
        }
    }

    double operator()(const Matrix& sigma) const {
        Eigen::SelfAdjointEigenSolver<Matrix> es;
        es.computeDirect(sigma);
        double cross = 0;
        for(int i = 0; i < 2; ++i) {
            const Vector v = es.eigenvectors().col(i);
            const double w = (v.adjoint() * rho * v)(0, 0).real();
            const double lam = es.eigenvalues()(i);
            if(w <= 1e-14) continue;
            if(lam <= 1e-12) return std::numeric_limits<double>::infinity();
            cross -= w * std::log(lam);
        }
        return rho_log_rho + cross;
    }
};

Outcome hull_oracle() {
    Rng rng = make_rng(2026);
    SystemLayout l({2});
    double worst = 0;
    int bad = 0;
    SolverConfig cfg;
    cfg.stop_gap = 1e-8;
    cfg.max_iter = 5000;
    for(int t = 0; t < 20; ++t) {
        const int k = 1 + t % 3;
        std::vector<DensityOperator> v;
        for(int i = 0; i < k; ++i) v.push_back(random_state(l, rng, t % 4 == 3 ? 1 : 0));
        auto rho = random_state(l, rng);
        QubitRelent d(rho.matrix());
        const double grid = oracle::simplex_minimum(k, 1e-3, [&](const std::vector<double>& w) {
            Matrix s = Matrix::Zero(2, 2);
            for(int i = 0; i < k; ++i) s += w[i] * v[i].matrix();
            return d(s);
        });
        auto r = free_distance(rho, FreeSetModel::hull(v), cfg);
        if(std::isinf(grid)) {
            if(!r.value.is_infinite()) ++bad;
            continue;
        }
        const double miss = std::max({0.0, r.lower - grid, grid - r.upper});
        worst = std::max(worst, miss);
        if(miss > 1e-6) ++bad;
    }
    return {bad == 0, "20 hulls, " + std::to_string(bad) + " outside, max excursion " + fmt("%.1e", worst)};
}

// ---------------------------------------------------------------- 4

Outcome bell() {
    auto rho = DensityOperator::pure(oracle::max_entangled(2), SystemLayout({2, 2}));
    auto r = free_distance(rho, FreeSetModel::separable(rho.layout()));
    const double ln2 = std::log(2.0);
    std::string d = "[" + fmt("%.6f", r.lower) + ", " + fmt("%.6f", r.upper) + "] width " + fmt("%.1e", r.upper - r.lower);
    return {r.lower <= ln2 && ln2 <= r.upper && r.upper - r.lower <= 5e-3, d};
}

// ---------------------------------------------------------------- 5, 6

Matrix pauli(int k) {
    Matrix m = Matrix::Zero(2, 2);
    const Complex i(0, 1);
    if(k == 0) m << 1, 0, 0, 1;
    if(k == 1) m << 0, 1, 1, 0;
    if(k == 2) m << 0, -i, i, 0;
    if(k == 3) m << 1, 0, 0, -1;
    return m;
}

KrausOperation depolarize_first(double p, const SystemLayout& l) {
    std::vector<Matrix> k;
    for(int a = 0; a < 4; ++a) {
        const double w = a == 0 ? 1 - 3 * p / 4 : p / 4;
        k.push_back(std::sqrt(w) * oracle::kron(pauli(a), Matrix::Identity(4, 4)));
    }
    return KrausOperation(k, l, l);
}

std::vector<ConvergenceReport> reports;

Outcome families() {
    const std::size_t N = 12;
    SystemLayout l({2, 2, 2});
    std::vector<FreeSetModel> models{FreeSetModel::separable(l), FreeSetModel::pi_separable(l, PartitionSet::parse("{{1,2},{3}}|{{1},{2,3}}", 3)),
                                     FreeSetModel::ppt(l)};
    Vector ghz = Vector::Zero(8), w = Vector::Zero(8);
    ghz(0) = ghz(7) = 1 / std::sqrt(2.0);
    w(1) = w(2) = w(4) = 1 / std::sqrt(3.0);
    Rng rng = make_rng(11);
    auto sigma = mix(DensityOperator::pure(ghz, l), random_state(l, rng), 0.6);
    auto sigma2 = mix(DensityOperator::pure(w, l), random_state(l, rng), 0.6);

    auto a = std::make_shared<StateSequence>(gen_dominated(sigma, 0.5, N, 5, 0.02));
    auto b = std::make_shared<StateSequence>(gen_dominated(sigma2, 0.5, N, 6, 0.02));
    std::vector<double> weights;
    std::vector<KrausOperation> ops;
    for(std::size_t n = 1; n <= N; ++n) {
        weights.push_back(0.5 + 0.05 / n);
        ops.push_back(depolarize_first(0.3 + 0.02 / n, l));
    }
    std::vector<std::pair<FreeSetModel, FreeSetModel>> checks;
    for(const auto& m : models) checks.emplace_back(m, m);

    std::vector<StateSequence> converging{*a, gen_mixture(a, b, weights, 0.5), gen_pushforward(a, ops, depolarize_first(0.3, l), checks, 3)};
    HarnessConfig cfg;
    std::ostringstream d;
    bool ok = true;
    for(const auto& seq : converging) {
        auto rep = run_continuity_harness(seq, models, cfg);
        int agree = 0;
        for(const auto& m : rep.models)
            if(m.predicted == Predicted::Converges && m.observed == Observed::Yes && !m.flagged) ++agree;
        ok = ok && rep.ok() && agree == static_cast<int>(models.size());
        d << seq.family << " " << agree << "/" << models.size() << "; ";
        reports.push_back(std::move(rep));
    }

    auto lsc = gen_lsc_gap({2, 2, 2, 2, 3, 3, 3, 3, 4, 4, 4, 4}, {0.60, 0.58, 0.56, 0.54, 0.46, 0.45, 0.44, 0.43, 0.40, 0.39, 0.38, 0.37});
    auto rep = run_continuity_harness(lsc, {FreeSetModel::separable(lsc.layout()), FreeSetModel::ppt(lsc.layout())}, cfg);
    double sep = std::numeric_limits<double>::infinity();
    for(const auto& m : rep.models) {
        ok = ok && m.observed == Observed::No && !m.flagged;
        sep = std::min(sep, m.separation);
    }
    ok = ok && sep >= 10 * cfg.tau && rep.ok();
    d << "lsc_gap observed no, separation " << fmt("%.3f", sep);
    reports.push_back(std::move(rep));
    return {ok, d.str()};
}

Outcome implications() {
    if(reports.empty()) return {false, "no reports from criterion 5"};
    int sequences = 0, rows = 0, bad = 0;
    for(const auto& rep : reports) {
        const auto* sep = rep.find("separable");
        if(!sep || sep->observed != Observed::Yes) continue;
        ++sequences;
        for(const auto& m : rep.models) {
            if(m.model.rfind("pi:", 0) != 0) continue;
            ++rows;
            if(m.observed != Observed::Yes) ++bad;
        }
        for(const auto& c : rep.implications)
            if(c.violated) ++bad;
    }
    return {bad == 0 && rows > 0, std::to_string(sequences) + " sequences with separable yes, " + std::to_string(rows) + " pi rows, " + std::to_string(bad) + " counterexamples"};
}

// ---------------------------------------------------------------- 7

Outcome invariants() {
    int checks = 0, bad = 0;
    std::ostringstream d;

    auto suites = run_identity_suites(2027, 200);
    for(const auto& s : suites)
        if(s.name == "data-processing") {
            checks += s.passed + s.failed;
            bad += s.failed;
            d << "data-processing " << s.passed << "/" << s.passed + s.failed << "; ";
        }

    // joint convexity and nonnegativity
    Rng rng = make_rng(2028);
    for(int t = 0; t < 100; ++t) {
        SystemLayout l = t % 2 ? SystemLayout({2, 3}) : SystemLayout({2, 2});
        std::vector<DensityOperator> r, s;
        std::vector<double> p{0.2, 0.3, 0.5};
        Matrix rm = Matrix::Zero(l.total(), l.total()), sm = rm;
        double rhs = 0;
        for(int i = 0; i < 3; ++i) {
            r.push_back(random_state(l, rng));
            s.push_back(random_state(l, rng));
            rm += p[i] * r[i].matrix();
            sm += p[i] * s[i].matrix();
            const double v = relative_entropy(r[i], s[i]).value();
            rhs += p[i] * v;
            ++checks;
            if(v < -1e-9) ++bad;
        }
        ++checks;
        if(relative_entropy(DensityOperator(rm, l), DensityOperator(sm, l)).value() > rhs + 1e-9) ++bad;
    }

    // LMO nesting: separable >= pi-separable and separable >= PPT floor
    SystemLayout l3({2, 2, 2});
    auto sep3 = FreeSetModel::separable(l3);
    auto pi = FreeSetModel::pi_separable(l3, PartitionSet::parse("{{1,2},{3}}|{{1},{2,3}}", 3));
    auto ppt3 = FreeSetModel::ppt(l3);
    OracleConfig oc;
    int lmo_checks = 0, lmo_bad = 0;
    for(int t = 0; t < 30; ++t) {
        HermitianOperator g(random_hermitian(8, rng), l3);
        oc.seed = 100 + t;
        auto s = lmo(g, sep3, oc);
        auto q = lmo(g, pi, oc);
        auto p = lmo(g, ppt3, oc);
        lmo_checks += 3;
        if(s.value < q.value - 1e-6) ++lmo_bad;
        if(s.value < p.floor - 1e-6) ++lmo_bad;
        if(std::abs(s.vertex.trace() - 1) > 1e-12 || std::abs(s.vertex.matrix().trace().real() - (s.vertex.matrix() * s.vertex.matrix()).trace().real()) > 1e-12)
            ++lmo_bad;
        auto search = closest_product_state(g, l3, oc);
        for(std::size_t i = 1; i < search.running_best.size(); ++i) {
            ++lmo_checks;
            if(search.running_best[i] > search.running_best[i - 1]) ++lmo_bad;
        }
    }
    checks += lmo_checks;
    bad += lmo_bad;
    d << "lmo nesting " << lmo_checks - lmo_bad << "/" << lmo_checks << "; ";

    // distance nesting on random states and in every criterion-5 report row
    int dist_checks = 0, dist_bad = 0;
    for(int t = 0; t < 4; ++t) {
        auto rho = mix(DensityOperator::pure(oracle::max_entangled(2), SystemLayout({2, 2})), random_state(SystemLayout({2, 2}), rng), 0.5 + 0.1 * t);
        auto s = free_distance(rho, FreeSetModel::separable(rho.layout()));
        auto p = free_distance(rho, FreeSetModel::ppt(rho.layout()));
        ++dist_checks;
        if(s.upper < p.lower - 1e-9) ++dist_bad;
    }
    for(const auto& rep : reports) {
        dist_checks += static_cast<int>(rep.models.size());
        dist_bad += static_cast<int>(rep.nesting_violations.size());
    }
    checks += dist_checks;
    bad += dist_bad;
    d << "distance nesting " << dist_checks - dist_bad << "/" << dist_checks << "; total violations " << bad;
    return {bad == 0, d.str()};
}

}  // namespace

int main() {
    criterion(1, "identity suites", 60, identities);
    criterion(2, "gradient vs central differences", 60, gradient);
    criterion(3, "hull brackets vs simplex grid", 120, hull_oracle);
    criterion(4, "Bell state E_R contains ln 2", 60, bell);
    criterion(5, "converging families and the lsc gap", 900, families);
    criterion(6, "separable yes implies pi yes", 900, implications);
    criterion(7, "data-processing and nesting invariants", 300, invariants);
    std::printf("%d of 7 criteria failed\n", failures);
    return failures ? 1 : 0;
}
