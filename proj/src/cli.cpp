#include "qrel/cli.hpp"
#include "qrel/entropy.hpp"
#include "qrel/io.hpp"
#include "qrel/solver.hpp"
#include "qrel/verify.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

namespace qrel {

namespace fs = std::filesystem;

namespace {

struct Options {
    std::string state;
    std::string other;
    std::string manifest;
    std::string dims;
    std::string free_set;
    std::optional<double> tol;
    std::optional<int> max_iter;
    std::optional<std::uint64_t> seed;
    std::string out_dir;
    int count = 200;
};

DensityOperator load_with_dims(const std::string& path, const std::string& dims) {
    auto rho = load_state_file(path).state();
    if(dims.empty()) return rho;
    auto layout = SystemLayout::parse(dims);
    if(layout.total() != static_cast<std::size_t>(rho.dim()))
        throw ParseError("--dims " + dims + " does not match a state of dimension " + std::to_string(rho.dim()));
    return rho.with_layout(layout);
}

int cmd_entropy(const Options& o, std::ostream& out) {
    out << von_neumann_entropy(load_state_file(o.state).state()).format() << "\n";
    return kExitOk;
}

int cmd_relent(const Options& o, std::ostream& out) {
    auto rho = load_state_file(o.state).state();
    auto sigma = load_state_file(o.other).state();
    if(rho.dim() != sigma.dim()) throw ParseError("states have different dimensions");
    out << relative_entropy(rho, sigma, o.tol.value_or(kSupportTol)).format() << "\n";
    return kExitOk;
}

int cmd_mi(const Options& o, std::ostream& out) {
    auto rho = load_with_dims(o.state, o.dims);
    if(rho.layout().parties() < 2) throw ParseError("mutual information needs at least two parties (use --dims)");
    out << mutual_information(rho).value.format() << "\n";
    return kExitOk;
}

SolverConfig solver_config(const Options& o, SolverConfig cfg = {}) {
    if(o.tol) cfg.stop_gap = *o.tol;
    if(o.max_iter) cfg.max_iter = *o.max_iter;
    if(o.seed) cfg.oracle.seed = *o.seed;
    return cfg;
}

int cmd_ree(const Options& o, std::ostream& out, std::ostream& err) {
    auto rho = load_with_dims(o.state, o.dims);
    auto model = parse_free_set(o.free_set, rho.layout(), fs::path(o.state).parent_path());
    auto r = free_distance(rho, model, solver_config(o));
    out << "[" << format_number(r.lower) << ", " << format_number(r.upper) << "] iterations " << r.iterations << "\n";
    if(!r.diagnostic.empty()) err << r.diagnostic << "\n";
    return r.flagged ? kExitNumerical : kExitOk;
}

int cmd_seq_run(const Options& o, std::ostream& out, std::ostream& err) {
    auto m = load_manifest(o.manifest, o.seed);
    m.harness.solver = solver_config(o, m.harness.solver);
    auto report = run_continuity_harness(m.sequence, m.models, m.harness, m.clauses);

    fs::path dir = o.out_dir.empty() ? fs::path(".") : fs::path(o.out_dir);
    fs::create_directories(dir);
    std::vector<std::string> tables;
    for(std::size_t i = 0; i < report.models.size(); ++i) {
        std::string name = "model" + std::to_string(i + 1) + ".csv";
        std::ofstream f(dir / name, std::ios::binary);
        if(!f) throw Error("cannot write " + (dir / name).string());
        f << report_csv(report.models[i]);
        tables.push_back(name);
    }
    {
        std::ofstream f(dir / "verdict.json", std::ios::binary);
        if(!f) throw Error("cannot write " + (dir / "verdict.json").string());
        f << report_json(report, tables);
    }

    bool flagged = false;
    for(std::size_t i = 0; i < report.models.size(); ++i) {
        const auto& r = report.models[i];
        const auto& lim = r.limit_row();
        out << m.model_descriptors[i] << ": predicted " << to_string(r.predicted) << ", observed " << to_string(r.observed) << ", limit ["
            << format_number(lim.lower) << ", " << format_number(lim.upper) << "]\n";
        flagged = flagged || r.flagged;
    }
    for(const auto& p : report.premises)
        if(!p.passed) err << "premise failed: " << p.name << " (" << p.detail << ")\n";
    for(const auto& c : report.implications)
        if(c.violated) err << "implication violated: " << c.premise_model << " -> " << c.conclusion_model << "\n";
    for(const auto& v : report.nesting_violations) err << "nesting violation: " << v << "\n";
    if(flagged) {
        err << "an oracle subsolver hit its iteration cap\n";
        return kExitNumerical;
    }
    return report.ok() ? kExitOk : kExitVerify;
}

int cmd_verify(const Options& o, std::ostream& out) {
    auto suites = run_identity_suites(o.seed.value_or(1), o.count);
    int failed = 0;
    for(const auto& s : suites) {
        out << s.name << ": " << s.passed << " passed, " << s.failed << " failed, max residual " << std::scientific << s.worst << std::defaultfloat << "\n";
        failed += s.failed;
    }
    return failed ? kExitVerify : kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Relative entropy distances to free sets and continuity experiments"};
    app.require_subcommand(1);
    Options o;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--tol", o.tol, "tolerance (support cutoff for relent, stopping gap for ree/seq)");
        sub->add_option("--max-iter", o.max_iter, "solver iteration cap")->check(CLI::PositiveNumber);
        sub->add_option("--seed", o.seed, "random seed");
        sub->add_option("--dims", o.dims, "layout override, e.g. 2x2");
    };

    auto* entropy = app.add_subcommand("entropy", "von Neumann entropy of a state");
    entropy->add_option("state", o.state, "state file")->required();

    auto* relent = app.add_subcommand("relent", "relative entropy D(rho || sigma)");
    relent->add_option("rho", o.state, "state file")->required();
    relent->add_option("sigma", o.other, "state file")->required();
    add_common(relent);

    auto* mi = app.add_subcommand("mi", "mutual information across the parties");
    mi->add_option("state", o.state, "state file")->required();
    mi->add_option("--dims", o.dims, "layout, e.g. 2x2");

    auto* ree = app.add_subcommand("ree", "relative entropy distance to a free set");
    ree->add_option("state", o.state, "state file")->required();
    ree->add_option("--free-set", o.free_set, "separable | ppt[:parties] | pi:<partitions> | hull:<path>")->required();
    add_common(ree);

    auto* seq = app.add_subcommand("seq", "state sequences");
    seq->require_subcommand(1);
    auto* seq_run = seq->add_subcommand("run", "run the continuity harness on a manifest");
    seq_run->add_option("manifest", o.manifest, "manifest file")->required();
    seq_run->add_option("--out", o.out_dir, "output directory");
    add_common(seq_run);

    auto* verify = app.add_subcommand("verify", "randomized identity suites");
    verify->add_option("--seed", o.seed, "random seed");
    verify->add_option("--count", o.count, "instances per suite")->check(CLI::PositiveNumber);

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch(const CLI::ParseError& e) {
        return app.exit(e, out, err) == 0 ? kExitOk : kExitUsage;
    }

    try {
        if(*entropy) return cmd_entropy(o, out);
        if(*relent) return cmd_relent(o, out);
        if(*mi) return cmd_mi(o, out);
        if(*ree) return cmd_ree(o, out, err);
        if(*seq_run) return cmd_seq_run(o, out, err);
        if(*verify) return cmd_verify(o, out);
    } catch(const InvalidArgument& e) {
        err << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch(const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitNumerical;
    }
    return kExitUsage;
}

int run_cli(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return run_cli(args, std::cout, std::cerr);
}

}  // namespace qrel
