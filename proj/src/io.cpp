#include "qrel/io.hpp"
#include "qrel/linalg.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

namespace qrel {

using json = nlohmann::json;
namespace fs = std::filesystem;

namespace {

using Index = Eigen::Index;

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if(!in) throw ParseError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

json parse_json(const std::string& text, const std::string& what) {
    try {
        return json::parse(text);
    } catch(const json::parse_error& e) {
        throw ParseError(what + ": " + e.what());
    }
}

void require_object(const json& j, const std::string& where) {
    if(!j.is_object()) throw ParseError(where + ": expected an object");
}

void reject_unknown(const json& j, const std::set<std::string>& allowed, const std::string& where) {
    for(const auto& item : j.items())
        if(!allowed.count(item.key())) throw ParseError(where + ": unknown key \"" + item.key() + "\"");
}

const json& need(const json& j, const std::string& key, const std::string& where) {
    auto it = j.find(key);
    if(it == j.end()) throw ParseError(where + ": missing key \"" + key + "\"");
    return *it;
}

double get_number(const json& j, const std::string& where) {
    if(!j.is_number()) throw ParseError(where + ": expected a number");
    return j.get<double>();
}

std::size_t get_count(const json& j, const std::string& where) {
    if(!j.is_number_unsigned() && !(j.is_number_integer() && j.get<long long>() >= 0))
        throw ParseError(where + ": expected a non-negative integer");
    return j.get<std::size_t>();
}

std::vector<std::size_t> get_counts(const json& j, const std::string& where) {
    if(!j.is_array()) throw ParseError(where + ": expected an array");
    std::vector<std::size_t> out;
    for(std::size_t i = 0; i < j.size(); ++i) out.push_back(get_count(j[i], where + "[" + std::to_string(i) + "]"));
    return out;
}

std::vector<double> get_numbers(const json& j, const std::string& where) {
    if(!j.is_array()) throw ParseError(where + ": expected an array");
    std::vector<double> out;
    for(std::size_t i = 0; i < j.size(); ++i) out.push_back(get_number(j[i], where + "[" + std::to_string(i) + "]"));
    return out;
}

SystemLayout get_layout(const json& j, const std::string& where) {
    auto dims = get_counts(j, where);
    try {
        return SystemLayout(dims);
    } catch(const InvalidArgument& e) {
        throw ParseError(where + ": " + e.what());
    }
}

/// Nested rows of [re, im] pairs; rows x cols fixed by the caller when > 0.
Matrix get_matrix(const json& j, Index rows, Index cols, const std::string& where) {
    if(!j.is_array()) throw ParseError(where + ": expected an array of rows");
    if(rows > 0 && static_cast<Index>(j.size()) != rows)
        throw ParseError(where + ": expected " + std::to_string(rows) + " rows, found " + std::to_string(j.size()));
    rows = static_cast<Index>(j.size());
    if(rows == 0) throw ParseError(where + ": empty matrix");
    if(cols <= 0) cols = j[0].is_array() ? static_cast<Index>(j[0].size()) : 0;
    Matrix m(rows, cols);
    for(Index r = 0; r < rows; ++r) {
        const json& row = j[static_cast<std::size_t>(r)];
        const std::string at_row = where + " row " + std::to_string(r);
        if(!row.is_array() || static_cast<Index>(row.size()) != cols)
            throw ParseError(at_row + ": expected " + std::to_string(cols) + " entries");
        for(Index c = 0; c < cols; ++c) {
            const json& e = row[static_cast<std::size_t>(c)];
            if(!e.is_array() || e.size() != 2 || !e[0].is_number() || !e[1].is_number())
                throw ParseError(at_row + " col " + std::to_string(c) + ": expected [re, im]");
            const double re = e[0].get<double>(), im = e[1].get<double>();
            if(!std::isfinite(re) || !std::isfinite(im)) throw ParseError(at_row + " col " + std::to_string(c) + ": non-finite entry");
            m(r, c) = Complex(re, im);
        }
    }
    return m;
}

void validate_density(const Matrix& m, const std::string& where) {
    const Index d = m.rows();
    const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
    for(Index r = 0; r < d; ++r)
        for(Index c = r; c < d; ++c)
            if(std::abs(m(r, c) - std::conj(m(c, r))) > 1e-8 * scale)
                throw ParseError(where + ": not Hermitian at row " + std::to_string(r) + " col " + std::to_string(c));
    for(Index r = 0; r < d; ++r)
        if(m(r, r).real() < -1e-10 * scale)
            throw ParseError(where + ": negative diagonal at row " + std::to_string(r) + " col " + std::to_string(r));
    const double tr = m.trace().real();
    if(std::abs(tr - 1) > 1e-10) throw ParseError(where + ": trace " + std::to_string(tr) + " is not 1");
    const double lo = min_eigenvalue((m + m.adjoint()) / 2.0);
    if(lo < -1e-10 * std::max(1.0, trace_norm((m + m.adjoint()) / 2.0)))
        throw ParseError(where + ": not positive semidefinite (eigenvalue " + std::to_string(lo) + ")");
}

StateFile state_from_json(const json& j, const std::string& where) {
    require_object(j, where);
    reject_unknown(j, {"dims", "label", "matrix"}, where);
    StateFile f;
    f.layout = get_layout(need(j, "dims", where), where + ".dims");
    const auto d = static_cast<Index>(f.layout.total());
    f.matrix = get_matrix(need(j, "matrix", where), d, d, where + ".matrix");
    if(auto it = j.find("label"); it != j.end()) {
        if(!it->is_string()) throw ParseError(where + ".label: expected a string");
        f.label = it->get<std::string>();
    }
    validate_density(f.matrix, where);
    return f;
}

/// A state given inline or as a path relative to base.
StateFile state_ref(const json& j, const fs::path& base, const std::string& where) {
    if(j.is_string()) {
        fs::path p = base / j.get<std::string>();
        return state_from_json(parse_json(read_file(p), p.string()), p.string());
    }
    return state_from_json(j, where);
}

std::string number_text(double x) {
    // nlohmann renders the shortest representation that round-trips
    return json(x).dump();
}

std::string pair_text(Complex z) {
    return "[" + number_text(z.real()) + ", " + number_text(z.imag()) + "]";
}

// ---------------------------------------------------------------- manifests

struct ManifestContext {
    fs::path base;
    std::uint64_t seed;
};

KrausOperation operation_from_json(const json& j, const std::string& where) {
    require_object(j, where);
    reject_unknown(j, {"kraus", "input_dims", "output_dims"}, where);
    SystemLayout in = get_layout(need(j, "input_dims", where), where + ".input_dims");
    SystemLayout out = j.contains("output_dims") ? get_layout(j["output_dims"], where + ".output_dims") : in;
    const json& ks = need(j, "kraus", where);
    if(!ks.is_array() || ks.empty()) throw ParseError(where + ".kraus: expected a non-empty array of matrices");
    std::vector<Matrix> kraus;
    for(std::size_t i = 0; i < ks.size(); ++i)
        kraus.push_back(get_matrix(ks[i], static_cast<Index>(out.total()), static_cast<Index>(in.total()),
                                   where + ".kraus[" + std::to_string(i) + "]"));
    try {
        return KrausOperation(std::move(kraus), in, out);
    } catch(const InvalidArgument& e) {
        throw ParseError(where + ": " + e.what());
    }
}

StateSequence sequence_from_json(const json& j, const ManifestContext& ctx, const std::string& where);

SequencePtr sub_sequence(const json& j, const ManifestContext& ctx, const std::string& where) {
    require_object(j, where);
    reject_unknown(j, {"family", "parameters"}, where);
    return std::make_shared<const StateSequence>(sequence_from_json(j, ctx, where));
}

StateSequence sequence_from_json(const json& j, const ManifestContext& ctx, const std::string& where) {
    const json& fam = need(j, "family", where);
    if(!fam.is_string()) throw ParseError(where + ".family: expected a string");
    const std::string family = fam.get<std::string>();
    const json& p = need(j, "parameters", where);
    const std::string pw = where + ".parameters";
    require_object(p, pw);

    if(family == "constant") {
        reject_unknown(p, {"state", "n"}, pw);
        return gen_constant(state_ref(need(p, "state", pw), ctx.base, pw + ".state").state(), get_count(need(p, "n", pw), pw + ".n"));
    }
    if(family == "dominated") {
        reject_unknown(p, {"sigma", "c", "n", "delta", "seed"}, pw);
        auto sigma = state_ref(need(p, "sigma", pw), ctx.base, pw + ".sigma").state();
        double c = get_number(need(p, "c", pw), pw + ".c");
        std::size_t n = get_count(need(p, "n", pw), pw + ".n");
        double delta = p.contains("delta") ? get_number(p["delta"], pw + ".delta") : 0.05;
        std::uint64_t seed = p.contains("seed") ? get_count(p["seed"], pw + ".seed") : ctx.seed;
        return gen_dominated(sigma, c, n, seed, delta);
    }
    if(family == "mixture") {
        reject_unknown(p, {"a", "b", "weights", "limit_weight"}, pw);
        auto a = sub_sequence(need(p, "a", pw), ctx, pw + ".a");
        auto b = sub_sequence(need(p, "b", pw), ctx, pw + ".b");
        return gen_mixture(a, b, get_numbers(need(p, "weights", pw), pw + ".weights"), get_number(need(p, "limit_weight", pw), pw + ".limit_weight"));
    }
    if(family == "pushforward") {
        reject_unknown(p, {"base", "ops", "limit_op", "check_models"}, pw);
        auto base = sub_sequence(need(p, "base", pw), ctx, pw + ".base");
        const json& ops_j = need(p, "ops", pw);
        if(!ops_j.is_array()) throw ParseError(pw + ".ops: expected an array");
        std::vector<KrausOperation> ops;
        for(std::size_t i = 0; i < ops_j.size(); ++i) ops.push_back(operation_from_json(ops_j[i], pw + ".ops[" + std::to_string(i) + "]"));
        KrausOperation limit = operation_from_json(need(p, "limit_op", pw), pw + ".limit_op");
        std::vector<std::pair<FreeSetModel, FreeSetModel>> checks;
        if(p.contains("check_models")) {
            const json& cm = p["check_models"];
            if(!cm.is_array()) throw ParseError(pw + ".check_models: expected an array of [input, output] pairs");
            for(std::size_t i = 0; i < cm.size(); ++i) {
                const std::string w = pw + ".check_models[" + std::to_string(i) + "]";
                if(!cm[i].is_array() || cm[i].size() != 2 || !cm[i][0].is_string() || !cm[i][1].is_string())
                    throw ParseError(w + ": expected [input, output] descriptors");
                checks.emplace_back(parse_free_set(cm[i][0].get<std::string>(), limit.input(), ctx.base),
                                    parse_free_set(cm[i][1].get<std::string>(), limit.output(), ctx.base));
            }
        }
        return gen_pushforward(base, std::move(ops), limit, checks, ctx.seed);
    }
    if(family == "lsc_gap") {
        reject_unknown(p, {"dims", "weights"}, pw);
        return gen_lsc_gap(get_counts(need(p, "dims", pw), pw + ".dims"), get_numbers(need(p, "weights", pw), pw + ".weights"));
    }
    throw ParseError(where + ".family: unknown family \"" + family + "\"");
}

const char* observed_text(Observed o) {
    switch(o) {
        case Observed::Yes: return "yes";
        case Observed::No: return "no";
        case Observed::Inconclusive: return "inconclusive";
    }
    return "?";
}

}  // namespace

std::string format_number(double x) {
    if(x == std::numeric_limits<double>::infinity()) return "inf";
    if(x == -std::numeric_limits<double>::infinity()) return "-inf";
    if(std::isnan(x)) return "nan";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", x);
    std::string s(buf);
    if(s == "-0.000000") s = "0.000000";
    return s;
}

// ---------------------------------------------------------------- state files

DensityOperator StateFile::state() const {
    return DensityOperator(matrix, layout);
}

StateFile StateFile::from_state(const DensityOperator& rho, std::optional<std::string> label) {
    return {rho.layout(), rho.matrix(), std::move(label)};
}

StateFile parse_state_file(const std::string& text) {
    return state_from_json(parse_json(text, "state file"), "state");
}

StateFile load_state_file(const fs::path& path) {
    return state_from_json(parse_json(read_file(path), path.string()), path.string());
}

std::string emit_state_file(const StateFile& file) {
    std::ostringstream out;
    out << "{\n  \"dims\": [";
    for(std::size_t p = 0; p < file.layout.parties(); ++p) out << (p ? ", " : "") << file.layout.dim(p);
    out << "],\n";
    if(file.label) out << "  \"label\": " << json(*file.label).dump() << ",\n";
    out << "  \"matrix\": [\n";
    for(Index r = 0; r < file.matrix.rows(); ++r) {
        out << "    [";
        for(Index c = 0; c < file.matrix.cols(); ++c) out << (c ? ", " : "") << pair_text(file.matrix(r, c));
        out << "]" << (r + 1 < file.matrix.rows() ? "," : "") << "\n";
    }
    out << "  ]\n}\n";
    return out.str();
}

void save_state_file(const StateFile& file, const fs::path& path) {
    std::ofstream out(path, std::ios::binary);
    if(!out) throw Error("cannot write " + path.string());
    out << emit_state_file(file);
}

// ---------------------------------------------------------------- free sets

FreeSetModel parse_free_set(const std::string& desc, const SystemLayout& layout, const fs::path& base_dir) {
    try {
        if(desc == "separable") return FreeSetModel::separable(layout);
        if(desc == "ppt") return FreeSetModel::ppt(layout);
        if(desc.rfind("ppt:", 0) == 0) {
            std::vector<std::size_t> parties;
            std::stringstream ss(desc.substr(4));
            std::string item;
            while(std::getline(ss, item, ',')) {
                std::size_t pos = 0;
                unsigned long v = 0;
                try {
                    v = std::stoul(item, &pos);
                } catch(const std::exception&) {
                    pos = 0;
                }
                if(pos != item.size() || pos == 0 || v == 0) throw ParseError("free set \"" + desc + "\": parties are 1-based integers");
                parties.push_back(v - 1);
            }
            return FreeSetModel::ppt(layout, parties);
        }
        if(desc.rfind("pi:", 0) == 0) return FreeSetModel::pi_separable(layout, PartitionSet::parse(desc.substr(3), layout.parties()));
        if(desc.rfind("hull:", 0) == 0) {
            fs::path path = base_dir / desc.substr(5);
            json j = parse_json(read_file(path), path.string());
            std::vector<DensityOperator> vertices;
            if(j.is_object() && j.contains("vertices")) {
                reject_unknown(j, {"vertices"}, path.string());
                const json& vs = j["vertices"];
                if(!vs.is_array() || vs.empty()) throw ParseError(path.string() + ".vertices: expected a non-empty array");
                for(std::size_t i = 0; i < vs.size(); ++i)
                    vertices.push_back(state_ref(vs[i], path.parent_path(), path.string() + ".vertices[" + std::to_string(i) + "]").state());
            } else {
                vertices.push_back(state_from_json(j, path.string()).state());
            }
            for(const auto& v : vertices)
                if(!(v.layout() == layout)) throw ParseError("hull vertex layout " + v.layout().to_string() + " differs from " + layout.to_string());
            return FreeSetModel::hull(std::move(vertices));
        }
    } catch(const ParseError&) {
        throw;
    } catch(const InvalidArgument& e) {
        throw ParseError("free set \"" + desc + "\": " + e.what());
    }
    throw ParseError("unknown free set \"" + desc + "\" (expected separable, ppt, ppt:<parties>, pi:<partitions> or hull:<path>)");
}

// ---------------------------------------------------------------- manifests

ExperimentManifest parse_manifest(const std::string& text, const fs::path& base_dir, std::optional<std::uint64_t> seed) {
    json j = parse_json(text, "manifest");
    require_object(j, "manifest");
    reject_unknown(j, {"family", "parameters", "models", "solver", "tau", "tail", "clauses", "seed"}, "manifest");
    ExperimentManifest m;
    if(j.contains("seed")) m.seed = get_count(j["seed"], "manifest.seed");
    if(seed) m.seed = *seed;

    SolverConfig& sc = m.harness.solver;
    sc.oracle.seed = m.seed;
    if(j.contains("solver")) {
        const json& s = j["solver"];
        require_object(s, "manifest.solver");
        reject_unknown(s, {"stop_gap", "max_iter", "line_search_evals", "restarts", "sweeps", "oracle_tol", "ppt_max_iter", "ppt_gap", "support_tol"},
                       "manifest.solver");
        if(s.contains("stop_gap")) sc.stop_gap = get_number(s["stop_gap"], "manifest.solver.stop_gap");
        if(s.contains("max_iter")) sc.max_iter = static_cast<int>(get_count(s["max_iter"], "manifest.solver.max_iter"));
        if(s.contains("line_search_evals")) sc.line_search_evals = static_cast<int>(get_count(s["line_search_evals"], "manifest.solver.line_search_evals"));
        if(s.contains("restarts")) sc.oracle.restarts = static_cast<int>(get_count(s["restarts"], "manifest.solver.restarts"));
        if(s.contains("sweeps")) sc.oracle.sweeps = static_cast<int>(get_count(s["sweeps"], "manifest.solver.sweeps"));
        if(s.contains("oracle_tol")) sc.oracle.tol = get_number(s["oracle_tol"], "manifest.solver.oracle_tol");
        if(s.contains("ppt_max_iter")) sc.oracle.ppt_max_iter = static_cast<int>(get_count(s["ppt_max_iter"], "manifest.solver.ppt_max_iter"));
        if(s.contains("ppt_gap")) sc.oracle.ppt_gap = get_number(s["ppt_gap"], "manifest.solver.ppt_gap");
        if(s.contains("support_tol")) sc.support_tol = get_number(s["support_tol"], "manifest.solver.support_tol");
    }
    if(sc.oracle.restarts < 1) throw ParseError("manifest.solver.restarts: must be at least 1");
    if(j.contains("tau")) m.harness.tau = get_number(j["tau"], "manifest.tau");
    if(j.contains("tail")) m.harness.tail = get_count(j["tail"], "manifest.tail");
    if(j.contains("clauses")) {
        const json& c = j["clauses"];
        if(!c.is_array()) throw ParseError("manifest.clauses: expected an array of strings");
        for(const auto& x : c) {
            if(!x.is_string()) throw ParseError("manifest.clauses: expected an array of strings");
            m.clauses.push_back(x.get<std::string>());
        }
    }

    ManifestContext ctx{base_dir, m.seed};
    try {
        m.sequence = sequence_from_json(j, ctx, "manifest");
    } catch(const ParseError&) {
        throw;
    } catch(const InvalidArgument& e) {
        throw ParseError(std::string("manifest: ") + e.what());
    }

    const json& models = need(j, "models", "manifest");
    if(!models.is_array() || models.empty()) throw ParseError("manifest.models: expected a non-empty array of descriptors");
    for(const auto& d : models) {
        if(!d.is_string()) throw ParseError("manifest.models: expected descriptor strings");
        m.model_descriptors.push_back(d.get<std::string>());
        m.models.push_back(parse_free_set(d.get<std::string>(), m.sequence.layout(), base_dir));
    }
    return m;
}

ExperimentManifest load_manifest(const fs::path& path, std::optional<std::uint64_t> seed) {
    return parse_manifest(read_file(path), path.parent_path().empty() ? fs::path(".") : path.parent_path(), seed);
}

// ---------------------------------------------------------------- reports

std::string report_csv(const ModelReport& report) {
    std::ostringstream out;
    out << "n,trace_dist,lower,upper,gap,mi\n";
    for(const auto& r : report.rows)
        out << r.n << "," << format_number(r.trace_distance) << "," << format_number(r.lower) << "," << format_number(r.upper) << ","
            << format_number(r.gap) << "," << format_number(r.mutual_information) << "\n";
    return out.str();
}

std::string report_json(const ConvergenceReport& report, const std::vector<std::string>& csv_files) {
    json j;
    j["family"] = report.family;
    j["ok"] = report.ok();
    json models = json::array();
    for(std::size_t i = 0; i < report.models.size(); ++i) {
        const auto& m = report.models[i];
        json e;
        e["model"] = m.model;
        if(i < csv_files.size()) e["table"] = csv_files[i];
        e["observed"] = observed_text(m.observed);
        e["predicted"] = to_string(m.predicted);
        e["clauses"] = m.clauses;
        e["agreement"] = m.agreement;
        e["separation"] = format_number(m.separation);
        e["lsc_ok"] = m.lsc_ok;
        e["flagged"] = m.flagged;
        models.push_back(e);
    }
    j["models"] = models;
    json premises = json::array();
    for(const auto& p : report.premises) premises.push_back({{"name", p.name}, {"passed", p.passed}, {"detail", p.detail}});
    j["premises"] = premises;
    json implications = json::array();
    for(const auto& c : report.implications)
        implications.push_back({{"premise_model", c.premise_model},
                                {"conclusion_model", c.conclusion_model},
                                {"premise", observed_text(c.premise)},
                                {"conclusion", observed_text(c.conclusion)},
                                {"violated", c.violated}});
    j["implications"] = implications;
    j["nesting_violations"] = report.nesting_violations;
    return j.dump(2) + "\n";
}

}  // namespace qrel
