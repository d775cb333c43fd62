#include "qrel/io.hpp"
#include "qrel/random.hpp"

#include "../oracles.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>

using namespace qrel;
namespace fs = std::filesystem;

namespace {

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(in), {});
}

void write_file(const fs::path& p, const std::string& text) {
    std::ofstream(p, std::ios::binary) << text;
}

fs::path scratch_dir(const std::string& name) {
    auto dir = fs::temp_directory_path() / ("qrel_io_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string error_of(const std::string& text) {
    try {
        parse_state_file(text);
    } catch(const ParseError& e) {
        return e.what();
    }
    return "";
}

}  // namespace

TEST_CASE("number formatting") {
    CHECK(format_number(std::log(2.0)) == "0.693147");
    CHECK(format_number(std::numeric_limits<double>::infinity()) == "inf");
    CHECK(format_number(-1e-9) == "0.000000");
    CHECK(format_number(-0.5) == "-0.500000");
    CHECK(format_number(12.0) == "12.000000");
}

TEST_CASE("state files round-trip byte for byte") {
    Rng rng = make_rng(71);
    for(int t = 0; t < 5; ++t) {
        auto rho = random_state(SystemLayout({2, 3}), rng);
        auto text = emit_state_file(StateFile::from_state(rho, t % 2 ? std::optional<std::string>("sample") : std::nullopt));
        auto parsed = parse_state_file(text);
        CHECK(emit_state_file(parsed) == text);
        CHECK(parsed.matrix == rho.matrix());
        CHECK(parsed.layout == rho.layout());
    }
    const std::string canonical =
        "{\n  \"dims\": [2],\n  \"label\": \"plus\",\n  \"matrix\": [\n    [[0.5, 0.0], [0.5, 0.0]],\n    [[0.5, 0.0], [0.5, 0.0]]\n  ]\n}\n";
    CHECK(emit_state_file(parse_state_file(canonical)) == canonical);

    auto dir = scratch_dir("roundtrip");
    auto f = parse_state_file(canonical);
    save_state_file(f, dir / "s.json");
    CHECK(read_file(dir / "s.json") == canonical);
    CHECK(load_state_file(dir / "s.json").label == std::optional<std::string>("plus"));
}

TEST_CASE("state file validation names the offending entry") {
    CHECK(error_of(R"({"dims": [2], "matrix": [[[0.5, 0], [0.1, 0.2]], [[0.1, 0.2], [0.5, 0]]]})").find("row 0 col 1") != std::string::npos);
    CHECK(error_of(R"({"dims": [2], "matrix": [[[1.5, 0], [0, 0]], [[0, 0], [-0.5, 0]]]})").find("row 1 col 1") != std::string::npos);
    CHECK(error_of(R"({"dims": [2], "matrix": [[[0.5, 0], [0, 0]], [[0, 0], [0.6, 0]]]})").find("trace") != std::string::npos);
    CHECK(error_of(R"({"dims": [2], "matrix": [[[0.5, 0], [0.9, 0]], [[0.9, 0], [0.5, 0]]]})").find("positive semidefinite") != std::string::npos);
    CHECK(error_of(R"({"dims": [2], "matrix": [[[1, 0], [0, 0]], [[0, 0]]]})").find("row 1") != std::string::npos);
    CHECK(error_of(R"({"dims": [2], "matrix": [[[1, 0], [0, 0]], [[0, 0], [0, 0]]], "extra": 1})").find("unknown key") != std::string::npos);
    CHECK(error_of(R"({"dims": [3], "matrix": [[[1, 0], [0, 0]], [[0, 0], [0, 0]]]})") != "");
    CHECK(error_of("{not json") != "");
    CHECK(error_of(R"({"matrix": [[[1, 0]]]})").find("dims") != std::string::npos);
}

TEST_CASE("free-set descriptors") {
    SystemLayout l({2, 2, 2});
    CHECK(parse_free_set("separable", l).is_separable());
    CHECK(parse_free_set("ppt", l).is_ppt());
    CHECK(parse_free_set("ppt:1,3", l).is_ppt());
    CHECK(parse_free_set("pi:{{1,2},{3}}|{{1},{2,3}}", l).is_pi_separable());
    CHECK_THROWS_AS(parse_free_set("ppt:0", l), ParseError);
    CHECK_THROWS_AS(parse_free_set("ppt:x", l), ParseError);
    CHECK_THROWS_AS(parse_free_set("pi:{{1,2}}", l), ParseError);
    CHECK_THROWS_AS(parse_free_set("entangled", l), ParseError);

    auto dir = scratch_dir("hull");
    Rng rng = make_rng(72);
    SystemLayout q({2});
    save_state_file(StateFile::from_state(random_state(q, rng)), dir / "a.json");
    write_file(dir / "hull.json", R"({"vertices": ["a.json", {"dims": [2], "matrix": [[[1, 0], [0, 0]], [[0, 0], [0, 0]]]}]})");
    auto hull = parse_free_set("hull:hull.json", q, dir);
    CHECK(hull.is_hull());
    CHECK_THROWS_AS(parse_free_set("hull:hull.json", SystemLayout({2, 2}), dir), ParseError);
    CHECK_THROWS_AS(parse_free_set("hull:missing.json", q, dir), ParseError);
    write_file(dir / "empty.json", R"({"vertices": []})");
    CHECK_THROWS_AS(parse_free_set("hull:empty.json", q, dir), ParseError);
}

TEST_CASE("manifests") {
    auto dir = scratch_dir("manifest");
    Vector phi = oracle::max_entangled(2);
    save_state_file(StateFile::from_state(DensityOperator::pure(phi, SystemLayout({2, 2}))), dir / "bell.json");
    const std::string text = R"({
        "family": "constant",
        "parameters": {"state": "bell.json", "n": 4},
        "models": ["separable", "ppt"],
        "solver": {"stop_gap": 1e-4},
        "tau": 1e-2,
        "tail": 2,
        "seed": 9
    })";
    auto m = parse_manifest(text, dir);
    CHECK(m.sequence.size() == 4);
    CHECK(m.models.size() == 2);
    CHECK(m.model_descriptors == std::vector<std::string>{"separable", "ppt"});
    CHECK(m.harness.solver.stop_gap == 1e-4);
    CHECK(m.harness.tau == 1e-2);
    CHECK(m.harness.tail == 2);
    CHECK(m.seed == 9);
    CHECK(parse_manifest(text, dir, 17).seed == 17);

    auto bad = [&](const std::string& t) { CHECK_THROWS_AS(parse_manifest(t, dir), ParseError); };
    bad(R"({"family": "constant", "parameters": {"state": "bell.json", "n": 4}, "models": ["separable"], "colour": 1})");
    bad(R"({"family": "constant", "parameters": {"state": "bell.json", "n": 4, "x": 0}, "models": ["separable"]})");
    bad(R"({"family": "constant", "parameters": {"state": "bell.json", "n": 4}, "models": []})");
    bad(R"({"family": "spiral", "parameters": {}, "models": ["separable"]})");
    bad(R"({"family": "constant", "parameters": {"state": "bell.json", "n": 4}, "models": ["separable"], "solver": {"stop_gap": "small"}})");
    bad(R"({"family": "lsc_gap", "parameters": {"dims": [2, 3], "weights": [0.5]}, "models": ["separable"]})");

    const std::string lsc = R"({"family": "lsc_gap", "parameters": {"dims": [2, 3, 4], "weights": [0.6, 0.46, 0.4]}, "models": ["separable"]})";
    CHECK(parse_manifest(lsc, dir).sequence.size() == 3);
}

TEST_CASE("report tables") {
    ModelReport m;
    ReportRow a;
    a.n = 1;
    a.trace_distance = 0.25;
    a.lower = 0.1;
    a.upper = 0.1004;
    a.gap = 0.0004;
    a.mutual_information = std::log(2.0);
    ReportRow b = a;
    b.n = 0;
    b.trace_distance = 0;
    m.rows = {a, b};
    CHECK(report_csv(m) == "n,trace_dist,lower,upper,gap,mi\n1,0.250000,0.100000,0.100400,0.000400,0.693147\n0,0.000000,0.100000,0.100400,0.000400,0.693147\n");
}
