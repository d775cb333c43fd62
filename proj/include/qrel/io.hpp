#pragma once

#include "qrel/free_sets.hpp"
#include "qrel/harness.hpp"
#include "qrel/operators.hpp"
#include "qrel/sequences.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace qrel {

/// Malformed input file or descriptor.
class ParseError : public InvalidArgument {
public:
    using InvalidArgument::InvalidArgument;
};

/// 6 decimals, "inf" for +infinity.
std::string format_number(double x);

/// Density matrix on disk:
///   {"dims": [2, 2], "label": "...", "matrix": [[[re, im], ...], ...]}
/// The raw entries are kept so that emit(parse(text)) reproduces canonical files.
struct StateFile {
    SystemLayout layout;
    Matrix matrix;
    std::optional<std::string> label;

    DensityOperator state() const;

    static StateFile from_state(const DensityOperator& rho, std::optional<std::string> label = {});
};

/// Parses and validates; a violation names the row/col of the first offending entry.
StateFile parse_state_file(const std::string& text);
StateFile load_state_file(const std::filesystem::path& path);

/// Canonical text: two-space indent, one matrix row per line, shortest round-trip numbers.
std::string emit_state_file(const StateFile& file);
void save_state_file(const StateFile& file, const std::filesystem::path& path);

/// "separable", "ppt", "ppt:1,2", "pi:{{1,2},{3}}|{{1},{2,3}}" or "hull:<path>"; the
/// hull file holds {"vertices": [state, ...]} or a single state, paths relative to base_dir.
FreeSetModel parse_free_set(const std::string& desc, const SystemLayout& layout, const std::filesystem::path& base_dir = ".");

/// Sequence family with its generator parameters (see README for the schema).
struct ExperimentManifest {
    StateSequence sequence;
    std::vector<std::string> model_descriptors;
    std::vector<FreeSetModel> models;
    HarnessConfig harness;
    std::vector<std::string> clauses;  // extra asserted clauses
    std::uint64_t seed = 1;
};

/// Unknown keys are rejected at every level.
/// `seed` replaces the manifest's seed when given.
ExperimentManifest parse_manifest(const std::string& text, const std::filesystem::path& base_dir = ".", std::optional<std::uint64_t> seed = {});
ExperimentManifest load_manifest(const std::filesystem::path& path, std::optional<std::uint64_t> seed = {});

/// n,trace_dist,lower,upper,gap,mi
std::string report_csv(const ModelReport& report);

/// JSON verdict block for a harness run.
std::string report_json(const ConvergenceReport& report, const std::vector<std::string>& csv_files);

}  // namespace qrel
