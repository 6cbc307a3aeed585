/* Serialization of run artifacts.
 *
 * CSV: header row, comma separator, LF line endings. Numbers are written
 * in scientific notation with 17 significant digits so that equal doubles
 * produce equal bytes and a write/read round trip is lossless; missing
 * values are the literal "nan". Manifests are JSON and carry the full
 * parameter echo plus FNV-1a content hashes of every written table.
 */
#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "qkr/analysis.hpp"
#include "qkr/core.hpp"
#include "qkr/ensemble.hpp"

#include <json.hpp>

namespace qkr::io {

std::string format_double(double x);
double parse_double(const std::string& s);

// Column-ordered image of a CSV file; all columns share one length.
struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<double>> cols;

    std::size_t rows() const { return cols.empty() ? 0 : cols.front().size(); }
    // Index of a named column, -1 when absent.
    int column(const std::string& name) const;
};

void write_table(const std::string& path, const Table& t);
Table read_table(const std::string& path);
// Same rows as a JSON object {header -> array}; non-finite values are
// encoded as strings since JSON has no number literal for them.
void write_table_json(const std::string& path, const Table& t);

// Columns t, E_unfiltered, E_filtered, F0, FDelta, detected.
Table energy_table(const EnsembleResult& r);
// Columns P_over_kbar, f_unfiltered, f_filtered on the union bin grid.
Table dist_table(const EnsembleResult::CheckpointDist& d);
// Columns t, D0, F0, FDelta, detected, E0, EDelta, Ebar, Ebar_approx.
Table model_table(const ModelParams& mp, int horizon);
// Columns t, E.
Table classical_table(const analysis::ClassicalResult& r);

std::uint64_t fnv1a(const void* data, std::size_t len, std::uint64_t h = 14695981039346656037ULL);
std::uint64_t fnv1a_file(const std::string& path);

nlohmann::json params_to_json(const SimParams& p);
nlohmann::json fit_to_json(const analysis::FitResult& f);
nlohmann::json verdict_to_json(const analysis::ShapeVerdict& v);
nlohmann::json model_summary_json(const ModelParams& mp);

struct RunManifest {
    std::string version;
    SimParams params;
    int threads = 0;
    double duration_seconds = 0.0;
    std::string created_utc;
    std::vector<std::pair<std::string, std::uint64_t>> outputs;  // file, hash

    std::uint64_t combined_hash() const;
};

void write_manifest(const std::string& path, const RunManifest& m);

inline constexpr const char* kArtifactVersion = "1.0.0";

}  // namespace qkr::io
