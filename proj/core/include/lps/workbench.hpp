#pragma once

#include "lps/optimizer.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace lps {

enum class ContinuationAxis { horizon, constraint };

/// One sweep: the cartesian product of constraint parameters and horizons,
/// repeated for every random start. Constraint parameters are given as B^4
/// (problem 1), S^2 (problem 2) or K0 (problem 3).
struct RunManifest {
    ProblemKind problem = ProblemKind::problem2;
    std::vector<double> constraint_params;
    std::vector<double> horizons;
    std::uint64_t seed = 1;
    int resolution = 32;
    double nu = 0.01;
    double dt = 5e-4;
    double ell = 2.0;
    int save_stride = 1;
    std::string output_dir = "lps-runs";
    int random_starts = 1;
    /// Write an iterate snapshot every this many iterations (0: final only).
    int snapshot_every = 0;
    int max_iterations = 500;
    double kmax = 4.0;
    ContinuationAxis continuation = ContinuationAxis::horizon;
    /// Optional snapshot used instead of the random guess for every family.
    std::string initial_guess;

    void validate() const;
    /// Constraint value (B, S or K0) of a sweep parameter.
    double constraint_value(double param) const;
    std::string param_name() const;
};

RunManifest parse_manifest(const std::string& json_text);
RunManifest load_manifest(const std::filesystem::path& path);
std::string manifest_to_json(const RunManifest& m);

struct SummaryRow {
    std::string hash;
    std::string problem;
    std::string constraint_kind;
    double constraint_param = 0.0;
    double constraint_value = 0.0;
    double T = 0.0;
    int start = 0;
    std::string status;  // ok | failed
    std::string reason;
    bool converged = false;
    int iterations = 0;
    double objective = 0.0;
    std::string branch_tag;
    double K0 = 0.0;
    double E0 = 0.0;
    double l4_norm0 = 0.0;
    double h34_norm0 = 0.0;
    double l4_rate0 = 0.0;
    double max_enstrophy = 0.0;
    double gn_ratio_p4 = 0.0;
    std::optional<double> xi;
    std::optional<double> theta;
    std::string run_dir;
};

struct RunSummary {
    std::filesystem::path root;
    RunManifest manifest;
    std::vector<SummaryRow> rows;
    int executed = 0;
    int skipped = 0;
    int failed = 0;
};

struct RunOptions {
    bool force = false;
    int threads = 1;
    /// Progress lines through the log sink.
    bool verbose = true;
};

/// Executes every family of the manifest under `root`, skipping runs whose
/// directory already holds a completed result with the same content hash.
/// Throws ValidationError for an existing incomplete or foreign run directory
/// unless options.force is set.
RunSummary run_manifest(const RunManifest& manifest, const std::filesystem::path& root, const RunOptions& options);

void write_summary(const RunSummary& s);
RunSummary load_summary(const std::filesystem::path& root);

/// Fits and audits over a summary; the JSON text is also written to root/analysis.json.
std::string analyze_summary(const RunSummary& s);

/// Writes the figure-analogue CSV files into `dir` and returns their paths.
std::vector<std::filesystem::path> export_plot_data(const RunSummary& s, const std::filesystem::path& dir);

/// Self-describing snapshot: one JSON header line followed by raw
/// little-endian complex128 coefficients in [component][i][j][l] order.
void write_snapshot(const std::filesystem::path& path, const SpectralVectorField& field);
SpectralVectorField read_snapshot(const std::filesystem::path& path);

/// 64-bit FNV-1a.
std::uint64_t fnv1a64(std::string_view data);
std::string hex64(std::uint64_t v);

/// LPS_OUTPUT_ROOT (or the current directory) joined with a relative dir.
std::filesystem::path resolve_output_dir(const std::string& dir);
/// LPS_THREADS (default 1), validated.
int resolve_thread_count();

}  // namespace lps
