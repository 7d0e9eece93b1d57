#pragma once

#include <chrono>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "polariton/config.hpp"
#include "polariton/evolution.hpp"
#include "polariton/sweep.hpp"

namespace polariton {

inline constexpr const char* tool_version = "0.1.0";

/// 17 significant digits; parses back to the same double.
std::string format_double(double value);

double parse_csv_double(const std::string& cell);

/// Writes to a temporary sibling and renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

std::string read_file(const std::filesystem::path& path);

/// Columns: t, rho
std::string curve_csv(const ErrorCurve& curve);
ErrorCurve parse_curve_csv(const std::string& text, double delta);

/// Columns: t, norm_phi, norm_psi, mass
std::string trajectory_csv(const Trajectory& trajectory);

/// Columns: alpha, delta, epsilon, t_cross
std::string crossings_csv(const AlgorithmAResult& result);

/// Columns: alpha, beta, intercept, r2, npoints
std::string betas_csv(const AlgorithmAResult& result);

/// Minimal CSV reader for the files above: header row plus numeric rows.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};
CsvTable parse_csv(const std::string& text);

/// Error curves kept under <root>/<physics-hash>/delta=<v>.csv.
class DirectoryCurveStore : public CurveStore {
 public:
  explicit DirectoryCurveStore(const RunConfig& config);

  std::filesystem::path directory() const { return directory_; }
  std::filesystem::path path_for(const CurveJob& job) const;

  std::optional<ErrorCurve> load(const CurveJob& job) override;
  void store(const CurveJob& job, const ErrorCurve& curve) override;

 private:
  std::filesystem::path directory_;
};

nlohmann::json summary_json(const RunConfig& config, const AlgorithmAResult& result);

/// Exclusive claim on an output directory through a `.lock` file.
class OutputDirectoryLock {
 public:
  explicit OutputDirectoryLock(const std::filesystem::path& directory);
  ~OutputDirectoryLock();
  OutputDirectoryLock(const OutputDirectoryLock&) = delete;
  OutputDirectoryLock& operator=(const OutputDirectoryLock&) = delete;

 private:
  std::filesystem::path path_;
};

struct JobStatus {
  std::string name;
  std::string status;
  std::string detail;
};

struct RunManifest {
  std::string command;
  std::string config_hash;
  std::string version = tool_version;
  std::chrono::system_clock::time_point start;
  std::chrono::system_clock::time_point end;
  std::vector<JobStatus> jobs;
  std::vector<std::string> files;
};

/// Relative paths of every regular file under `directory`, sorted, excluding
/// manifest.json and the lock file.
std::vector<std::string> file_inventory(const std::filesystem::path& directory);

/// Fills the inventory from disk and writes <directory>/manifest.json.
void write_manifest(const std::filesystem::path& directory, RunManifest manifest);

nlohmann::json to_json(const RunManifest& manifest);

}  // namespace polariton
