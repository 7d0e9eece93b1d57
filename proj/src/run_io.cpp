#include "polariton/run_io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <thread>

#include <fmt/chrono.h>
#include <fmt/format.h>
#include <unistd.h>

#include "polariton/errors.hpp"

namespace polariton {

namespace fs = std::filesystem;

std::string format_double(double value) { return fmt::format("{:.17g}", value); }

double parse_csv_double(const std::string& cell) {
  if (cell == "nan" || cell == "-nan") return std::numeric_limits<double>::quiet_NaN();
  double value = 0.0;
  const auto* end = cell.data() + cell.size();
  const auto [ptr, ec] = std::from_chars(cell.data(), end, value);
  if (ec != std::errc() || ptr != end) throw std::runtime_error("bad CSV number '" + cell + "'");
  return value;
}

void write_file_atomic(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  const auto tid = std::hash<std::thread::id>{}(std::this_thread::get_id());
  fs::path tmp = path;
  tmp += fmt::format(".tmp.{}.{:x}", ::getpid(), tid);
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << content;
    out.flush();
    if (!out) throw std::runtime_error("write failed for " + tmp.string());
  }
  fs::rename(tmp, path);
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

CsvTable parse_csv(const std::string& text) {
  CsvTable table;
  std::istringstream stream(text);
  std::string line;
  bool header = true;
  while (std::getline(stream, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (header) {
      table.header = std::move(cells);
      header = false;
      continue;
    }
    if (cells.size() != table.header.size()) throw std::runtime_error("ragged CSV row: " + line);
    std::vector<double> row;
    row.reserve(cells.size());
    for (const auto& c : cells) row.push_back(parse_csv_double(c));
    table.rows.push_back(std::move(row));
  }
  return table;
}

std::string curve_csv(const ErrorCurve& curve) {
  std::string out = "t,rho\n";
  for (std::size_t i = 0; i < curve.times.size(); ++i) {
    out += format_double(curve.times[i]) + "," + format_double(curve.rho[i]) + "\n";
  }
  return out;
}

ErrorCurve parse_curve_csv(const std::string& text, double delta) {
  const CsvTable table = parse_csv(text);
  if (table.header != std::vector<std::string>{"t", "rho"}) {
    throw std::runtime_error("curve CSV must have columns t,rho");
  }
  ErrorCurve curve;
  curve.delta = delta;
  for (const auto& row : table.rows) {
    curve.times.push_back(row[0]);
    curve.rho.push_back(row[1]);
  }
  return curve;
}

std::string trajectory_csv(const Trajectory& trajectory) {
  std::string out = "t,norm_phi,norm_psi,mass\n";
  for (std::size_t i = 0; i < trajectory.size(); ++i) {
    out += fmt::format("{},{},{},{}\n", format_double(trajectory.times[i]),
                       format_double(trajectory.norm_phi[i]), format_double(trajectory.norm_psi[i]),
                       format_double(trajectory.mass[i]));
  }
  return out;
}

std::string crossings_csv(const AlgorithmAResult& result) {
  std::string out = "alpha,delta,epsilon,t_cross\n";
  for (const auto& r : result.crossings) {
    out += fmt::format("{},{},{},{}\n", format_double(r.alpha), format_double(r.delta),
                       format_double(r.epsilon), format_double(r.t_cross));
  }
  return out;
}

std::string betas_csv(const AlgorithmAResult& result) {
  std::string out = "alpha,beta,intercept,r2,npoints\n";
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (const auto& row : result.betas) {
    const auto& reg = row.regression;
    out += fmt::format("{},{},{},{},{}\n", format_double(row.regression.alpha),
                       format_double(row.valid ? reg.beta : nan),
                       format_double(row.valid ? reg.intercept : nan),
                       format_double(row.valid ? reg.r_squared : nan), row.valid ? reg.points : 0);
  }
  return out;
}

// --- curve cache --------------------------------------------------------------

DirectoryCurveStore::DirectoryCurveStore(const RunConfig& config)
    : directory_(config.cache_root() / physics_hash(config)) {}

fs::path DirectoryCurveStore::path_for(const CurveJob& job) const {
  std::string name = "delta=" + format_double(job.delta);
  if (job.handoff != 0.0) name += "_handoff=" + format_double(job.handoff);
  return directory_ / (name + ".csv");
}

std::optional<ErrorCurve> DirectoryCurveStore::load(const CurveJob& job) {
  const fs::path path = path_for(job);
  if (!fs::exists(path)) return std::nullopt;
  try {
    return parse_curve_csv(read_file(path), job.delta);
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

void DirectoryCurveStore::store(const CurveJob& job, const ErrorCurve& curve) {
  write_file_atomic(path_for(job), curve_csv(curve));
}

// --- summary ------------------------------------------------------------------

namespace {

nlohmann::json number_or_null(double v) {
  if (std::isfinite(v)) return v;
  return nullptr;
}

}  // namespace

nlohmann::json summary_json(const RunConfig& config, const AlgorithmAResult& result) {
  using nlohmann::json;
  json cfg = {
      {"grid", {{"n", config.n}, {"N", config.N}, {"L", config.L}, {"max_points", config.max_points}}},
      {"physics",
       {{"model", to_string(config.model)},
        {"g", config.g},
        {"gamma", config.gamma},
        {"omega0", config.omega0},
        {"p", config.p},
        {"s", config.s},
        {"Kp", config.Kp},
        {"Ktilde", config.Ktilde}}},
      {"sweep",
       {{"alphas", config.alphas},
        {"epsilons", config.epsilons},
        {"deltas", config.deltas},
        {"comparator", to_string(config.comparator)},
        {"C1", config.C1},
        {"epsilon_floor", config.epsilon_floor}}},
      {"solver",
       {{"T", config.T},
        {"dt", config.dt},
        {"samples_per_unit_time", config.samples_per_unit_time},
        {"workers", config.workers}}},
  };

  json betas = json::array();
  for (const auto& row : result.betas) {
    betas.push_back({
        {"alpha", row.regression.alpha},
        {"beta", row.valid ? number_or_null(row.regression.beta) : json(nullptr)},
        {"intercept", row.valid ? number_or_null(row.regression.intercept) : json(nullptr)},
        {"r2", row.valid ? number_or_null(row.regression.r_squared) : json(nullptr)},
        {"npoints", row.valid ? row.regression.points : 0},
        {"theory_beta", number_or_null(row.prediction.beta)},
        {"regime", to_string(row.prediction.regime)},
        {"note", row.note},
    });
  }

  json meta = {{"valid", result.meta.valid},
               {"theory_slope", result.meta.theory_slope},
               {"theory_intercept", result.meta.theory_intercept}};
  if (result.meta.valid) {
    meta["slope"] = result.meta.fit.slope;
    meta["intercept"] = result.meta.fit.intercept;
    meta["r2"] = result.meta.fit.r_squared;
    meta["npoints"] = result.meta.fit.points;
  }

  return json{
      {"config", cfg},
      {"config_hash", sha256_hex(serialize_config(config))},
      {"betas", betas},
      {"meta_fit", meta},
      {"complete", result.complete()},
      {"warnings", result.warnings},
      {"simulations_run", result.curves.simulations_run},
      {"cache_hits", result.curves.cache_hits},
      {"solver",
       {{"integrator", config.model == Model::ep ? "strang split-step, exact 2x2 per-mode linear "
                                                   "propagator, exact nonlinear phase rotation"
                                                 : "strang split-step, exact free propagator, "
                                                   "exact nonlinear phase rotation"},
        {"comparator", to_string(config.comparator)},
        {"domain", fmt::format("periodic box [-{0}, {0})^{1}", config.L, config.n)},
        {"transform", "FFTW3, FFTW_ESTIMATE"},
        {"initial_data", "delta * exp(-|x|^2 / 2), psi = 0"},
        {"dt", config.dt},
        {"version", tool_version}}},
  };
}

// --- lock and manifest ----------------------------------------------------------

OutputDirectoryLock::OutputDirectoryLock(const fs::path& directory) : path_(directory / ".lock") {
  fs::create_directories(directory);
  std::FILE* f = std::fopen(path_.c_str(), "wx");
  if (f == nullptr) {
    throw std::runtime_error("output directory " + directory.string() +
                             " is locked by another run (remove " + path_.string() +
                             " if stale)");
  }
  std::fprintf(f, "%d\n", static_cast<int>(::getpid()));
  std::fclose(f);
}

OutputDirectoryLock::~OutputDirectoryLock() {
  std::error_code ec;
  fs::remove(path_, ec);
}

std::vector<std::string> file_inventory(const fs::path& directory) {
  std::vector<std::string> files;
  if (!fs::exists(directory)) return files;
  for (const auto& entry : fs::recursive_directory_iterator(directory)) {
    if (!entry.is_regular_file()) continue;
    const std::string rel = fs::relative(entry.path(), directory).generic_string();
    if (rel == "manifest.json" || rel == ".lock") continue;
    files.push_back(rel);
  }
  std::ranges::sort(files);
  return files;
}

nlohmann::json to_json(const RunManifest& m) {
  nlohmann::json jobs = nlohmann::json::array();
  for (const auto& j : m.jobs) {
    jobs.push_back({{"name", j.name}, {"status", j.status}, {"detail", j.detail}});
  }
  return {
      {"command", m.command},
      {"config_hash", m.config_hash},
      {"version", m.version},
      {"start", fmt::format("{:%Y-%m-%dT%H:%M:%S}Z", fmt::gmtime(std::chrono::system_clock::to_time_t(m.start)))},
      {"end", fmt::format("{:%Y-%m-%dT%H:%M:%S}Z", fmt::gmtime(std::chrono::system_clock::to_time_t(m.end)))},
      {"jobs", jobs},
      {"files", m.files},
  };
}

void write_manifest(const fs::path& directory, RunManifest manifest) {
  manifest.files = file_inventory(directory);
  write_file_atomic(directory / "manifest.json", to_json(manifest).dump(2) + "\n");
}

}  // namespace polariton
