#include "polariton/config.hpp"

#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <fmt/format.h>
#include <openssl/evp.h>

#include "polariton/errors.hpp"

namespace polariton {

namespace {

namespace pt = boost::property_tree;

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::string fmt17(double v) { return fmt::format("{:.17g}", v); }

std::string join(const std::vector<double>& values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i > 0) out += ", ";
    out += fmt17(values[i]);
  }
  return out;
}

double to_double(const std::string& key, const std::string& raw) {
  const std::string text = trim(raw);
  double value = 0.0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (text.empty() || ec != std::errc() || ptr != end || !std::isfinite(value)) {
    throw ConfigError("key '" + key + "': expected a finite number, got '" + text + "'", key);
  }
  return value;
}

template <typename Int>
Int to_integer(const std::string& key, const std::string& raw) {
  const std::string text = trim(raw);
  Int value{};
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (text.empty() || ec != std::errc() || ptr != end) {
    throw ConfigError("key '" + key + "': expected an integer, got '" + text + "'", key);
  }
  return value;
}

std::vector<double> to_list(const std::string& key, const std::string& raw) {
  std::vector<double> out;
  if (trim(raw).empty()) return out;
  std::stringstream stream(raw);
  std::string item;
  while (std::getline(stream, item, ',')) out.push_back(to_double(key, item));
  return out;
}

const std::set<std::string>& known_keys(const std::string& section) {
  static const std::map<std::string, std::set<std::string>> keys{
      {"grid", {"n", "N", "L", "max_points"}},
      {"physics", {"model", "g", "gamma", "omega0", "p", "s", "Kp", "Ktilde"}},
      {"sweep", {"alphas", "epsilons", "deltas", "comparator", "C1", "epsilon_floor"}},
      {"solver", {"T", "dt", "samples_per_unit_time", "workers"}},
      {"output", {"directory", "cache_dir"}},
  };
  const auto it = keys.find(section);
  if (it == keys.end()) throw ConfigError("unknown config section [" + section + "]", section);
  return it->second;
}

RunConfig from_tree(const pt::ptree& tree) {
  // n decides the default Sobolev index, so read the grid first.
  int n = 1;
  if (auto grid = tree.get_child_optional("grid")) {
    if (auto v = grid->get_optional<std::string>("n")) n = to_integer<int>("n", *v);
  }
  RunConfig cfg = default_config(n);
  bool comparator_given = false;

  for (const auto& [section, body] : tree) {
    if (body.empty() && !body.data().empty()) {
      throw ConfigError("key '" + section + "' appears outside any section", section);
    }
    const auto& allowed = known_keys(section);
    for (const auto& [key, node] : body) {
      if (!allowed.contains(key)) {
        throw ConfigError("unknown key '" + key + "' in section [" + section + "]", key);
      }
      const std::string value = node.data();
      if (section == "grid") {
        if (key == "n") cfg.n = to_integer<int>(key, value);
        if (key == "N") cfg.N = to_integer<int>(key, value);
        if (key == "L") cfg.L = to_double(key, value);
        if (key == "max_points") cfg.max_points = to_integer<std::uint64_t>(key, value);
      } else if (section == "physics") {
        if (key == "model") cfg.model = parse_model(trim(value));
        if (key == "g") cfg.g = to_double(key, value);
        if (key == "gamma") cfg.gamma = to_double(key, value);
        if (key == "omega0") cfg.omega0 = to_double(key, value);
        if (key == "p") cfg.p = to_double(key, value);
        if (key == "s") cfg.s = to_double(key, value);
        if (key == "Kp") cfg.Kp = to_double(key, value);
        if (key == "Ktilde") cfg.Ktilde = to_double(key, value);
      } else if (section == "sweep") {
        if (key == "alphas") cfg.alphas = to_list(key, value);
        if (key == "epsilons") cfg.epsilons = to_list(key, value);
        if (key == "deltas") cfg.deltas = to_list(key, value);
        if (key == "comparator") {
          cfg.comparator = parse_comparator(trim(value));
          comparator_given = true;
        }
        if (key == "C1") cfg.C1 = to_double(key, value);
        if (key == "epsilon_floor") cfg.epsilon_floor = to_double(key, value);
      } else if (section == "solver") {
        if (key == "T") cfg.T = to_double(key, value);
        if (key == "dt") cfg.dt = to_double(key, value);
        if (key == "samples_per_unit_time") cfg.samples_per_unit_time = to_integer<int>(key, value);
        if (key == "workers") cfg.workers = to_integer<int>(key, value);
      } else if (section == "output") {
        if (key == "directory") cfg.directory = trim(value);
        if (key == "cache_dir") cfg.cache_dir = trim(value);
      }
    }
  }
  if (!comparator_given && cfg.model == Model::nls) cfg.comparator = Comparator::linear_nls;
  cfg.validate();
  return cfg;
}

}  // namespace

RunConfig default_config(int n) {
  RunConfig cfg;
  cfg.n = n;
  cfg.s = std::floor(n / 2.0 + 1.0);
  return cfg;
}

SweepConfig RunConfig::sweep_config() const {
  SweepConfig sc;
  sc.model = model;
  sc.n = n;
  sc.N = N;
  sc.L = L;
  sc.max_points = static_cast<std::size_t>(max_points);
  sc.physics = model_params();
  sc.alphas = alphas;
  sc.epsilons = epsilons;
  sc.deltas = deltas;
  sc.T = T;
  sc.dt = dt;
  sc.samples_per_unit_time = samples_per_unit_time;
  sc.comparator = comparator;
  sc.C1 = C1;
  sc.epsilon_floor = epsilon_floor;
  sc.workers = workers;
  return sc;
}

std::filesystem::path RunConfig::cache_root() const {
  if (!cache_dir.empty()) return cache_dir;
  return std::filesystem::path(directory) / "curves";
}

void RunConfig::validate() const {
  std::uint64_t total = 1;
  for (int d = 0; d < n && d < 3; ++d) total *= static_cast<std::uint64_t>(std::max(N, 0));
  if (n >= 1 && n <= 3 && total > max_points) {
    throw ConfigError("key 'N': N^n exceeds max_points", "N");
  }
  if (!(Kp > 0.0)) throw ConfigError("key 'Kp': must be > 0", "Kp");
  if (!(Ktilde > 0.0)) throw ConfigError("key 'Ktilde': must be > 0", "Ktilde");
  if (directory.empty()) throw ConfigError("key 'directory': must not be empty", "directory");
  try {
    sweep_config().validate();
  } catch (const ConfigError& e) {
    if (e.key().empty()) throw;
    throw ConfigError("key '" + e.key() + "': " + e.what(), e.key());
  }
}

RunConfig parse_config_text(const std::string& text) {
  pt::ptree tree;
  std::istringstream stream(text);
  try {
    pt::read_ini(stream, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError("config parse error at line " + std::to_string(e.line()) + ": " +
                      e.message());
  }
  return from_tree(tree);
}

RunConfig parse_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_config_text(buffer.str());
}

std::string serialize_config(const RunConfig& c) {
  std::string out;
  out += "[grid]\n";
  out += fmt::format("n = {}\nN = {}\nL = {}\nmax_points = {}\n\n", c.n, c.N, fmt17(c.L),
                     c.max_points);
  out += "[physics]\n";
  out += fmt::format("model = {}\ng = {}\ngamma = {}\nomega0 = {}\np = {}\ns = {}\nKp = {}\nKtilde = {}\n\n",
                     to_string(c.model), fmt17(c.g), fmt17(c.gamma), fmt17(c.omega0), fmt17(c.p),
                     fmt17(c.s), fmt17(c.Kp), fmt17(c.Ktilde));
  out += "[sweep]\n";
  out += fmt::format("alphas = {}\nepsilons = {}\ndeltas = {}\ncomparator = {}\nC1 = {}\nepsilon_floor = {}\n\n",
                     join(c.alphas), join(c.epsilons), join(c.deltas), to_string(c.comparator),
                     fmt17(c.C1), fmt17(c.epsilon_floor));
  out += "[solver]\n";
  out += fmt::format("T = {}\ndt = {}\nsamples_per_unit_time = {}\nworkers = {}\n\n", fmt17(c.T),
                     fmt17(c.dt), c.samples_per_unit_time, c.workers);
  out += "[output]\n";
  out += fmt::format("directory = {}\ncache_dir = {}\n", c.directory, c.cache_dir);
  return out;
}

std::string canonical_physics(const RunConfig& c) {
  return fmt::format(
      "n={}\nN={}\nL={}\nmodel={}\ng={}\ngamma={}\nomega0={}\np={}\ns={}\ncomparator={}\nT={}\ndt={}\n"
      "samples_per_unit_time={}\n",
      c.n, c.N, fmt17(c.L), to_string(c.model), fmt17(c.g), fmt17(c.gamma), fmt17(c.omega0),
      fmt17(c.p), fmt17(c.s), to_string(c.comparator), fmt17(c.T), fmt17(c.dt),
      c.samples_per_unit_time);
}

std::string sha256_hex(const std::string& data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int length = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &length, EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("SHA-256 digest failed");
  }
  std::string hex;
  hex.reserve(2 * length);
  for (unsigned int i = 0; i < length; ++i) hex += fmt::format("{:02x}", digest[i]);
  return hex;
}

std::string cache_key(const RunConfig& config, double delta, double handoff) {
  std::string text = canonical_physics(config) + "delta=" + fmt17(delta) + "\n";
  if (config.comparator == Comparator::composite) text += "handoff=" + fmt17(handoff) + "\n";
  return sha256_hex(text);
}

std::string physics_hash(const RunConfig& config) {
  return sha256_hex(canonical_physics(config)).substr(0, 16);
}

void apply_environment(RunConfig& config) {
  if (const char* dir = std::getenv("POLARITON_OUTPUT_DIR"); dir != nullptr && *dir != '\0') {
    config.directory = dir;
  }
  if (const char* workers = std::getenv("POLARITON_WORKERS"); workers != nullptr && *workers != '\0') {
    config.workers = to_integer<int>("POLARITON_WORKERS", workers);
    if (config.workers < 1) throw ConfigError("POLARITON_WORKERS must be >= 1", "workers");
  }
}

}  // namespace polariton
