#include "simoml/cli_io.hpp"

#include <algorithm>
#include <charconv>
#include <limits>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

namespace simoml {

namespace {

using Entry = std::pair<std::string, std::size_t>;  // value, line

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split_list(std::string_view s) {
  std::vector<std::string_view> out;
  for (;;) {
    const auto comma = s.find(',');
    out.push_back(trim(s.substr(0, comma)));
    if (comma == std::string_view::npos) break;
    s.remove_prefix(comma + 1);
  }
  return out;
}

std::int64_t parse_int(std::string_view s, std::size_t line, std::string_view key) {
  std::int64_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) {
    throw ConfigError(line, std::string(key) + ": expected an integer, got '" + std::string(s) + "'");
  }
  return v;
}

std::uint64_t parse_uint(std::string_view s, std::size_t line, std::string_view key) {
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) {
    throw ConfigError(line, std::string(key) + ": expected an unsigned integer, got '" +
                                std::string(s) + "'");
  }
  return v;
}

double parse_real(std::string_view s, std::size_t line, std::string_view key) {
  if (s == "inf" || s == "+inf" || s == "infinity") return std::numeric_limits<double>::infinity();
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) {
    throw ConfigError(line, std::string(key) + ": expected a real number, got '" + std::string(s) + "'");
  }
  return v;
}

bool parse_bool(std::string_view s, std::size_t line, std::string_view key) {
  if (s == "true" || s == "1" || s == "yes") return true;
  if (s == "false" || s == "0" || s == "no") return false;
  throw ConfigError(line, std::string(key) + ": expected true or false, got '" + std::string(s) + "'");
}

std::string format_full(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

template <class T, class F>
std::string join(const std::vector<T>& values, F&& fmt) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += ", ";
    out += fmt(values[i]);
  }
  return out;
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
  out << content;
  if (!out) throw std::runtime_error("failed writing '" + path.string() + "'");
}

void prepare_dir(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec || !std::filesystem::is_directory(dir)) {
    throw std::runtime_error("output directory '" + dir.string() + "' is not writable");
  }
}

std::filesystem::path write_manifest(const std::filesystem::path& dir, std::string_view stem,
                                     std::string_view kind, const std::string& csv_name,
                                     std::size_t rows, const ExperimentConfig& config) {
  nlohmann::ordered_json j;
  j["artifact"] = "simoml";
  j["version"] = kArtifactVersion;
  j["table"] = kind;
  j["csv"] = csv_name;
  j["rows"] = rows;
  j["seed"] = config.seed;
  j["config"] = serialize_config(config);
  const auto path = dir / (std::string(stem) + ".manifest.json");
  write_file(path, j.dump(2) + "\n");
  return path;
}

}  // namespace

ConfigError::ConfigError(std::size_t line, const std::string& message)
    : InvalidInput(line ? "config line " + std::to_string(line) + ": " + message : "config: " + message),
      line_(line) {}

ExperimentConfig parse_config_text(std::string_view text) {
  static const std::vector<std::string> known{
      "T",    "N_list",         "snr_db_list", "trials", "constellation", "radius_r_squared",
      "failure_policy", "detectors", "seed", "strict_iterations"};

  std::map<std::string, Entry> entries;
  std::size_t line_no = 0;
  std::string_view rest = text;
  while (!rest.empty()) {
    ++line_no;
    const auto nl = rest.find('\n');
    std::string_view line = rest.substr(0, nl);
    rest = nl == std::string_view::npos ? std::string_view{} : rest.substr(nl + 1);

    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ConfigError(line_no, "expected 'key = value'");
    const std::string key(trim(line.substr(0, eq)));
    const std::string value(trim(line.substr(eq + 1)));
    if (key.empty()) throw ConfigError(line_no, "missing key");
    if (std::find(known.begin(), known.end(), key) == known.end()) {
      throw ConfigError(line_no, "unknown key '" + key + "'");
    }
    if (value.empty()) throw ConfigError(line_no, key + ": missing value");
    if (!entries.emplace(key, Entry{value, line_no}).second) {
      throw ConfigError(line_no, "duplicate key '" + key + "'");
    }
  }

  Index T = 8;
  if (auto it = entries.find("T"); it != entries.end()) {
    T = parse_int(it->second.first, it->second.second, "T");
    if (T < 2) throw ConfigError(it->second.second, "T must be at least 2");
  }
  ExperimentConfig c = ExperimentConfig::defaults_for(T);

  for (const auto& [key, entry] : entries) {
    const auto& [value, line] = entry;
    if (key == "T") continue;
    if (key == "N_list") {
      c.N_list.clear();
      for (auto item : split_list(value)) {
        const auto n = parse_int(item, line, key);
        if (n < 1) throw ConfigError(line, "N_list: every N must be at least 1");
        c.N_list.push_back(n);
      }
    } else if (key == "snr_db_list") {
      c.snr_db_list.clear();
      for (auto item : split_list(value)) c.snr_db_list.push_back(parse_real(item, line, key));
    } else if (key == "trials") {
      const auto n = parse_int(value, line, key);
      if (n < 1) throw ConfigError(line, "trials must be at least 1");
      c.trials = static_cast<std::size_t>(n);
    } else if (key == "constellation") {
      try {
        c.constellation = Constellation::by_name(value).name();
      } catch (const InvalidInput& e) {
        throw ConfigError(line, e.what());
      }
    } else if (key == "radius_r_squared") {
      c.radius_r_squared = parse_real(value, line, key);
      if (!(c.radius_r_squared > 0.0)) throw ConfigError(line, "radius_r_squared must be positive");
    } else if (key == "failure_policy") {
      try {
        c.failure_policy = failure_policy_from_string(value);
      } catch (const InvalidInput& e) {
        throw ConfigError(line, e.what());
      }
    } else if (key == "detectors") {
      c.detectors.clear();
      for (auto item : split_list(value)) {
        try {
          c.detectors.push_back(detector_from_string(item));
        } catch (const InvalidInput& e) {
          throw ConfigError(line, e.what());
        }
      }
    } else if (key == "seed") {
      c.seed = parse_uint(value, line, key);
    } else if (key == "strict_iterations") {
      c.strict_iterations = parse_bool(value, line, key);
    }
  }

  try {
    validate_config(c);
  } catch (const ConfigError&) {
    throw;
  } catch (const InvalidInput& e) {
    throw ConfigError(0, e.what());
  }
  for (const std::string& w : config_warnings(c)) warn(w);
  return c;
}

ExperimentConfig parse_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(0, "cannot read '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str());
}

std::string serialize_config(const ExperimentConfig& c) {
  std::ostringstream os;
  os << "T = " << c.T << '\n';
  os << "N_list = " << join(c.N_list, [](Index n) { return std::to_string(n); }) << '\n';
  os << "snr_db_list = " << join(c.snr_db_list, format_full) << '\n';
  os << "trials = " << c.trials << '\n';
  os << "constellation = " << c.constellation << '\n';
  os << "radius_r_squared = " << format_full(c.radius_r_squared) << '\n';
  os << "failure_policy = " << to_string(c.failure_policy) << '\n';
  os << "detectors = " << join(c.detectors, [](Detector d) { return std::string(to_string(d)); })
     << '\n';
  os << "seed = " << c.seed << '\n';
  os << "strict_iterations = " << (c.strict_iterations ? "true" : "false") << '\n';
  return os.str();
}

std::string format_real(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

std::string ser_csv(const SerTable& table) {
  std::string out(kSerHeader);
  out += '\n';
  for (const SerRow& r : table.rows) {
    out += std::string(to_string(r.detector)) + ',' + std::to_string(r.N) + ',' +
           format_real(r.snr_db) + ',' + std::to_string(r.symbols_tested) + ',' +
           std::to_string(r.symbol_errors) + ',' + format_real(r.ser) + ',' +
           format_real(r.std_error) + '\n';
  }
  return out;
}

std::string complexity_csv(const ComplexityTable& table) {
  std::string out(kComplexityHeader);
  out += '\n';
  for (const ComplexityRow& r : table.rows) {
    out += std::to_string(r.N) + ',' + format_real(r.snr_db) + ',' + std::to_string(r.layer) + ',' +
           format_real(r.mean_visited) + ',' + std::to_string(r.max_visited) + ',' +
           format_real(r.restart_rate) + '\n';
  }
  return out;
}

std::vector<std::filesystem::path> emit_results(const SerTable& table,
                                                const ExperimentConfig& config,
                                                const std::filesystem::path& output_dir,
                                                std::string_view stem) {
  prepare_dir(output_dir);
  const std::string csv_name = std::string(stem) + ".csv";
  const auto csv = output_dir / csv_name;
  write_file(csv, ser_csv(table));
  return {csv, write_manifest(output_dir, stem, "ser", csv_name, table.rows.size(), config)};
}

std::vector<std::filesystem::path> emit_results(const ComplexityTable& table,
                                                const ExperimentConfig& config,
                                                const std::filesystem::path& output_dir,
                                                std::string_view stem) {
  prepare_dir(output_dir);
  const std::string csv_name = std::string(stem) + ".csv";
  const auto csv = output_dir / csv_name;
  write_file(csv, complexity_csv(table));
  return {csv,
          write_manifest(output_dir, stem, "complexity", csv_name, table.rows.size(), config)};
}

}  // namespace simoml
