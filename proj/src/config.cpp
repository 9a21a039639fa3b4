#include "nala/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

namespace nala {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

[[noreturn]] void bad_value(std::string_view key, std::string_view value) {
  throw ConfigError("invalid value for " + std::string(key) + ": '" + std::string(value) + "'");
}

double parse_double(std::string_view key, std::string_view v) {
  double out = 0.0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) bad_value(key, v);
  return out;
}

long long parse_int(std::string_view key, std::string_view v) {
  long long out = 0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) bad_value(key, v);
  return out;
}

std::size_t parse_size(std::string_view key, std::string_view v) {
  const long long n = parse_int(key, v);
  if (n < 0) bad_value(key, v);
  return static_cast<std::size_t>(n);
}

bool parse_bool(std::string_view key, std::string_view v) {
  std::string s(v);
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char ch) { return std::tolower(ch); });
  if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
  if (s == "false" || s == "0" || s == "no" || s == "off") return false;
  bad_value(key, v);
}

using Setter = std::function<void(RunConfig&, std::string_view, std::string_view,
                                  const std::filesystem::path&)>;

Setter real(double RunConfig::*field) {
  return [field](RunConfig& c, std::string_view k, std::string_view v, const auto&) {
    c.*field = parse_double(k, v);
  };
}

Setter size(std::size_t RunConfig::*field) {
  return [field](RunConfig& c, std::string_view k, std::string_view v, const auto&) {
    c.*field = parse_size(k, v);
  };
}

Setter flag(bool RunConfig::*field) {
  return [field](RunConfig& c, std::string_view k, std::string_view v, const auto&) {
    c.*field = parse_bool(k, v);
  };
}

Setter file(std::filesystem::path RunConfig::*field) {
  return [field](RunConfig& c, std::string_view, std::string_view v,
                 const std::filesystem::path& base) {
    std::filesystem::path p{std::string(v)};
    c.*field = (p.empty() || p.is_absolute() || base.empty()) ? p : base / p;
  };
}

const std::map<std::string, Setter, std::less<>>& setters() {
  static const std::map<std::string, Setter, std::less<>> table = {
      {"iota", real(&RunConfig::iota)},
      {"theta", real(&RunConfig::theta)},
      {"c_absent", real(&RunConfig::c_absent)},
      {"c_penalty", real(&RunConfig::c_penalty)},
      {"c_name",
       [](RunConfig& c, std::string_view k, std::string_view v, const auto&) {
         if (v == "auto") {
           c.c_name.reset();
         } else {
           c.c_name = parse_double(k, v);
         }
       }},
      {"k_sim", size(&RunConfig::k_sim)},
      {"k_value", size(&RunConfig::k_value)},
      {"theta_filter", real(&RunConfig::theta_filter)},
      {"end_iteration",
       [](RunConfig& c, std::string_view k, std::string_view v, const auto&) {
         c.end_iteration = static_cast<int>(parse_int(k, v));
       }},
      {"seed_ratio", real(&RunConfig::seed_ratio)},
      {"attr", flag(&RunConfig::use_attributes)},
      {"name", flag(&RunConfig::use_name)},
      {"translated", flag(&RunConfig::use_translated)},
      {"description", flag(&RunConfig::use_description)},
      {"value_embeddings", flag(&RunConfig::use_value_embeddings)},
      {"range_1to1", flag(&RunConfig::range_1to1)},
      {"seed_labels", flag(&RunConfig::seed_labels)},
      {"symmetric_type1", flag(&RunConfig::symmetric_type1)},
      {"swap", flag(&RunConfig::swap)},
      {"name_finetuned", flag(&RunConfig::name_finetuned)},
      {"kg1_triples", file(&RunConfig::kg1_triples)},
      {"kg1_attributes", file(&RunConfig::kg1_attributes)},
      {"kg2_triples", file(&RunConfig::kg2_triples)},
      {"kg2_attributes", file(&RunConfig::kg2_attributes)},
      {"seeds", file(&RunConfig::seeds)},
      {"truth", file(&RunConfig::truth)},
      {"range1", file(&RunConfig::range1)},
      {"range2", file(&RunConfig::range2)},
      {"name1", file(&RunConfig::name1)},
      {"name2", file(&RunConfig::name2)},
      {"translated1", file(&RunConfig::translated1)},
      {"translated2", file(&RunConfig::translated2)},
      {"description1", file(&RunConfig::description1)},
      {"description2", file(&RunConfig::description2)},
      {"values1", file(&RunConfig::values1)},
      {"values2", file(&RunConfig::values2)},
      {"output_dir", file(&RunConfig::output_dir)},
      {"threads",
       [](RunConfig& c, std::string_view k, std::string_view v, const auto&) {
         c.threads = static_cast<unsigned>(parse_size(k, v));
       }},
      {"evidence_log",
       [](RunConfig& c, std::string_view k, std::string_view v, const auto&) {
         if (v == "all") {
           c.evidence_log = EvidenceLogMode::kAll;
         } else if (v == "final") {
           c.evidence_log = EvidenceLogMode::kFinal;
         } else if (v == "none") {
           c.evidence_log = EvidenceLogMode::kNone;
         } else {
           bad_value(k, v);
         }
       }},
  };
  return table;
}

void check_confidence(std::string_view key, double c) {
  if (!(c >= 0.0 && c < 1.0)) {
    throw ConfigError(std::string(key) + " must lie in [0, 1)");
  }
}

}  // namespace

void RunConfig::set(std::string_view key, std::string_view value,
                    const std::filesystem::path& base_dir) {
  const auto& table = setters();
  auto it = table.find(trim(key));
  if (it == table.end()) throw ConfigError("unknown config key: " + std::string(key));
  it->second(*this, it->first, trim(value), base_dir);
}

void RunConfig::validate() const {
  check_confidence("iota", iota);
  check_confidence("theta", theta);
  check_confidence("c_absent", c_absent);
  check_confidence("theta_filter", theta_filter);
  if (c_name) check_confidence("c_name", *c_name);
  if (!(c_penalty > 0.0)) throw ConfigError("c_penalty must be positive");
  if (k_sim < 1) throw ConfigError("k_sim must be at least 1");
  if (end_iteration < 0) throw ConfigError("end_iteration must be non-negative");
  if (!(seed_ratio >= 0.0 && seed_ratio <= 1.0)) throw ConfigError("seed_ratio must lie in [0, 1]");
}

std::vector<std::string> RunConfig::keys() {
  std::vector<std::string> out;
  for (const auto& [key, setter] : setters()) out.push_back(key);
  return out;
}

void parse_config(RunConfig& config, std::string_view text,
                  const std::filesystem::path& base_dir) {
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError("line " + std::to_string(line_no) + ": expected key = value");
    }
    try {
      config.set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)), base_dir);
    } catch (const ConfigError& e) {
      throw ConfigError("line " + std::to_string(line_no) + ": " + e.what());
    }
  }
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  RunConfig config;
  parse_config(config, buf.str(), path.parent_path());
  return config;
}

std::string_view to_string(EvidenceLogMode mode) {
  switch (mode) {
    case EvidenceLogMode::kAll: return "all";
    case EvidenceLogMode::kFinal: return "final";
    case EvidenceLogMode::kNone: return "none";
  }
  return "?";
}

}  // namespace nala
