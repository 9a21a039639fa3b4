#pragma once
// Run configuration. File format: one `key = value` per line, `#` starts a
// comment. Relative paths are resolved against the config file's directory.

#include <cstddef>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace nala {

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

enum class EvidenceLogMode { kAll, kFinal, kNone };

struct RunConfig {
  double iota = 0.5;
  double theta = 0.1;
  double c_absent = 0.5;
  double c_penalty = 4.0;
  std::optional<double> c_name;  // calibrated when unset
  std::size_t k_sim = 80;
  std::size_t k_value = 1;
  double theta_filter = 0.9;
  int end_iteration = 19;
  double seed_ratio = 0.3;

  bool use_attributes = true;
  bool use_name = true;
  bool use_translated = true;
  bool use_description = true;
  bool use_value_embeddings = true;
  bool range_1to1 = false;
  bool seed_labels = true;
  bool symmetric_type1 = true;
  bool swap = true;
  bool name_finetuned = true;

  std::filesystem::path kg1_triples, kg1_attributes;
  std::filesystem::path kg2_triples, kg2_attributes;
  std::filesystem::path seeds;  // optional; else the first seed_ratio of truth
  std::filesystem::path truth;
  std::filesystem::path range1, range2;
  std::filesystem::path name1, name2;
  std::filesystem::path translated1, translated2;
  std::filesystem::path description1, description2;
  std::filesystem::path values1, values2;
  std::filesystem::path output_dir;

  unsigned threads = 1;  // 0 = hardware concurrency
  EvidenceLogMode evidence_log = EvidenceLogMode::kFinal;

  // Throws ConfigError on an unknown key or unparsable value.
  void set(std::string_view key, std::string_view value,
           const std::filesystem::path& base_dir = {});
  // Throws ConfigError when an invariant is broken.
  void validate() const;

  static std::vector<std::string> keys();
};

RunConfig load_config(const std::filesystem::path& path);
// Applies `key = value` lines on top of `config`.
void parse_config(RunConfig& config, std::string_view text,
                  const std::filesystem::path& base_dir = {});

std::string_view to_string(EvidenceLogMode mode);

}  // namespace nala
