#pragma once
// Iterative alignment: per iteration, infer candidate sentences for every
// KG1 entity, build top-K lists, match, refine by swapping, and feed the
// matched pairs into the next iteration's snapshot.

#include <array>
#include <filesystem>
#include <functional>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "nala/config.hpp"
#include "nala/inference.hpp"
#include "nala/kg.hpp"
#include "nala/matcher.hpp"
#include "nala/side_info.hpp"

namespace nala {

// Seeds enter the snapshot with this confidence so they stay usable in
// evidence arithmetic.
inline constexpr double kSeedConfidence = 1.0 - 1e-6;
inline constexpr int kCalibrationIterations = 5;
inline constexpr double kCalibrationProbeConfidence = 0.5;

struct EvaluationReport {
  double hits_at_1 = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t matched = 0;
  std::size_t correct = 0;
  std::size_t truth = 0;
  double runtime_seconds = 0.0;
  int iterations = 0;
};

EvaluationReport evaluate(std::span<const MatchedPair> output, std::span<const EntityPair> truth);
EvaluationReport evaluate(std::span<const std::pair<std::string, std::string>> output,
                          std::span<const std::pair<std::string, std::string>> truth);
std::string format_report(const EvaluationReport& report);

// Everything a run reads. The graphs already carry seed label triples when
// the config asks for them.
struct Dataset {
  std::unique_ptr<KgPair> kgs = std::make_unique<KgPair>();
  std::unique_ptr<SideInfo> side_info = std::make_unique<SideInfo>(*kgs);
  std::vector<EntityPair> seeds;
  std::vector<EntityPair> test;  // ground truth minus seeds
  RangeFilter range;

  // Selects seeds from `truth` when none are given, injects seed labels and
  // recomputes functionality. Call once after the graphs are filled.
  void finalize(std::vector<EntityPair> truth, const RunConfig& config,
                std::optional<std::vector<EntityPair>> explicit_seeds = std::nullopt);
};

// Reads every file named in the config. Missing mandatory files raise
// LoadError.
Dataset load_dataset(const RunConfig& config);

// Embedding evidence per name channel: `total` is split equally across the
// active channels and divided by c_penalty when the encoder is not
// finetuned. Inactive channels get 0.
std::array<double, 3> channel_confidences(double total, const std::array<bool, 3>& active,
                                          bool finetuned, double c_penalty);
std::array<bool, 3> active_name_channels(const RunConfig& config, const SideInfo& side_info);

struct IterationRecord {
  int iteration = 0;
  MatchResult result;
  SwapStats swap;
  std::size_t sentences = 0;
  std::size_t snapshot_entities = 0;
  std::size_t inheritance_entries = 0;
  double seconds = 0.0;
};

struct RunState {
  int iteration = -1;
  std::array<double, 3> c_name{0.0, 0.0, 0.0};
  std::vector<IterationRecord> history;
};

class Aligner {
 public:
  Aligner(const RunConfig& config, const Dataset& dataset);

  // Runs iterations 0..end_iteration and evaluates the final matching
  // against the test pairs. Writes per-iteration outputs when output_dir is
  // set.
  EvaluationReport run();

  const RunState& state() const { return state_; }
  // Final matched pairs excluding seeds.
  const std::vector<MatchedPair>& alignment() const { return alignment_; }

  // Called after each iteration.
  std::function<void(const IterationRecord&)> on_iteration;

 private:
  AlignmentSnapshot initial_snapshot() const;
  AlignmentSnapshot next_snapshot(int iteration, const MatchResult& matched,
                                  RelationInheritance inheritance) const;
  std::vector<CandidateList> build_lists(const InferenceEngine& engine,
                                         const AlignmentSnapshot& snapshot,
                                         std::size_t& sentences) const;
  void write_iteration(const std::filesystem::path& dir, const IterationRecord& record,
                       const InferenceEngine& engine, const AlignmentSnapshot& snapshot,
                       bool evidence) const;

  RunConfig config_;
  const Dataset* data_;
  RunState state_;
  std::vector<MatchedPair> alignment_;
};

// C_name from a short probe run at the default confidence: half the mean
// evidence of the probe's matched output. Returns the default when the probe
// matches nothing.
double adaptive_c_name(const RunConfig& config, const Dataset& dataset);

// Alignment TSV: e1 TAB e2 TAB f TAB c TAB expectation, sorted by e1 id.
void write_alignment(const std::filesystem::path& path, std::span<const MatchedPair> pairs,
                     const TermRegistry& terms);
std::vector<std::pair<std::string, std::string>> read_pairs(const std::filesystem::path& path);

// One JSON object per line for each pair.
void write_evidence_log(const std::filesystem::path& path, std::span<const MatchedPair> pairs,
                        const InferenceEngine& engine, const AlignmentSnapshot& snapshot,
                        const TermRegistry& terms);

struct BootstrapResult {
  std::vector<EvaluationReport> steps;
  std::filesystem::path pairs_file;
  std::size_t filtered_pairs = 0;
};

// Step 1 runs without seeds and without value embeddings; matched pairs
// with expectation >= theta_filter are written as `e1 TAB e2` for the
// finetuning sidecar. `sidecar` is invoked with that file; when it returns
// true, step 2 reloads the embedding files and runs with them.
using SidecarHook = std::function<bool(const std::filesystem::path& pairs_file)>;
BootstrapResult bootstrap_unsupervised(const RunConfig& config, const SidecarHook& sidecar);

// Matched pairs at or above the threshold.
std::vector<MatchedPair> filter_by_expectation(std::span<const MatchedPair> pairs, double threshold);

}  // namespace nala
