#include "nala/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "nala/parallel.hpp"

namespace nala {

namespace fs = std::filesystem;

namespace {

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

EvaluationReport score(std::size_t correct, std::size_t output, std::size_t truth) {
  EvaluationReport r;
  r.correct = correct;
  r.matched = output;
  r.truth = truth;
  r.recall = truth == 0 ? 0.0 : static_cast<double>(correct) / static_cast<double>(truth);
  r.hits_at_1 = r.recall;
  r.precision = output == 0 ? 0.0 : static_cast<double>(correct) / static_cast<double>(output);
  r.f1 = r.precision + r.recall == 0.0 ? 0.0
                                       : 2.0 * r.precision * r.recall / (r.precision + r.recall);
  return r;
}

std::ofstream open_out(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

std::string iteration_dir(int iteration) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "iter_%02d", iteration);
  return buf;
}

void load_channel(SideInfo& side_info, const KgPair& kgs, Channel channel, const fs::path& p1,
                  const fs::path& p2) {
  if (p1.empty() != p2.empty()) {
    throw LoadError(std::string(to_string(channel)) + " embeddings need a file for each graph");
  }
  if (p1.empty()) return;
  side_info.set_table(Side::kKg1, EmbeddingTable::load(p1, channel, kgs.kg1));
  side_info.set_table(Side::kKg2, EmbeddingTable::load(p2, channel, kgs.kg2));
}

nlohmann::json tv_json(const TruthValue& tv) { return {{"f", tv.f}, {"c", tv.c}}; }

}  // namespace

// ---------------------------------------------------------------------------
// Evaluation

EvaluationReport evaluate(std::span<const MatchedPair> output, std::span<const EntityPair> truth) {
  std::unordered_map<TermId, TermId, TermIdHash> gold;
  for (const EntityPair& p : truth) gold[p.e1] = p.e2;
  std::size_t correct = 0;
  for (const MatchedPair& p : output) {
    auto it = gold.find(p.e1);
    if (it != gold.end() && it->second == p.e2) ++correct;
  }
  return score(correct, output.size(), gold.size());
}

EvaluationReport evaluate(std::span<const std::pair<std::string, std::string>> output,
                          std::span<const std::pair<std::string, std::string>> truth) {
  std::unordered_map<std::string, std::string> gold;
  for (const auto& [a, b] : truth) gold[a] = b;
  std::size_t correct = 0;
  for (const auto& [a, b] : output) {
    auto it = gold.find(a);
    if (it != gold.end() && it->second == b) ++correct;
  }
  return score(correct, output.size(), gold.size());
}

std::string format_report(const EvaluationReport& r) {
  char buf[512];
  std::snprintf(buf, sizeof(buf),
                "hits@1     %.4f\nprecision  %.4f\nrecall     %.4f\nf1         %.4f\n"
                "matched    %zu\ncorrect    %zu\ntruth      %zu\niterations %d\nruntime_s  %.3f\n",
                r.hits_at_1, r.precision, r.recall, r.f1, r.matched, r.correct, r.truth,
                r.iterations, r.runtime_seconds);
  return buf;
}

// ---------------------------------------------------------------------------
// Dataset

void Dataset::finalize(std::vector<EntityPair> truth, const RunConfig& config,
                       std::optional<std::vector<EntityPair>> explicit_seeds) {
  if (explicit_seeds) {
    seeds = std::move(*explicit_seeds);
  } else {
    const auto n = static_cast<std::size_t>(
        std::llround(config.seed_ratio * static_cast<double>(truth.size())));
    seeds.assign(truth.begin(), truth.begin() + static_cast<std::ptrdiff_t>(n));
  }
  std::unordered_set<TermId, TermIdHash> seeded;
  for (const EntityPair& s : seeds) seeded.insert(s.e1);
  test.clear();
  for (const EntityPair& p : truth) {
    if (!seeded.contains(p.e1)) test.push_back(p);
  }
  if (config.seed_labels && !seeds.empty()) {
    inject_seed_label_triples(kgs->kg1, kgs->kg2, seeds);
  } else {
    kgs->kg1.compute_functionality();
    kgs->kg2.compute_functionality();
  }
}

Dataset load_dataset(const RunConfig& config) {
  config.validate();
  if (config.kg1_triples.empty() || config.kg2_triples.empty()) {
    throw LoadError("kg1_triples and kg2_triples are required");
  }
  Dataset data;
  KgPair& kgs = *data.kgs;
  load_kg(kgs.kg1, config.kg1_triples, config.use_attributes ? config.kg1_attributes : fs::path{});
  load_kg(kgs.kg2, config.kg2_triples, config.use_attributes ? config.kg2_attributes : fs::path{});

  std::vector<EntityPair> truth;
  if (!config.truth.empty()) truth = load_entity_pairs(config.truth, kgs.terms);
  std::optional<std::vector<EntityPair>> seeds;
  if (!config.seeds.empty()) seeds = load_entity_pairs(config.seeds, kgs.terms);
  data.finalize(std::move(truth), config, std::move(seeds));

  if (config.range_1to1) {
    if (config.range1.empty() || config.range2.empty()) {
      throw LoadError("range_1to1 needs range1 and range2");
    }
    data.range.enabled = true;
    for (TermId e : load_entity_list(config.range1, kgs.terms, Side::kKg1)) data.range.a1.insert(e);
    for (TermId e : load_entity_list(config.range2, kgs.terms, Side::kKg2)) data.range.a2.insert(e);
  }

  SideInfo& side = *data.side_info;
  if (config.use_name) load_channel(side, kgs, Channel::kName, config.name1, config.name2);
  if (config.use_translated) {
    load_channel(side, kgs, Channel::kNameTranslated, config.translated1, config.translated2);
  }
  if (config.use_description) {
    load_channel(side, kgs, Channel::kDescription, config.description1, config.description2);
  }
  if (config.use_value_embeddings && config.use_attributes) {
    load_channel(side, kgs, Channel::kValue, config.values1, config.values2);
    if (side.has_channel(Channel::kValue)) side.build_value_index(config.k_value);
  }
  return data;
}

std::array<double, 3> channel_confidences(double total, const std::array<bool, 3>& active,
                                          bool finetuned, double c_penalty) {
  std::array<double, 3> out{0.0, 0.0, 0.0};
  const auto n = std::count(active.begin(), active.end(), true);
  if (n == 0 || total <= 0.0) return out;
  double w = evidence_amount(total) / static_cast<double>(n);
  if (!finetuned) w /= c_penalty;
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (active[i]) out[i] = confidence_from_amount(w);
  }
  return out;
}

std::array<bool, 3> active_name_channels(const RunConfig& config, const SideInfo& side_info) {
  const std::array<bool, 3> wanted{config.use_name, config.use_translated, config.use_description};
  std::array<bool, 3> out{};
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = wanted[i] && side_info.has_channel(kNameChannels[i]);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Aligner

Aligner::Aligner(const RunConfig& config, const Dataset& dataset)
    : config_(config), data_(&dataset) {
  config_.validate();
}

AlignmentSnapshot Aligner::initial_snapshot() const {
  AlignmentSnapshot snap;
  snap.iteration = 0;
  snap.use_default_inheritance = true;
  for (const EntityPair& s : data_->seeds) snap.entities.add(s.e1, s.e2, {1.0, kSeedConfidence});
  return snap;
}

AlignmentSnapshot Aligner::next_snapshot(int iteration, const MatchResult& matched,
                                         RelationInheritance inheritance) const {
  AlignmentSnapshot snap = initial_snapshot();
  snap.iteration = iteration;
  snap.use_default_inheritance = iteration <= 1;
  snap.inheritance = std::move(inheritance);
  std::unordered_set<TermId, TermIdHash> seeded;
  for (const EntityPair& s : data_->seeds) {
    seeded.insert(s.e1);
    seeded.insert(s.e2);
  }
  for (const MatchedPair& p : matched.pairs) {
    if (seeded.contains(p.e1) || seeded.contains(p.e2)) continue;
    if (p.tv.f >= config_.theta && p.tv.c >= config_.theta) snap.entities.add(p.e1, p.e2, p.tv);
  }
  return snap;
}

std::vector<CandidateList> Aligner::build_lists(const InferenceEngine& engine,
                                                const AlignmentSnapshot& snapshot,
                                                std::size_t& sentences) const {
  std::vector<TermId> sources = data_->kgs->kg1.entities();
  std::sort(sources.begin(), sources.end());
  std::vector<CandidateList> lists;
  lists.reserve(sources.size());
  for (TermId y1 : sources) lists.emplace_back(y1, config_.k_sim);
  std::vector<std::size_t> counts(sources.size(), 0);
  parallel_for(sources.size(), engine.params().threads, [&](std::size_t i) {
    auto found = filter_range(engine.candidates(sources[i], snapshot), data_->range);
    counts[i] = found.size();
    for (const SimilaritySentence& s : found) lists[i].insert_topk(s);
  });
  sentences = 0;
  for (std::size_t n : counts) sentences += n;
  return lists;
}

void Aligner::write_iteration(const fs::path& dir, const IterationRecord& record,
                              const InferenceEngine& engine, const AlignmentSnapshot& snapshot,
                              bool evidence) const {
  std::unordered_set<TermId, TermIdHash> seeded;
  for (const EntityPair& s : data_->seeds) seeded.insert(s.e1);
  std::vector<MatchedPair> output;
  for (const MatchedPair& p : record.result.pairs) {
    if (!seeded.contains(p.e1)) output.push_back(p);
  }
  write_alignment(dir / "alignment.tsv", output, data_->kgs->terms);
  if (evidence) write_evidence_log(dir / "evidence.jsonl", output, engine, snapshot, data_->kgs->terms);

  const EvaluationReport eval = evaluate(output, data_->test);
  auto out = open_out(dir / "report.txt");
  out << "iteration           " << record.iteration << '\n'
      << "snapshot_entities   " << record.snapshot_entities << '\n'
      << "inheritance_entries " << record.inheritance_entries << '\n'
      << "sentences           " << record.sentences << '\n'
      << "matched             " << record.result.pairs.size() << '\n'
      << "unmatched           " << record.result.unmatched.size() << '\n'
      << "swaps               " << record.swap.swaps << '\n'
      << "seconds             " << record.seconds << '\n';
  if (!data_->test.empty()) out << format_report(eval);
}

EvaluationReport Aligner::run() {
  const auto start = std::chrono::steady_clock::now();
  state_ = RunState{};
  const auto active = active_name_channels(config_, *data_->side_info);
  if (std::find(active.begin(), active.end(), true) != active.end()) {
    const double total = config_.c_name ? *config_.c_name : adaptive_c_name(config_, *data_);
    state_.c_name = channel_confidences(total, active, config_.name_finetuned, config_.c_penalty);
  }

  InferenceParams params;
  params.iota = config_.iota;
  params.theta = config_.theta;
  params.c_absent = config_.c_absent;
  params.c_name = state_.c_name;
  params.symmetric_type1 = config_.symmetric_type1;
  params.threads = resolve_threads(config_.threads);
  const InferenceEngine engine(*data_->kgs, *data_->side_info, params);

  AlignmentSnapshot snapshot = initial_snapshot();
  MatchResult last;
  for (int i = 0; i <= config_.end_iteration; ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    state_.iteration = i;
    IterationRecord record;
    record.iteration = i;
    record.snapshot_entities = snapshot.entities.size();
    record.inheritance_entries = snapshot.inheritance.size();

    const auto lists = build_lists(engine, snapshot, record.sentences);
    MatchResult matched = rbmat(lists);
    if (config_.swap) matched = swap_refine(std::move(matched), lists, &record.swap);
    record.result = matched;

    // Relation inheritance from this snapshot is consumed by the next
    // iteration, and only from iteration 2 on.
    RelationInheritance inheritance;
    if (i >= 1 && i < config_.end_iteration) inheritance = engine.infer_type3(snapshot);
    record.seconds = seconds_since(t0);

    if (!config_.output_dir.empty()) {
      const bool evidence =
          config_.evidence_log == EvidenceLogMode::kAll ||
          (config_.evidence_log == EvidenceLogMode::kFinal && i == config_.end_iteration);
      write_iteration(config_.output_dir / iteration_dir(i), record, engine, snapshot, evidence);
    }
    if (on_iteration) on_iteration(record);
    last = std::move(matched);
    state_.history.push_back(std::move(record));
    if (i < config_.end_iteration) snapshot = next_snapshot(i + 1, last, std::move(inheritance));
  }

  std::unordered_set<TermId, TermIdHash> seeded;
  for (const EntityPair& s : data_->seeds) seeded.insert(s.e1);
  alignment_.clear();
  for (const MatchedPair& p : last.pairs) {
    if (!seeded.contains(p.e1)) alignment_.push_back(p);
  }

  EvaluationReport report = evaluate(alignment_, data_->test);
  report.iterations = config_.end_iteration + 1;
  report.runtime_seconds = seconds_since(start);
  if (!config_.output_dir.empty()) {
    write_alignment(config_.output_dir / "alignment.tsv", alignment_, data_->kgs->terms);
    auto out = open_out(config_.output_dir / "report.txt");
    out << format_report(report);
  }
  return report;
}

double adaptive_c_name(const RunConfig& config, const Dataset& dataset) {
  RunConfig probe = config;
  probe.c_name = kCalibrationProbeConfidence;
  probe.end_iteration = kCalibrationIterations - 1;
  probe.output_dir.clear();
  probe.evidence_log = EvidenceLogMode::kNone;
  Aligner aligner(probe, dataset);
  aligner.run();
  const auto& pairs = aligner.alignment();
  if (pairs.empty()) return kCalibrationProbeConfidence;
  double sum = 0.0;
  for (const MatchedPair& p : pairs) sum += p.tv.c;
  const double mean = sum / static_cast<double>(pairs.size());
  return scale_evidence({1.0, mean}, 0.5).c;
}

// ---------------------------------------------------------------------------
// Files

void write_alignment(const fs::path& path, std::span<const MatchedPair> pairs,
                     const TermRegistry& terms) {
  std::vector<MatchedPair> sorted(pairs.begin(), pairs.end());
  std::sort(sorted.begin(), sorted.end(),
            [](const MatchedPair& a, const MatchedPair& b) { return a.e1 < b.e1; });
  auto out = open_out(path);
  char buf[128];
  for (const MatchedPair& p : sorted) {
    std::snprintf(buf, sizeof(buf), "\t%.12g\t%.12g\t%.12g\n", p.tv.f, p.tv.c, p.tv.expectation());
    out << terms.name(p.e1) << '\t' << terms.name(p.e2) << buf;
  }
}

std::vector<std::pair<std::string, std::string>> read_pairs(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw LoadError("cannot open " + path.string());
  std::vector<std::pair<std::string, std::string>> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto t1 = line.find('\t');
    if (t1 == std::string::npos) {
      throw LoadError(path.string() + ":" + std::to_string(line_no) + ": malformed line");
    }
    const auto t2 = line.find('\t', t1 + 1);
    out.emplace_back(line.substr(0, t1), line.substr(t1 + 1, t2 == std::string::npos
                                                                 ? std::string::npos
                                                                 : t2 - t1 - 1));
  }
  return out;
}

void write_evidence_log(const fs::path& path, std::span<const MatchedPair> pairs,
                        const InferenceEngine& engine, const AlignmentSnapshot& snapshot,
                        const TermRegistry& terms) {
  auto out = open_out(path);
  for (const MatchedPair& p : pairs) {
    const Explanation ex = engine.explain(p.e1, p.e2, snapshot);
    nlohmann::json paths = nlohmann::json::array();
    for (const PathEvidence& ev : ex.paths) {
      nlohmann::json premises = nlohmann::json::array();
      for (const PremiseRecord& pr : ev.premises) {
        premises.push_back({{"stmt", pr.statement}, {"f", pr.tv.f}, {"c", pr.tv.c}});
      }
      paths.push_back({{"type", std::string(to_string(ev.type))},
                       {"premises", std::move(premises)},
                       {"conclusion", tv_json(ev.conclusion)}});
    }
    const TruthValue& tv = ex.sentence.tv;
    nlohmann::json line = {{"statement", terms.display(p.e1) + " <-> " + terms.display(p.e2)},
                           {"f", tv.f},
                           {"c", tv.c},
                           {"expectation", tv.expectation()},
                           {"paths", std::move(paths)}};
    out << line.dump() << '\n';
  }
}

// ---------------------------------------------------------------------------
// Bootstrapping

std::vector<MatchedPair> filter_by_expectation(std::span<const MatchedPair> pairs,
                                               double threshold) {
  std::vector<MatchedPair> out;
  for (const MatchedPair& p : pairs) {
    if (p.tv.expectation() >= threshold) out.push_back(p);
  }
  return out;
}

BootstrapResult bootstrap_unsupervised(const RunConfig& config, const SidecarHook& sidecar) {
  if (config.seed_ratio != 0.0 || !config.seeds.empty()) {
    throw ConfigError("bootstrapping runs without seeds: set seed_ratio = 0 and no seeds file");
  }
  if (config.output_dir.empty()) throw ConfigError("bootstrapping needs output_dir");
  BootstrapResult result;

  RunConfig step1 = config;
  step1.use_value_embeddings = false;
  step1.name_finetuned = false;
  step1.output_dir = config.output_dir / "step1";
  const Dataset data1 = load_dataset(step1);
  Aligner first(step1, data1);
  result.steps.push_back(first.run());

  const auto filtered = filter_by_expectation(first.alignment(), config.theta_filter);
  result.filtered_pairs = filtered.size();
  if (filtered.empty()) {
    throw std::runtime_error("bootstrapping: no matched pair reaches theta_filter = " +
                             std::to_string(config.theta_filter));
  }
  result.pairs_file = config.output_dir / "bootstrap_pairs.tsv";
  {
    auto out = open_out(result.pairs_file);
    for (const MatchedPair& p : filtered) {
      out << data1.kgs->terms.name(p.e1) << '\t' << data1.kgs->terms.name(p.e2) << '\n';
    }
  }

  if (!sidecar || !sidecar(result.pairs_file)) return result;

  RunConfig step2 = config;
  step2.output_dir = config.output_dir / "step2";
  const Dataset data2 = load_dataset(step2);
  Aligner second(step2, data2);
  result.steps.push_back(second.run());
  return result;
}

}  // namespace nala
