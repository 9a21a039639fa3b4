// nala: command-line front end.
//
//   nala align     --config run.cfg [--seed-ratio 0.3 ...]
//   nala bootstrap --config run.cfg [--sidecar-cmd "finetune.sh {pairs}"]
//   nala eval      --pred out.tsv --truth links.tsv
//   nala calibrate --config run.cfg
//
// Every config key is also a flag (`k_sim` -> `--k-sim`); flags override
// the config file. Exit codes: 0 ok, 1 runtime failure, 2 usage error.

#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <map>
#include <string>

#include <CLI11.hpp>

#include "nala/config.hpp"
#include "nala/pipeline.hpp"

namespace {

constexpr int kUsage = 2;
constexpr int kFailure = 1;

std::string flag_name(std::string key) {
  for (char& ch : key) {
    if (ch == '_') ch = '-';
  }
  return "--" + key;
}

struct RunOptions {
  std::string config;
  std::map<std::string, std::string> overrides;
};

void add_run_options(CLI::App& cmd, RunOptions& opts) {
  cmd.add_option("--config", opts.config, "flat key = value config file");
  for (const std::string& key : nala::RunConfig::keys()) {
    cmd.add_option_function<std::string>(
        flag_name(key), [&opts, key](const std::string& v) { opts.overrides[key] = v; },
        "override " + key);
  }
}

// Throws CLI::ValidationError when neither a config nor the graph files
// are given.
nala::RunConfig resolve(const RunOptions& opts) {
  if (opts.config.empty() && !(opts.overrides.contains("kg1_triples") &&
                               opts.overrides.contains("kg2_triples"))) {
    throw CLI::RequiredError("--config (or --kg1-triples and --kg2-triples)");
  }
  nala::RunConfig config = opts.config.empty() ? nala::RunConfig{} : nala::load_config(opts.config);
  for (const auto& [key, value] : opts.overrides) config.set(key, value);
  config.validate();
  return config;
}

void print_iteration(const nala::IterationRecord& r) {
  std::fprintf(stderr, "iter %2d  sentences %zu  matched %zu  swaps %zu  %.2fs\n", r.iteration,
               r.sentences, r.result.pairs.size(), r.swap.swaps, r.seconds);
}

int run_align(const RunOptions& opts) {
  const nala::RunConfig config = resolve(opts);
  const nala::Dataset data = nala::load_dataset(config);
  nala::Aligner aligner(config, data);
  aligner.on_iteration = print_iteration;
  std::cout << nala::format_report(aligner.run());
  return 0;
}

int run_bootstrap(const RunOptions& opts, const std::string& sidecar_cmd) {
  nala::RunConfig config = resolve(opts);
  config.seed_ratio = 0.0;
  config.seeds.clear();
  nala::SidecarHook hook;
  if (!sidecar_cmd.empty()) {
    hook = [&](const std::filesystem::path& pairs) {
      std::string cmd = sidecar_cmd;
      const auto at = cmd.find("{pairs}");
      if (at != std::string::npos) cmd.replace(at, 7, pairs.string());
      std::fprintf(stderr, "running sidecar: %s\n", cmd.c_str());
      if (std::system(cmd.c_str()) != 0) throw std::runtime_error("sidecar command failed");
      return true;
    };
  }
  const auto result = nala::bootstrap_unsupervised(config, hook);
  std::cout << "filtered_pairs " << result.filtered_pairs << '\n'
            << "pairs_file     " << result.pairs_file.string() << '\n';
  for (std::size_t i = 0; i < result.steps.size(); ++i) {
    std::cout << "# step " << i + 1 << '\n' << nala::format_report(result.steps[i]);
  }
  return 0;
}

int run_calibrate(const RunOptions& opts) {
  nala::RunConfig config = resolve(opts);
  config.output_dir.clear();
  const nala::Dataset data = nala::load_dataset(config);
  const auto active = nala::active_name_channels(config, *data.side_info);
  if (std::find(active.begin(), active.end(), true) == active.end()) {
    throw std::runtime_error("calibration needs at least one name embedding channel");
  }
  const double total = nala::adaptive_c_name(config, data);
  const auto per_channel =
      nala::channel_confidences(total, active, config.name_finetuned, config.c_penalty);
  std::printf("c_name %.12g\n", total);
  for (std::size_t i = 0; i < per_channel.size(); ++i) {
    if (!active[i]) continue;
    const auto name = nala::to_string(nala::kNameChannels[i]);
    std::printf("c_name[%.*s] %.12g\n", static_cast<int>(name.size()), name.data(), per_channel[i]);
  }
  return 0;
}

int run_eval(const std::string& pred, const std::string& truth) {
  const auto output = nala::read_pairs(pred);
  const auto gold = nala::read_pairs(truth);
  std::cout << nala::format_report(nala::evaluate(output, gold));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Entity alignment by non-axiomatic similarity inference"};
  app.require_subcommand(1);

  RunOptions align_opts;
  auto* align = app.add_subcommand("align", "supervised iterative alignment");
  add_run_options(*align, align_opts);

  RunOptions boot_opts;
  std::string sidecar_cmd;
  auto* boot = app.add_subcommand("bootstrap", "unsupervised bootstrapping");
  add_run_options(*boot, boot_opts);
  boot->add_option("--sidecar-cmd", sidecar_cmd,
                   "shell command run after step 1; {pairs} is replaced by the pairs file");

  RunOptions cal_opts;
  auto* cal = app.add_subcommand("calibrate", "print the adaptive name-embedding confidence");
  add_run_options(*cal, cal_opts);

  std::string pred, truth;
  auto* eval = app.add_subcommand("eval", "score an alignment file against ground truth");
  eval->add_option("--pred", pred, "alignment TSV")->required();
  eval->add_option("--truth", truth, "ground-truth pairs")->required();

  try {
    app.parse(argc, argv);
    if (*align) return run_align(align_opts);
    if (*boot) return run_bootstrap(boot_opts, sidecar_cmd);
    if (*cal) return run_calibrate(cal_opts);
    if (*eval) return run_eval(pred, truth);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n\n" << app.help();
    return kUsage;
  } catch (const nala::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kFailure;
  }
  return kUsage;
}
