// Command-line surface for the prompt-recovery toolkit. Every subcommand is a
// thin delegate into the library; no business logic lives here.

#include <cstdlib>
#include <iostream>
#include <set>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"

#include "dory/backend.hpp"
#include "dory/bench.hpp"
#include "dory/errors.hpp"

namespace {

using dory::backend::Gateway;
using json = nlohmann::json;

struct CliOptions {
  std::string input;
  std::string cassette;
  bool record = false;
  std::string base_url;
  std::string config_file;
  std::string out_dir = "out";
  std::string assets = "assets";
  std::string model = "gpt-3.5-turbo";
  double temperature = 0.0;
  double recovery_temperature = 0.7;
  int samples = 3;
  int max_tokens = 512;
  std::string alpha = "dynamic";
  std::string beta = "dynamic";
  std::string methods = "dory";
  std::string embedder = "hash";
  std::string values;  // sweep grid override, comma separated
  std::uint64_t seed = 42;
  int jobs = 1;
};

std::string env_or_empty(const char* name) {
  const char* v = std::getenv(name);
  return v ? v : "";
}

// precedence: flags > environment > config file; flags land last because
// CLI11 only writes values the user actually passed
void apply_config_file(CliOptions& opt, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw dory::Error("cannot open config file: " + path);
  json j = json::parse(in);
  opt.base_url = j.value("base_url", opt.base_url);
  opt.assets = j.value("assets", opt.assets);
  opt.model = j.value("model", opt.model);
  opt.temperature = j.value("temperature", opt.temperature);
  opt.recovery_temperature = j.value("recovery_temperature", opt.recovery_temperature);
  opt.samples = j.value("samples", opt.samples);
  opt.max_tokens = j.value("max_tokens", opt.max_tokens);
  opt.alpha = j.value("alpha", opt.alpha);
  opt.beta = j.value("beta", opt.beta);
  opt.methods = j.value("methods", opt.methods);
  opt.embedder = j.value("embedder", opt.embedder);
  opt.seed = j.value("seed", opt.seed);
  opt.jobs = j.value("jobs", opt.jobs);
}

dory::uncertainty::ThresholdPolicy parse_policy(const std::string& s, const char* flag) {
  if (s == "dynamic") return dory::uncertainty::ThresholdPolicy::dynamic();
  try {
    return dory::uncertainty::ThresholdPolicy::fixed(std::stod(s));
  } catch (const std::exception&) {
    throw CLI::ValidationError(flag, "expected 'dynamic' or a real number, got '" + s + "'");
  }
}

std::vector<std::string> split_csv(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

dory::bench::ExperimentConfig make_config(const CliOptions& opt) {
  dory::bench::ExperimentConfig config;
  config.pipeline.model_id = opt.model;
  config.pipeline.max_tokens = opt.max_tokens;
  config.pipeline.generation_temperature = opt.temperature;
  config.pipeline.recovery_temperature = opt.recovery_temperature;
  config.pipeline.n_samples = opt.samples;
  config.pipeline.alpha = parse_policy(opt.alpha, "--alpha");
  config.pipeline.beta = parse_policy(opt.beta, "--beta");
  config.seed = opt.seed;
  config.jobs = opt.jobs;
  config.asset_dir = opt.assets;
  const auto methods = split_csv(opt.methods);
  config.methods = std::set<std::string>(methods.begin(), methods.end());
  if (opt.embedder == "hash") {
    config.embedder = std::make_shared<dory::metrics::HashingEmbedder>();
  } else if (opt.embedder == "remote") {
    config.embedder = std::shared_ptr<const dory::metrics::Embedder>(
        dory::metrics::make_remote_embedder(opt.base_url, "", "text-embedding-3-small"));
  } else if (opt.embedder != "none") {
    throw CLI::ValidationError("--embedder", "expected 'hash', 'remote' or 'none'");
  }
  return config;
}

Gateway make_gateway(const CliOptions& opt) {
  std::string base_url = opt.base_url;
  if (base_url.empty()) base_url = env_or_empty("DORY_BASE_URL");
  if (opt.record) {
    if (opt.cassette.empty()) throw dory::Error("--record requires --cassette");
    return Gateway::record(dory::backend::make_live_transport({base_url}), opt.cassette);
  }
  if (!opt.cassette.empty()) return Gateway::replay(opt.cassette);
  return Gateway::live(dory::backend::make_live_transport({base_url}));
}

int finish(const dory::bench::Report& report, const CliOptions& opt) {
  report.save(opt.out_dir);
  std::cout << report.to_text();
  std::cout << "report written to " << opt.out_dir << "\n";
  return report.failures > 0 ? 1 : 0;
}

int cmd_recover(const CliOptions& opt) {
  auto records = dory::bench::load_dataset(opt.input);
  auto config = make_config(opt);
  config.methods = {"dory"};
  const auto gateway = make_gateway(opt);
  records = dory::bench::generate_outputs(records, config, gateway);
  return finish(dory::bench::run_experiment(records, config, gateway), opt);
}

int cmd_gen_outputs(const CliOptions& opt) {
  auto records = dory::bench::load_dataset(opt.input);
  const auto config = make_config(opt);
  const auto gateway = make_gateway(opt);
  records = dory::bench::generate_outputs(records, config, gateway);
  std::filesystem::create_directories(opt.out_dir);
  const auto out_file = std::filesystem::path(opt.out_dir) / "outputs.jsonl";
  dory::bench::save_dataset(records, out_file);
  int failures = 0;
  for (const auto& rec : records) {
    if (!rec.error.empty()) {
      ++failures;
      std::cerr << rec.id << ": " << rec.error << "\n";
    }
  }
  std::cout << records.size() - failures << "/" << records.size() << " outputs written to "
            << out_file.string() << "\n";
  return failures > 0 ? 1 : 0;
}

int cmd_eval(const CliOptions& opt) {
  auto records = dory::bench::load_dataset(opt.input);
  const auto config = make_config(opt);
  const auto gateway = make_gateway(opt);
  records = dory::bench::generate_outputs(records, config, gateway);
  return finish(dory::bench::run_experiment(records, config, gateway), opt);
}

int cmd_correlate(const CliOptions& opt) {
  auto records = dory::bench::load_dataset(opt.input);
  const auto config = make_config(opt);
  const auto gateway = make_gateway(opt);
  records = dory::bench::generate_outputs(records, config, gateway);
  return finish(dory::bench::correlate(records, config, gateway), opt);
}

int cmd_ablate(const CliOptions& opt) {
  auto records = dory::bench::load_dataset(opt.input);
  const auto config = make_config(opt);
  const auto gateway = make_gateway(opt);
  records = dory::bench::generate_outputs(records, config, gateway);
  return finish(dory::bench::ablation(records, config, gateway), opt);
}

int cmd_sweep(const CliOptions& opt) {
  auto records = dory::bench::load_dataset(opt.input);
  const auto config = make_config(opt);
  const auto gateway = make_gateway(opt);
  records = dory::bench::generate_outputs(records, config, gateway);
  auto values = dory::bench::default_sweep_values();
  if (!opt.values.empty()) {
    values.clear();
    for (const auto& v : split_csv(opt.values)) values.push_back(std::stod(v));
  }
  return finish(dory::bench::threshold_sweep(records, config, gateway, values), opt);
}

int cmd_cassette(const CliOptions& opt, bool verify) {
  const auto cassette = dory::backend::Cassette::load(opt.cassette);
  std::cout << opt.cassette << ": " << cassette.size() << " entries";
  if (!cassette.endpoint.empty()) std::cout << ", endpoint " << cassette.endpoint;
  if (!cassette.created.empty()) std::cout << ", created " << cassette.created;
  std::cout << "\n";
  if (!verify) return 0;

  int bad = 0;
  for (const auto& [fp, entry] : cassette.entries()) {
    if (dory::backend::fingerprint(entry.request) != fp) {
      std::cerr << fp << ": fingerprint does not match request\n";
      ++bad;
    }
    if (!entry.response.tokens.empty() && entry.response.tokens.text() != entry.response.text) {
      std::cerr << fp << ": token surfaces do not reproduce text\n";
      ++bad;
    }
  }
  std::cout << (bad == 0 ? "cassette ok" : "cassette has problems") << "\n";
  return bad == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"prompt recovery from LLM outputs and token logprobs"};
  app.require_subcommand(1);

  CliOptions opt;
  bool verify = false;

  auto add_common = [&](CLI::App* cmd, bool needs_input) {
    auto* input = cmd->add_option("--input", opt.input, "dataset JSONL");
    if (needs_input) input->required();
    cmd->add_option("--cassette", opt.cassette, "cassette JSONL for replay (or record)");
    cmd->add_flag("--record", opt.record, "record live responses into --cassette");
    cmd->add_option("--base-url", opt.base_url, "endpoint base URL (or DORY_BASE_URL)");
    cmd->add_option("--config", opt.config_file, "JSON config file (flags override)");
    cmd->add_option("--model", opt.model, "model identifier");
    cmd->add_option("--temperature", opt.temperature, "generation temperature");
    cmd->add_option("--recovery-temperature", opt.recovery_temperature, "recovery temperature");
    cmd->add_option("--samples", opt.samples, "sampling passes per record");
    cmd->add_option("--max-tokens", opt.max_tokens, "completion token budget");
    cmd->add_option("--alpha", opt.alpha, "hint threshold: dynamic or a number");
    cmd->add_option("--beta", opt.beta, "draft-hint threshold: dynamic or a number");
    cmd->add_option("--seed", opt.seed, "experiment seed");
    cmd->add_option("--jobs", opt.jobs, "parallel workers");
    cmd->add_option("--out", opt.out_dir, "output directory");
    cmd->add_option("--assets", opt.assets, "asset directory with the example banks");
    cmd->add_option("--embedder", opt.embedder,
                    "semantic-similarity embedder: hash, remote or none");
  };

  auto* recover = app.add_subcommand("recover", "run the recovery pipeline");
  add_common(recover, true);
  auto* gen = app.add_subcommand("gen-outputs", "generate greedy outputs for prompts");
  add_common(gen, true);
  auto* eval = app.add_subcommand("eval", "compare recovery methods");
  add_common(eval, true);
  eval->add_option("--methods", opt.methods, "comma list: dory,fewshot,jailbreak");
  auto* correlate = app.add_subcommand("correlate", "uncertainty vs score correlation study");
  add_common(correlate, true);
  correlate->add_option("--methods", opt.methods, "method supplying the recovery score");
  auto* ablate = app.add_subcommand("ablate", "hint/noise clue-template ablation");
  add_common(ablate, true);
  auto* sweep = app.add_subcommand("sweep", "fixed vs dynamic threshold sweep");
  add_common(sweep, true);
  sweep->add_option("--values", opt.values, "comma list of fixed threshold values");
  auto* cassette = app.add_subcommand("cassette", "inspect a cassette file");
  cassette->add_option("--cassette", opt.cassette, "cassette JSONL")->required();
  cassette->add_flag("--verify", verify, "recompute fingerprints and check coherence");

  // pre-scan for --config so file values sit under env and flags
  for (int i = 1; i + 1 < argc; ++i) {
    if (std::string(argv[i]) == "--config") {
      try {
        apply_config_file(opt, argv[i + 1]);
      } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
      }
    }
  }

  auto default_methods = [&](const std::string& m) {
    if (!eval->count("--methods") && !correlate->count("--methods")) opt.methods = m;
  };

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n\n" << app.help() << "\n";
    return 2;
  }

  try {
    if (recover->parsed()) return cmd_recover(opt);
    if (gen->parsed()) return cmd_gen_outputs(opt);
    if (eval->parsed()) {
      default_methods("dory,fewshot,jailbreak");
      return cmd_eval(opt);
    }
    if (correlate->parsed()) {
      default_methods("dory");
      return cmd_correlate(opt);
    }
    if (ablate->parsed()) return cmd_ablate(opt);
    if (sweep->parsed()) return cmd_sweep(opt);
    if (cassette->parsed()) return cmd_cassette(opt, verify);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
