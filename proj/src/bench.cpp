#include "dory/bench.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <thread>

#include "dory/errors.hpp"
#include "dory/uncertainty.hpp"

namespace dory::bench {

namespace {

// run fn(i) for i in [0, n) on up to `jobs` workers; exceptions must be
// handled inside fn so results stay positional
void parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)>& fn) {
  if (n == 0) return;
  const std::size_t workers = std::min<std::size_t>(std::max(jobs, 1), n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  auto loop = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      fn(i);
    }
  };
  std::vector<std::thread> threads;
  threads.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) threads.emplace_back(loop);
  for (auto& t : threads) t.join();
}

json scores_to_json(const metrics::MetricScores& s) {
  json j{{"bleu1", s.bleu1}, {"bleu4", s.bleu4}, {"meteor", s.meteor}, {"rouge_l", s.rouge_l}};
  j["ss"] = s.ss ? json(*s.ss) : json(nullptr);
  return j;
}

json bundle_to_json(const recovery::ClueBundle& b) {
  return json{
      {"draft", b.draft},
      {"key_sentence", b.key_sentence},
      {"hint", b.hint},
      {"noise", b.noise},
      {"alpha", b.thresholds_used.alpha},
      {"beta", b.thresholds_used.beta},
  };
}

json row_to_json(const RecordRow& row, bool with_bundles) {
  json j{{"id", row.id},
         {"scores", scores_to_json(row.scores)},
         {"samples", row.samples},
         {"errors", row.errors},
         {"failed", row.failed}};
  if (with_bundles) {
    json bundles = json::array();
    for (const auto& b : row.bundles) bundles.push_back(bundle_to_json(b));
    j["bundles"] = std::move(bundles);
  }
  return j;
}

json section_to_json(const MethodSection& sec, bool with_bundles) {
  json rows = json::array();
  for (const auto& row : sec.per_record) rows.push_back(row_to_json(row, with_bundles));
  return json{{"per_record", std::move(rows)},
              {"aggregate", scores_to_json(sec.aggregate)},
              {"failures", sec.failure_count}};
}

MethodSection finalize_section(std::vector<RecordRow> rows) {
  MethodSection sec;
  sec.per_record = std::move(rows);
  std::sort(sec.per_record.begin(), sec.per_record.end(),
            [](const RecordRow& a, const RecordRow& b) { return a.id < b.id; });
  std::vector<metrics::MetricScores> all;
  for (const auto& row : sec.per_record) {
    all.push_back(row.scores);
    if (row.failed) ++sec.failure_count;
  }
  sec.aggregate = metrics::mean_scores(all);
  return sec;
}

metrics::MetricScores score_or_zero(const std::string& candidate, const std::string& reference,
                                    const metrics::Embedder* embedder) {
  try {
    return metrics::score_all(candidate, reference, embedder);
  } catch (const EmptyText&) {
    metrics::MetricScores zero;
    if (embedder) zero.ss = 0.0;
    return zero;
  }
}

std::string format_value(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%g", v);
  return buf;
}

double checked_lnpe(const OutputRecord& rec) {
  if (!rec.output || rec.output->tokens.empty()) {
    throw MissingLogprobs("record '" + rec.id + "' has no token logprobs");
  }
  return uncertainty::ln_pe(rec.output->tokens);
}

}  // namespace

// ---------------------------------------------------------------------------
// Dataset I/O
// ---------------------------------------------------------------------------

std::vector<OutputRecord> load_dataset(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw Error("cannot open dataset: " + file.string());
  std::vector<OutputRecord> records;
  std::set<std::string> ids;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      throw ParseError(file.string() + " line " + std::to_string(line_no) + ": " + e.what());
    }
    if (!j.contains("id")) {
      throw ParseError(file.string() + " line " + std::to_string(line_no) + ": missing 'id'");
    }
    OutputRecord rec;
    rec.id = j.at("id").get<std::string>();
    if (!ids.insert(rec.id).second) {
      throw DuplicateId(file.string() + " line " + std::to_string(line_no) + ": duplicate id '" +
                        rec.id + "'");
    }
    if (j.contains("prompt")) rec.ground_truth_prompt = j.at("prompt").get<std::string>();
    if (j.contains("output") && !j.at("output").is_null()) {
      rec.output = backend::record_from_json(j.at("output"));
    }
    if (!rec.ground_truth_prompt && !rec.output) {
      throw ParseError(file.string() + " line " + std::to_string(line_no) +
                       ": needs 'prompt' or 'output'");
    }
    records.push_back(std::move(rec));
  }
  return records;
}

void save_dataset(const std::vector<OutputRecord>& records, const std::filesystem::path& file) {
  std::ofstream out(file, std::ios::trunc);
  if (!out) throw Error("cannot write dataset: " + file.string());
  for (const auto& rec : records) {
    json j{{"id", rec.id}};
    if (rec.ground_truth_prompt) j["prompt"] = *rec.ground_truth_prompt;
    if (rec.output) j["output"] = backend::record_to_json(*rec.output);
    if (!rec.error.empty()) j["error"] = rec.error;
    out << j.dump() << "\n";
  }
}

// ---------------------------------------------------------------------------
// Output generation
// ---------------------------------------------------------------------------

std::vector<OutputRecord> generate_outputs(const std::vector<OutputRecord>& records,
                                           const ExperimentConfig& config,
                                           const backend::Gateway& gateway) {
  std::vector<OutputRecord> out = records;
  std::vector<std::size_t> pending;
  std::vector<backend::ChatRequest> requests;
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (out[i].output) continue;
    if (!out[i].ground_truth_prompt) {
      out[i].error = "no prompt to generate from";
      continue;
    }
    backend::ChatRequest req;
    req.model_id = config.pipeline.model_id;
    req.messages.push_back({backend::Role::User, *out[i].ground_truth_prompt});
    req.temperature = config.pipeline.generation_temperature;
    req.max_tokens = config.pipeline.max_tokens;
    req.want_logprobs = true;
    req.sample_index = 0;
    pending.push_back(i);
    requests.push_back(std::move(req));
  }
  const auto outcomes = gateway.complete_batch(requests, config.jobs);
  for (std::size_t k = 0; k < pending.size(); ++k) {
    auto& rec = out[pending[k]];
    if (outcomes[k].ok()) {
      rec.output = *outcomes[k].record;
      rec.output->tokens.context_id = rec.id;
    } else {
      rec.error = outcomes[k].error;
    }
  }
  return out;
}

std::vector<OutputRecord> generate_outputs(const std::vector<std::string>& prompts,
                                           const ExperimentConfig& config,
                                           const backend::Gateway& gateway) {
  std::vector<OutputRecord> records;
  records.reserve(prompts.size());
  for (std::size_t i = 0; i < prompts.size(); ++i) {
    char id[16];
    std::snprintf(id, sizeof(id), "p%04zu", i);
    records.push_back({id, prompts[i], std::nullopt, ""});
  }
  return generate_outputs(records, config, gateway);
}

// ---------------------------------------------------------------------------
// Experiment methods
// ---------------------------------------------------------------------------

namespace {

RecordRow run_dory_row(const OutputRecord& rec, const ExperimentConfig& config,
                       const recovery::ExampleBank& bank, const backend::Gateway& gateway) {
  RecordRow row;
  row.id = rec.id;
  if (!rec.output || rec.output->tokens.empty()) {
    row.failed = true;
    row.errors = {rec.error.empty() ? "record has no output tokens" : rec.error};
    return row;
  }
  try {
    auto result = recovery::run_dory(*rec.output, rec.ground_truth_prompt, config.pipeline, bank,
                                     gateway, config.embedder_ptr());
    row.samples = std::move(result.samples);
    row.bundles = std::move(result.clue_bundles);
    row.errors = std::move(result.errors);
    if (result.mean_scores) {
      row.scores = *result.mean_scores;
    } else {
      row.failed = true;
    }
  } catch (const std::exception& e) {
    row.failed = true;
    row.errors = {e.what()};
  }
  return row;
}

RecordRow run_fewshot_row(const OutputRecord& rec, const ExperimentConfig& config,
                          const recovery::ExampleBank& bank, const backend::Gateway& gateway) {
  RecordRow row;
  row.id = rec.id;
  if (!rec.output) {
    row.failed = true;
    row.errors = {rec.error.empty() ? "record has no output" : rec.error};
    return row;
  }
  std::vector<metrics::MetricScores> pass_scores;
  for (int pass = 0; pass < config.pipeline.n_samples; ++pass) {
    recovery::StageOptions opts{config.pipeline.recovery_temperature, pass,
                                config.pipeline.model_id, config.pipeline.max_tokens};
    try {
      const auto recovered =
          baselines::fewshot_recover(rec.output->text, bank, gateway, config.seed, opts);
      row.samples.push_back(recovered);
      row.errors.emplace_back();
      pass_scores.push_back(
          score_or_zero(recovered, *rec.ground_truth_prompt, config.embedder_ptr()));
    } catch (const std::exception& e) {
      row.samples.emplace_back();
      row.errors.emplace_back(e.what());
    }
  }
  if (pass_scores.empty()) {
    row.failed = true;
  } else {
    row.scores = metrics::mean_scores(pass_scores);
  }
  return row;
}

RecordRow run_jailbreak_row(const OutputRecord& rec, const baselines::JailbreakPrompt& jp,
                            const ExperimentConfig& config, const backend::Gateway& gateway) {
  RecordRow row;
  row.id = rec.id;
  if (!rec.output) {
    row.failed = true;
    row.errors = {rec.error.empty() ? "record has no output" : rec.error};
    return row;
  }
  std::vector<metrics::MetricScores> pass_scores;
  for (int pass = 0; pass < config.pipeline.n_samples; ++pass) {
    recovery::StageOptions opts{config.pipeline.recovery_temperature, pass,
                                config.pipeline.model_id, config.pipeline.max_tokens};
    try {
      const auto recovered = baselines::jailbreak_recover(rec.output->text, jp, gateway, opts);
      row.samples.push_back(recovered);
      row.errors.emplace_back();
      pass_scores.push_back(
          score_or_zero(recovered, *rec.ground_truth_prompt, config.embedder_ptr()));
    } catch (const std::exception& e) {
      row.samples.emplace_back();
      row.errors.emplace_back(e.what());
    }
  }
  if (pass_scores.empty()) {
    row.failed = true;
  } else {
    row.scores = metrics::mean_scores(pass_scores);
  }
  return row;
}

MethodSection run_method_over_records(
    const std::vector<OutputRecord>& records, int jobs,
    const std::function<RecordRow(const OutputRecord&)>& per_record) {
  std::vector<RecordRow> rows(records.size());
  parallel_for(records.size(), jobs,
               [&](std::size_t i) { rows[i] = per_record(records[i]); });
  return finalize_section(std::move(rows));
}

json config_to_json(const ExperimentConfig& config) {
  auto policy = [](const uncertainty::ThresholdPolicy& p) {
    return p.kind == uncertainty::ThresholdPolicy::Kind::Dynamic ? json("dynamic")
                                                                 : json(p.value);
  };
  return json{
      {"model", config.pipeline.model_id},
      {"max_tokens", config.pipeline.max_tokens},
      {"generation_temperature", config.pipeline.generation_temperature},
      {"recovery_temperature", config.pipeline.recovery_temperature},
      {"n_samples", config.pipeline.n_samples},
      {"alpha", policy(config.pipeline.alpha)},
      {"beta", policy(config.pipeline.beta)},
      {"seed", config.seed},
      {"methods", std::vector<std::string>(config.methods.begin(), config.methods.end())},
  };
}

void require_ground_truth(const std::vector<OutputRecord>& records, const char* who) {
  for (const auto& rec : records) {
    if (!rec.ground_truth_prompt) {
      throw Error(std::string(who) + ": record '" + rec.id + "' has no ground-truth prompt");
    }
  }
}

}  // namespace

Report run_experiment(const std::vector<OutputRecord>& records, const ExperimentConfig& config,
                      const backend::Gateway& gateway) {
  require_ground_truth(records, "run_experiment");
  for (const auto& m : config.methods) {
    if (m != "dory" && m != "fewshot" && m != "jailbreak") {
      throw Error("unknown method '" + m + "'");
    }
  }

  Report report;
  report.config = config_to_json(config);

  const bool needs_bank = config.methods.count("dory") || config.methods.count("fewshot");
  recovery::ExampleBank bank;
  if (needs_bank) bank = recovery::ExampleBank::load(config.asset_dir);

  if (config.methods.count("dory")) {
    auto sec = run_method_over_records(records, config.jobs, [&](const OutputRecord& rec) {
      return run_dory_row(rec, config, bank, gateway);
    });
    report.failures += sec.failure_count;
    report.methods.emplace("dory", std::move(sec));
  }
  if (config.methods.count("fewshot")) {
    auto sec = run_method_over_records(records, config.jobs, [&](const OutputRecord& rec) {
      return run_fewshot_row(rec, config, bank, gateway);
    });
    report.failures += sec.failure_count;
    report.methods.emplace("fewshot", std::move(sec));
  }
  if (config.methods.count("jailbreak")) {
    const auto jb_bank = baselines::load_jailbreak_bank(config.asset_dir / "jailbreak_bank.jsonl");
    JailbreakSection jb;
    std::vector<metrics::MetricScores> prompt_aggregates;
    for (const auto& jp : jb_bank) {
      auto sec = run_method_over_records(records, config.jobs, [&](const OutputRecord& rec) {
        return run_jailbreak_row(rec, jp, config, gateway);
      });
      report.failures += sec.failure_count;
      prompt_aggregates.push_back(sec.aggregate);
      jb.per_prompt.emplace_back(jp.id, std::move(sec));
    }
    jb.mean = metrics::mean_scores(prompt_aggregates);
    for (const auto& agg : prompt_aggregates) {
      jb.max.bleu1 = std::max(jb.max.bleu1, agg.bleu1);
      jb.max.bleu4 = std::max(jb.max.bleu4, agg.bleu4);
      jb.max.meteor = std::max(jb.max.meteor, agg.meteor);
      jb.max.rouge_l = std::max(jb.max.rouge_l, agg.rouge_l);
      if (agg.ss) jb.max.ss = std::max(jb.max.ss.value_or(0.0), *agg.ss);
    }
    report.jailbreak = std::move(jb);
  }
  return report;
}

// ---------------------------------------------------------------------------
// Correlation study
// ---------------------------------------------------------------------------

CorrelationSummary correlation_study(const std::vector<OutputRecord>& records,
                                     const std::map<std::string, double>& score_by_id) {
  CorrelationSummary summary;
  std::vector<double> xs, ys;
  double shared_sum = 0.0, non_shared_sum = 0.0;
  std::size_t shared_count = 0, non_shared_count = 0;

  for (const auto& rec : records) {
    auto it = score_by_id.find(rec.id);
    if (it == score_by_id.end()) continue;
    const double lnpe = checked_lnpe(rec);
    xs.push_back(lnpe);
    ys.push_back(it->second);
    summary.scatter.push_back({lnpe, it->second});

    if (rec.ground_truth_prompt) {
      const auto part =
          uncertainty::classify_tokens(rec.output->tokens, *rec.ground_truth_prompt);
      for (const auto& w : part.shared) {
        shared_sum += part.per_word_pe.at(w);
        ++shared_count;
      }
      for (const auto& w : part.non_shared) {
        non_shared_sum += part.per_word_pe.at(w);
        ++non_shared_count;
      }
    }
  }

  summary.n_points = xs.size();
  summary.r = uncertainty::pearson_r(xs, ys);
  std::sort(summary.scatter.begin(), summary.scatter.end());

  if (shared_count > 0) summary.shared_mean_pe = shared_sum / static_cast<double>(shared_count);
  if (non_shared_count > 0) {
    summary.non_shared_mean_pe = non_shared_sum / static_cast<double>(non_shared_count);
  }
  if (shared_count > 0 && non_shared_count > 0 && summary.non_shared_mean_pe != 0.0) {
    summary.gap = 1.0 - summary.shared_mean_pe / summary.non_shared_mean_pe;
  }
  return summary;
}

Report correlate(const std::vector<OutputRecord>& records, const ExperimentConfig& config,
                 const backend::Gateway& gateway) {
  Report report = run_experiment(records, config, gateway);
  if (config.methods.empty()) throw Error("correlate: no method configured");

  // score source: the first configured method's per-record BLEU-1
  std::map<std::string, double> score_by_id;
  const std::string method = *config.methods.begin();
  const MethodSection* sec = nullptr;
  if (method == "jailbreak") {
    if (report.jailbreak && !report.jailbreak->per_prompt.empty()) {
      sec = &report.jailbreak->per_prompt.front().second;
    }
  } else {
    auto it = report.methods.find(method);
    if (it != report.methods.end()) sec = &it->second;
  }
  if (!sec) throw Error("correlate: method '" + method + "' produced no rows");
  for (const auto& row : sec->per_record) {
    if (!row.failed) score_by_id.emplace(row.id, row.scores.bleu1);
  }
  report.correlation = correlation_study(records, score_by_id);
  return report;
}

// ---------------------------------------------------------------------------
// Ablation and threshold sweep
// ---------------------------------------------------------------------------

Report ablation(const std::vector<OutputRecord>& records, const ExperimentConfig& config,
                const backend::Gateway& gateway) {
  require_ground_truth(records, "ablation");
  const auto bank = recovery::ExampleBank::load(config.asset_dir);

  Report report;
  report.config = config_to_json(config);
  static constexpr std::pair<recovery::ClueVariant, const char*> variants[] = {
      {recovery::ClueVariant::NoHint, "w/o hint"},
      {recovery::ClueVariant::HintOnly, "w/ hint"},
      {recovery::ClueVariant::Full, "w/ hint+noise"},
  };
  for (const auto& [variant, label] : variants) {
    ExperimentConfig variant_config = config;
    variant_config.pipeline.variant = variant;
    auto sec = run_method_over_records(records, config.jobs, [&](const OutputRecord& rec) {
      return run_dory_row(rec, variant_config, bank, gateway);
    });
    report.failures += sec.failure_count;
    report.ablation.push_back({label, sec.aggregate});
    report.methods.emplace(std::string("dory:") + label, std::move(sec));
  }
  return report;
}

std::vector<double> default_sweep_values() { return {0.05, 0.1, 0.15, 0.2, 0.3, 0.5}; }

Report threshold_sweep(const std::vector<OutputRecord>& records, const ExperimentConfig& config,
                       const backend::Gateway& gateway, const std::vector<double>& values) {
  require_ground_truth(records, "threshold_sweep");
  const auto bank = recovery::ExampleBank::load(config.asset_dir);

  Report report;
  report.config = config_to_json(config);

  auto run_rows = [&](bool sweep_alpha) {
    std::vector<SweepRow> rows;
    auto run_one = [&](const std::string& key, uncertainty::ThresholdPolicy policy) {
      ExperimentConfig swept = config;
      (sweep_alpha ? swept.pipeline.alpha : swept.pipeline.beta) = policy;
      auto sec = run_method_over_records(records, config.jobs, [&](const OutputRecord& rec) {
        return run_dory_row(rec, swept, bank, gateway);
      });
      report.failures += sec.failure_count;
      double hint_words = 0.0;
      std::size_t bundles = 0;
      for (const auto& row : sec.per_record) {
        for (const auto& b : row.bundles) {
          hint_words += static_cast<double>(b.hint.size());
          ++bundles;
        }
      }
      rows.push_back({key, sec.aggregate,
                      bundles ? hint_words / static_cast<double>(bundles) : 0.0});
    };
    for (double v : values) run_one(format_value(v), uncertainty::ThresholdPolicy::fixed(v));
    run_one("dynamic", uncertainty::ThresholdPolicy::dynamic());
    return rows;
  };

  report.sweep.emplace("alpha", run_rows(/*sweep_alpha=*/true));
  report.sweep.emplace("beta", run_rows(/*sweep_alpha=*/false));
  return report;
}

// ---------------------------------------------------------------------------
// Report serialization
// ---------------------------------------------------------------------------

json Report::to_json() const {
  json j;
  j["config"] = config;
  j["failures"] = failures;

  json methods_json = json::object();
  for (const auto& [name, sec] : methods) {
    methods_json[name] = section_to_json(sec, name.rfind("dory", 0) == 0);
  }
  j["methods"] = std::move(methods_json);

  if (jailbreak) {
    json per_prompt = json::array();
    for (const auto& [id, sec] : jailbreak->per_prompt) {
      per_prompt.push_back({{"id", id}, {"section", section_to_json(sec, false)}});
    }
    j["jailbreak"] = {{"per_prompt", std::move(per_prompt)},
                      {"mean", scores_to_json(jailbreak->mean)},
                      {"max", scores_to_json(jailbreak->max)}};
  }
  if (correlation) {
    json scatter = json::array();
    for (const auto& [x, y] : correlation->scatter) scatter.push_back({x, y});
    j["correlation"] = {{"r", correlation->r},
                        {"n", correlation->n_points},
                        {"scatter", std::move(scatter)},
                        {"gap", correlation->gap ? json(*correlation->gap) : json(nullptr)},
                        {"shared_mean_pe", correlation->shared_mean_pe},
                        {"non_shared_mean_pe", correlation->non_shared_mean_pe}};
  }
  if (!ablation.empty()) {
    json rows = json::array();
    for (const auto& row : ablation) {
      rows.push_back({{"label", row.label}, {"scores", scores_to_json(row.scores)}});
    }
    j["ablation"] = std::move(rows);
  }
  if (!sweep.empty()) {
    json sweeps = json::object();
    for (const auto& [param, rows] : sweep) {
      json arr = json::array();
      for (const auto& row : rows) {
        arr.push_back({{"value", row.key},
                       {"scores", scores_to_json(row.scores)},
                       {"mean_hint_size", row.mean_hint_size}});
      }
      sweeps[param] = std::move(arr);
    }
    j["sweep"] = std::move(sweeps);
  }
  return j;
}

namespace {

std::string table_line(const std::string& label, const metrics::MetricScores& s) {
  char buf[160];
  if (s.ss) {
    std::snprintf(buf, sizeof(buf), "%-32s %8.2f %8.2f %8.2f %8.2f %8.2f\n", label.c_str(),
                  s.bleu1, s.bleu4, s.meteor, s.rouge_l, *s.ss);
  } else {
    std::snprintf(buf, sizeof(buf), "%-32s %8.2f %8.2f %8.2f %8.2f %8s\n", label.c_str(), s.bleu1,
                  s.bleu4, s.meteor, s.rouge_l, "/");
  }
  return buf;
}

}  // namespace

std::string Report::to_text() const {
  std::string out;
  char header[160];
  std::snprintf(header, sizeof(header), "%-32s %8s %8s %8s %8s %8s\n", "method", "BLEU-1", "BLEU-4",
                "METEOR", "ROUGE-L", "SS");
  out += header;

  for (const auto& [name, sec] : methods) out += table_line(name, sec.aggregate);
  if (jailbreak) {
    for (const auto& [id, sec] : jailbreak->per_prompt) {
      out += table_line("jailbreak[" + id + "]", sec.aggregate);
    }
    out += table_line("Jailbreak(mean)", jailbreak->mean);
    out += table_line("Jailbreak(max)", jailbreak->max);
  }
  if (!ablation.empty()) {
    out += "\nablation\n";
    for (const auto& row : ablation) out += table_line(row.label, row.scores);
  }
  for (const auto& [param, rows] : sweep) {
    out += "\nsweep " + param + "\n";
    for (const auto& row : rows) out += table_line(param + "=" + row.key, row.scores);
  }
  if (correlation) {
    char buf[160];
    std::snprintf(buf, sizeof(buf), "\ncorrelation r=%.6f over %zu records", correlation->r,
                  correlation->n_points);
    out += buf;
    if (correlation->gap) {
      std::snprintf(buf, sizeof(buf), ", shared/non-shared gap=%.4f", *correlation->gap);
      out += buf;
    }
    out += "\n";
  }
  if (failures > 0) {
    out += "\nfailures: " + std::to_string(failures) + "\n";
  }
  return out;
}

void Report::save(const std::filesystem::path& out_dir) const {
  std::filesystem::create_directories(out_dir);
  {
    std::ofstream out(out_dir / "report.json", std::ios::trunc);
    if (!out) throw Error("cannot write report.json under " + out_dir.string());
    out << to_json().dump(2) << "\n";
  }
  {
    std::ofstream out(out_dir / "report.txt", std::ios::trunc);
    out << to_text();
  }
  if (correlation) {
    std::ofstream out(out_dir / "scatter.csv", std::ios::trunc);
    out << "ln_pe,score\n";
    for (const auto& [x, y] : correlation->scatter) {
      char buf[80];
      std::snprintf(buf, sizeof(buf), "%.12g,%.12g\n", x, y);
      out << buf;
    }
  }
}

}  // namespace dory::bench
