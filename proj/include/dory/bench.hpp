#pragma once

/**
 * Dataset ingestion, output generation, experiment orchestration and report
 * emission.
 *
 * Reports are deterministic: record rows are ordered by id, aggregates are
 * plain arithmetic means, and nothing scheduling-dependent (worker count,
 * wall-clock time) is serialized, so identical (cassette, config, seed) runs
 * produce byte-identical report.json regardless of --jobs.
 */

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"

#include "dory/backend.hpp"
#include "dory/baselines.hpp"
#include "dory/recovery.hpp"
#include "dory/textmetrics.hpp"

namespace dory::bench {

using json = nlohmann::json;

/// One benchmark sample: prompt, generated output, or both.
struct OutputRecord {
  std::string id;
  std::optional<std::string> ground_truth_prompt;
  std::optional<backend::CompletionRecord> output;
  std::string error;  // generation failure, empty when ok
};

/// Dataset JSONL line:
///   {"id": ..., "prompt": ..., "output": {"text": ..., "tokens": [{"t","lp"},...]}?}
/// Throws ParseError naming the offending line, DuplicateId on repeated ids.
std::vector<OutputRecord> load_dataset(const std::filesystem::path& file);
void save_dataset(const std::vector<OutputRecord>& records, const std::filesystem::path& file);

struct ExperimentConfig {
  recovery::PipelineConfig pipeline;
  std::set<std::string> methods = {"dory"};
  std::uint64_t seed = 42;
  int jobs = 1;
  std::filesystem::path asset_dir = "assets";
  std::shared_ptr<const metrics::Embedder> embedder;  // null disables the SS column

  const metrics::Embedder* embedder_ptr() const { return embedder.get(); }
};

struct RecordRow {
  std::string id;
  metrics::MetricScores scores;
  std::vector<std::string> samples;
  std::vector<recovery::ClueBundle> bundles;  // pipeline method only
  std::vector<std::string> errors;
  bool failed = false;  // no pass succeeded (or the record had no output)
};

struct MethodSection {
  std::vector<RecordRow> per_record;  // ordered by record id
  metrics::MetricScores aggregate;    // arithmetic mean of per-record scores
  int failure_count = 0;
};

struct JailbreakSection {
  std::vector<std::pair<std::string, MethodSection>> per_prompt;  // bank order
  metrics::MetricScores mean;  // mean over per-prompt aggregates
  metrics::MetricScores max;   // per-metric max over per-prompt aggregates
};

struct CorrelationSummary {
  double r = 0.0;
  std::vector<std::array<double, 2>> scatter;  // (ln_pe, score), sorted by ln_pe
  std::optional<double> gap;                   // shared vs non-shared PE reduction
  double shared_mean_pe = 0.0;
  double non_shared_mean_pe = 0.0;
  std::size_t n_points = 0;
};

struct AblationRow {
  std::string label;  // "w/o hint", "w/ hint", "w/ hint+noise"
  metrics::MetricScores scores;
};

struct SweepRow {
  std::string key;  // "0.05" ... "0.5" or "dynamic"
  metrics::MetricScores scores;
  double mean_hint_size = 0.0;
};

struct Report {
  json config = json::object();
  std::map<std::string, MethodSection> methods;
  std::optional<JailbreakSection> jailbreak;
  std::optional<CorrelationSummary> correlation;
  std::vector<AblationRow> ablation;
  std::map<std::string, std::vector<SweepRow>> sweep;  // parameter -> rows
  int failures = 0;

  json to_json() const;
  std::string to_text() const;

  /// Writes report.json and report.txt (and scatter.csv when a correlation
  /// section is present) into `out_dir`.
  void save(const std::filesystem::path& out_dir) const;
};

/// Greedy output generation for records that still lack one; failures are
/// recorded per id and never abort the batch.
std::vector<OutputRecord> generate_outputs(const std::vector<OutputRecord>& records,
                                           const ExperimentConfig& config,
                                           const backend::Gateway& gateway);
std::vector<OutputRecord> generate_outputs(const std::vector<std::string>& prompts,
                                           const ExperimentConfig& config,
                                           const backend::Gateway& gateway);

/// Run every configured method over the records. Throws Error when a record
/// lacks its ground-truth prompt (scoring requires it).
Report run_experiment(const std::vector<OutputRecord>& records, const ExperimentConfig& config,
                      const backend::Gateway& gateway);

/// Pearson correlation between per-record LN-PE and a recovery score, plus
/// the shared/non-shared uncertainty gap pooled over all records.
CorrelationSummary correlation_study(const std::vector<OutputRecord>& records,
                                     const std::map<std::string, double>& score_by_id);

/// Orchestrated correlation run: scores come from the first configured method.
Report correlate(const std::vector<OutputRecord>& records, const ExperimentConfig& config,
                 const backend::Gateway& gateway);

/// Three clue-template variants (no hint / hint / hint+noise) over the same
/// records; one aggregate row each.
Report ablation(const std::vector<OutputRecord>& records, const ExperimentConfig& config,
                const backend::Gateway& gateway);

/// One row per fixed threshold value plus a dynamic row, for alpha and beta
/// independently (the other parameter stays on its configured policy).
Report threshold_sweep(const std::vector<OutputRecord>& records, const ExperimentConfig& config,
                       const backend::Gateway& gateway, const std::vector<double>& values);

/// The fixed-value grid used by the sweep experiments.
std::vector<double> default_sweep_values();

}  // namespace dory::bench
