#pragma once

/**
 * The deliberative prompt-recovery pipeline.
 *
 * One sampling pass over an output record runs:
 *
 *   draft         few-shot reconstruction of the prompt from the output text
 *   key sentence  few-shot extraction, falling back to the output sentence
 *                 with minimum LN-PE when the model's answer is not a
 *                 contiguous substring of the output
 *   alpha         LN-PE of the whole output (dynamic policy) or a fixed value
 *   hint          key-sentence words whose representative PE < alpha
 *   draft output  greedy (temperature 0) completion of the draft
 *   beta          LN-PE of the whole draft output, or fixed
 *   draft hint    draft-output words whose representative PE < beta
 *   noise         draft hint minus hint, in draft-output order
 *   recovery      clue template (outputs/draft/hint/noise) sent few-shot
 *
 * Recovery-side calls (draft, key sentence, final recovery) run at the
 * recovery temperature with the pass index as sample_index, so passes have
 * distinct fingerprints; the draft-output call always runs at temperature 0.
 */

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dory/backend.hpp"
#include "dory/textmetrics.hpp"
#include "dory/tokens.hpp"
#include "dory/uncertainty.hpp"

namespace dory::recovery {

/// Few-shot exemplar banks. The clue bank ships with the six standard
/// exemplars under assets/clue_bank.jsonl; all paths are overridable.
struct ExampleBank {
  struct DraftExample {
    std::string output_text;
    std::string prompt;
  };
  struct KeySentenceExample {
    std::string output_text;
    std::string key_sentence;
  };
  struct ClueExample {
    std::string outputs;
    std::string draft;
    std::vector<std::string> hint;
    std::vector<std::string> noise;
    std::string recovered_prompt;  // empty marks a query-only exemplar
  };

  std::vector<DraftExample> draft_examples;
  std::vector<KeySentenceExample> key_sentence_examples;
  std::vector<ClueExample> clue_examples;

  static std::vector<DraftExample> load_draft_bank(const std::filesystem::path& file);
  static std::vector<KeySentenceExample> load_key_sentence_bank(const std::filesystem::path& file);
  static std::vector<ClueExample> load_clue_bank(const std::filesystem::path& file);

  /// Load all three banks from an asset directory (draft_bank.jsonl,
  /// key_sentence_bank.jsonl, clue_bank.jsonl).
  static ExampleBank load(const std::filesystem::path& asset_dir);
};

/// Everything the final recovery call needs, in natural language.
struct ClueBundle {
  std::string output_text;
  std::string draft;
  std::string key_sentence;
  std::vector<std::string> hint;   // first-occurrence order in the key sentence
  std::vector<std::string> noise;  // first-occurrence order in the draft output
  uncertainty::Thresholds thresholds_used;
};

/// Which clue blocks the template renders; used by the ablation harness.
enum class ClueVariant { Full, HintOnly, NoHint };

struct RecoveryResult {
  std::vector<std::string> samples;      // one recovered prompt per pass ("" on failure)
  std::vector<ClueBundle> clue_bundles;  // one per pass
  std::vector<std::string> errors;       // per pass, empty string when the pass succeeded
  std::optional<metrics::MetricScores> mean_scores;  // present when ground truth was given
};

/// Knobs for one pipeline run; defaults reproduce the standard protocol
/// (greedy generation, temperature 0.7 recovery, three samplings, dynamic
/// thresholds).
struct PipelineConfig {
  std::string model_id = "gpt-3.5-turbo";
  int max_tokens = 512;
  double generation_temperature = 0.0;
  double recovery_temperature = 0.7;
  int n_samples = 3;
  uncertainty::ThresholdPolicy alpha = uncertainty::ThresholdPolicy::dynamic();
  uncertainty::ThresholdPolicy beta = uncertainty::ThresholdPolicy::dynamic();
  ClueVariant variant = ClueVariant::Full;
};

// -- prompt rendering (deterministic; fixtures and live runs share these) ----

/// Interleaved (output, prompt) pairs ending with the test output and a bare
/// "Prompt:" slot. The few-shot baseline and the draft stage both use this.
std::string render_fewshot_prompt(const std::vector<ExampleBank::DraftExample>& examples,
                                  std::string_view output_text);

std::string render_key_sentence_prompt(
    const std::vector<ExampleBank::KeySentenceExample>& examples, std::string_view output_text);

/// Clue template: instruction line, then Outputs/Draft/Hint/Noise/Recovered
/// prompt blocks for every bank exemplar that carries a recovered prompt,
/// then the query bundle ending with a bare "Recovered prompt:" slot. Word
/// sets are comma-joined; empty sets render as "(none)". HintOnly omits the
/// Noise lines, NoHint omits both.
std::string render_clue_prompt(const ClueBundle& clues, const ExampleBank& bank,
                               ClueVariant variant = ClueVariant::Full);

// -- pipeline stages ----------------------------------------------------------

struct StageOptions {
  double temperature = 0.7;
  int sample_index = 0;
  std::string model_id = "gpt-3.5-turbo";
  int max_tokens = 512;
};

/// Few-shot draft reconstruction from the output text. Throws EmptyOutput on
/// empty text, BankError on an empty bank.
std::string reconstruct_draft(std::string_view output_text, const ExampleBank& bank,
                              const backend::Gateway& gateway, const StageOptions& opts = {});

/// Few-shot key-sentence extraction with the min-LN-PE fallback described in
/// the file header. `output_tokens` feeds the fallback.
std::string extract_key_sentence(std::string_view output_text, const ExampleBank& bank,
                                 const backend::Gateway& gateway,
                                 const TokenSequence& output_tokens,
                                 const StageOptions& opts = {});

/// Words of `key_sentence` whose representative PE (from `tokens`) is strictly
/// below `alpha`, deduplicated, ordered by first occurrence in the key
/// sentence. alpha = 0 therefore always yields the empty set.
std::vector<std::string> extract_hint(std::string_view key_sentence, const TokenSequence& tokens,
                                      double alpha);

/// Greedy draft-output generation (temperature 0) with logprobs.
backend::CompletionRecord generate_draft_output(std::string_view draft,
                                                const backend::Gateway& gateway,
                                                const StageOptions& opts = {});

/// draft_hint \ hint, preserving draft_hint order.
std::vector<std::string> compute_noise(const std::vector<std::string>& draft_hint,
                                       const std::vector<std::string>& hint);

/// Render the clue template for `clues` and ask the model for the prompt.
std::string recover_from_clues(const ClueBundle& clues, const ExampleBank& bank,
                               const backend::Gateway& gateway, const StageOptions& opts = {},
                               ClueVariant variant = ClueVariant::Full);

/// Full pipeline over one output record: n_samples passes, each yielding a
/// recovered prompt and its clue bundle. When `ground_truth` is given the
/// result carries the per-pass metric mean. Throws MissingLogprobs when the
/// record has no token logprobs; per-pass backend errors are recorded and do
/// not abort the other passes.
RecoveryResult run_dory(const backend::CompletionRecord& output,
                        const std::optional<std::string>& ground_truth,
                        const PipelineConfig& config, const ExampleBank& bank,
                        const backend::Gateway& gateway,
                        const metrics::Embedder* embedder = nullptr);

/// Sentence split on .!? boundaries (terminator kept, surrounding whitespace
/// trimmed) with each sentence's character span in the original text.
struct SentenceSpan {
  std::string sentence;
  std::size_t begin = 0;
  std::size_t end = 0;
};
std::vector<SentenceSpan> split_sentences(std::string_view text);

/// Mean token PE over the tokens overlapping [begin, end) in the detokenized
/// text; used by the key-sentence fallback.
double span_ln_pe(const TokenSequence& tokens, std::size_t begin, std::size_t end);

}  // namespace dory::recovery
