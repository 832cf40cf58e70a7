#pragma once

// Deterministic synthetic model world for hermetic tests.
//
// FixtureWorld scripts a model answer for every request shape the pipeline
// issues (generation, few-shot draft, key sentence, draft output, clue
// recovery, jailbreak). Cassettes are produced by running the *real* pipeline
// in record mode against the scripted transport, then replayed by the tests,
// so record and replay necessarily agree on request bytes.
//
// Token logprobs are engineered two-level: a token whose normalized word
// occurs in the conditioning prompt gets logprob LP_SHARED, everything else
// LP_NONSHARED. That makes hints, thresholds and gap values analytic.

#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "dory/backend.hpp"
#include "dory/bench.hpp"

namespace fixture {

constexpr double kLpShared = -0.3;
constexpr double kLpNonShared = -1.0;

/// Tokens = whitespace chunks of `text` (leading space attached), logprob per
/// token from `lp_for_word` applied to the chunk's normalized word.
dory::TokenSequence engineered_tokens(
    const std::string& text, const std::function<double(const std::string&)>& lp_for_word);

/// Two-level logprobs against a conditioning text's word set.
dory::TokenSequence shared_vs_nonshared_tokens(const std::string& text,
                                               const std::string& conditioning_text,
                                               double lp_shared = kLpShared,
                                               double lp_nonshared = kLpNonShared);

struct Sample {
  std::string id;
  std::string prompt;        // ground truth
  std::string output_text;   // scripted greedy generation
  std::string draft;         // scripted draft reconstruction
  std::string draft_output;  // scripted greedy completion of the draft
  std::string key_sentence_reply;  // scripted key-sentence answer (may be junk)
  std::string recovered_full;      // clue reply, full template
  std::string recovered_hint;      // clue reply, hint-only template
  std::string recovered_plain;     // clue reply, no-hint template
  std::string jailbreak_reply;
};

class FixtureWorld {
 public:
  /// `n` standard samples ("r00".."r09" style ids).
  static FixtureWorld standard(std::size_t n);

  const std::vector<Sample>& samples() const { return samples_; }

  /// The scripted transport.
  std::shared_ptr<dory::backend::Transport> transport() const;

  /// Records lacking outputs (prompt only), in sample order.
  std::vector<dory::bench::OutputRecord> prompt_records() const;

  /// Records with engineered outputs attached, no gateway involved.
  std::vector<dory::bench::OutputRecord> output_records() const;

  /// Scripted reply for one request; throws on anything unrecognized.
  dory::backend::CompletionRecord respond(const dory::backend::ChatRequest& req) const;

 private:
  const Sample& sample_for(const std::string& content) const;
  std::vector<Sample> samples_;
};

/// Run `body` against a record-mode gateway writing to `cassette_file`.
/// Afterwards the cassette replays the exact same traffic.
void record_cassette(const FixtureWorld& world, const std::filesystem::path& cassette_file,
                     const std::function<void(const dory::backend::Gateway&)>& body);

/// Fresh scratch directory under the system temp dir.
std::filesystem::path scratch_dir(const std::string& tag);

}  // namespace fixture
