#pragma once

/**
 * Output-probability uncertainty estimation.
 *
 * Everything here is in nats (natural log), matching the wire convention for
 * token logprobs:
 *
 *   token PE            -log p(s_i | s_<i, x)
 *   predictive entropy  sum of token PEs over the sequence
 *   LN-PE               predictive entropy / token count
 *
 * Word-level views map subword-token uncertainty onto normalized words: a
 * word's representative PE is the minimum PE over the tokens that compose it,
 * the conservative low-uncertainty witness. Words of the output are then
 * classified as shared (the word also occurs in the prompt) or non-shared,
 * and the uncertainty gap between the two classes is the fractional reduction
 * 1 - mean(shared PE) / mean(non-shared PE).
 *
 * All functions are pure and safe to call concurrently.
 */

#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "dory/tokens.hpp"

namespace dory::uncertainty {

/// -logprob of a single token. Throws PositiveLogprob if logprob > 0.
double token_pe(const Token& token);
double token_pe(double logprob);

/// Sum of token PEs. Throws EmptySequence on an empty sequence.
double predictive_entropy(const TokenSequence& seq);

/// Length-normalized predictive entropy: predictive_entropy(seq) / N.
double ln_pe(const TokenSequence& seq);

/// Per-word uncertainty view of a sequence: distinct normalized words in
/// first-occurrence order plus each word's representative (minimum) PE.
struct WordPeProfile {
  std::vector<std::string> order;
  std::map<std::string, double> pe;

  bool contains(const std::string& w) const { return pe.count(w) != 0; }
};

WordPeProfile word_pe_profile(const TokenSequence& seq);

/// Output words split by whether they also occur in the prompt.
struct TokenPartition {
  std::set<std::string> shared;
  std::set<std::string> non_shared;
  std::map<std::string, double> per_word_pe;
};

/// Partition the output's normalized words against `prompt_text`.
/// Throws EmptyText when the prompt normalizes to nothing.
TokenPartition classify_tokens(const TokenSequence& output, std::string_view prompt_text);

/// Fractional PE reduction of shared words relative to non-shared:
/// 1 - mean(shared)/mean(non_shared). Throws DegeneratePartition when either
/// class is empty; an undefined gap is never reported as 0.
double uncertainty_gap(const TokenPartition& partition);

/// Pearson product-moment correlation. Throws LengthMismatch unless
/// |xs| == |ys| >= 2, ZeroVariance when either series is constant.
double pearson_r(const std::vector<double>& xs, const std::vector<double>& ys);

/// How a hint/draft-hint threshold is chosen.
struct ThresholdPolicy {
  enum class Kind { Dynamic, Fixed };
  Kind kind = Kind::Dynamic;
  double value = 0.0;  // used when Fixed

  static ThresholdPolicy dynamic() { return {Kind::Dynamic, 0.0}; }
  static ThresholdPolicy fixed(double v) { return {Kind::Fixed, v}; }

  /// Resolve against a sequence: dynamic policy yields its LN-PE.
  double resolve(const TokenSequence& seq) const;
};

/// Resolved thresholds actually used for one sample, kept for reporting.
struct Thresholds {
  double alpha = 0.0;
  double beta = 0.0;
  ThresholdPolicy alpha_policy;
  ThresholdPolicy beta_policy;
};

}  // namespace dory::uncertainty
