#pragma once

/**
 * Token sequences and word normalization.
 *
 * A TokenSequence is the ordered list of generated tokens with their natural-log
 * probabilities, exactly as a chat-completions endpoint reports them. Token
 * surfaces carry their own leading whitespace, so concatenating them verbatim
 * reproduces the generated text; no whitespace is ever inserted.
 *
 * Word normalization (lowercase, strip leading/trailing ASCII punctuation,
 * whitespace split) is shared by the uncertainty analyses, the hint/noise
 * machinery, and the text metrics so that all of them agree on what a "word"
 * is. API subword tokens do not align across texts; normalized words do.
 */

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace dory {

/// One generated token: verbatim surface plus natural-log probability.
struct Token {
  std::string surface;
  double logprob = 0.0;

  bool operator==(const Token&) const = default;
};

/// Ordered tokens conditioned on one prompt. `context_id` names that prompt.
struct TokenSequence {
  std::vector<Token> tokens;
  std::string context_id;

  bool empty() const { return tokens.empty(); }
  std::size_t size() const { return tokens.size(); }

  /// Detokenize: concatenate surfaces verbatim.
  std::string text() const;

  bool operator==(const TokenSequence&) const = default;
};

/// Lowercase (ASCII) and strip leading/trailing ASCII punctuation.
/// Returns "" when nothing but punctuation remains.
std::string normalize_word(std::string_view raw);

/// Normalized words of `text` in order, empties dropped.
std::vector<std::string> normalize_words(std::string_view text);

/// A normalized word plus the half-open character span it occupies in the
/// source text (after punctuation stripping, so the span covers the word body).
struct WordOccurrence {
  std::string word;
  std::size_t begin = 0;
  std::size_t end = 0;
};

std::vector<WordOccurrence> word_occurrences(std::string_view text);

/// Split `text` into tokens of the form [leading whitespace]+[non-whitespace run]
/// so that concatenation reproduces `text` exactly. Used by synthetic backends
/// and fixtures; real endpoints tokenize however they like.
std::vector<std::string> naive_token_split(std::string_view text);

}  // namespace dory
