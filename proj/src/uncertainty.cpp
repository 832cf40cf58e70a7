#include "dory/uncertainty.hpp"

#include <cmath>

#include "dory/errors.hpp"

namespace dory::uncertainty {

double token_pe(double logprob) {
  if (!(logprob <= 0.0)) {
    throw PositiveLogprob("token logprob must be <= 0, got " + std::to_string(logprob));
  }
  return -logprob + 0.0;  // avoid -0.0
}

double token_pe(const Token& token) { return token_pe(token.logprob); }

double predictive_entropy(const TokenSequence& seq) {
  if (seq.empty()) throw EmptySequence("predictive_entropy of an empty sequence");
  double sum = 0.0;
  for (const auto& t : seq.tokens) sum += token_pe(t);
  return sum;
}

double ln_pe(const TokenSequence& seq) {
  if (seq.empty()) throw EmptySequence("ln_pe of an empty sequence");
  return predictive_entropy(seq) / static_cast<double>(seq.size());
}

WordPeProfile word_pe_profile(const TokenSequence& seq) {
  const std::string text = seq.text();

  // character span of each token within the detokenized text
  struct Span {
    std::size_t begin, end;
    double pe;
  };
  std::vector<Span> spans;
  spans.reserve(seq.size());
  std::size_t offset = 0;
  for (const auto& t : seq.tokens) {
    spans.push_back({offset, offset + t.surface.size(), token_pe(t)});
    offset += t.surface.size();
  }

  WordPeProfile profile;
  for (const auto& occ : word_occurrences(text)) {
    // representative PE of this occurrence: min over overlapping tokens
    double pe = 0.0;
    bool found = false;
    for (const auto& s : spans) {
      if (s.begin >= occ.end) break;
      if (s.end <= occ.begin) continue;
      if (!found || s.pe < pe) pe = s.pe;
      found = true;
    }
    if (!found) continue;  // zero-width tokens only; nothing composed the word
    auto it = profile.pe.find(occ.word);
    if (it == profile.pe.end()) {
      profile.order.push_back(occ.word);
      profile.pe.emplace(occ.word, pe);
    } else if (pe < it->second) {
      it->second = pe;
    }
  }
  return profile;
}

TokenPartition classify_tokens(const TokenSequence& output, std::string_view prompt_text) {
  const auto prompt_words = normalize_words(prompt_text);
  if (prompt_words.empty()) throw EmptyText("classify_tokens: prompt has no words");
  const std::set<std::string> prompt_set(prompt_words.begin(), prompt_words.end());

  TokenPartition part;
  auto profile = word_pe_profile(output);
  part.per_word_pe = std::move(profile.pe);
  for (const auto& [word, pe] : part.per_word_pe) {
    if (prompt_set.count(word)) {
      part.shared.insert(word);
    } else {
      part.non_shared.insert(word);
    }
  }
  return part;
}

double uncertainty_gap(const TokenPartition& partition) {
  if (partition.shared.empty() || partition.non_shared.empty()) {
    throw DegeneratePartition("uncertainty gap undefined: a word class is empty");
  }
  double shared_sum = 0.0, non_shared_sum = 0.0;
  for (const auto& w : partition.shared) shared_sum += partition.per_word_pe.at(w);
  for (const auto& w : partition.non_shared) non_shared_sum += partition.per_word_pe.at(w);
  const double shared_mean = shared_sum / static_cast<double>(partition.shared.size());
  const double non_shared_mean = non_shared_sum / static_cast<double>(partition.non_shared.size());
  return 1.0 - shared_mean / non_shared_mean;
}

double pearson_r(const std::vector<double>& xs, const std::vector<double>& ys) {
  if (xs.size() != ys.size() || xs.size() < 2) {
    throw LengthMismatch("pearson_r needs two equal-length series of size >= 2");
  }
  const auto n = static_cast<double>(xs.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double dx = xs[i] - mx;
    const double dy = ys[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) throw ZeroVariance("pearson_r over a constant series");
  return sxy / std::sqrt(sxx * syy);
}

double ThresholdPolicy::resolve(const TokenSequence& seq) const {
  return kind == Kind::Dynamic ? ln_pe(seq) : value;
}

}  // namespace dory::uncertainty
