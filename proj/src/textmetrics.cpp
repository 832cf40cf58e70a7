#include "dory/textmetrics.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include "dory/errors.hpp"
#include "dory/hash.hpp"
#include "dory/tokens.hpp"

namespace dory {

std::string fnv128_hex(std::string_view bytes) {
  static const char* digits = "0123456789abcdef";
  const std::uint64_t lanes[2] = {
      fnv1a64(bytes),
      fnv1a64(bytes, kFnvBasis ^ 0x9e3779b97f4a7c15ULL),
  };
  std::string out;
  out.reserve(32);
  for (std::uint64_t lane : lanes) {
    for (int shift = 60; shift >= 0; shift -= 4) {
      out += digits[(lane >> shift) & 0xF];
    }
  }
  return out;
}

}  // namespace dory

namespace dory::metrics {

namespace {

std::vector<std::string> words_or_throw(std::string_view text, const char* who) {
  auto words = normalize_words(text);
  if (words.empty()) throw EmptyText(std::string(who) + ": text has no words");
  return words;
}

std::unordered_map<std::string, int> ngram_counts(const std::vector<std::string>& words, int n) {
  std::unordered_map<std::string, int> counts;
  if (static_cast<int>(words.size()) < n) return counts;
  for (std::size_t i = 0; i + n <= words.size(); ++i) {
    std::string key;
    for (int k = 0; k < n; ++k) {
      if (k) key += '\x1f';
      key += words[i + k];
    }
    ++counts[key];
  }
  return counts;
}

}  // namespace

double bleu(std::string_view candidate, std::string_view reference, int max_n,
            bool add_one_smoothing) {
  if (max_n < 1 || max_n > 4) throw Error("bleu: max_n must be in [1,4]");
  const auto cand = words_or_throw(candidate, "bleu candidate");
  const auto ref = words_or_throw(reference, "bleu reference");

  double log_precision_sum = 0.0;
  for (int n = 1; n <= max_n; ++n) {
    const auto cand_counts = ngram_counts(cand, n);
    const auto ref_counts = ngram_counts(ref, n);
    long total = std::max<long>(0, static_cast<long>(cand.size()) - n + 1);
    long matched = 0;
    for (const auto& [gram, count] : cand_counts) {
      auto it = ref_counts.find(gram);
      if (it != ref_counts.end()) matched += std::min(count, it->second);
    }
    double p;
    if (add_one_smoothing) {
      p = static_cast<double>(matched + 1) / static_cast<double>(total + 1);
    } else {
      if (total == 0 || matched == 0) return 0.0;
      p = static_cast<double>(matched) / static_cast<double>(total);
    }
    log_precision_sum += std::log(p) / max_n;
  }

  const double c = static_cast<double>(cand.size());
  const double r = static_cast<double>(ref.size());
  const double brevity = c < r ? std::exp(1.0 - r / c) : 1.0;
  return 100.0 * brevity * std::exp(log_precision_sum);
}

double rouge_l(std::string_view candidate, std::string_view reference) {
  const auto cand = words_or_throw(candidate, "rouge_l candidate");
  const auto ref = words_or_throw(reference, "rouge_l reference");

  const std::size_t n = cand.size(), m = ref.size();
  std::vector<std::size_t> prev(m + 1, 0), cur(m + 1, 0);
  for (std::size_t i = 1; i <= n; ++i) {
    for (std::size_t j = 1; j <= m; ++j) {
      cur[j] = cand[i - 1] == ref[j - 1] ? prev[j - 1] + 1
                                         : std::max(prev[j], cur[j - 1]);
    }
    std::swap(prev, cur);
  }
  const auto lcs = static_cast<double>(prev[m]);
  if (lcs == 0.0) return 0.0;
  const double p = lcs / static_cast<double>(n);
  const double r = lcs / static_cast<double>(m);
  return 100.0 * 2.0 * p * r / (p + r);
}

double meteor_lite(std::string_view candidate, std::string_view reference) {
  const auto cand = words_or_throw(candidate, "meteor candidate");
  const auto ref = words_or_throw(reference, "meteor reference");

  std::vector<int> cand_to_ref(cand.size(), -1);
  std::vector<bool> ref_used(ref.size(), false);

  // stage 1: exact unigram matches, earliest free reference slot
  for (std::size_t i = 0; i < cand.size(); ++i) {
    for (std::size_t j = 0; j < ref.size(); ++j) {
      if (!ref_used[j] && cand[i] == ref[j]) {
        cand_to_ref[i] = static_cast<int>(j);
        ref_used[j] = true;
        break;
      }
    }
  }

  // stage 2: stemmed matches over the leftovers
  std::vector<std::string> ref_stems(ref.size());
  for (std::size_t j = 0; j < ref.size(); ++j) ref_stems[j] = porter_stem(ref[j]);
  for (std::size_t i = 0; i < cand.size(); ++i) {
    if (cand_to_ref[i] != -1) continue;
    const std::string stem = porter_stem(cand[i]);
    for (std::size_t j = 0; j < ref.size(); ++j) {
      if (!ref_used[j] && stem == ref_stems[j]) {
        cand_to_ref[i] = static_cast<int>(j);
        ref_used[j] = true;
        break;
      }
    }
  }

  long matches = 0;
  long chunks = 0;
  int prev_ref = -2;
  bool in_chunk = false;
  for (std::size_t i = 0; i < cand.size(); ++i) {
    if (cand_to_ref[i] == -1) {
      in_chunk = false;
      continue;
    }
    ++matches;
    if (!(in_chunk && cand_to_ref[i] == prev_ref + 1)) ++chunks;
    in_chunk = true;
    prev_ref = cand_to_ref[i];
  }
  if (matches == 0) return 0.0;

  const double m = static_cast<double>(matches);
  const double p = m / static_cast<double>(cand.size());
  const double r = m / static_cast<double>(ref.size());
  const double f_mean = 10.0 * p * r / (r + 9.0 * p);
  const double penalty = 0.5 * std::pow(static_cast<double>(chunks) / m, 3.0);
  return 100.0 * f_mean * (1.0 - penalty);
}

// ---------------------------------------------------------------------------
// Porter (1980) stemming
// ---------------------------------------------------------------------------

namespace {

class PorterStemmer {
 public:
  explicit PorterStemmer(std::string word) : w_(std::move(word)) {}

  std::string run() {
    if (w_.size() <= 2) return w_;
    step1a();
    step1b();
    step1c();
    step2();
    step3();
    step4();
    step5a();
    step5b();
    return w_;
  }

 private:
  std::string w_;

  bool is_consonant(std::size_t i) const {
    switch (w_[i]) {
      case 'a': case 'e': case 'i': case 'o': case 'u':
        return false;
      case 'y':
        return i == 0 ? true : !is_consonant(i - 1);
      default:
        return true;
    }
  }

  // measure of w_[0..len): number of VC sequences in [C](VC)^m[V]
  int measure(std::size_t len) const {
    int m = 0;
    std::size_t i = 0;
    while (i < len && is_consonant(i)) ++i;
    while (i < len) {
      while (i < len && !is_consonant(i)) ++i;
      if (i >= len) break;
      ++m;
      while (i < len && is_consonant(i)) ++i;
    }
    return m;
  }

  bool has_vowel(std::size_t len) const {
    for (std::size_t i = 0; i < len; ++i) {
      if (!is_consonant(i)) return true;
    }
    return false;
  }

  bool ends_double_consonant() const {
    const std::size_t n = w_.size();
    return n >= 2 && w_[n - 1] == w_[n - 2] && is_consonant(n - 1);
  }

  // *o: stem ends cvc where the final c is not w, x or y
  bool ends_cvc(std::size_t len) const {
    if (len < 3) return false;
    if (!is_consonant(len - 3) || is_consonant(len - 2) || !is_consonant(len - 1)) return false;
    const char c = w_[len - 1];
    return c != 'w' && c != 'x' && c != 'y';
  }

  bool ends_with(std::string_view suffix) const {
    return w_.size() >= suffix.size() &&
           std::string_view(w_).substr(w_.size() - suffix.size()) == suffix;
  }

  std::size_t stem_len(std::string_view suffix) const { return w_.size() - suffix.size(); }

  void replace_suffix(std::string_view suffix, std::string_view repl) {
    w_.resize(w_.size() - suffix.size());
    w_ += repl;
  }

  // apply the first matching rule whose stem satisfies m > threshold
  bool rule(std::string_view suffix, std::string_view repl, int min_m) {
    if (!ends_with(suffix)) return false;
    if (measure(stem_len(suffix)) > min_m) replace_suffix(suffix, repl);
    return true;  // suffix matched; stop scanning this step either way
  }

  void step1a() {
    if (ends_with("sses")) {
      replace_suffix("sses", "ss");
    } else if (ends_with("ies")) {
      replace_suffix("ies", "i");
    } else if (ends_with("ss")) {
      // keep
    } else if (ends_with("s")) {
      replace_suffix("s", "");
    }
  }

  void step1b() {
    if (ends_with("eed")) {
      if (measure(stem_len("eed")) > 0) replace_suffix("eed", "ee");
      return;
    }
    bool trimmed = false;
    if (ends_with("ed") && has_vowel(stem_len("ed"))) {
      replace_suffix("ed", "");
      trimmed = true;
    } else if (ends_with("ing") && has_vowel(stem_len("ing"))) {
      replace_suffix("ing", "");
      trimmed = true;
    }
    if (!trimmed) return;
    if (ends_with("at") || ends_with("bl") || ends_with("iz")) {
      w_ += 'e';
    } else if (ends_double_consonant() && !ends_with("l") && !ends_with("s") && !ends_with("z")) {
      w_.pop_back();
    } else if (measure(w_.size()) == 1 && ends_cvc(w_.size())) {
      w_ += 'e';
    }
  }

  void step1c() {
    if (ends_with("y") && has_vowel(stem_len("y"))) w_.back() = 'i';
  }

  void step2() {
    static constexpr std::pair<std::string_view, std::string_view> rules[] = {
        {"ational", "ate"}, {"tional", "tion"}, {"enci", "ence"}, {"anci", "ance"},
        {"izer", "ize"},    {"abli", "able"},   {"alli", "al"},   {"entli", "ent"},
        {"eli", "e"},       {"ousli", "ous"},   {"ization", "ize"}, {"ation", "ate"},
        {"ator", "ate"},    {"alism", "al"},    {"iveness", "ive"}, {"fulness", "ful"},
        {"ousness", "ous"}, {"aliti", "al"},    {"iviti", "ive"},  {"biliti", "ble"},
    };
    for (const auto& [suffix, repl] : rules) {
      if (rule(suffix, repl, 0)) return;
    }
  }

  void step3() {
    static constexpr std::pair<std::string_view, std::string_view> rules[] = {
        {"icate", "ic"}, {"ative", ""}, {"alize", "al"}, {"iciti", "ic"},
        {"ical", "ic"},  {"ful", ""},   {"ness", ""},
    };
    for (const auto& [suffix, repl] : rules) {
      if (rule(suffix, repl, 0)) return;
    }
  }

  void step4() {
    static constexpr std::string_view suffixes[] = {
        "al",   "ance", "ence", "er",  "ic",  "able", "ible", "ant", "ement",
        "ment", "ent",  "ion",  "ou",  "ism", "ate",  "iti",  "ous", "ive", "ize",
    };
    for (std::string_view suffix : suffixes) {
      if (!ends_with(suffix)) continue;
      const std::size_t len = stem_len(suffix);
      if (suffix == "ion" && !(len >= 1 && (w_[len - 1] == 's' || w_[len - 1] == 't'))) {
        return;
      }
      if (measure(len) > 1) replace_suffix(suffix, "");
      return;
    }
  }

  void step5a() {
    if (!ends_with("e")) return;
    const std::size_t len = stem_len("e");
    const int m = measure(len);
    if (m > 1 || (m == 1 && !ends_cvc(len))) replace_suffix("e", "");
  }

  void step5b() {
    if (measure(w_.size()) > 1 && ends_double_consonant() && ends_with("l")) w_.pop_back();
  }
};

}  // namespace

std::string porter_stem(std::string_view word) {
  return PorterStemmer(std::string(word)).run();
}

// ---------------------------------------------------------------------------
// Semantic similarity
// ---------------------------------------------------------------------------

HashingEmbedder::HashingEmbedder(std::size_t dim, std::uint64_t seed)
    : dim_(dim), seed_(seed) {}

std::vector<double> HashingEmbedder::embed(const std::string& text) const {
  std::vector<double> v(dim_, 0.0);
  const auto words = normalize_words(text);
  std::string joined;
  for (const auto& w : words) {
    if (!joined.empty()) joined += ' ';
    joined += w;
  }
  // boundary padding so short texts still produce trigrams
  joined = " " + joined + " ";
  for (std::size_t i = 0; i + 3 <= joined.size(); ++i) {
    const std::uint64_t h = fnv1a64(std::string_view(joined).substr(i, 3), kFnvBasis ^ seed_);
    v[h % dim_] += ((h >> 32) & 1) ? 1.0 : -1.0;
  }
  return v;
}

double semantic_similarity(std::string_view candidate, std::string_view reference,
                           const Embedder* embedder) {
  if (!embedder) throw EmbedderUnavailable("semantic_similarity: no embedder configured");
  const auto a = embedder->embed(std::string(candidate));
  const auto b = embedder->embed(std::string(reference));
  if (a.size() != b.size()) throw LengthMismatch("embedder returned mismatched dimensions");
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0.0 || nb == 0.0) return 0.0;
  const double cosine = dot / (std::sqrt(na) * std::sqrt(nb));
  return 100.0 * std::max(0.0, cosine);
}

MetricScores score_all(std::string_view candidate, std::string_view reference,
                       const Embedder* embedder) {
  MetricScores s;
  s.bleu1 = bleu(candidate, reference, 1);
  s.bleu4 = bleu(candidate, reference, 4);
  s.meteor = meteor_lite(candidate, reference);
  s.rouge_l = rouge_l(candidate, reference);
  if (embedder) s.ss = semantic_similarity(candidate, reference, embedder);
  return s;
}

MetricScores mean_scores(const std::vector<MetricScores>& scores) {
  MetricScores mean;
  if (scores.empty()) return mean;
  bool all_ss = true;
  double ss_sum = 0.0;
  for (const auto& s : scores) {
    mean.bleu1 += s.bleu1;
    mean.bleu4 += s.bleu4;
    mean.meteor += s.meteor;
    mean.rouge_l += s.rouge_l;
    if (s.ss) {
      ss_sum += *s.ss;
    } else {
      all_ss = false;
    }
  }
  const auto n = static_cast<double>(scores.size());
  mean.bleu1 /= n;
  mean.bleu4 /= n;
  mean.meteor /= n;
  mean.rouge_l /= n;
  if (all_ss) mean.ss = ss_sum / n;
  return mean;
}

}  // namespace dory::metrics
