#pragma once

/**
 * Evaluation metrics for recovered prompts, all on a 0-100 scale.
 *
 * Texts are normalized with the shared word normalization before scoring, so
 * metric tokens agree with hint words. METEOR is implemented without the
 * WordNet synonym stage (exact + Porter-stem matching only) and is reported
 * as meteor_lite; one fixed variant scores every system, which keeps the
 * comparisons internally consistent without vendoring a lexical database.
 */

#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace dory::metrics {

struct MetricScores {
  double bleu1 = 0.0;
  double bleu4 = 0.0;
  double meteor = 0.0;
  double rouge_l = 0.0;
  std::optional<double> ss;
};

/// Sentence BLEU with uniform weights up to max_n, clipped n-gram precision
/// and brevity penalty exp(1 - r/c) for c < r. No smoothing by default; the
/// canonical definition yields 0 whenever some order has zero matches.
/// `add_one_smoothing` switches every precision to (m+1)/(t+1) for short texts.
/// Throws EmptyText when either side normalizes to nothing.
double bleu(std::string_view candidate, std::string_view reference, int max_n,
            bool add_one_smoothing = false);

/// LCS F-measure: P = L/|c|, R = L/|r|, F = 2PR/(P+R), scaled to 0-100.
double rouge_l(std::string_view candidate, std::string_view reference);

/// Unigram alignment (exact stage, then Porter-stem stage), scored as
/// F_mean * (1 - penalty) with F_mean = 10PR/(R+9P) and
/// penalty = 0.5 * (chunks/matches)^3.
double meteor_lite(std::string_view candidate, std::string_view reference);

/// Porter (1980) stemmer over a lowercase ASCII word.
std::string porter_stem(std::string_view word);

/// Text -> fixed-dimension vector contract for the SS score.
class Embedder {
 public:
  virtual ~Embedder() = default;
  virtual std::vector<double> embed(const std::string& text) const = 0;
};

/// Deterministic character-trigram hashing embedder. Same text, same vector;
/// no model weights involved. Suitable as a test double and offline default.
class HashingEmbedder final : public Embedder {
 public:
  explicit HashingEmbedder(std::size_t dim = 256, std::uint64_t seed = 0x5eed);
  std::vector<double> embed(const std::string& text) const override;

 private:
  std::size_t dim_;
  std::uint64_t seed_;
};

/// Remote /v1/embeddings client; see backend.hpp for the connection settings.
std::unique_ptr<Embedder> make_remote_embedder(std::string base_url, std::string api_key,
                                               std::string model);

/// 100 * max(0, cosine(embed(candidate), embed(reference))).
/// Throws EmbedderUnavailable when `embedder` is null.
double semantic_similarity(std::string_view candidate, std::string_view reference,
                           const Embedder* embedder);

/// All metrics at once; `ss` filled only when an embedder is supplied.
MetricScores score_all(std::string_view candidate, std::string_view reference,
                       const Embedder* embedder = nullptr);

/// Arithmetic mean of scores; `ss` present only when present in every element.
MetricScores mean_scores(const std::vector<MetricScores>& scores);

}  // namespace dory::metrics
