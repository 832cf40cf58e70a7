#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>

#include "dory/errors.hpp"
#include "dory/textmetrics.hpp"
#include "dory/tokens.hpp"
#include "support/oracles.hpp"

using namespace dory;
using namespace dory::metrics;

namespace {

// small vocabulary keeps n-gram overlap likely
std::string random_sentence(std::mt19937_64& rng, int min_len = 3, int max_len = 12) {
  static const std::vector<std::string> vocab = {
      "the",  "cat",   "sat",  "on",    "a",     "mat",  "dog",   "runs", "fast",
      "blue", "river", "bird", "sings", "under", "tree", "small", "stone"};
  std::uniform_int_distribution<int> len(min_len, max_len);
  std::uniform_int_distribution<std::size_t> pick(0, vocab.size() - 1);
  std::string out;
  const int n = len(rng);
  for (int i = 0; i < n; ++i) {
    if (i) out += ' ';
    out += vocab[pick(rng)];
  }
  return out;
}

}  // namespace

TEST_CASE("bleu identity and hand anchors") {
  CHECK(bleu("the cat sat", "the cat sat", 1) == doctest::Approx(100.0).epsilon(1e-12));
  CHECK(bleu("the cat sat on a mat", "the cat sat on a mat", 4) ==
        doctest::Approx(100.0).epsilon(1e-12));
  // unigram precision 1 with brevity penalty exp(1 - 5/3)
  CHECK(bleu("the cat sat", "the cat sat on mat", 1) ==
        doctest::Approx(100.0 * std::exp(1.0 - 5.0 / 3.0)).epsilon(1e-12));
  CHECK(bleu("the cat sat", "the cat sat on mat", 1) == doctest::Approx(51.34).epsilon(1e-4));
  CHECK(bleu("dog", "the cat sat", 1) == 0.0);
  CHECK_THROWS_AS(bleu("", "the cat", 1), EmptyText);
  CHECK_THROWS_AS(bleu("the cat", "...", 1), EmptyText);
}

TEST_CASE("bleu4 needs all orders matched without smoothing") {
  // 3-word identity has no 4-grams: canonical BLEU-4 is 0
  CHECK(bleu("the cat sat", "the cat sat", 4) == 0.0);
  CHECK(bleu("the cat sat", "the cat sat", 4, /*add_one_smoothing=*/true) > 0.0);
}

TEST_CASE("bleu matches the n-gram oracle on random pairs") {
  std::mt19937_64 rng(101);
  for (int trial = 0; trial < 60; ++trial) {
    const auto cand = random_sentence(rng);
    const auto ref = random_sentence(rng);
    for (int n : {1, 4}) {
      CHECK(bleu(cand, ref, n) ==
            doctest::Approx(oracles::bleu(normalize_words(cand), normalize_words(ref), n))
                .epsilon(1e-9));
    }
  }
}

TEST_CASE("shortening a perfect-precision candidate never raises BLEU") {
  const std::string ref = "one two three four five six seven";
  const auto ref_words = normalize_words(ref);
  double prev = -1.0;
  for (std::size_t len = 1; len <= ref_words.size(); ++len) {
    std::string cand;
    for (std::size_t i = 0; i < len; ++i) {
      if (i) cand += ' ';
      cand += ref_words[i];
    }
    const double score = bleu(cand, ref, 1);
    CHECK(score >= prev);
    prev = score;
  }
  CHECK(prev == doctest::Approx(100.0));
}

TEST_CASE("rouge_l anchors") {
  CHECK(rouge_l("a b c", "a b c") == doctest::Approx(100.0));
  CHECK(rouge_l("a b c", "a x c") == doctest::Approx(200.0 / 3.0).epsilon(1e-12));
  CHECK(rouge_l("a b c", "x y z") == 0.0);
  CHECK_THROWS_AS(rouge_l("", "a"), EmptyText);
}

TEST_CASE("rouge_l matches the recursive LCS oracle") {
  std::mt19937_64 rng(103);
  for (int trial = 0; trial < 60; ++trial) {
    const auto cand = random_sentence(rng);
    const auto ref = random_sentence(rng);
    CHECK(rouge_l(cand, ref) ==
          doctest::Approx(oracles::rouge_l(normalize_words(cand), normalize_words(ref)))
              .epsilon(1e-9));
  }
}

TEST_CASE("meteor_lite closed-form identity and zero cases") {
  // identical 3-word texts: one chunk, penalty 0.5/27
  CHECK(meteor_lite("the cat sat", "the cat sat") ==
        doctest::Approx(100.0 * (1.0 - 0.5 / 27.0)).epsilon(1e-12));
  CHECK(meteor_lite("alpha beta", "gamma delta") == 0.0);
  CHECK_THROWS_AS(meteor_lite("", "a"), EmptyText);
}

TEST_CASE("meteor_lite aligns stems") {
  // "running" vs "runs" only match through the stemmer
  const double with_stem = meteor_lite("the dog running", "the dog runs");
  CHECK(with_stem > 0.0);
  const double exact_only = meteor_lite("the dog walked", "the dog runs");
  CHECK(with_stem > exact_only);
}

TEST_CASE("meteor_lite matches the greedy alignment oracle") {
  std::mt19937_64 rng(107);
  for (int trial = 0; trial < 40; ++trial) {
    const auto cand = random_sentence(rng);
    const auto ref = random_sentence(rng);
    CHECK(meteor_lite(cand, ref) ==
          doctest::Approx(oracles::meteor(normalize_words(cand), normalize_words(ref)))
              .epsilon(1e-9));
  }
}

TEST_CASE("porter stemmer classic vectors") {
  // full-pipeline outputs of the reference stemmer
  CHECK(porter_stem("caresses") == "caress");
  CHECK(porter_stem("ponies") == "poni");
  CHECK(porter_stem("cats") == "cat");
  CHECK(porter_stem("agreed") == "agre");
  CHECK(porter_stem("plastered") == "plaster");
  CHECK(porter_stem("motoring") == "motor");
  CHECK(porter_stem("hopping") == "hop");
  CHECK(porter_stem("falling") == "fall");
  CHECK(porter_stem("filing") == "file");
  CHECK(porter_stem("happy") == "happi");
  CHECK(porter_stem("sky") == "sky");
  CHECK(porter_stem("relational") == "relat");
  CHECK(porter_stem("conditional") == "condit");
  CHECK(porter_stem("digitizer") == "digit");
  CHECK(porter_stem("operator") == "oper");
  CHECK(porter_stem("feudalism") == "feudal");
  CHECK(porter_stem("decisiveness") == "decis");
  CHECK(porter_stem("hopeful") == "hope");
  CHECK(porter_stem("goodness") == "good");
  CHECK(porter_stem("formalize") == "formal");
  CHECK(porter_stem("electrical") == "electr");
  CHECK(porter_stem("adjustment") == "adjust");
  CHECK(porter_stem("adoption") == "adopt");
  CHECK(porter_stem("effective") == "effect");
  CHECK(porter_stem("rate") == "rate");
  CHECK(porter_stem("controlling") == "control");
  CHECK(porter_stem("running") == "run");
  CHECK(porter_stem("runs") == "run");
}

TEST_CASE("semantic similarity over the hashing embedder") {
  HashingEmbedder embedder(64, 42);
  CHECK(semantic_similarity("the cat sat", "the cat sat", &embedder) ==
        doctest::Approx(100.0).epsilon(1e-12));
  // same normalized words, different case/punctuation
  CHECK(semantic_similarity("The cat sat!", "the cat sat", &embedder) ==
        doctest::Approx(100.0).epsilon(1e-12));
  CHECK_THROWS_AS(semantic_similarity("a", "b", nullptr), EmbedderUnavailable);
}

TEST_CASE("semantic similarity equals the cosine oracle, clamped at zero") {
  HashingEmbedder embedder(16, 7);
  std::mt19937_64 rng(113);
  for (int trial = 0; trial < 30; ++trial) {
    const auto a = random_sentence(rng);
    const auto b = random_sentence(rng);
    const double expected = 100.0 * std::max(0.0, oracles::cosine(embedder.embed(a), embedder.embed(b)));
    CHECK(semantic_similarity(a, b, &embedder) == doctest::Approx(expected).epsilon(1e-12));
  }
}

TEST_CASE("orthogonal test-double vectors score zero") {
  struct FixedEmbedder : Embedder {
    std::vector<double> embed(const std::string& text) const override {
      return text == "left" ? std::vector<double>{1, 0} : std::vector<double>{0, 1};
    }
  } fixed;
  CHECK(semantic_similarity("left", "right", &fixed) == 0.0);
  CHECK(semantic_similarity("left", "left", &fixed) == doctest::Approx(100.0));
}

TEST_CASE("every score stays within [0, 100] on random pairs") {
  std::mt19937_64 rng(127);
  HashingEmbedder embedder;
  for (int trial = 0; trial < 50; ++trial) {
    const auto cand = random_sentence(rng);
    const auto ref = random_sentence(rng);
    const auto s = score_all(cand, ref, &embedder);
    for (double v : {s.bleu1, s.bleu4, s.meteor, s.rouge_l, *s.ss}) {
      CHECK(v >= 0.0);
      CHECK(v <= 100.0 + 1e-9);
    }
  }
}

TEST_CASE("mean_scores averages and drops partial ss") {
  MetricScores a{10, 20, 30, 40, 50.0};
  MetricScores b{30, 40, 50, 60, std::nullopt};
  const auto m = mean_scores({a, b});
  CHECK(m.bleu1 == doctest::Approx(20.0));
  CHECK(m.rouge_l == doctest::Approx(50.0));
  CHECK_FALSE(m.ss.has_value());
  const auto m2 = mean_scores({a, a});
  CHECK(m2.ss == doctest::Approx(50.0));
}
