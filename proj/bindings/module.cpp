// Python bindings for the core operations: entropy math, text metrics, the
// recovery pipeline stages, baselines, and the record/replay gateway.
//
// Python-backed transports hold the GIL during their callback, so drive them
// with jobs=1; replaying a cassette is safe from any number of workers.

#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "dory/backend.hpp"
#include "dory/baselines.hpp"
#include "dory/recovery.hpp"
#include "dory/textmetrics.hpp"
#include "dory/tokens.hpp"
#include "dory/uncertainty.hpp"

namespace py = pybind11;
using namespace dory;

namespace {

TokenSequence tokens_from_pairs(const std::vector<std::pair<std::string, double>>& pairs,
                                std::string context_id) {
  TokenSequence seq;
  seq.context_id = std::move(context_id);
  for (const auto& [surface, logprob] : pairs) seq.tokens.push_back({surface, logprob});
  return seq;
}

backend::ChatRequest make_request(const std::string& model, const std::string& content,
                                  double temperature, int max_tokens, bool want_logprobs,
                                  int sample_index) {
  backend::ChatRequest req;
  req.model_id = model;
  req.messages.push_back({backend::Role::User, content});
  req.temperature = temperature;
  req.max_tokens = max_tokens;
  req.want_logprobs = want_logprobs;
  req.sample_index = sample_index;
  return req;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "prompt recovery from LLM outputs and token logprobs";

  // -- tokens ---------------------------------------------------------------
  py::class_<Token>(m, "Token")
      .def(py::init<std::string, double>(), py::arg("surface"), py::arg("logprob"))
      .def_readwrite("surface", &Token::surface)
      .def_readwrite("logprob", &Token::logprob)
      .def("__repr__", [](const Token& t) {
        return "Token(" + t.surface + ", " + std::to_string(t.logprob) + ")";
      });

  py::class_<TokenSequence>(m, "TokenSequence")
      .def(py::init(&tokens_from_pairs), py::arg("tokens"), py::arg("context_id") = "")
      .def_readwrite("tokens", &TokenSequence::tokens)
      .def_readwrite("context_id", &TokenSequence::context_id)
      .def("text", &TokenSequence::text)
      .def("__len__", &TokenSequence::size);

  m.def("normalize_word", &normalize_word, py::arg("word"));
  m.def("normalize_words", [](const std::string& text) { return normalize_words(text); },
        py::arg("text"));

  // -- uncertainty ----------------------------------------------------------
  m.def("token_pe", py::overload_cast<double>(&uncertainty::token_pe), py::arg("logprob"));
  m.def("predictive_entropy", &uncertainty::predictive_entropy, py::arg("sequence"));
  m.def("ln_pe", &uncertainty::ln_pe, py::arg("sequence"));

  py::class_<uncertainty::WordPeProfile>(m, "WordPeProfile")
      .def_readonly("order", &uncertainty::WordPeProfile::order)
      .def_readonly("pe", &uncertainty::WordPeProfile::pe);
  m.def("word_pe_profile", &uncertainty::word_pe_profile, py::arg("sequence"));

  py::class_<uncertainty::TokenPartition>(m, "TokenPartition")
      .def_readonly("shared", &uncertainty::TokenPartition::shared)
      .def_readonly("non_shared", &uncertainty::TokenPartition::non_shared)
      .def_readonly("per_word_pe", &uncertainty::TokenPartition::per_word_pe);
  m.def("classify_tokens", &uncertainty::classify_tokens, py::arg("output"),
        py::arg("prompt_text"));
  m.def("uncertainty_gap", &uncertainty::uncertainty_gap, py::arg("partition"));
  m.def("pearson_r", &uncertainty::pearson_r, py::arg("xs"), py::arg("ys"));

  py::class_<uncertainty::ThresholdPolicy>(m, "ThresholdPolicy")
      .def_static("dynamic", &uncertainty::ThresholdPolicy::dynamic)
      .def_static("fixed", &uncertainty::ThresholdPolicy::fixed, py::arg("value"))
      .def("resolve", &uncertainty::ThresholdPolicy::resolve, py::arg("sequence"));

  py::class_<uncertainty::Thresholds>(m, "Thresholds")
      .def_readonly("alpha", &uncertainty::Thresholds::alpha)
      .def_readonly("beta", &uncertainty::Thresholds::beta);

  // -- metrics ----------------------------------------------------------------
  m.def("bleu", &metrics::bleu, py::arg("candidate"), py::arg("reference"), py::arg("max_n"),
        py::arg("add_one_smoothing") = false);
  m.def("rouge_l", &metrics::rouge_l, py::arg("candidate"), py::arg("reference"));
  m.def("meteor_lite", &metrics::meteor_lite, py::arg("candidate"), py::arg("reference"));
  m.def("porter_stem", &metrics::porter_stem, py::arg("word"));

  py::class_<metrics::Embedder, std::shared_ptr<metrics::Embedder>>(m, "Embedder");
  py::class_<metrics::HashingEmbedder, metrics::Embedder,
             std::shared_ptr<metrics::HashingEmbedder>>(m, "HashingEmbedder")
      .def(py::init<std::size_t, std::uint64_t>(), py::arg("dim") = 256,
           py::arg("seed") = 0x5eed)
      .def("embed", &metrics::HashingEmbedder::embed, py::arg("text"));
  m.def(
      "semantic_similarity",
      [](const std::string& candidate, const std::string& reference,
         const metrics::Embedder& embedder) {
        return metrics::semantic_similarity(candidate, reference, &embedder);
      },
      py::arg("candidate"), py::arg("reference"), py::arg("embedder"));

  py::class_<metrics::MetricScores>(m, "MetricScores")
      .def_readonly("bleu1", &metrics::MetricScores::bleu1)
      .def_readonly("bleu4", &metrics::MetricScores::bleu4)
      .def_readonly("meteor", &metrics::MetricScores::meteor)
      .def_readonly("rouge_l", &metrics::MetricScores::rouge_l)
      .def_readonly("ss", &metrics::MetricScores::ss)
      .def("__repr__", [](const metrics::MetricScores& s) {
        return "MetricScores(bleu1=" + std::to_string(s.bleu1) +
               ", bleu4=" + std::to_string(s.bleu4) + ", meteor=" + std::to_string(s.meteor) +
               ", rouge_l=" + std::to_string(s.rouge_l) + ")";
      });
  m.def(
      "score_all",
      [](const std::string& candidate, const std::string& reference,
         const metrics::Embedder* embedder) {
        return metrics::score_all(candidate, reference, embedder);
      },
      py::arg("candidate"), py::arg("reference"), py::arg("embedder") = nullptr);

  // -- backend ----------------------------------------------------------------
  py::class_<backend::ChatRequest>(m, "ChatRequest")
      .def(py::init(&make_request), py::arg("model"), py::arg("content"),
           py::arg("temperature") = 0.0, py::arg("max_tokens") = 512,
           py::arg("want_logprobs") = false, py::arg("sample_index") = 0)
      .def_readwrite("model_id", &backend::ChatRequest::model_id)
      .def_readwrite("temperature", &backend::ChatRequest::temperature)
      .def_readwrite("max_tokens", &backend::ChatRequest::max_tokens)
      .def_readwrite("want_logprobs", &backend::ChatRequest::want_logprobs)
      .def_readwrite("sample_index", &backend::ChatRequest::sample_index)
      .def_property_readonly("content", [](const backend::ChatRequest& req) {
        return req.messages.empty() ? std::string() : req.messages.back().content;
      });
  m.def("fingerprint", &backend::fingerprint, py::arg("request"));

  py::class_<backend::CompletionRecord>(m, "CompletionRecord")
      .def(py::init([](std::string text, const std::vector<std::pair<std::string, double>>& toks,
                       std::string model) {
             backend::CompletionRecord rec;
             rec.text = std::move(text);
             rec.tokens = tokens_from_pairs(toks, "");
             rec.model_id = std::move(model);
             return rec;
           }),
           py::arg("text"), py::arg("tokens") = std::vector<std::pair<std::string, double>>{},
           py::arg("model") = "")
      .def_readwrite("text", &backend::CompletionRecord::text)
      .def_readwrite("tokens", &backend::CompletionRecord::tokens)
      .def_readwrite("model_id", &backend::CompletionRecord::model_id)
      .def_readonly("request_fingerprint", &backend::CompletionRecord::request_fingerprint);

  py::class_<backend::Gateway>(m, "Gateway")
      .def_static("replay", &backend::Gateway::replay, py::arg("cassette_file"))
      .def_static(
          "record",
          [](const std::function<backend::CompletionRecord(const backend::ChatRequest&)>& fn,
             const std::filesystem::path& cassette_file) {
            return backend::Gateway::record(
                std::make_shared<backend::CallbackTransport>(fn, "python"), cassette_file);
          },
          py::arg("callback"), py::arg("cassette_file"),
          "Record mode over a python callback: callback(request) -> CompletionRecord")
      .def_static("live",
                  [](const std::string& base_url, const std::string& api_key) {
                    return backend::Gateway::live(
                        backend::make_live_transport({base_url, api_key}));
                  },
                  py::arg("base_url") = "", py::arg("api_key") = "")
      .def("complete", &backend::Gateway::complete, py::arg("request"))
      .def("cassette_size",
           [](const backend::Gateway& g) { return g.cassette().size(); });

  // -- recovery ---------------------------------------------------------------
  py::class_<recovery::ExampleBank>(m, "ExampleBank")
      .def_static("load", &recovery::ExampleBank::load, py::arg("asset_dir"))
      .def_property_readonly("n_draft_examples",
                             [](const recovery::ExampleBank& b) {
                               return b.draft_examples.size();
                             })
      .def_property_readonly("n_clue_examples", [](const recovery::ExampleBank& b) {
        return b.clue_examples.size();
      });

  py::class_<recovery::ClueBundle>(m, "ClueBundle")
      .def(py::init([](std::string output_text, std::string draft, std::string key_sentence,
                       std::vector<std::string> hint, std::vector<std::string> noise) {
             return recovery::ClueBundle{std::move(output_text), std::move(draft),
                                         std::move(key_sentence), std::move(hint),
                                         std::move(noise), {}};
           }),
           py::arg("output_text"), py::arg("draft"), py::arg("key_sentence") = "",
           py::arg("hint") = std::vector<std::string>{},
           py::arg("noise") = std::vector<std::string>{})
      .def_readonly("output_text", &recovery::ClueBundle::output_text)
      .def_readonly("draft", &recovery::ClueBundle::draft)
      .def_readonly("key_sentence", &recovery::ClueBundle::key_sentence)
      .def_readonly("hint", &recovery::ClueBundle::hint)
      .def_readonly("noise", &recovery::ClueBundle::noise)
      .def_readonly("thresholds_used", &recovery::ClueBundle::thresholds_used);

  py::enum_<recovery::ClueVariant>(m, "ClueVariant")
      .value("FULL", recovery::ClueVariant::Full)
      .value("HINT_ONLY", recovery::ClueVariant::HintOnly)
      .value("NO_HINT", recovery::ClueVariant::NoHint);

  py::class_<recovery::StageOptions>(m, "StageOptions")
      .def(py::init([](double temperature, int sample_index, std::string model, int max_tokens) {
             return recovery::StageOptions{temperature, sample_index, std::move(model),
                                           max_tokens};
           }),
           py::arg("temperature") = 0.7, py::arg("sample_index") = 0,
           py::arg("model") = "gpt-3.5-turbo", py::arg("max_tokens") = 512);

  py::class_<recovery::PipelineConfig>(m, "PipelineConfig")
      .def(py::init<>())
      .def_readwrite("model_id", &recovery::PipelineConfig::model_id)
      .def_readwrite("max_tokens", &recovery::PipelineConfig::max_tokens)
      .def_readwrite("generation_temperature", &recovery::PipelineConfig::generation_temperature)
      .def_readwrite("recovery_temperature", &recovery::PipelineConfig::recovery_temperature)
      .def_readwrite("n_samples", &recovery::PipelineConfig::n_samples)
      .def_readwrite("alpha", &recovery::PipelineConfig::alpha)
      .def_readwrite("beta", &recovery::PipelineConfig::beta)
      .def_readwrite("variant", &recovery::PipelineConfig::variant);

  py::class_<recovery::RecoveryResult>(m, "RecoveryResult")
      .def_readonly("samples", &recovery::RecoveryResult::samples)
      .def_readonly("clue_bundles", &recovery::RecoveryResult::clue_bundles)
      .def_readonly("errors", &recovery::RecoveryResult::errors)
      .def_readonly("mean_scores", &recovery::RecoveryResult::mean_scores);

  m.def("render_fewshot_prompt", &recovery::render_fewshot_prompt, py::arg("examples"),
        py::arg("output_text"));
  m.def("render_clue_prompt", &recovery::render_clue_prompt, py::arg("clues"), py::arg("bank"),
        py::arg("variant") = recovery::ClueVariant::Full);
  m.def("reconstruct_draft", &recovery::reconstruct_draft, py::arg("output_text"),
        py::arg("bank"), py::arg("gateway"), py::arg("options") = recovery::StageOptions{});
  m.def("extract_key_sentence", &recovery::extract_key_sentence, py::arg("output_text"),
        py::arg("bank"), py::arg("gateway"), py::arg("output_tokens"),
        py::arg("options") = recovery::StageOptions{});
  m.def("extract_hint", &recovery::extract_hint, py::arg("key_sentence"), py::arg("tokens"),
        py::arg("alpha"));
  m.def("generate_draft_output", &recovery::generate_draft_output, py::arg("draft"),
        py::arg("gateway"), py::arg("options") = recovery::StageOptions{});
  m.def("compute_noise", &recovery::compute_noise, py::arg("draft_hint"), py::arg("hint"));
  m.def("recover_from_clues", &recovery::recover_from_clues, py::arg("clues"), py::arg("bank"),
        py::arg("gateway"), py::arg("options") = recovery::StageOptions{},
        py::arg("variant") = recovery::ClueVariant::Full);
  m.def(
      "run_dory",
      [](const backend::CompletionRecord& output, const std::optional<std::string>& ground_truth,
         const recovery::PipelineConfig& config, const recovery::ExampleBank& bank,
         const backend::Gateway& gateway, const metrics::Embedder* embedder) {
        return recovery::run_dory(output, ground_truth, config, bank, gateway, embedder);
      },
      py::arg("output"), py::arg("ground_truth"), py::arg("config"), py::arg("bank"),
      py::arg("gateway"), py::arg("embedder") = nullptr);

  // -- baselines ----------------------------------------------------------------
  py::class_<baselines::JailbreakPrompt>(m, "JailbreakPrompt")
      .def_readonly("id", &baselines::JailbreakPrompt::id)
      .def_readonly("text", &baselines::JailbreakPrompt::text)
      .def_readonly("placement", &baselines::JailbreakPrompt::placement);
  m.def("load_jailbreak_bank", &baselines::load_jailbreak_bank, py::arg("file"));
  m.def("jailbreak_bank_digest", &baselines::bank_digest, py::arg("bank"));
  m.def("render_jailbreak_message", &baselines::render_jailbreak_message, py::arg("prompt"),
        py::arg("output_text"));
  m.def("jailbreak_recover", &baselines::jailbreak_recover, py::arg("output_text"),
        py::arg("prompt"), py::arg("gateway"), py::arg("options") = recovery::StageOptions{});
  m.def("fewshot_recover", &baselines::fewshot_recover, py::arg("output_text"), py::arg("bank"),
        py::arg("gateway"), py::arg("seed"), py::arg("options") = recovery::StageOptions{});

  m.attr("__version__") = "0.1.0";
}
