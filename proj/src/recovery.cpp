#include "dory/recovery.hpp"

#include <algorithm>
#include <set>

#include "json.hpp"

#include "dory/errors.hpp"

namespace dory::recovery {

using backend::ChatRequest;
using backend::Gateway;
using backend::Message;
using backend::Role;
using json = nlohmann::json;

// ---------------------------------------------------------------------------
// Example banks
// ---------------------------------------------------------------------------

namespace {

std::vector<json> read_jsonl(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw BankError("cannot open bank: " + file.string());
  std::vector<json> lines;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      lines.push_back(json::parse(line));
    } catch (const json::exception& e) {
      throw ParseError(file.string() + " line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return lines;
}

std::string trimmed(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

std::string join_comma(const std::vector<std::string>& words) {
  if (words.empty()) return "(none)";
  std::string out;
  for (const auto& w : words) {
    if (!out.empty()) out += ", ";
    out += w;
  }
  return out;
}

ChatRequest user_request(std::string prompt, const StageOptions& opts, bool want_logprobs) {
  ChatRequest req;
  req.model_id = opts.model_id;
  req.messages.push_back({Role::User, std::move(prompt)});
  req.temperature = opts.temperature;
  req.max_tokens = opts.max_tokens;
  req.want_logprobs = want_logprobs;
  req.sample_index = opts.sample_index;
  return req;
}

}  // namespace

std::vector<ExampleBank::DraftExample> ExampleBank::load_draft_bank(
    const std::filesystem::path& file) {
  std::vector<DraftExample> out;
  for (const auto& j : read_jsonl(file)) {
    out.push_back({j.at("output").get<std::string>(), j.at("prompt").get<std::string>()});
  }
  return out;
}

std::vector<ExampleBank::KeySentenceExample> ExampleBank::load_key_sentence_bank(
    const std::filesystem::path& file) {
  std::vector<KeySentenceExample> out;
  for (const auto& j : read_jsonl(file)) {
    out.push_back({j.at("output").get<std::string>(), j.at("key_sentence").get<std::string>()});
  }
  return out;
}

std::vector<ExampleBank::ClueExample> ExampleBank::load_clue_bank(
    const std::filesystem::path& file) {
  std::vector<ClueExample> out;
  for (const auto& j : read_jsonl(file)) {
    ClueExample e;
    e.outputs = j.at("outputs").get<std::string>();
    e.draft = j.at("draft").get<std::string>();
    e.hint = j.at("hint").get<std::vector<std::string>>();
    e.noise = j.at("noise").get<std::vector<std::string>>();
    e.recovered_prompt = j.value("recovered", "");
    out.push_back(std::move(e));
  }
  return out;
}

ExampleBank ExampleBank::load(const std::filesystem::path& asset_dir) {
  ExampleBank bank;
  bank.draft_examples = load_draft_bank(asset_dir / "draft_bank.jsonl");
  bank.key_sentence_examples = load_key_sentence_bank(asset_dir / "key_sentence_bank.jsonl");
  bank.clue_examples = load_clue_bank(asset_dir / "clue_bank.jsonl");
  return bank;
}

// ---------------------------------------------------------------------------
// Prompt rendering
// ---------------------------------------------------------------------------

std::string render_fewshot_prompt(const std::vector<ExampleBank::DraftExample>& examples,
                                  std::string_view output_text) {
  std::string prompt;
  for (const auto& ex : examples) {
    prompt += "Output: " + ex.output_text + "\n";
    prompt += "Prompt: " + ex.prompt + "\n\n";
  }
  prompt += "Output: " + std::string(output_text) + "\n";
  prompt += "Prompt:";
  return prompt;
}

std::string render_key_sentence_prompt(
    const std::vector<ExampleBank::KeySentenceExample>& examples, std::string_view output_text) {
  std::string prompt;
  for (const auto& ex : examples) {
    prompt += "Text: " + ex.output_text + "\n";
    prompt += "Key sentence: " + ex.key_sentence + "\n\n";
  }
  prompt += "Text: " + std::string(output_text) + "\n";
  prompt += "Key sentence:";
  return prompt;
}

namespace {

void render_clue_block(std::string& out, std::string_view outputs, std::string_view draft,
                       const std::vector<std::string>& hint, const std::vector<std::string>& noise,
                       ClueVariant variant) {
  out += "Outputs: ";
  out += outputs;
  out += "\n\nDraft: ";
  out += draft;
  out += "\n";
  if (variant != ClueVariant::NoHint) {
    out += "\nHint: " + join_comma(hint) + "\n";
    if (variant == ClueVariant::Full) {
      out += "\nNoise: " + join_comma(noise) + "\n";
    }
  }
  out += "\nRecovered prompt:";
}

std::string clue_instruction(ClueVariant variant) {
  switch (variant) {
    case ClueVariant::Full:
      return "Given the following text generated by a language model and the draft prompt, "
             "please improve the prompt based on the hint or noise.";
    case ClueVariant::HintOnly:
      return "Given the following text generated by a language model and the draft prompt, "
             "please improve the prompt based on the hint.";
    case ClueVariant::NoHint:
      return "Given the following text generated by a language model and the draft prompt, "
             "please improve the prompt.";
  }
  return {};
}

}  // namespace

std::string render_clue_prompt(const ClueBundle& clues, const ExampleBank& bank,
                               ClueVariant variant) {
  std::string prompt = clue_instruction(variant);
  prompt += "\n\n";
  for (const auto& ex : bank.clue_examples) {
    if (ex.recovered_prompt.empty()) continue;  // query-only exemplar
    render_clue_block(prompt, ex.outputs, ex.draft, ex.hint, ex.noise, variant);
    prompt += " " + ex.recovered_prompt + "\n\n";
  }
  render_clue_block(prompt, clues.output_text, clues.draft, clues.hint, clues.noise, variant);
  return prompt;
}

// ---------------------------------------------------------------------------
// Pipeline stages
// ---------------------------------------------------------------------------

std::string reconstruct_draft(std::string_view output_text, const ExampleBank& bank,
                              const Gateway& gateway, const StageOptions& opts) {
  if (trimmed(output_text).empty()) throw EmptyOutput("reconstruct_draft: empty output text");
  if (bank.draft_examples.empty()) throw BankError("reconstruct_draft: empty draft bank");
  const auto rec =
      gateway.complete(user_request(render_fewshot_prompt(bank.draft_examples, output_text), opts,
                                    /*want_logprobs=*/false));
  return trimmed(rec.text);
}

std::vector<SentenceSpan> split_sentences(std::string_view text) {
  std::vector<SentenceSpan> out;
  std::size_t start = 0;
  const std::size_t n = text.size();
  auto flush = [&](std::size_t end) {
    // trim whitespace off both ends of [start, end)
    std::size_t b = start, e = end;
    while (b < e && std::isspace(static_cast<unsigned char>(text[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(text[e - 1]))) --e;
    if (b < e) out.push_back({std::string(text.substr(b, e - b)), b, e});
    start = end;
  };
  for (std::size_t i = 0; i < n; ++i) {
    const char c = text[i];
    if (c == '.' || c == '!' || c == '?') {
      // consume the terminator run
      std::size_t j = i;
      while (j + 1 < n && (text[j + 1] == '.' || text[j + 1] == '!' || text[j + 1] == '?')) ++j;
      flush(j + 1);
      i = j;
    }
  }
  flush(n);
  return out;
}

double span_ln_pe(const TokenSequence& tokens, std::size_t begin, std::size_t end) {
  std::size_t offset = 0;
  double sum = 0.0;
  std::size_t count = 0;
  for (const auto& t : tokens.tokens) {
    const std::size_t tb = offset;
    const std::size_t te = offset + t.surface.size();
    offset = te;
    if (tb >= end) break;
    if (te <= begin) continue;
    sum += uncertainty::token_pe(t);
    ++count;
  }
  if (count == 0) throw EmptySequence("span covers no tokens");
  return sum / static_cast<double>(count);
}

std::string extract_key_sentence(std::string_view output_text, const ExampleBank& bank,
                                 const Gateway& gateway, const TokenSequence& output_tokens,
                                 const StageOptions& opts) {
  if (trimmed(output_text).empty()) throw EmptyOutput("extract_key_sentence: empty output text");

  std::string answer;
  if (!bank.key_sentence_examples.empty()) {
    const auto rec = gateway.complete(
        user_request(render_key_sentence_prompt(bank.key_sentence_examples, output_text), opts,
                     /*want_logprobs=*/false));
    answer = trimmed(rec.text);
  }
  if (!answer.empty() && std::string_view(output_text).find(answer) != std::string_view::npos) {
    return answer;
  }

  // fallback: the output sentence with minimum LN-PE
  const auto sentences = split_sentences(output_text);
  if (sentences.empty()) return trimmed(output_text);
  const SentenceSpan* best = nullptr;
  double best_lnpe = 0.0;
  for (const auto& s : sentences) {
    double lnpe;
    try {
      lnpe = span_ln_pe(output_tokens, s.begin, s.end);
    } catch (const EmptySequence&) {
      continue;
    }
    if (!best || lnpe < best_lnpe) {
      best = &s;
      best_lnpe = lnpe;
    }
  }
  return best ? best->sentence : sentences.front().sentence;
}

std::vector<std::string> extract_hint(std::string_view key_sentence, const TokenSequence& tokens,
                                      double alpha) {
  const auto profile = uncertainty::word_pe_profile(tokens);
  std::vector<std::string> hint;
  std::set<std::string> seen;
  for (const auto& word : normalize_words(key_sentence)) {
    if (seen.count(word)) continue;
    seen.insert(word);
    auto it = profile.pe.find(word);
    if (it == profile.pe.end()) continue;  // word not present in the output tokens
    if (it->second < alpha) hint.push_back(word);
  }
  return hint;
}

backend::CompletionRecord generate_draft_output(std::string_view draft, const Gateway& gateway,
                                                const StageOptions& opts) {
  if (trimmed(draft).empty()) throw EmptyOutput("generate_draft_output: empty draft");
  StageOptions greedy = opts;
  greedy.temperature = 0.0;
  greedy.sample_index = 0;
  return gateway.complete(user_request(std::string(draft), greedy, /*want_logprobs=*/true));
}

std::vector<std::string> compute_noise(const std::vector<std::string>& draft_hint,
                                       const std::vector<std::string>& hint) {
  const std::set<std::string> hint_set(hint.begin(), hint.end());
  std::vector<std::string> noise;
  std::set<std::string> seen;
  for (const auto& w : draft_hint) {
    if (hint_set.count(w) || seen.count(w)) continue;
    seen.insert(w);
    noise.push_back(w);
  }
  return noise;
}

std::string recover_from_clues(const ClueBundle& clues, const ExampleBank& bank,
                               const Gateway& gateway, const StageOptions& opts,
                               ClueVariant variant) {
  if (trimmed(clues.output_text).empty()) throw EmptyOutput("recover_from_clues: empty output");
  if (bank.clue_examples.empty()) throw BankError("recover_from_clues: empty clue bank");
  const auto rec = gateway.complete(
      user_request(render_clue_prompt(clues, bank, variant), opts, /*want_logprobs=*/false));
  return trimmed(rec.text);
}

// ---------------------------------------------------------------------------
// Full pipeline
// ---------------------------------------------------------------------------

RecoveryResult run_dory(const backend::CompletionRecord& output,
                        const std::optional<std::string>& ground_truth,
                        const PipelineConfig& config, const ExampleBank& bank,
                        const Gateway& gateway, const metrics::Embedder* embedder) {
  if (output.tokens.empty()) {
    throw MissingLogprobs("run_dory needs token logprobs on the output record");
  }

  RecoveryResult result;
  result.samples.resize(config.n_samples);
  result.clue_bundles.resize(config.n_samples);
  result.errors.resize(config.n_samples);

  std::vector<metrics::MetricScores> pass_scores;
  for (int pass = 0; pass < config.n_samples; ++pass) {
    StageOptions recover_opts{config.recovery_temperature, pass, config.model_id,
                              config.max_tokens};
    try {
      const std::string draft = reconstruct_draft(output.text, bank, gateway, recover_opts);
      const std::string key_sentence =
          extract_key_sentence(output.text, bank, gateway, output.tokens, recover_opts);

      const double alpha = config.alpha.resolve(output.tokens);
      const auto hint = extract_hint(key_sentence, output.tokens, alpha);

      const auto draft_output = generate_draft_output(draft, gateway, recover_opts);
      const double beta = config.beta.resolve(draft_output.tokens);
      const auto draft_hint = extract_hint(draft_output.text, draft_output.tokens, beta);
      const auto noise = compute_noise(draft_hint, hint);

      ClueBundle clues{output.text, draft, key_sentence, hint, noise,
                       uncertainty::Thresholds{alpha, beta, config.alpha, config.beta}};
      const std::string recovered =
          recover_from_clues(clues, bank, gateway, recover_opts, config.variant);

      result.samples[pass] = recovered;
      result.clue_bundles[pass] = std::move(clues);
      if (ground_truth) {
        try {
          pass_scores.push_back(metrics::score_all(recovered, *ground_truth, embedder));
        } catch (const EmptyText&) {
          pass_scores.push_back(metrics::MetricScores{});  // unmatchable recovery scores zero
        }
      }
    } catch (const std::exception& e) {
      result.errors[pass] = e.what();
    }
  }

  if (ground_truth && !pass_scores.empty()) {
    result.mean_scores = metrics::mean_scores(pass_scores);
  }
  return result;
}

}  // namespace dory::recovery
