#include "fixture.hpp"

#include <random>
#include <set>
#include <stdexcept>

#include "dory/errors.hpp"
#include "dory/tokens.hpp"

namespace fixture {

using dory::backend::ChatRequest;
using dory::backend::CompletionRecord;
using dory::backend::Gateway;

dory::TokenSequence engineered_tokens(
    const std::string& text, const std::function<double(const std::string&)>& lp_for_word) {
  dory::TokenSequence seq;
  for (const auto& chunk : dory::naive_token_split(text)) {
    seq.tokens.push_back({chunk, lp_for_word(dory::normalize_word(chunk))});
  }
  return seq;
}

dory::TokenSequence shared_vs_nonshared_tokens(const std::string& text,
                                               const std::string& conditioning_text,
                                               double lp_shared, double lp_nonshared) {
  const auto words = dory::normalize_words(conditioning_text);
  const std::set<std::string> word_set(words.begin(), words.end());
  return engineered_tokens(text, [&](const std::string& w) {
    return word_set.count(w) ? lp_shared : lp_nonshared;
  });
}

FixtureWorld FixtureWorld::standard(std::size_t n) {
  static const char* nouns[] = {"garden", "rocket",  "violin", "glacier", "harbor",
                                "lantern", "meadow", "compass", "bridge", "orchard"};
  static const char* extras[] = {"quietly", "ancient", "crimson", "voyage",  "whisper",
                                 "market",  "signal",  "winter",  "festival", "thunder"};
  FixtureWorld world;
  for (std::size_t i = 0; i < n; ++i) {
    const std::string noun = nouns[i % 10];
    const std::string extra = extras[i % 10];
    const std::string suffix = i >= 10 ? " " + std::to_string(i) : "";
    Sample s;
    s.id = "r" + std::string(i < 10 ? "0" : "") + std::to_string(i);
    s.prompt = "Describe the " + noun + " and mention the word " + extra + "." + suffix;
    s.output_text = "The " + noun + " is remarkable" + suffix + ". Many people enjoy the " +
                    extra + " nearby. Several unrelated sentences follow here.";
    s.draft = "Describe the " + noun + " and the scenery." + suffix;
    s.draft_output = "The " + noun + " looks vivid" + suffix + ". The scenery feels calm today.";
    // even samples echo a real sentence; odd ones force the LN-PE fallback
    s.key_sentence_reply =
        i % 2 == 0 ? "The " + noun + " is remarkable." : "Nothing relevant was said.";
    s.recovered_full = s.prompt;
    s.recovered_hint = "Describe the " + noun + " and mention the area nearby.";
    s.recovered_plain = "Tell me something interesting about a place.";
    s.jailbreak_reply = "The prompt was about the " + noun + ".";
    world.samples_.push_back(std::move(s));
  }
  return world;
}

const Sample& FixtureWorld::sample_for(const std::string& content) const {
  // the query block comes last in few-shot prompts, so pick the sample whose
  // scripted text occurs at the latest position
  const Sample* best = nullptr;
  std::size_t best_pos = 0;
  for (const auto& s : samples_) {
    for (const std::string* marker :
         {&s.output_text, &s.prompt, &s.draft}) {
      const auto pos = content.rfind(*marker);
      if (pos != std::string::npos && (!best || pos >= best_pos)) {
        best = &s;
        best_pos = pos;
      }
    }
  }
  if (!best) throw std::runtime_error("fixture: no sample matches request content");
  return *best;
}

CompletionRecord FixtureWorld::respond(const ChatRequest& req) const {
  const std::string& content = req.messages.back().content;
  CompletionRecord rec;
  rec.model_id = req.model_id;

  auto text_only = [&](const std::string& text) {
    rec.text = text;
    return rec;
  };

  // clue-template recovery: variant read off the query block
  if (content.rfind("Given the following text generated by a language model and the draft prompt",
                    0) == 0) {
    const Sample& s = sample_for(content);
    const auto query_pos = content.rfind("Outputs: ");
    const std::string query = content.substr(query_pos);
    const bool has_hint = query.find("\nHint: ") != std::string::npos;
    const bool has_noise = query.find("\nNoise: ") != std::string::npos;
    if (has_hint && has_noise) return text_only(s.recovered_full);
    if (has_hint) return text_only(s.recovered_hint);
    return text_only(s.recovered_plain);
  }

  // jailbreak wrapper prompt
  if (content.rfind("Given the following text generated by a language model, please generate", 0) ==
      0) {
    return text_only(sample_for(content).jailbreak_reply);
  }

  // key-sentence extraction
  if (content.size() >= 13 && content.ends_with("Key sentence:")) {
    return text_only(sample_for(content).key_sentence_reply);
  }

  // few-shot draft / fewshot baseline
  if (content.ends_with("Prompt:") && content.find("Output: ") != std::string::npos) {
    return text_only(sample_for(content).draft);
  }

  // suffix/prefix jailbreak prompts: output text plus an instruction line
  for (const auto& s : samples_) {
    if (content.find(s.output_text) != std::string::npos && content != s.output_text) {
      return text_only(s.jailbreak_reply);
    }
  }

  // plain completions: ground-truth generation or draft output
  for (const auto& s : samples_) {
    if (content == s.prompt) {
      rec.text = s.output_text;
      rec.tokens = shared_vs_nonshared_tokens(s.output_text, s.prompt);
      return rec;
    }
    if (content == s.draft) {
      rec.text = s.draft_output;
      rec.tokens = shared_vs_nonshared_tokens(s.draft_output, s.draft);
      return rec;
    }
  }

  throw std::runtime_error("fixture: unscripted request: " + content.substr(0, 80));
}

std::shared_ptr<dory::backend::Transport> FixtureWorld::transport() const {
  return std::make_shared<dory::backend::CallbackTransport>(
      [this](const ChatRequest& req) { return respond(req); }, "fixture");
}

std::vector<dory::bench::OutputRecord> FixtureWorld::prompt_records() const {
  std::vector<dory::bench::OutputRecord> records;
  for (const auto& s : samples_) {
    records.push_back({s.id, s.prompt, std::nullopt, ""});
  }
  return records;
}

std::vector<dory::bench::OutputRecord> FixtureWorld::output_records() const {
  std::vector<dory::bench::OutputRecord> records;
  for (const auto& s : samples_) {
    dory::backend::CompletionRecord rec;
    rec.text = s.output_text;
    rec.tokens = shared_vs_nonshared_tokens(s.output_text, s.prompt);
    rec.tokens.context_id = s.id;
    rec.model_id = "gpt-3.5-turbo";
    records.push_back({s.id, s.prompt, rec, ""});
  }
  return records;
}

void record_cassette(const FixtureWorld& world, const std::filesystem::path& cassette_file,
                     const std::function<void(const Gateway&)>& body) {
  auto gateway = Gateway::record(world.transport(), cassette_file);
  body(gateway);
}

std::filesystem::path scratch_dir(const std::string& tag) {
  static std::mt19937_64 rng(std::random_device{}());
  const auto dir = std::filesystem::temp_directory_path() /
                   ("dory_test_" + tag + "_" + std::to_string(rng()));
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace fixture
