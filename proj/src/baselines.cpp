#include "dory/baselines.hpp"

#include <algorithm>
#include <random>

#include "json.hpp"

#include "dory/errors.hpp"
#include "dory/hash.hpp"

namespace dory::baselines {

using json = nlohmann::json;

namespace {
constexpr std::string_view kWrapperSlots = "-LLM-Generated Text:-Prompt:";
constexpr std::size_t kFewshotCount = 5;
}  // namespace

JailbreakBank load_jailbreak_bank(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw BankError("cannot open jailbreak bank: " + file.string());
  JailbreakBank bank;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      throw ParseError(file.string() + " line " + std::to_string(line_no) + ": " + e.what());
    }
    bank.push_back({j.at("id").get<std::string>(), j.at("text").get<std::string>(),
                    j.value("placement", "suffix")});
  }
  return bank;
}

const JailbreakPrompt& find_prompt(const JailbreakBank& bank, std::string_view id) {
  for (const auto& jp : bank) {
    if (jp.id == id) return jp;
  }
  throw BankError("no jailbreak prompt with id '" + std::string(id) + "'");
}

std::string bank_digest(const JailbreakBank& bank) {
  json j = json::array();
  for (const auto& jp : bank) {
    j.push_back({{"id", jp.id}, {"text", jp.text}, {"placement", jp.placement}});
  }
  return fnv128_hex(j.dump());
}

std::string render_jailbreak_message(const JailbreakPrompt& jp, std::string_view output_text) {
  // the wrapper prompt splices the output between its two slot markers
  if (jp.text.size() >= kWrapperSlots.size() &&
      std::string_view(jp.text).substr(jp.text.size() - kWrapperSlots.size()) == kWrapperSlots) {
    const std::string head = jp.text.substr(0, jp.text.size() - std::strlen("-Prompt:"));
    return head + std::string(output_text) + "-Prompt:";
  }
  if (jp.placement == "prefix") {
    return jp.text + "\n" + std::string(output_text);
  }
  return std::string(output_text) + "\n" + jp.text;
}

std::string jailbreak_recover(std::string_view output_text, const JailbreakPrompt& jp,
                              const backend::Gateway& gateway,
                              const recovery::StageOptions& opts) {
  if (output_text.empty()) throw EmptyOutput("jailbreak_recover: empty output text");
  backend::ChatRequest req;
  req.model_id = opts.model_id;
  req.messages.push_back({backend::Role::User, render_jailbreak_message(jp, output_text)});
  req.temperature = opts.temperature;
  req.max_tokens = opts.max_tokens;
  req.sample_index = opts.sample_index;
  const auto rec = gateway.complete(req);
  auto text = rec.text;
  while (!text.empty() && std::isspace(static_cast<unsigned char>(text.front()))) text.erase(0, 1);
  while (!text.empty() && std::isspace(static_cast<unsigned char>(text.back()))) text.pop_back();
  return text;
}

std::vector<std::size_t> sample_indices(std::size_t n, std::size_t k, std::uint64_t seed) {
  if (k > n) throw Error("sample_indices: k > n");
  std::vector<std::size_t> pool(n);
  for (std::size_t i = 0; i < n; ++i) pool[i] = i;
  // explicit Fisher-Yates with a modulo draw: std::shuffle/std::sample are
  // implementation-defined, this is bit-stable across platforms
  std::mt19937_64 rng(seed);
  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng() % (n - i));
    std::swap(pool[i], pool[j]);
  }
  std::vector<std::size_t> picked(pool.begin(), pool.begin() + k);
  std::sort(picked.begin(), picked.end());
  return picked;
}

std::vector<recovery::ExampleBank::DraftExample> fewshot_selection(
    const recovery::ExampleBank& bank, std::uint64_t seed) {
  if (bank.draft_examples.size() < kFewshotCount) {
    throw BankError("fewshot_recover needs at least " + std::to_string(kFewshotCount) +
                    " draft examples, bank has " + std::to_string(bank.draft_examples.size()));
  }
  std::vector<recovery::ExampleBank::DraftExample> selected;
  for (std::size_t i : sample_indices(bank.draft_examples.size(), kFewshotCount, seed)) {
    selected.push_back(bank.draft_examples[i]);
  }
  return selected;
}

std::string fewshot_recover(std::string_view output_text, const recovery::ExampleBank& bank,
                            const backend::Gateway& gateway, std::uint64_t seed,
                            const recovery::StageOptions& opts) {
  recovery::ExampleBank selected_bank;
  selected_bank.draft_examples = fewshot_selection(bank, seed);
  return recovery::reconstruct_draft(output_text, selected_bank, gateway, opts);
}

}  // namespace dory::baselines
