#pragma once

/**
 * Non-pipeline recovery baselines: the hand-written jailbreak prompt bank and
 * the plain few-shot recoverer.
 *
 * Jailbreak prompts attach to the output text per their placement (suffix by
 * default). The one long wrapper prompt ends with "-LLM-Generated Text:-Prompt:"
 * slot markers; it is rendered by splicing the output between the two markers.
 *
 * The few-shot recoverer is the draft stage run standalone: given identical
 * exemplars it issues the identical ChatRequest.
 */

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "dory/backend.hpp"
#include "dory/recovery.hpp"

namespace dory::baselines {

struct JailbreakPrompt {
  std::string id;
  std::string text;       // verbatim, including any slot markers
  std::string placement;  // "prefix" or "suffix"
};

using JailbreakBank = std::vector<JailbreakPrompt>;

/// Load the bank from a JSONL asset ({"id":..., "text":..., "placement":...}).
JailbreakBank load_jailbreak_bank(const std::filesystem::path& file);

const JailbreakPrompt& find_prompt(const JailbreakBank& bank, std::string_view id);

/// Content digest of the bank (ids, texts, placements, in order). The shipped
/// bank's digest is frozen in the test suite; any edit fails it.
std::string bank_digest(const JailbreakBank& bank);

/// The exact message a jailbreak prompt produces for an output text.
std::string render_jailbreak_message(const JailbreakPrompt& jp, std::string_view output_text);

/// Send the output with the jailbreak prompt attached; the reply is the
/// recovered prompt.
std::string jailbreak_recover(std::string_view output_text, const JailbreakPrompt& jp,
                              const backend::Gateway& gateway,
                              const recovery::StageOptions& opts = {});

/// Seeded choice of `k` bank indices, ascending so bank order is preserved.
std::vector<std::size_t> sample_indices(std::size_t n, std::size_t k, std::uint64_t seed);

/// Few-shot baseline: five seed-selected (output, prompt) exemplars, then the
/// test output. Throws BankError when the bank has fewer than five examples.
std::string fewshot_recover(std::string_view output_text, const recovery::ExampleBank& bank,
                            const backend::Gateway& gateway, std::uint64_t seed,
                            const recovery::StageOptions& opts = {});

/// The exemplars fewshot_recover would pick for this seed.
std::vector<recovery::ExampleBank::DraftExample> fewshot_selection(
    const recovery::ExampleBank& bank, std::uint64_t seed);

}  // namespace dory::baselines
