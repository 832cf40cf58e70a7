#include "dory/tokens.hpp"

namespace dory {

namespace {

bool is_ascii_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

bool is_ascii_punct(char c) {
  auto u = static_cast<unsigned char>(c);
  if (u >= 0x80) return false;  // multi-byte sequences are word characters
  return (u >= '!' && u <= '/') || (u >= ':' && u <= '@') ||
         (u >= '[' && u <= '`') || (u >= '{' && u <= '~');
}

char ascii_lower(char c) {
  return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c;
}

}  // namespace

std::string TokenSequence::text() const {
  std::string out;
  for (const auto& t : tokens) out += t.surface;
  return out;
}

std::string normalize_word(std::string_view raw) {
  std::size_t b = 0;
  std::size_t e = raw.size();
  // token surfaces carry leading whitespace; trim it along with punctuation
  while (b < e && (is_ascii_punct(raw[b]) || is_ascii_space(raw[b]))) ++b;
  while (e > b && (is_ascii_punct(raw[e - 1]) || is_ascii_space(raw[e - 1]))) --e;
  std::string out;
  out.reserve(e - b);
  for (std::size_t i = b; i < e; ++i) out += ascii_lower(raw[i]);
  return out;
}

std::vector<std::string> normalize_words(std::string_view text) {
  std::vector<std::string> out;
  for (const auto& occ : word_occurrences(text)) out.push_back(occ.word);
  return out;
}

std::vector<WordOccurrence> word_occurrences(std::string_view text) {
  std::vector<WordOccurrence> out;
  std::size_t i = 0;
  const std::size_t n = text.size();
  while (i < n) {
    while (i < n && is_ascii_space(text[i])) ++i;
    if (i >= n) break;
    std::size_t b = i;
    while (i < n && !is_ascii_space(text[i])) ++i;
    std::size_t e = i;
    // shrink the span to the punctuation-stripped word body
    while (b < e && is_ascii_punct(text[b])) ++b;
    while (e > b && is_ascii_punct(text[e - 1])) --e;
    if (b == e) continue;
    std::string word;
    word.reserve(e - b);
    for (std::size_t k = b; k < e; ++k) word += ascii_lower(text[k]);
    out.push_back({std::move(word), b, e});
  }
  return out;
}

std::vector<std::string> naive_token_split(std::string_view text) {
  std::vector<std::string> out;
  std::size_t i = 0;
  const std::size_t n = text.size();
  while (i < n) {
    std::size_t b = i;
    while (i < n && is_ascii_space(text[i])) ++i;
    while (i < n && !is_ascii_space(text[i])) ++i;
    out.emplace_back(text.substr(b, i - b));
  }
  return out;
}

}  // namespace dory
