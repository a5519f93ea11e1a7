#include "dualseq/data/text.hpp"

#include <algorithm>

namespace dualseq::data {

namespace {

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v'; }
bool is_lower(char c) { return c >= 'a' && c <= 'z'; }
bool is_digit(char c) { return c >= '0' && c <= '9'; }

// Length of a markup tag starting at s[i] == '<', or 0 if none:
//   '<' '/'? [a-z][a-z0-9]* (space [^<>]*)? '/'? '>'
std::size_t tag_length(std::string_view s, std::size_t i) {
  std::size_t j = i + 1;
  if (j < s.size() && s[j] == '/') ++j;
  if (j >= s.size() || !is_lower(s[j])) return 0;
  while (j < s.size() && (is_lower(s[j]) || is_digit(s[j]))) ++j;
  if (j < s.size() && is_space(s[j])) {
    while (j < s.size() && s[j] != '<' && s[j] != '>') ++j;
  }
  if (j < s.size() && s[j] == '/') ++j;
  if (j < s.size() && s[j] == '>') return j + 1 - i;
  return 0;
}

std::string strip_tags(std::string s) {
  for (;;) {
    std::string out;
    out.reserve(s.size());
    bool changed = false;
    for (std::size_t i = 0; i < s.size();) {
      if (s[i] == '<') {
        if (auto n = tag_length(s, i); n > 0) {
          i += n;
          changed = true;
          continue;
        }
      }
      out.push_back(s[i++]);
    }
    if (!changed) return out;
    s = std::move(out);
  }
}

}  // namespace

std::string preprocess(std::string_view utterance) {
  std::string s(utterance);
  for (auto& c : s) {
    if (is_digit(c)) c = '0';
    else if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
  s = strip_tags(std::move(s));

  std::string out;
  out.reserve(s.size());
  bool pending_space = false;
  for (char c : s) {
    if (is_space(c)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out.push_back(' ');
    pending_space = false;
    out.push_back(c);
  }
  return out;
}

bool is_punct_char(char c) { return c == '.' || c == ',' || c == '!' || c == '?' || c == '\'' || c == '"'; }

bool is_punct_token(std::string_view token) {
  return !token.empty() && std::all_of(token.begin(), token.end(), is_punct_char);
}

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && is_space(text[i])) ++i;
    std::size_t end = i;
    while (end < text.size() && !is_space(text[end])) ++end;
    if (end == i) break;
    std::string_view word = text.substr(i, end - i);
    i = end;

    std::size_t lead = 0;
    while (lead < word.size() && is_punct_char(word[lead])) ++lead;
    std::size_t trail = word.size();
    while (trail > lead && is_punct_char(word[trail - 1])) --trail;
    for (std::size_t k = 0; k < lead; ++k) tokens.emplace_back(1, word[k]);
    if (trail > lead) tokens.emplace_back(word.substr(lead, trail - lead));
    for (std::size_t k = std::max(trail, lead); k < word.size(); ++k) tokens.emplace_back(1, word[k]);
  }
  return tokens;
}

std::string join_tokens(std::span<const std::string> tokens) {
  std::string out;
  for (const auto& t : tokens) {
    if (!out.empty()) out.push_back(' ');
    out += t;
  }
  return out;
}

std::string detokenize(std::span<const std::string> tokens) {
  std::string out;
  for (const auto& t : tokens) {
    const bool attach = t.size() == 1 && (t[0] == '.' || t[0] == ',' || t[0] == '!' || t[0] == '?');
    if (!out.empty() && !attach) out.push_back(' ');
    out += t;
  }
  return out;
}

}  // namespace dualseq::data
