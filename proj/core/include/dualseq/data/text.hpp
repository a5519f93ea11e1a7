#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace dualseq::data {

/// Normalizes one raw utterance: ASCII digits become '0', ASCII letters are
/// lowercased, angle-bracket markup tags such as <u> and </u> are removed,
/// whitespace runs collapse to one space and the ends are trimmed.
/// Idempotent; bytes >= 0x80 pass through untouched.
std::string preprocess(std::string_view utterance);

/// Punctuation marks split off word edges by `tokenize`.
bool is_punct_char(char c);
/// True for a non-empty token made only of punctuation marks.
bool is_punct_token(std::string_view token);

/// Whitespace split, then leading/trailing . , ! ? ' " peeled off into
/// single-character tokens. Internal marks stay ("what's" is one token).
std::vector<std::string> tokenize(std::string_view text);

/// Space-joined tokens; the inverse of `tokenize` on its own output.
std::string join_tokens(std::span<const std::string> tokens);

/// Human-facing rendering: . , ! ? attach to the previous word.
std::string detokenize(std::span<const std::string> tokens);

}  // namespace dualseq::data
