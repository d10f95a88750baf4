#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace prockit::text {

// Lowercase word tokens, split on anything that is not a letter or digit.
// Code points outside ASCII count as letters unless they are in one of the
// common punctuation blocks; case folding covers Latin-1, Latin Extended-A,
// Greek and Cyrillic. No stemming, no stopword removal.
std::vector<std::string> tokenize(std::string_view text);

// Case-folded copy of `text` using the same folding table as tokenize().
std::string casefold(std::string_view text);

std::string trim(std::string_view text);

// Collapses runs of whitespace into single spaces and trims the ends.
std::string normalize_space(std::string_view text);

// Splits on '.', '!' or '?' when followed by whitespace and an uppercase
// letter, or by the end of the text. Abbreviations are not special-cased.
std::vector<std::string> split_sentences(std::string_view text);

// A token together with its byte span in the source text.
struct Span {
  std::string text;   // as written in the source
  std::string lower;  // case-folded
  std::size_t begin = 0;
  std::size_t end = 0;
  bool is_word = true;  // false for punctuation tokens
};

// Word and punctuation tokens with source offsets. Apostrophes, hyphens and
// '/' inside a word are kept ("don't", "15-20", "1/2").
std::vector<Span> spans(std::string_view text);

// Token-level Jaccard overlap of two texts (0 when both are empty).
double jaccard(std::string_view a, std::string_view b);

// Lowercase ASCII slug: "Prevent Viruses" -> "prevent-viruses".
std::string slugify(std::string_view text);

// Shortest round-trip decimal form; identical bytes on every platform.
std::string format_double(double value);

bool is_upper_start(std::string_view text);

}  // namespace prockit::text
