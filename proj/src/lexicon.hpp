#pragma once

#include <string_view>

// Closed word lists for the rule-based extractors. All lookups expect
// case-folded input.
namespace prockit::lexicon {

// Verb lemmas that commonly open an instruction.
bool is_verb(std::string_view word);
// Determiners, pronouns, prepositions, conjunctions, auxiliaries and other
// words that cannot start an imperative.
bool is_non_verb(std::string_view word);
// Function words (determiners, prepositions, conjunctions, pronouns).
bool is_function_word(std::string_view word);
bool is_determiner(std::string_view word);
bool is_unit(std::string_view word);
bool is_number_word(std::string_view word);

}  // namespace prockit::lexicon
