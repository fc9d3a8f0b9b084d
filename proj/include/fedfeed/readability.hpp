#pragma once
// Flesch-Kincaid grade, the normalized readability R, and the discrete
// category readability rho used by the persona.

#include "fedfeed/lexicon.hpp"

#include <string>
#include <string_view>

namespace fedfeed {

// Lowercase; count maximal runs of [aeiouy]; drop one for a terminal silent
// 'e' unless the word ends in consonant + "le"; at least 1.
int count_syllables(std::string_view word);

struct TextStats {
    std::size_t words = 0;
    std::size_t sentences = 0;
    std::size_t syllables = 0;
    bool has_terminator = false;
};

// Words are alphanumeric runs; sentences are the word-bearing segments
// between runs of [.!?] (the whole text when there are none).
TextStats text_stats(std::string_view text);

// 0.39 * words/sentences + 11.8 * syllables/words - 15.59; 0 for text
// without words.
double flesch_kincaid_grade(std::string_view text);

// clamp(1 - max(grade, 0) / max_grade, 0, 1). max_grade must be positive.
double readability_R(double grade, double max_grade);
double readability_R(std::string_view text, double max_grade);

struct ReadabilityRules {
    double professional_grade = 12.0;  // rho = 2 above this grade
    double min_dictionary_ratio = 0.5;  // rho = 0 below this ratio
    std::size_t max_unterminated_tokens = 40;
};

// Fraction of tokens found in the word list; 0 for text without tokens.
double dictionary_ratio(std::string_view text, const WordList& words);

/// 0 = unreadable/spam, 1 = simple, 2 = professional.
int category_readability(std::string_view text, const WordList& words = WordList::bundled(),
                         const ReadabilityRules& rules = {});

}  // namespace fedfeed
