#include "fedfeed/readability.hpp"

#include "fedfeed/model.hpp"

#include <algorithm>
#include <cctype>
#include <stdexcept>

namespace fedfeed {

namespace {

bool is_vowel(char c) {
    return c == 'a' || c == 'e' || c == 'i' || c == 'o' || c == 'u' || c == 'y';
}

bool is_terminator(char c) { return c == '.' || c == '!' || c == '?'; }

}  // namespace

int count_syllables(std::string_view word) {
    std::string w;
    w.reserve(word.size());
    for (unsigned char c : word) w.push_back(static_cast<char>(std::tolower(c)));

    int groups = 0;
    bool in_group = false;
    for (char c : w) {
        const bool v = is_vowel(c);
        if (v && !in_group) ++groups;
        in_group = v;
    }
    const auto n = w.size();
    if (n >= 1 && w[n - 1] == 'e') {
        const bool consonant_le = n >= 3 && w[n - 2] == 'l' && !is_vowel(w[n - 3]) &&
                                  std::isalpha(static_cast<unsigned char>(w[n - 3]));
        if (!consonant_le) --groups;
    }
    return std::max(groups, 1);
}

TextStats text_stats(std::string_view text) {
    TextStats st;
    bool segment_has_word = false;
    std::string cur;
    auto flush_word = [&] {
        if (cur.empty()) return;
        ++st.words;
        st.syllables += static_cast<std::size_t>(count_syllables(cur));
        segment_has_word = true;
        cur.clear();
    };
    for (char c : text) {
        if (std::isalnum(static_cast<unsigned char>(c))) {
            cur.push_back(c);
            continue;
        }
        flush_word();
        if (is_terminator(c)) {
            st.has_terminator = true;
            if (segment_has_word) ++st.sentences;
            segment_has_word = false;
        }
    }
    flush_word();
    if (segment_has_word) ++st.sentences;
    return st;
}

double flesch_kincaid_grade(std::string_view text) {
    const auto st = text_stats(text);
    if (st.words == 0) return 0.0;
    const double w = static_cast<double>(st.words);
    return 0.39 * (w / static_cast<double>(st.sentences)) + 11.8 * (static_cast<double>(st.syllables) / w) - 15.59;
}

double readability_R(double grade, double max_grade) {
    if (!(max_grade > 0.0)) throw std::invalid_argument("readability_R: MaxR must be positive");
    return std::clamp(1.0 - std::max(grade, 0.0) / max_grade, 0.0, 1.0);
}

double readability_R(std::string_view text, double max_grade) {
    return readability_R(flesch_kincaid_grade(text), max_grade);
}

double dictionary_ratio(std::string_view text, const WordList& words) {
    const auto toks = tokenize(text);
    if (toks.empty()) return 0.0;
    const auto hits = std::count_if(toks.begin(), toks.end(), [&](const std::string& t) { return words.contains(t); });
    return static_cast<double>(hits) / static_cast<double>(toks.size());
}

int category_readability(std::string_view text, const WordList& words, const ReadabilityRules& rules) {
    const auto st = text_stats(text);
    if (st.words == 0) return 0;
    if (!st.has_terminator && st.words > rules.max_unterminated_tokens) return 0;
    const double d = dictionary_ratio(text, words);
    if (d < rules.min_dictionary_ratio) return 0;
    return flesch_kincaid_grade(text) > rules.professional_grade ? 2 : 1;
}

}  // namespace fedfeed
