#pragma once
// Sentiment lexicon and common-word list, loadable from files or the
// bundled defaults.
//
// Lexicon format: UTF-8, one `token<TAB>polarity` per line, polarity in [-1, 1].
// Word list format: UTF-8, one word per line. Blank lines and lines starting
// with '#' are ignored in both.

#include <filesystem>
#include <memory>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>

namespace fedfeed {

class SentimentLexicon {
public:
    SentimentLexicon() = default;
    // Throws std::invalid_argument if any polarity is outside [-1, 1].
    explicit SentimentLexicon(std::unordered_map<std::string, double> polarity);

    static SentimentLexicon parse(std::string_view text, std::string_view origin = "<lexicon>");
    static SentimentLexicon load(const std::filesystem::path& path);
    static const SentimentLexicon& bundled();

    // nullptr when the token is not in the lexicon.
    const double* find(std::string_view token) const;
    std::size_t size() const { return polarity_.size(); }
    SentimentLexicon negated() const;

private:
    std::unordered_map<std::string, double> polarity_;
};

class WordList {
public:
    WordList() = default;
    explicit WordList(std::unordered_set<std::string> words) : words_(std::move(words)) {}

    static WordList parse(std::string_view text);
    static WordList load(const std::filesystem::path& path);
    static const WordList& bundled();

    bool contains(std::string_view word) const { return words_.contains(std::string(word)); }
    std::size_t size() const { return words_.size(); }

private:
    std::unordered_set<std::string> words_;
};

}  // namespace fedfeed
