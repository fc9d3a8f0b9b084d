#include "fedfeed/lexicon.hpp"

#include "fedfeed/model.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace fedfeed {

namespace bundled {
extern const char* const kLexicon;
extern const char* const kCommonWords;
}  // namespace bundled

namespace {

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\r' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\r' || s.back() == '\t')) s.remove_suffix(1);
    return s;
}

template <typename Fn>
void for_each_line(std::string_view text, Fn&& fn) {
    std::size_t line_no = 0;
    while (!text.empty()) {
        const auto nl = text.find('\n');
        auto line = text.substr(0, nl);
        ++line_no;
        text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
        if (line.empty() || line.front() == '#' || trim(line).empty()) continue;
        fn(line, line_no);
    }
}

}  // namespace

SentimentLexicon::SentimentLexicon(std::unordered_map<std::string, double> polarity) : polarity_(std::move(polarity)) {
    for (const auto& [tok, p] : polarity_)
        if (!(p >= -1.0 && p <= 1.0)) throw std::invalid_argument("lexicon polarity out of [-1, 1] for '" + tok + "'");
}

SentimentLexicon SentimentLexicon::parse(std::string_view text, std::string_view origin) {
    std::unordered_map<std::string, double> m;
    for_each_line(text, [&](std::string_view line, std::size_t no) {
        const auto tab = line.find('\t');
        const auto where = std::string(origin) + ":" + std::to_string(no);
        if (tab == std::string_view::npos) throw std::invalid_argument(where + ": expected token<TAB>polarity");
        const auto toks = tokenize(line.substr(0, tab));
        if (toks.size() != 1) throw std::invalid_argument(where + ": token must be a single word");
        const auto num = trim(line.substr(tab + 1));
        double p = 0.0;
        const auto [ptr, ec] = std::from_chars(num.data(), num.data() + num.size(), p);
        if (ec != std::errc{} || ptr != num.data() + num.size())
            throw std::invalid_argument(where + ": bad polarity '" + std::string(num) + "'");
        if (!(p >= -1.0 && p <= 1.0)) throw std::invalid_argument(where + ": polarity out of [-1, 1]");
        m[toks.front()] = p;
    });
    return SentimentLexicon(std::move(m));
}

SentimentLexicon SentimentLexicon::load(const std::filesystem::path& path) {
    return parse(read_file(path), path.string());
}

const SentimentLexicon& SentimentLexicon::bundled() {
    static const SentimentLexicon lex = parse(bundled::kLexicon, "<bundled lexicon>");
    return lex;
}

const double* SentimentLexicon::find(std::string_view token) const {
    auto it = polarity_.find(std::string(token));
    return it == polarity_.end() ? nullptr : &it->second;
}

SentimentLexicon SentimentLexicon::negated() const {
    auto m = polarity_;
    for (auto& [tok, p] : m) p = -p;
    return SentimentLexicon(std::move(m));
}

WordList WordList::parse(std::string_view text) {
    std::unordered_set<std::string> words;
    for_each_line(text, [&](std::string_view line, std::size_t) {
        for (auto& t : tokenize(line)) words.insert(std::move(t));
    });
    return WordList(std::move(words));
}

WordList WordList::load(const std::filesystem::path& path) { return parse(read_file(path)); }

const WordList& WordList::bundled() {
    static const WordList words = parse(bundled::kCommonWords);
    return words;
}

}  // namespace fedfeed
