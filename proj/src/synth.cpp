#include "fedfeed/synth.hpp"

#include <json.hpp>

#include <algorithm>
#include <cctype>
#include <fstream>
#include <random>
#include <stdexcept>

namespace fedfeed {

namespace {

const std::map<std::string, std::vector<std::string>, std::less<>>& vocabularies() {
    static const std::map<std::string, std::vector<std::string>, std::less<>> v = {
        {"news", {"report", "breaking", "announced", "official", "statement", "city", "local", "headline",
                  "press", "reporter", "journalist", "investigation", "coverage", "weather", "storm", "traffic",
                  "accident", "mayor", "police", "downtown", "residents", "broadcast", "newspaper", "bulletin"}},
        {"media", {"film", "movie", "music", "album", "series", "actor", "actress", "director", "song", "episode",
                   "trailer", "podcast", "studio", "concert", "singer", "band", "premiere", "cinema", "documentary",
                   "soundtrack", "streaming", "celebrity", "theater", "comedy"}},
        {"politics", {"election", "vote", "senate", "policy", "government", "campaign", "law", "party", "candidate",
                      "debate", "congress", "minister", "legislation", "tax", "reform", "president", "parliament",
                      "governor", "ballot", "democracy", "senator", "referendum", "coalition", "diplomat"}},
        {"sports", {"game", "team", "match", "player", "coach", "season", "goal", "league", "championship", "ball",
                    "tournament", "stadium", "race", "athlete", "soccer", "basketball", "football", "tennis",
                    "baseball", "playoff", "referee", "score", "trophy", "marathon"}},
        {"community-services",
         {"volunteer", "shelter", "donation", "library", "charity", "neighbors", "park", "food", "clinic", "youth",
          "fundraiser", "neighborhood", "pantry", "mentoring", "cleanup", "seniors", "recycling", "garden",
          "nonprofit", "outreach", "daycare", "tutoring", "blood", "drive"}},
        {"technology", {"software", "computer", "phone", "app", "data", "code", "internet", "device", "network",
                        "robot", "chip", "cloud", "laptop", "algorithm", "startup", "programming", "battery",
                        "processor", "smartphone", "website", "cybersecurity", "gadget", "browser", "server"}},
    };
    return v;
}

const std::vector<std::string> kFiller = {
    "the",  "a",     "this",  "that",  "is",    "was",    "with", "for",      "and",   "of",   "to",
    "in",   "on",    "we",    "our",   "my",    "it",     "so",   "just",     "very",  "really", "all",
    "new",  "big",   "day",   "week",  "people", "time",  "today", "about",   "from",  "at",   "after",
    "everyone", "again", "here", "there", "some", "more", "last", "next", "year", "night", "morning", "see",
    "think", "check", "out", "they", "their", "will", "can", "what", "who", "now", "still", "together"};

const std::vector<std::string> kPositive = {"great", "good", "love", "amazing", "happy", "wonderful", "excellent",
                                            "best", "fun", "awesome", "exciting", "beautiful", "proud", "fantastic"};
const std::vector<std::string> kNegative = {"bad", "terrible", "awful", "hate", "sad", "worst", "poor",
                                            "angry", "horrible", "boring", "disappointing", "annoying"};

constexpr Timestamp kDay = 24 * 3600;

// Engine output mapped by hand so results do not depend on the standard
// library's distribution implementations.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
    std::uint64_t below(std::uint64_t n) { return engine_() % n; }
    template <typename T>
    const T& pick(const std::vector<T>& v) { return v[below(v.size())]; }
    std::size_t categorical(const std::vector<double>& weights) {
        double total = 0.0;
        for (double w : weights) total += w;
        double u = uniform() * total;
        for (std::size_t i = 0; i < weights.size(); ++i) {
            if (u < weights[i]) return i;
            u -= weights[i];
        }
        return weights.size() - 1;
    }

private:
    std::mt19937_64 engine_;
};

std::string make_sentence(Rng& rng, const std::vector<std::string>& core, int polarity, double core_fraction) {
    const auto len = 6 + rng.below(5);
    std::vector<std::string> words;
    bool has_core = false;
    for (std::uint64_t i = 0; i < len; ++i) {
        if (rng.uniform() < core_fraction) {
            words.push_back(rng.pick(core));
            has_core = true;
        } else {
            words.push_back(rng.pick(kFiller));
        }
    }
    if (!has_core) words[rng.below(words.size())] = rng.pick(core);
    if (polarity != 0) words[rng.below(words.size())] = rng.pick(polarity > 0 ? kPositive : kNegative);
    std::string s;
    for (const auto& w : words) {
        if (!s.empty()) s += ' ';
        s += w;
    }
    s[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(s[0])));
    s += rng.uniform() < 0.2 ? '!' : '.';
    return s;
}

void write_lines(const std::filesystem::path& path, const std::vector<std::string>& lines) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    for (const auto& l : lines) out << l << '\n';
}

}  // namespace

void SynthConfig::validate() const {
    if (users == 0) throw std::invalid_argument("synth: users must be >= 1");
    if (categories == 0 || categories > 6) throw std::invalid_argument("synth: categories must be in [1, 6]");
    if (!(friend_probability >= 0.0 && friend_probability <= 1.0))
        throw std::invalid_argument("synth: friend probability must be in [0, 1]");
    if (!(core_fraction > 0.0 && core_fraction <= 1.0)) throw std::invalid_argument("synth: core_fraction in (0, 1]");
}

const std::vector<std::string>& category_vocabulary(std::string_view category) {
    auto it = vocabularies().find(category);
    if (it == vocabularies().end()) throw std::invalid_argument("no vocabulary for category " + std::string(category));
    return it->second;
}

SynthCorpus synthesize(const SynthConfig& cfg) {
    cfg.validate();
    Rng rng(cfg.seed);
    SynthCorpus c;
    c.categories = CategorySet::first(cfg.categories);
    const std::size_t K = c.categories.size();

    for (std::uint32_t i = 1; i <= cfg.users; ++i) c.users.push_back({"u" + std::to_string(i), {}});
    for (std::size_t a = 0; a < c.users.size(); ++a)
        for (std::size_t b = a + 1; b < c.users.size(); ++b)
            if (rng.uniform() < cfg.friend_probability) {
                c.users[a].friends.insert(c.users[b].user_id);
                c.users[b].friends.insert(c.users[a].user_id);
            }

    const auto sports = c.categories.index_of("sports");
    const auto politics = c.categories.index_of("politics");
    for (std::size_t u = 0; u < c.users.size(); ++u) {
        std::vector<double> pref(K, 0.0);
        if (u == 0 && sports < K && politics < K) {
            pref[sports] = 0.7;
            pref[politics] = 0.3;
        } else {
            const auto favorite = rng.below(K);
            double rest = 0.0;
            for (auto& p : pref) rest += (p = rng.uniform());
            for (auto& p : pref) p = 0.4 * p / rest;
            pref[favorite] += 0.6;
        }
        c.planted[c.users[u].user_id] = pref;
    }

    std::uint64_t next_post = 1;
    for (const auto& user : c.users) {
        const auto& pref = c.planted[user.user_id];
        for (std::uint32_t j = 0; j < cfg.posts_per_user; ++j) {
            const std::size_t cat = rng.uniform() < 0.5 ? rng.categorical(pref) : rng.below(K);
            const double u = rng.uniform();
            const int polarity = u < 0.75 ? 1 : (u < 0.9 ? -1 : 0);
            const auto sentences = 1 + rng.below(3);
            std::string text;
            for (std::uint64_t s = 0; s < sentences; ++s) {
                if (!text.empty()) text += ' ';
                text += make_sentence(rng, category_vocabulary(c.categories.name(cat)), polarity, cfg.core_fraction);
            }
            Post p;
            p.post_id = "p" + std::to_string(next_post++);
            p.author_id = user.user_id;
            p.text = std::move(text);
            p.created_at = cfg.base_time + static_cast<Timestamp>(rng.below(6 * kDay));
            p.label = c.categories.name(cat);
            c.posts.push_back(std::move(p));
        }
    }

    const Timestamp end = cfg.base_time + 7 * kDay;
    for (const auto& user : c.users) {
        const auto& pref = c.planted[user.user_id];
        for (std::uint32_t n = 0; n < cfg.interactions_per_user; ++n) {
            const std::size_t cat = rng.categorical(pref);
            std::vector<std::size_t> pool;
            for (int tier = 0; tier < 3 && pool.empty(); ++tier) {
                for (std::size_t i = 0; i < c.posts.size(); ++i) {
                    const auto& p = c.posts[i];
                    if (p.author_id == user.user_id) continue;
                    const bool in_cat = *p.label == c.categories.name(cat);
                    const bool friend_post = user.friends.contains(p.author_id);
                    if ((tier == 0 && in_cat && friend_post) || (tier == 1 && in_cat) || tier == 2) pool.push_back(i);
                }
            }
            if (pool.empty()) break;
            auto& post = c.posts[rng.pick(pool)];

            const double k = rng.uniform();
            InteractionEvent ev;
            ev.user_id = user.user_id;
            ev.post_id = post.post_id;
            ev.kind = k < 0.45   ? InteractionKind::like
                      : k < 0.60 ? InteractionKind::comment
                      : k < 0.70 ? InteractionKind::share
                      : k < 0.95 ? InteractionKind::view
                                 : InteractionKind::dislike;
            const Timestamp lo = std::max(post.created_at + 60, end - 2 * kDay);
            ev.timestamp = lo + static_cast<Timestamp>(rng.below(static_cast<std::uint64_t>(end - lo + 1)));
            if (ev.kind == InteractionKind::comment)
                ev.comment_text = "This is " + rng.pick(rng.uniform() < 0.8 ? kPositive : kNegative) + ".";
            post.counts.add(ev.kind);
            c.interactions.push_back(std::move(ev));
        }
    }
    std::stable_sort(c.interactions.begin(), c.interactions.end(),
                     [](const InteractionEvent& a, const InteractionEvent& b) { return a.timestamp < b.timestamp; });
    return c;
}

IngestPaths write_corpus(const SynthCorpus& corpus, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    using nlohmann::ordered_json;
    std::vector<std::string> lines;
    for (const auto& u : corpus.users)
        lines.push_back(ordered_json{{"user_id", u.user_id}, {"friends", u.friends}}.dump());
    IngestPaths paths{dir / "users.jsonl", dir / "posts.jsonl", dir / "interactions.jsonl"};
    write_lines(paths.users, lines);

    lines.clear();
    for (const auto& p : corpus.posts)
        lines.push_back(ordered_json{{"post_id", p.post_id},
                                     {"author_id", p.author_id},
                                     {"text", p.text},
                                     {"created_at", p.created_at},
                                     {"category", *p.label}}
                            .dump());
    write_lines(paths.posts, lines);

    lines.clear();
    for (const auto& ev : corpus.interactions) {
        ordered_json j{{"user_id", ev.user_id}, {"post_id", ev.post_id}, {"kind", to_string(ev.kind)},
                       {"timestamp", ev.timestamp}};
        if (ev.comment_text) j["comment_text"] = *ev.comment_text;
        lines.push_back(j.dump());
    }
    write_lines(paths.interactions, lines);
    return paths;
}

}  // namespace fedfeed
