#pragma once
// The shipped 6-post feed fixture and an independent straight-line
// transcription of the feed definition, shared by the filtering suite and
// the acceptance run.

#include "fedfeed/filtering.hpp"
#include "support.hpp"

#include <json.hpp>

#include <string>
#include <vector>

namespace testing {

using namespace fedfeed;

inline PersonaProfile profile_with(const CategorySet& cats, std::vector<double> dist) {
    PersonaProfile p;
    p.user_id = "viewer";
    p.categories = cats;
    p.beta = dist;
    p.distribution = std::move(dist);
    return p;
}

struct Fixture {
    std::string viewer;
    CategorySet categories;
    PersonaProfile profile;
    std::vector<FriendRank> ranks;
    std::vector<FeedCandidate> candidates;
    std::vector<std::string> expected_order;
};

inline Fixture load_fixture() {
    const auto doc = nlohmann::json::parse(slurp(data_dir() / "feed6.json"));
    Fixture f;
    f.viewer = doc["viewer"];
    f.categories = CategorySet(doc["categories"].get<std::vector<std::string>>());
    std::vector<double> dist;
    for (const auto& name : f.categories.names()) dist.push_back(doc["distribution"][name]);
    f.profile = profile_with(f.categories, dist);
    for (const auto& [friend_id, delta] : doc["friend_ranks"].items())
        f.ranks.push_back({f.viewer, friend_id, delta.get<double>()});
    for (const auto& c : doc["candidates"]) {
        FeedCandidate fc;
        fc.post_id = c["post_id"];
        fc.author_id = c["author_id"];
        fc.category = f.categories.index_of(c["category"].get<std::string>());
        fc.counts = {c["likes"], c["shares"], c["comments"]};
        fc.sentiment = c["sentiment"];
        fc.rho = c["rho"];
        fc.fk_grade = c["fk_grade"];
        fc.age_seconds = c["age_seconds"];
        fc.trend = c["trend"];
        f.candidates.push_back(fc);
    }
    f.expected_order = doc["expected_order"].get<std::vector<std::string>>();
    return f;
}

struct OracleItem {
    std::string post_id;
    double score;
};

// Independent transcription of the feed definition with default settings:
// spam drop, sentiment/trend gate, general-post demotion, then
// mass * delta * P * (0.5 + 0.5 R), ordered by score then post id.
inline std::vector<OracleItem> oracle_feed(const Fixture& f) {
    std::vector<OracleItem> out;
    const double K = static_cast<double>(f.categories.size());
    for (const auto& c : f.candidates) {
        if (c.rho == 0) continue;
        if (!(c.sentiment > 0.5)) continue;
        if (!(c.trend > 0.0)) continue;
        double delta = 0.0;
        for (const auto& r : f.ranks)
            if (r.friend_id == c.author_id) delta = r.delta;
        const double P = 2.0 * static_cast<double>(c.counts.comments) + 1.0 * static_cast<double>(c.counts.likes) +
                         3.0 * static_cast<double>(c.counts.shares) + 1.0 / (c.age_seconds + 3600.0);
        double grade = c.fk_grade < 0 ? 0 : c.fk_grade;
        double R = 1.0 - grade / 18.0;
        if (R < 0) R = 0;
        const double mass = f.profile.distribution[c.category];
        double score = mass * delta * P * (0.5 + 0.5 * R);
        if (mass < 1.0 / K) score *= 0.5;
        out.push_back({c.post_id, score});
    }
    for (std::size_t i = 0; i < out.size(); ++i)
        for (std::size_t j = i + 1; j < out.size(); ++j)
            if (out[j].score > out[i].score || (out[j].score == out[i].score && out[j].post_id < out[i].post_id))
                std::swap(out[i], out[j]);
    return out;
}

}  // namespace testing
