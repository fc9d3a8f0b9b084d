#include "fedfeed/filtering.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

namespace fedfeed {

void RankWeights::validate() const {
    for (double v : {w_like, w_comment, w_share, w_comments, w_likes, w_shares, w_recency})
        if (!(v >= 0.0) || !std::isfinite(v)) throw std::invalid_argument("rank weights must be nonnegative");
    if (!(epsilon_seconds > 0.0)) throw std::invalid_argument("epsilon_T must be positive");
}

void FilterSettings::validate() const {
    if (!(max_grade > 0.0)) throw std::invalid_argument("MaxR must be positive");
    if (trend_window <= 0) throw std::invalid_argument("trend window must be positive");
    if (!(general_post_factor >= 0.0 && general_post_factor <= 1.0))
        throw std::invalid_argument("general_post_factor must be in [0, 1]");
}

std::vector<FriendRank> friend_rank(std::string_view user_id, std::span<const InteractionEvent> interactions,
                                    const PostAuthorIndex& authors, const RankWeights& w) {
    std::map<std::string, EngagementCounts> per_friend;
    for (const auto& ev : interactions) {
        if (ev.user_id != user_id || !is_engagement(ev.kind)) continue;
        auto it = authors.find(ev.post_id);
        if (it == authors.end() || it->second == user_id) continue;
        per_friend[it->second].add(ev.kind);
    }
    std::vector<FriendRank> out;
    out.reserve(per_friend.size());
    for (const auto& [friend_id, c] : per_friend)
        out.push_back({std::string(user_id), friend_id,
                       w.w_like * static_cast<double>(c.likes) + w.w_comment * static_cast<double>(c.comments) +
                           w.w_share * static_cast<double>(c.shares)});
    return out;
}

double trend_score(std::string_view post_id, std::span<const InteractionEvent> interactions, Timestamp now,
                   Timestamp window) {
    if (window <= 0) throw std::invalid_argument("trend_score: window must be positive");
    std::size_t recent = 0;
    std::size_t prior = 0;
    for (const auto& ev : interactions) {
        if (ev.post_id != post_id || ev.timestamp > now) continue;
        if (ev.timestamp >= now - window) ++recent;
        else if (ev.timestamp >= now - 2 * window) ++prior;
    }
    return static_cast<double>(recent) / static_cast<double>(prior + 1);
}

bool filter_pass(double sentiment, double trend, double tau, const FilterSettings& settings) {
    if (settings.exclude_negative && !(sentiment > 0.5)) return false;
    return trend > tau;
}

double post_importance(const EngagementCounts& counts, double age_seconds, const RankWeights& w) {
    if (!(age_seconds >= 0.0)) throw std::invalid_argument("post_importance: age must be >= 0");
    return w.w_comments * static_cast<double>(counts.comments) + w.w_likes * static_cast<double>(counts.likes) +
           w.w_shares * static_cast<double>(counts.shares) + w.w_recency / (age_seconds + w.epsilon_seconds);
}

Feed build_feed(std::string_view user_id, std::span<const FeedCandidate> candidates, const PersonaProfile& profile,
                std::span<const FriendRank> ranks, const FilterSettings& settings, const RankWeights& w) {
    settings.validate();
    w.validate();
    const std::size_t K = profile.categories.size();
    if (profile.distribution.size() != K) throw std::invalid_argument("build_feed: malformed persona profile");

    std::map<std::string, double> delta;
    for (const auto& r : ranks)
        if (r.user_id == user_id) delta[r.friend_id] = r.delta;

    Feed feed;
    std::set<std::string> unknown_authors;
    const double focus_threshold = 1.0 / static_cast<double>(K) - 1e-12;
    for (const auto& c : candidates) {
        if (c.category >= K) throw std::invalid_argument("build_feed: candidate " + c.post_id + " has no category");
        if (settings.exclude_spam && c.rho == 0) continue;
        if (!filter_pass(c.sentiment, c.trend, settings.tau, settings)) continue;

        FeedItem item;
        item.post_id = c.post_id;
        item.author_id = c.author_id;
        item.category = c.category;
        item.sentiment = c.sentiment;
        item.trend = c.trend;
        item.filter_pass = true;
        item.importance = post_importance(c.counts, c.age_seconds, w);
        item.readability = readability_R(c.fk_grade, settings.max_grade);

        const double mass = profile.distribution[c.category];
        const bool whitelisted = settings.category_whitelist &&
                                 settings.category_whitelist->contains(profile.categories.name(c.category));
        item.general = !(mass >= focus_threshold || whitelisted);

        if (auto it = delta.find(c.author_id); it != delta.end()) item.friend_delta = it->second;
        else unknown_authors.insert(c.author_id);

        item.final_score = mass * item.friend_delta * item.importance * (0.5 + 0.5 * item.readability);
        if (item.general) item.final_score *= settings.general_post_factor;
        feed.items.push_back(std::move(item));
    }

    std::sort(feed.items.begin(), feed.items.end(), [](const FeedItem& a, const FeedItem& b) {
        if (a.final_score != b.final_score) return a.final_score > b.final_score;
        return a.post_id < b.post_id;
    });
    for (std::size_t i = 0; i < feed.items.size(); ++i) feed.items[i].rank = i + 1;
    for (const auto& a : unknown_authors) feed.warnings.push_back("no friend rank for author " + a + "; using 0");
    return feed;
}

}  // namespace fedfeed
