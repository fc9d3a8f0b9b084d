#pragma once
// Feed construction: friend affinity, post importance with a recency term,
// the sentiment/trend filter, readability, persona-category focus and spam
// exclusion.

#include "fedfeed/persona.hpp"
#include "fedfeed/readability.hpp"
#include "fedfeed/types.hpp"

#include <optional>
#include <set>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace fedfeed {

struct FriendRank {
    std::string user_id;
    std::string friend_id;
    double delta = 0.0;

    bool operator==(const FriendRank&) const = default;
};

struct RankWeights {
    // friend rank
    double w_like = 1.0;
    double w_comment = 2.0;
    double w_share = 3.0;
    // post importance
    double w_comments = 2.0;
    double w_likes = 1.0;
    double w_shares = 3.0;
    double w_recency = 1.0;
    double epsilon_seconds = 3600.0;

    void validate() const;
};

struct FilterSettings {
    double tau = 0.0;
    bool exclude_negative = true;
    std::optional<std::set<std::string>> category_whitelist;
    bool exclude_spam = true;
    double max_grade = 18.0;
    Timestamp trend_window = 24 * 3600;
    double general_post_factor = 0.5;

    void validate() const;
};

/// A candidate post with everything build_feed needs precomputed.
struct FeedCandidate {
    std::string post_id;
    std::string author_id;
    std::size_t category = 0;
    EngagementCounts counts;
    double sentiment = 0.5;
    int rho = 1;
    double fk_grade = 0.0;
    double age_seconds = 0.0;
    double trend = 0.0;
};

struct FeedItem {
    std::string post_id;
    std::string author_id;
    std::size_t category = 0;
    double importance = 0.0;
    double friend_delta = 0.0;
    double readability = 0.0;
    double trend = 0.0;
    double sentiment = 0.5;
    bool filter_pass = false;
    bool general = false;
    double final_score = 0.0;
    std::size_t rank = 0;
};

struct Feed {
    std::vector<FeedItem> items;
    std::vector<std::string> warnings;
};

using PostAuthorIndex = std::unordered_map<std::string, std::string>;

// delta_i = w_l*L_i + w_c*C_i + w_sh*Sh_i over the user's own likes,
// comments and shares on posts authored by i. Sorted by friend_id; only
// authors the user engaged with appear. Events by other users, on the
// user's own posts, or on unknown posts are ignored.
std::vector<FriendRank> friend_rank(std::string_view user_id, std::span<const InteractionEvent> interactions,
                                    const PostAuthorIndex& authors, const RankWeights& w);

// Interactions on the post within [now - W, now] divided by
// (interactions within [now - 2W, now - W]) + 1.
double trend_score(std::string_view post_id, std::span<const InteractionEvent> interactions, Timestamp now,
                   Timestamp window);

// S > 0.5 (when exclude_negative) and T_trend > tau, both strict.
bool filter_pass(double sentiment, double trend, double tau, const FilterSettings& settings);

// w_C*comments + w_L*likes + w_S*shares + w_T / (age + epsilon).
double post_importance(const EngagementCounts& counts, double age_seconds, const RankWeights& w);

/// Ranks candidates for one viewer:
///   1. drop rho == 0 when exclude_spam;
///   2. drop filter_pass == false;
///   3. posts outside the persona's top categories (mass >= 1/K) and the
///      whitelist are kept as general posts, scaled by general_post_factor;
///   4. final = mass[category] * delta(author) * P * (0.5 + 0.5 R).
/// Sorted by final score descending, then post_id ascending. Authors
/// without a FriendRank get delta = 0 and a warning.
Feed build_feed(std::string_view user_id, std::span<const FeedCandidate> candidates, const PersonaProfile& profile,
                std::span<const FriendRank> ranks, const FilterSettings& settings, const RankWeights& w);

}  // namespace fedfeed
