#pragma once
// Value types shared by the scoring modules and the store.

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace fedfeed {

// Epoch seconds, UTC.
using Timestamp = std::int64_t;

enum class InteractionKind { like, share, comment, view, dislike };

std::string_view to_string(InteractionKind kind);
std::optional<InteractionKind> parse_interaction_kind(std::string_view s);

struct InteractionEvent {
    std::string user_id;
    std::string post_id;
    InteractionKind kind = InteractionKind::view;
    Timestamp timestamp = 0;
    std::optional<std::string> comment_text;

    bool operator==(const InteractionEvent&) const = default;
};

// Likes, shares and comments are the only kinds that carry engagement weight.
inline bool is_engagement(InteractionKind k) {
    return k == InteractionKind::like || k == InteractionKind::share || k == InteractionKind::comment;
}

struct EngagementCounts {
    std::uint64_t likes = 0;
    std::uint64_t shares = 0;
    std::uint64_t comments = 0;

    void add(InteractionKind k) {
        if (k == InteractionKind::like) ++likes;
        else if (k == InteractionKind::share) ++shares;
        else if (k == InteractionKind::comment) ++comments;
    }

    bool operator==(const EngagementCounts&) const = default;
};

/// Per-post scores derived from text and the serving model. A cache: always
/// recomputable, never persisted.
struct PostScores {
    std::vector<double> category_probs;
    std::size_t category = 0;
    double sentiment = 0.5;
    double fk_grade = 0.0;
    int rho = 0;
};

enum class Verdict { like, dislike };

std::string_view to_string(Verdict v);
std::optional<Verdict> parse_verdict(std::string_view s);

struct FeedbackEvent {
    std::string user_id;
    std::string post_id;
    Verdict verdict = Verdict::like;
    Timestamp timestamp = 0;

    bool operator==(const FeedbackEvent&) const = default;
};

}  // namespace fedfeed
