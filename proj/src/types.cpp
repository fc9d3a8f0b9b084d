#include "fedfeed/types.hpp"

namespace fedfeed {

std::string_view to_string(InteractionKind kind) {
    switch (kind) {
    case InteractionKind::like: return "like";
    case InteractionKind::share: return "share";
    case InteractionKind::comment: return "comment";
    case InteractionKind::view: return "view";
    case InteractionKind::dislike: return "dislike";
    }
    return "view";
}

std::optional<InteractionKind> parse_interaction_kind(std::string_view s) {
    if (s == "like") return InteractionKind::like;
    if (s == "share") return InteractionKind::share;
    if (s == "comment") return InteractionKind::comment;
    if (s == "view") return InteractionKind::view;
    if (s == "dislike") return InteractionKind::dislike;
    return std::nullopt;
}

std::string_view to_string(Verdict v) { return v == Verdict::like ? "like" : "dislike"; }

std::optional<Verdict> parse_verdict(std::string_view s) {
    if (s == "like") return Verdict::like;
    if (s == "dislike") return Verdict::dislike;
    return std::nullopt;
}

}  // namespace fedfeed
