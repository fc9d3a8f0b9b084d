#pragma once
// Like/dislike feedback folded into a stored persona.

#include "fedfeed/persona.hpp"
#include "fedfeed/types.hpp"

#include <string_view>

namespace fedfeed {

struct FeedbackPolicy {
    double eta = 0.1;     // in (0, 1)
    double floor = 1e-6;  // > 0

    void validate() const;
};

/// Like:    beta_k <- beta_k * (1 + eta) + floor
/// Dislike: beta_k <- max(beta_k * (1 - eta), floor), never above beta_k
/// Other categories keep their beta; the distribution is renormalized. A
/// profile whose betas are all zero (the uniform fallback) is first seeded
/// with floor in every category, so a dislike never concentrates mass on
/// the disliked category.
PersonaProfile apply_feedback(PersonaProfile profile, std::string_view category, Verdict verdict,
                              const FeedbackPolicy& policy, Timestamp at);

}  // namespace fedfeed
