#include "fedfeed/feedback.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace fedfeed {

void FeedbackPolicy::validate() const {
    if (!(eta > 0.0 && eta < 1.0)) throw std::invalid_argument("feedback eta must be in (0, 1)");
    if (!(floor > 0.0)) throw std::invalid_argument("feedback floor must be positive");
}

PersonaProfile apply_feedback(PersonaProfile profile, std::string_view category, Verdict verdict,
                              const FeedbackPolicy& policy, Timestamp at) {
    policy.validate();
    const auto k = profile.categories.index_of(category);
    if (k >= profile.categories.size() || k >= profile.beta.size())
        throw std::invalid_argument("apply_feedback: unknown category '" + std::string(category) + "'");

    if (std::accumulate(profile.beta.begin(), profile.beta.end(), 0.0) == 0.0)
        std::fill(profile.beta.begin(), profile.beta.end(), policy.floor);

    double& b = profile.beta[k];
    if (verdict == Verdict::like) b = b * (1.0 + policy.eta) + policy.floor;
    else b = std::min(b, std::max(b * (1.0 - policy.eta), policy.floor));

    profile.distribution = persona_distribution(profile.beta);
    profile.last_updated = std::max(profile.last_updated, at);
    return profile;
}

}  // namespace fedfeed
