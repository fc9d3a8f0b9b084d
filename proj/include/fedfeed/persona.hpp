#pragma once
// Per-category user persona: engagement E, sentiment S, category
// readability rho, the composite beta_k and the normalized distribution.

#include "fedfeed/lexicon.hpp"
#include "fedfeed/model.hpp"
#include "fedfeed/types.hpp"

#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace fedfeed {

struct EngagementWeights {
    double likes = 1.0;
    double shares = 3.0;
    double comments = 2.0;
};

struct ScoreMix {
    double engagement = 0.5;
    double sentiment = 0.3;
    double readability = 0.2;
};

/// Interaction weights, the MaxE normalizer, and the (w_E, w_S, w_rho) mix.
/// Validated on construction: weights nonnegative, MaxE > 0, mix sums to 1
/// within 1e-9.
class PersonaWeights {
public:
    PersonaWeights() : PersonaWeights(EngagementWeights{}, 100.0, ScoreMix{}) {}
    PersonaWeights(EngagementWeights engagement, double max_engagement, ScoreMix mix);

    const EngagementWeights& engagement() const { return engagement_; }
    double max_engagement() const { return max_engagement_; }
    const ScoreMix& mix() const { return mix_; }

private:
    EngagementWeights engagement_;
    double max_engagement_;
    ScoreMix mix_;
};

struct PersonaProfile {
    std::string user_id;
    CategorySet categories;
    std::vector<double> beta;          // aligned with categories
    std::vector<double> distribution;  // aligned with categories
    Timestamp last_updated = 0;

    double mass(std::string_view category) const;
    // Throws std::logic_error describing the first violated invariant.
    void check_invariants() const;
};

// clamp((w_l*likes + w_s*shares + w_c*comments) / MaxE, 0, 1)
double engagement_score(const EngagementCounts& counts, const PersonaWeights& w);

// Mean polarity p of lexicon tokens mapped to (p + 1) / 2; 0.5 when the
// text has no lexicon tokens.
double sentiment_score(std::string_view text, const SentimentLexicon& lexicon = SentimentLexicon::bundled());

// w_E*E + w_S*S + w_rho*rho, with rho left on its 0/1/2 scale.
double persona_score(double engagement, double sentiment, int rho, const PersonaWeights& w);

// beta_k / sum(beta); uniform 1/K when the sum is zero. Throws
// std::invalid_argument on negative or non-finite entries.
std::vector<double> persona_distribution(std::span<const double> beta);

// Looks up the derived scores of a post; nullptr when the post is unknown.
using PostScoresLookup = std::function<const PostScores*(std::string_view post_id)>;

/// Persona from the user's own history. Posts are grouped by predicted
/// category. Per category: E from the user's summed like/share/comment
/// counts, S the mean sentiment and rho the mean category readability
/// (rounded to 0/1/2) over the distinct posts engaged with. Categories with
/// no engagement get beta = 0. Views and dislikes are ignored.
///
/// Throws std::invalid_argument listing every dangling post id.
PersonaProfile build_persona(std::string_view user_id, std::span<const InteractionEvent> interactions,
                             const PostScoresLookup& posts, const CategorySet& categories, const PersonaWeights& w);

}  // namespace fedfeed
