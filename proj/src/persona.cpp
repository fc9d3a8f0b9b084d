#include "fedfeed/persona.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <stdexcept>

namespace fedfeed {

PersonaWeights::PersonaWeights(EngagementWeights engagement, double max_engagement, ScoreMix mix)
    : engagement_(engagement), max_engagement_(max_engagement), mix_(mix) {
    if (!(engagement_.likes >= 0 && engagement_.shares >= 0 && engagement_.comments >= 0))
        throw std::invalid_argument("engagement weights must be nonnegative");
    if (!(max_engagement_ > 0) || !std::isfinite(max_engagement_))
        throw std::invalid_argument("MaxE must be positive");
    if (!(mix_.engagement >= 0 && mix_.sentiment >= 0 && mix_.readability >= 0))
        throw std::invalid_argument("persona mix weights must be nonnegative");
    if (std::abs(mix_.engagement + mix_.sentiment + mix_.readability - 1.0) > 1e-9)
        throw std::invalid_argument("persona mix weights must sum to 1");
}

double PersonaProfile::mass(std::string_view category) const {
    const auto i = categories.index_of(category);
    if (i >= distribution.size()) throw std::invalid_argument("unknown category '" + std::string(category) + "'");
    return distribution[i];
}

void PersonaProfile::check_invariants() const {
    if (beta.size() != categories.size() || distribution.size() != categories.size())
        throw std::logic_error("persona: key sets differ from the category set");
    double sum = 0.0;
    for (std::size_t k = 0; k < beta.size(); ++k) {
        if (!(beta[k] >= 0.0) || !std::isfinite(beta[k])) throw std::logic_error("persona: negative beta");
        if (!(distribution[k] >= 0.0 && distribution[k] <= 1.0)) throw std::logic_error("persona: mass out of [0,1]");
        sum += distribution[k];
    }
    if (std::abs(sum - 1.0) > 1e-9) throw std::logic_error("persona: distribution does not sum to 1");
}

double engagement_score(const EngagementCounts& counts, const PersonaWeights& w) {
    const auto& e = w.engagement();
    const double raw = e.likes * static_cast<double>(counts.likes) + e.shares * static_cast<double>(counts.shares) +
                       e.comments * static_cast<double>(counts.comments);
    return std::clamp(raw / w.max_engagement(), 0.0, 1.0);
}

double sentiment_score(std::string_view text, const SentimentLexicon& lexicon) {
    double sum = 0.0;
    std::size_t n = 0;
    for (const auto& tok : tokenize(text)) {
        if (const double* p = lexicon.find(tok)) {
            sum += *p;
            ++n;
        }
    }
    if (n == 0) return 0.5;
    const double mean = sum / static_cast<double>(n);
    return std::clamp((mean + 1.0) / 2.0, 0.0, 1.0);
}

double persona_score(double engagement, double sentiment, int rho, const PersonaWeights& w) {
    const auto& m = w.mix();
    return m.engagement * engagement + m.sentiment * sentiment + m.readability * static_cast<double>(rho);
}

std::vector<double> persona_distribution(std::span<const double> beta) {
    double sum = 0.0;
    for (double b : beta) {
        if (!(b >= 0.0) || !std::isfinite(b)) throw std::invalid_argument("persona_distribution: beta must be >= 0");
        sum += b;
    }
    std::vector<double> out(beta.size(), beta.empty() ? 0.0 : 1.0 / static_cast<double>(beta.size()));
    if (sum > 0.0)
        for (std::size_t k = 0; k < beta.size(); ++k) out[k] = beta[k] / sum;
    return out;
}

PersonaProfile build_persona(std::string_view user_id, std::span<const InteractionEvent> interactions,
                             const PostScoresLookup& posts, const CategorySet& categories, const PersonaWeights& w) {
    const std::size_t K = categories.size();
    std::vector<EngagementCounts> counts(K);
    std::vector<std::set<std::string>> engaged(K);
    std::map<std::string, const PostScores*> seen;
    std::set<std::string> dangling;
    Timestamp last = 0;

    for (const auto& ev : interactions) {
        if (ev.user_id != user_id) continue;
        const PostScores* ps = posts(ev.post_id);
        if (ps == nullptr) {
            dangling.insert(ev.post_id);
            continue;
        }
        if (!is_engagement(ev.kind)) continue;
        if (ps->category >= K) throw std::invalid_argument("post " + ev.post_id + " has an out-of-range category");
        counts[ps->category].add(ev.kind);
        engaged[ps->category].insert(ev.post_id);
        seen.emplace(ev.post_id, ps);
        last = std::max(last, ev.timestamp);
    }
    if (!dangling.empty()) {
        std::string msg = "build_persona: interactions reference unknown posts:";
        for (const auto& id : dangling) msg += " " + id;
        throw std::invalid_argument(msg);
    }

    PersonaProfile profile{std::string(user_id), categories, std::vector<double>(K, 0.0), {}, last};
    for (std::size_t k = 0; k < K; ++k) {
        if (engaged[k].empty()) continue;
        double s_sum = 0.0;
        double rho_sum = 0.0;
        for (const auto& id : engaged[k]) {
            s_sum += seen.at(id)->sentiment;
            rho_sum += seen.at(id)->rho;
        }
        const double n = static_cast<double>(engaged[k].size());
        const int rho = static_cast<int>(std::clamp(std::lround(rho_sum / n), 0L, 2L));
        profile.beta[k] = persona_score(engagement_score(counts[k], w), s_sum / n, rho, w);
    }
    profile.distribution = persona_distribution(profile.beta);
    return profile;
}

}  // namespace fedfeed
