#include "fedfeed/feedback.hpp"
#include "fedfeed/filtering.hpp"
#include "support.hpp"

#include <doctest.h>

#include <cmath>

using namespace fedfeed;

namespace {

PersonaProfile profile(std::vector<double> beta) {
    PersonaProfile p;
    p.user_id = "u1";
    p.categories = CategorySet::first(beta.size());
    p.distribution = persona_distribution(beta);
    p.beta = std::move(beta);
    return p;
}

double score_of(const PersonaProfile& p, const FeedCandidate& c) {
    const std::vector<FeedCandidate> one = {c};
    const std::vector<FriendRank> ranks = {{"u1", c.author_id, 4.0}};
    return build_feed("u1", one, p, ranks, FilterSettings{}, RankWeights{}).items.at(0).final_score;
}

FeedCandidate post_in(std::size_t category) {
    FeedCandidate c;
    c.post_id = "p";
    c.author_id = "a";
    c.category = category;
    c.counts = {4, 1, 1};
    c.sentiment = 0.9;
    c.fk_grade = 5;
    c.age_seconds = 600;
    c.trend = 1.5;
    return c;
}

}  // namespace

TEST_CASE("like and dislike arithmetic") {
    const FeedbackPolicy policy;
    const auto liked = apply_feedback(profile({1.0, 1.0}), "news", Verdict::like, policy, 5);
    CHECK(liked.beta[0] == doctest::Approx(1.1 + 1e-6).epsilon(1e-15));
    CHECK(liked.beta[1] == 1.0);
    CHECK(liked.last_updated == 5);

    const auto both = apply_feedback(liked, "news", Verdict::dislike, policy, 6);
    CHECK(both.beta[0] == doctest::Approx((1.1 + 1e-6) * 0.9).epsilon(1e-15));

    // Repeated dislikes on the only nonzero category bottom out at the floor.
    auto floored = profile({1.0, 0.0});
    for (int i = 0; i < 200; ++i) floored = apply_feedback(floored, "news", Verdict::dislike, policy, 7);
    CHECK(floored.beta[0] == policy.floor);
    CHECK(floored.distribution[0] == 1.0);
    CHECK_NOTHROW(floored.check_invariants());

    // Dislike never lifts a category.
    const auto silent = apply_feedback(profile({0.0, 1.0}), "news", Verdict::dislike, policy, 8);
    CHECK(silent.beta[0] == 0.0);
}

TEST_CASE("feedback on a fresh profile starts from the floor") {
    const FeedbackPolicy policy;
    const auto disliked = apply_feedback(profile({0, 0, 0, 0}), "sports", Verdict::dislike, policy, 1);
    for (double b : disliked.beta) CHECK(b == policy.floor);
    for (double d : disliked.distribution) CHECK(d == doctest::Approx(0.25));

    const auto liked = apply_feedback(profile({0, 0, 0, 0}), "sports", Verdict::like, policy, 1);
    CHECK(liked.distribution[3] > 0.25);
    CHECK_NOTHROW(liked.check_invariants());
}

TEST_CASE("feedback rejects bad input") {
    CHECK_THROWS_AS(apply_feedback(profile({1, 1}), "weather", Verdict::like, FeedbackPolicy{}, 0),
                    std::invalid_argument);
    FeedbackPolicy bad;
    bad.eta = 1.0;
    CHECK_THROWS(bad.validate());
    bad = {};
    bad.floor = 0.0;
    CHECK_THROWS(bad.validate());
}

TEST_CASE("like raises, dislike lowers, the target mass and its posts' scores") {
    testing::Gen g(1);
    const FeedbackPolicy policy;
    for (int trial = 0; trial < 500; ++trial) {
        std::vector<double> beta(4);
        for (auto& b : beta) b = g.uniform(0.05, 2.0);
        const auto before = profile(beta);
        const std::size_t k = static_cast<std::size_t>(g.integer(0, 3));
        const auto& name = before.categories.name(k);

        const auto liked = apply_feedback(before, name, Verdict::like, policy, 1);
        CHECK(liked.distribution[k] > before.distribution[k]);
        CHECK(score_of(liked, post_in(k)) > score_of(before, post_in(k)));

        const auto disliked = apply_feedback(before, name, Verdict::dislike, policy, 1);
        CHECK(disliked.distribution[k] < before.distribution[k]);
        CHECK(score_of(disliked, post_in(k)) < score_of(before, post_in(k)));
    }
}

TEST_CASE("profile invariants survive 10000 random feedback events") {
    testing::Gen g(2);
    const FeedbackPolicy policy;
    auto p = profile({0.3, 0.0, 1.2, 0.5, 0.0});
    for (int i = 0; i < 10000; ++i) {
        const std::size_t k = static_cast<std::size_t>(g.integer(0, 4));
        const auto verdict = g.coin(0.5) ? Verdict::like : Verdict::dislike;
        const double prior = p.distribution[k];
        const double prior_beta = p.beta[k];
        const bool others_positive = [&] {
            for (std::size_t j = 0; j < p.beta.size(); ++j)
                if (j != k && p.beta[j] > 0) return true;
            return false;
        }();
        const auto name = p.categories.name(k);
        p = apply_feedback(std::move(p), name, verdict, policy, i);
        REQUIRE_NOTHROW(p.check_invariants());
        double total = 0.0;
        for (std::size_t j = 0; j < p.beta.size(); ++j) {
            REQUIRE(p.beta[j] >= 0.0);
            REQUIRE(std::isfinite(p.beta[j]));
            total += p.distribution[j];
        }
        REQUIRE(std::abs(total - 1.0) <= 1e-9);
        if (verdict == Verdict::like || prior_beta >= policy.floor) REQUIRE(p.beta[k] >= policy.floor);
        if (verdict == Verdict::like && others_positive) REQUIRE(p.distribution[k] >= prior);
        if (verdict == Verdict::dislike) REQUIRE(p.distribution[k] <= prior);
    }
}
