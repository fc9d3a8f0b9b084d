#include "fedfeed/pipeline.hpp"

#include <algorithm>

namespace fedfeed {

using nlohmann::ordered_json;

Pipeline::Pipeline(Config config) : config_(std::move(config)) {
    config_.validate();
    lexicon_ = config_.lexicon_path
                   ? std::make_shared<const SentimentLexicon>(SentimentLexicon::load(*config_.lexicon_path))
                   : std::shared_ptr<const SentimentLexicon>(&SentimentLexicon::bundled(), [](const auto*) {});
    words_ = config_.common_words_path
                 ? std::make_shared<const WordList>(WordList::load(*config_.common_words_path))
                 : std::shared_ptr<const WordList>(&WordList::bundled(), [](const auto*) {});
}

PostScores Pipeline::score_text(const ModelParams& params, std::string_view text) const {
    PostScores s;
    const auto probs = predict_category(params, featurize(text, params.feature_dim()));
    s.category_probs.assign(probs.data(), probs.data() + probs.size());
    s.category = argmax(probs);
    s.sentiment = sentiment_score(text, *lexicon_);
    s.fk_grade = flesch_kincaid_grade(text);
    s.rho = category_readability(text, *words_, config_.readability);
    return s;
}

ScoreIndex Pipeline::scores(const StoreSnapshot& snap) const {
    const auto params = snap.model_params();
    ScoreIndex index;
    index.reserve(snap.posts.size());
    for (const auto& p : snap.posts) index.emplace(p.post_id, score_text(params, p.text));
    return index;
}

PersonaProfile Pipeline::persona(const StoreSnapshot& snap, std::string_view user_id) const {
    return persona(snap, scores(snap), user_id);
}

PersonaProfile Pipeline::persona(const StoreSnapshot& snap, const ScoreIndex& scores, std::string_view user_id) const {
    if (!snap.find_user(user_id)) throw NotFound("unknown user " + std::string(user_id));
    const PostScoresLookup lookup = [&](std::string_view id) -> const PostScores* {
        auto it = scores.find(std::string(id));
        return it == scores.end() ? nullptr : &it->second;
    };
    auto profile = build_persona(user_id, snap.interactions, lookup, snap.categories, config_.persona);
    for (const auto& fb : snap.feedback) {
        if (fb.user_id != user_id) continue;
        const auto* ps = lookup(fb.post_id);
        if (!ps) throw NotFound("feedback references unknown post " + fb.post_id);
        profile = apply_feedback(std::move(profile), snap.categories.name(ps->category), fb.verdict,
                                 config_.feedback, fb.timestamp);
    }
    return profile;
}

std::vector<FeedCandidate> Pipeline::candidates(const StoreSnapshot& snap, const ScoreIndex& scores,
                                                std::string_view user_id, Timestamp trend_window) const {
    const auto* user = snap.find_user(user_id);
    if (!user) throw NotFound("unknown user " + std::string(user_id));
    const Timestamp now = snap.logical_now();
    std::vector<FeedCandidate> out;
    for (const auto& p : snap.posts) {
        if (!user->friends.contains(p.author_id)) continue;
        const auto& s = scores.at(p.post_id);
        FeedCandidate c;
        c.post_id = p.post_id;
        c.author_id = p.author_id;
        c.category = s.category;
        c.counts = p.counts;
        c.sentiment = s.sentiment;
        c.rho = s.rho;
        c.fk_grade = s.fk_grade;
        c.age_seconds = static_cast<double>(std::max<Timestamp>(0, now - p.created_at));
        c.trend = trend_score(p.post_id, snap.interactions, now, trend_window);
        out.push_back(std::move(c));
    }
    return out;
}

namespace {

Feed feed_from(const Pipeline& pl, const StoreSnapshot& snap, const ScoreIndex& scores, std::string_view user_id,
               const FilterSettings& settings, PersonaProfile* persona_out = nullptr) {
    auto profile = pl.persona(snap, scores, user_id);
    auto cands = pl.candidates(snap, scores, user_id, settings.trend_window);
    PostAuthorIndex authors;
    for (const auto& p : snap.posts) authors.emplace(p.post_id, p.author_id);
    const auto ranks = friend_rank(user_id, snap.interactions, authors, pl.config().ranking);
    auto feed = build_feed(user_id, cands, profile, ranks, settings, pl.config().ranking);
    if (persona_out) *persona_out = std::move(profile);
    return feed;
}

ordered_json category_map(const CategorySet& cats, const std::vector<double>& values) {
    ordered_json j = ordered_json::object();
    for (std::size_t k = 0; k < cats.size(); ++k) j[cats.name(k)] = values.at(k);
    return j;
}

}  // namespace

Feed Pipeline::feed(const StoreSnapshot& snap, std::string_view user_id, const FilterSettings& settings) const {
    return feed_from(*this, snap, scores(snap), user_id, settings);
}

ordered_json Pipeline::feed_body(const StoreSnapshot& snap, std::string_view user_id, const FeedQuery& q) const {
    const auto sc = scores(snap);
    const auto feed = feed_from(*this, snap, sc, user_id, q.settings);
    ordered_json items = ordered_json::array();
    for (const auto& it : feed.items) {
        if (items.size() >= q.limit) break;
        const auto* post = snap.find_post(it.post_id);
        items.push_back({
            {"rank", it.rank},
            {"post_id", it.post_id},
            {"author_id", it.author_id},
            {"text", post->text},
            {"created_at", post->created_at},
            {"category", snap.categories.name(it.category)},
            {"general", it.general},
            {"importance", it.importance},
            {"friend_delta", it.friend_delta},
            {"readability", it.readability},
            {"trend", it.trend},
            {"sentiment", it.sentiment},
            {"filter_pass", it.filter_pass},
            {"final_score", it.final_score},
        });
    }
    return {
        {"user_id", std::string(user_id)},
        {"snapshot_version", snap.version},
        {"model_version", snap.model.version},
        {"now", snap.logical_now()},
        {"total", feed.items.size()},
        {"items", std::move(items)},
        {"warnings", feed.warnings},
    };
}

ordered_json Pipeline::persona_body(const StoreSnapshot& snap, std::string_view user_id) const {
    const auto profile = persona(snap, user_id);
    return {
        {"user_id", profile.user_id},
        {"beta", category_map(profile.categories, profile.beta)},
        {"distribution", category_map(profile.categories, profile.distribution)},
        {"last_updated", profile.last_updated},
        {"snapshot_version", snap.version},
        {"model_version", snap.model.version},
    };
}

ordered_json Pipeline::post_body(const StoreSnapshot& snap, const Post& post) const {
    const auto s = score_text(snap.model_params(), post.text);
    ordered_json j = {
        {"post_id", post.post_id},
        {"author_id", post.author_id},
        {"text", post.text},
        {"created_at", post.created_at},
        {"category", snap.categories.name(s.category)},
        {"category_probs", category_map(snap.categories, s.category_probs)},
        {"sentiment", s.sentiment},
        {"fk_grade", s.fk_grade},
        {"rho", s.rho},
        {"counts", {{"likes", post.counts.likes}, {"shares", post.counts.shares}, {"comments", post.counts.comments}}},
        {"model_version", snap.model.version},
    };
    if (post.label) j["label"] = *post.label;
    return j;
}

std::size_t client_for_user(std::string_view user_id, std::uint32_t num_clients) {
    return static_cast<std::size_t>(fnv1a64(user_id) % num_clients);
}

std::vector<Example> Pipeline::labeled_corpus(const StoreSnapshot& snap, std::vector<std::size_t>* author_assignment,
                                              std::uint32_t num_clients) const {
    std::vector<Example> corpus;
    if (author_assignment) author_assignment->clear();
    for (const auto& p : snap.posts) {
        if (!p.label) continue;
        corpus.push_back({featurize(p.text, snap.feature_dim), snap.categories.index_of(*p.label)});
        if (author_assignment) author_assignment->push_back(client_for_user(p.author_id, num_clients));
    }
    return corpus;
}

TrainingOutcome Pipeline::train(const StoreSnapshot& snap, const TrainConfig& cfg, const PartitionSpec& split) const {
    cfg.validate();
    PartitionSpec spec = split;
    std::vector<std::size_t> assignment;
    auto corpus = labeled_corpus(snap, &assignment, cfg.num_clients);
    if (corpus.empty()) throw std::invalid_argument("no labeled posts to train on");
    if (spec.kind == PartitionKind::explicit_assignment && spec.assignment.empty()) spec.assignment = std::move(assignment);

    std::optional<ModelParams> initial;
    if (snap.model.params) initial = *snap.model.params;
    auto sim = run_simulation(cfg, corpus, spec, static_cast<std::uint32_t>(snap.categories.size()), snap.feature_dim,
                              std::move(initial), snap.model.current_round + 1);
    return {std::move(sim.reports), std::move(sim.global), corpus.size()};
}

ordered_json round_report_json(const RoundReport& r) {
    return {
        {"round", r.round},
        {"client_losses", r.client_losses},
        {"eval_loss", r.eval_loss},
        {"eval_acc", r.eval_acc},
    };
}

}  // namespace fedfeed
