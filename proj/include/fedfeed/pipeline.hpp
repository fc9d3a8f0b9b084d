#pragma once
// Glue between the store and the scoring modules: derives per-post scores
// from the serving model, materializes personas (history + replayed
// feedback), assembles feeds, and renders the JSON bodies shared by the CLI
// and the HTTP service.

#include "fedfeed/config.hpp"
#include "fedfeed/storage.hpp"

#include <json.hpp>

#include <memory>
#include <string>
#include <unordered_map>

namespace fedfeed {

using ScoreIndex = std::unordered_map<std::string, PostScores>;

// Raised for lookups of users or posts that are not in the snapshot.
class NotFound : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct FeedQuery {
    FilterSettings settings;
    std::size_t limit = 20;
};

struct TrainingOutcome {
    std::vector<RoundReport> reports;
    ModelParams global;
    std::size_t examples = 0;
};

class Pipeline {
public:
    explicit Pipeline(Config config);

    const Config& config() const { return config_; }
    const SentimentLexicon& lexicon() const { return *lexicon_; }
    const WordList& words() const { return *words_; }

    PostScores score_text(const ModelParams& params, std::string_view text) const;
    // Scores for every post in the snapshot under its serving model.
    ScoreIndex scores(const StoreSnapshot& snap) const;

    PersonaProfile persona(const StoreSnapshot& snap, std::string_view user_id) const;
    PersonaProfile persona(const StoreSnapshot& snap, const ScoreIndex& scores, std::string_view user_id) const;
    // Posts authored by the user's friends, aged and trend-scored against
    // the snapshot's logical clock.
    std::vector<FeedCandidate> candidates(const StoreSnapshot& snap, const ScoreIndex& scores,
                                          std::string_view user_id, Timestamp trend_window) const;
    Feed feed(const StoreSnapshot& snap, std::string_view user_id, const FilterSettings& settings) const;

    nlohmann::ordered_json feed_body(const StoreSnapshot& snap, std::string_view user_id, const FeedQuery& q) const;
    nlohmann::ordered_json persona_body(const StoreSnapshot& snap, std::string_view user_id) const;
    nlohmann::ordered_json post_body(const StoreSnapshot& snap, const Post& post) const;

    // Labeled posts as examples, with clients assigned by author hash.
    std::vector<Example> labeled_corpus(const StoreSnapshot& snap, std::vector<std::size_t>* author_assignment,
                                        std::uint32_t num_clients) const;
    // Runs federated training on the store's labeled posts, continuing from
    // the serving model, and returns the new global parameters.
    TrainingOutcome train(const StoreSnapshot& snap, const TrainConfig& cfg, const PartitionSpec& split) const;

private:
    Config config_;
    std::shared_ptr<const SentimentLexicon> lexicon_;
    std::shared_ptr<const WordList> words_;
};

// Stable client index for a user: FNV-1a of the id modulo the client count.
std::size_t client_for_user(std::string_view user_id, std::uint32_t num_clients);

nlohmann::ordered_json round_report_json(const RoundReport& r);

}  // namespace fedfeed
