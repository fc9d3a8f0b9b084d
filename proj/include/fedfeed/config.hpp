#pragma once
// Deployment configuration shared by the CLI and the service. Every field is
// optional in the JSON file; missing fields keep their defaults.
//
//   {
//     "categories": ["news", ...], "feature_dim": 4096,
//     "persona":  {"w_likes":1, "w_shares":3, "w_comments":2, "max_engagement":100,
//                  "w_engagement":0.5, "w_sentiment":0.3, "w_readability":0.2},
//     "ranking":  {"w_like":1, "w_comment":2, "w_share":3, "w_comments":2, "w_likes":1,
//                  "w_shares":3, "w_recency":1, "epsilon_seconds":3600},
//     "filter":   {"tau":0, "exclude_negative":true, "exclude_spam":true, "max_grade":18,
//                  "trend_window_seconds":86400, "general_post_factor":0.5},
//     "feedback": {"eta":0.1, "floor":1e-6},
//     "readability": {"professional_grade":12, "min_dictionary_ratio":0.5,
//                     "max_unterminated_tokens":40},
//     "training": {"learning_rate":0.1, "local_epochs":1, "batch_size":0, "rounds":1,
//                  "num_clients":4, "seed":42, "size_weighted":false, "participation":1,
//                  "holdout_fraction":0.2},
//     "lexicon_path": "...", "common_words_path": "...",
//     "port": 8080, "state_path": "...", "cors_origin": "*"
//   }
//
// Environment overrides: FEDFEED_PORT, FEDFEED_STATE_PATH, FEDFEED_CONFIG
// (the config file itself).

#include "fedfeed/federated.hpp"
#include "fedfeed/feedback.hpp"
#include "fedfeed/filtering.hpp"
#include "fedfeed/persona.hpp"
#include "fedfeed/readability.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

namespace fedfeed {

struct Config {
    CategorySet categories = CategorySet::defaults();
    std::uint32_t feature_dim = kDefaultFeatureDim;
    PersonaWeights persona;
    RankWeights ranking;
    FilterSettings filter;
    FeedbackPolicy feedback;
    ReadabilityRules readability;
    TrainConfig training;
    double holdout_fraction = 0.2;
    std::optional<std::filesystem::path> lexicon_path;
    std::optional<std::filesystem::path> common_words_path;
    std::uint16_t port = 8080;
    std::optional<std::filesystem::path> state_path;
    std::string cors_origin = "*";

    static Config parse(std::string_view json_text);
    static Config load(const std::filesystem::path& path);
    // FEDFEED_CONFIG selects the file (if set), then FEDFEED_PORT and
    // FEDFEED_STATE_PATH override individual fields.
    static Config from_environment(std::optional<std::filesystem::path> explicit_path = std::nullopt);

    void validate() const;
};

}  // namespace fedfeed
