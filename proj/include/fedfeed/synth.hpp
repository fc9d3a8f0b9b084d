#pragma once
// Seeded synthetic social corpus: users on an Erdos-Renyi friend graph,
// labeled posts built from per-category vocabulary cores plus shared filler
// words, and interaction logs biased by planted per-user category
// preferences. Output is byte-identical for a given configuration.

#include "fedfeed/model.hpp"
#include "fedfeed/storage.hpp"

#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace fedfeed {

struct SynthConfig {
    std::uint32_t users = 40;
    std::uint32_t posts_per_user = 25;
    std::uint32_t categories = 4;  // at most 6
    std::uint64_t seed = 42;
    std::uint32_t interactions_per_user = 20;
    double friend_probability = 0.3;
    // Fraction of core (category) words among the non-sentiment words of a
    // sentence; the rest is shared filler.
    double core_fraction = 0.4;
    Timestamp base_time = 1700000000;

    void validate() const;
};

struct SynthCorpus {
    CategorySet categories;
    std::vector<UserRecord> users;
    std::vector<Post> posts;
    std::vector<InteractionEvent> interactions;
    std::map<std::string, std::vector<double>> planted;  // user -> category preference
};

const std::vector<std::string>& category_vocabulary(std::string_view category);

SynthCorpus synthesize(const SynthConfig& cfg);

// Writes users.jsonl, posts.jsonl, interactions.jsonl into dir.
IngestPaths write_corpus(const SynthCorpus& corpus, const std::filesystem::path& dir);

}  // namespace fedfeed
