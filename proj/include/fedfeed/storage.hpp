#pragma once
// Embedded store: users, friend graph, posts, interactions, feedback and the
// serving model, published as immutable snapshots by a single writer.
//
// JSONL ingest schemas (one object per line):
//   users.jsonl         {"user_id":"u1","friends":["u2","u3"]}
//   posts.jsonl         {"post_id":"p1","author_id":"u2","text":"...","created_at":1700000000}
//                       optional "category" carries a training label
//   interactions.jsonl  {"user_id":"u1","post_id":"p1","kind":"like","timestamp":1700000100}
//                       kind=comment may add "comment_text"
//
// State file: one JSON document with "version": 1. The model checkpoint sits
// next to it as <state>.model in the binary checkpoint format.

#include "fedfeed/model.hpp"
#include "fedfeed/types.hpp"

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace fedfeed {

inline constexpr int kStateVersion = 1;

// Validation failure in ingested or restored data. The message carries
// file:line (or document path) locations.
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct Post {
    std::string post_id;
    std::string author_id;
    std::string text;
    Timestamp created_at = 0;
    std::optional<std::string> label;
    EngagementCounts counts;  // recounted from interactions, never stored
};

struct UserRecord {
    std::string user_id;
    std::set<std::string> friends;
};

struct ModelState {
    std::shared_ptr<const ModelParams> params;  // null until first training
    std::uint64_t version = 0;
    std::uint32_t current_round = 0;
    double last_eval_acc = 0.0;
};

struct StoreSnapshot {
    std::uint64_t version = 0;
    CategorySet categories = CategorySet::defaults();
    std::uint32_t feature_dim = kDefaultFeatureDim;
    std::map<std::string, UserRecord> users;
    std::vector<Post> posts;
    std::unordered_map<std::string, std::size_t> post_index;
    std::vector<InteractionEvent> interactions;
    std::vector<FeedbackEvent> feedback;
    ModelState model;

    const Post* find_post(std::string_view id) const;
    const UserRecord* find_user(std::string_view id) const;
    // Latest timestamp anywhere in the store; the clock used for post age
    // and trend windows so that scoring is a function of the snapshot.
    Timestamp logical_now() const;
    // The serving parameters, or zeros before any training.
    ModelParams model_params() const;
    // True when every post's counters match its interaction events.
    bool counts_consistent() const;
};

struct IngestPaths {
    std::filesystem::path users;
    std::filesystem::path posts;
    std::filesystem::path interactions;
};

struct IngestCounts {
    std::size_t users = 0;
    std::size_t posts = 0;
    std::size_t interactions = 0;
};

class Store {
public:
    explicit Store(CategorySet categories = CategorySet::defaults(), std::uint32_t feature_dim = kDefaultFeatureDim);

    std::shared_ptr<const StoreSnapshot> snapshot() const;

    // Replaces users, posts and interactions; all-or-nothing. `now` bounds
    // post creation times.
    IngestCounts ingest(const IngestPaths& paths, std::optional<Timestamp> now = std::nullopt);

    // Fails with DataError on unknown author or empty text. Returns the
    // stored post with its assigned id.
    Post add_post(const std::string& author_id, const std::string& text, Timestamp created_at,
                  std::optional<std::string> label = std::nullopt);
    void add_interaction(InteractionEvent ev);
    void add_feedback(FeedbackEvent ev);
    void set_model(ModelParams params, std::uint32_t current_round, double last_eval_acc);

    void persist(const std::filesystem::path& path) const;
    // On any error the current state is left untouched.
    void restore(const std::filesystem::path& path);

    static std::filesystem::path checkpoint_path(const std::filesystem::path& state_path);

private:
    template <typename Fn>
    void write(Fn&& mutate);

    mutable std::mutex publish_mutex_;
    std::mutex writer_mutex_;
    std::shared_ptr<const StoreSnapshot> current_;
};

// Serialized state document for a snapshot (no model weights).
std::string serialize_state(const StoreSnapshot& snap, bool has_checkpoint);

}  // namespace fedfeed
