#include "fedfeed/storage.hpp"

#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <fstream>
#include <sstream>

namespace fedfeed {

using nlohmann::json;

namespace {

template <typename T>
struct Located {
    T value;
    std::string where;
};

struct RawData {
    std::vector<Located<UserRecord>> users;
    std::vector<Located<Post>> posts;
    std::vector<Located<InteractionEvent>> interactions;
    std::vector<Located<FeedbackEvent>> feedback;
};

Timestamp wall_now() {
    return std::chrono::duration_cast<std::chrono::seconds>(std::chrono::system_clock::now().time_since_epoch()).count();
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

const json& field(const json& obj, const char* name, const std::string& where) {
    auto it = obj.find(name);
    if (it == obj.end()) throw DataError(where + ": missing field \"" + name + "\"");
    return *it;
}

std::string string_field(const json& obj, const char* name, const std::string& where) {
    const auto& v = field(obj, name, where);
    if (!v.is_string()) throw DataError(where + ": field \"" + name + "\" must be a string");
    auto s = v.get<std::string>();
    if (s.empty() && std::string_view(name) != "text") throw DataError(where + ": field \"" + name + "\" is empty");
    return s;
}

Timestamp time_field(const json& obj, const char* name, const std::string& where) {
    const auto& v = field(obj, name, where);
    if (!v.is_number_integer()) throw DataError(where + ": field \"" + name + "\" must be an integer (epoch seconds)");
    return v.get<Timestamp>();
}

UserRecord parse_user(const json& j, const std::string& where) {
    if (!j.is_object()) throw DataError(where + ": expected a JSON object");
    UserRecord u{string_field(j, "user_id", where), {}};
    if (auto it = j.find("friends"); it != j.end()) {
        if (!it->is_array()) throw DataError(where + ": field \"friends\" must be an array");
        for (const auto& f : *it) {
            if (!f.is_string()) throw DataError(where + ": friend ids must be strings");
            u.friends.insert(f.get<std::string>());
        }
    }
    return u;
}

Post parse_post(const json& j, const std::string& where) {
    if (!j.is_object()) throw DataError(where + ": expected a JSON object");
    Post p;
    p.post_id = string_field(j, "post_id", where);
    p.author_id = string_field(j, "author_id", where);
    p.text = string_field(j, "text", where);
    p.created_at = time_field(j, "created_at", where);
    if (auto it = j.find("category"); it != j.end() && !it->is_null()) {
        if (!it->is_string()) throw DataError(where + ": field \"category\" must be a string");
        p.label = it->get<std::string>();
    }
    return p;
}

InteractionEvent parse_interaction(const json& j, const std::string& where) {
    if (!j.is_object()) throw DataError(where + ": expected a JSON object");
    InteractionEvent ev;
    ev.user_id = string_field(j, "user_id", where);
    ev.post_id = string_field(j, "post_id", where);
    const auto kind = string_field(j, "kind", where);
    auto k = parse_interaction_kind(kind);
    if (!k) throw DataError(where + ": unknown interaction kind \"" + kind + "\"");
    ev.kind = *k;
    ev.timestamp = time_field(j, "timestamp", where);
    if (auto it = j.find("comment_text"); it != j.end() && !it->is_null()) {
        if (ev.kind != InteractionKind::comment) throw DataError(where + ": comment_text is only valid on comments");
        if (!it->is_string()) throw DataError(where + ": field \"comment_text\" must be a string");
        ev.comment_text = it->get<std::string>();
    }
    return ev;
}

FeedbackEvent parse_feedback(const json& j, const std::string& where) {
    if (!j.is_object()) throw DataError(where + ": expected a JSON object");
    FeedbackEvent ev;
    ev.user_id = string_field(j, "user_id", where);
    ev.post_id = string_field(j, "post_id", where);
    const auto verdict = string_field(j, "verdict", where);
    auto v = parse_verdict(verdict);
    if (!v) throw DataError(where + ": unknown verdict \"" + verdict + "\"");
    ev.verdict = *v;
    ev.timestamp = time_field(j, "timestamp", where);
    return ev;
}

template <typename T, typename Parse>
std::vector<Located<T>> parse_jsonl(const std::filesystem::path& path, Parse parse) {
    const auto text = read_file(path);
    std::vector<Located<T>> out;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos < text.size()) {
        auto nl = text.find('\n', pos);
        if (nl == std::string::npos) nl = text.size();
        std::string_view line(text.data() + pos, nl - pos);
        pos = nl + 1;
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
        const auto where = path.string() + ":" + std::to_string(line_no);
        json j;
        try {
            j = json::parse(line);
        } catch (const json::parse_error& e) {
            throw DataError(where + ": malformed JSON (" + e.what() + ")");
        }
        out.push_back({parse(j, where), where});
    }
    return out;
}

class DanglingList {
public:
    void add(std::string msg) {
        ++total_;
        if (shown_.size() < 10) shown_.push_back(std::move(msg));
    }
    void raise_if_any() const {
        if (total_ == 0) return;
        std::string msg = "dangling references (" + std::to_string(total_) + "):";
        for (const auto& s : shown_) msg += "\n  " + s;
        if (total_ > shown_.size()) msg += "\n  ...";
        throw DataError(msg);
    }

private:
    std::size_t total_ = 0;
    std::vector<std::string> shown_;
};

// Validates cross references and assembles the record part of a snapshot.
void build_records(RawData raw, StoreSnapshot& snap, std::optional<Timestamp> now) {
    DanglingList dangling;
    std::map<std::string, std::string> user_where;
    for (auto& [u, where] : raw.users) {
        if (auto [it, fresh] = user_where.emplace(u.user_id, where); !fresh)
            throw DataError("duplicate user_id " + u.user_id + " at " + it->second + " and " + where);
        if (u.friends.contains(u.user_id)) throw DataError(where + ": user " + u.user_id + " lists itself as a friend");
    }
    std::map<std::string, UserRecord> users;
    for (auto& [u, where] : raw.users) users.emplace(u.user_id, u);
    for (const auto& [u, where] : raw.users)
        for (const auto& f : u.friends) {
            auto it = users.find(f);
            if (it == users.end()) dangling.add(where + ": friend " + f + " of " + u.user_id + " is not a user");
            else it->second.friends.insert(u.user_id);
        }

    std::vector<Post> posts;
    std::unordered_map<std::string, std::size_t> index;
    std::map<std::string, std::string> post_where;
    for (auto& [p, where] : raw.posts) {
        if (auto [it, fresh] = post_where.emplace(p.post_id, where); !fresh)
            throw DataError("duplicate post_id " + p.post_id + " at " + it->second + " and " + where);
        if (!users.contains(p.author_id)) dangling.add(where + ": author " + p.author_id + " is not a user");
        if (now && p.created_at > *now) throw DataError(where + ": created_at is in the future");
        if (p.label && !snap.categories.contains(*p.label))
            throw DataError(where + ": category \"" + *p.label + "\" is not in the category set");
        p.counts = {};
        index.emplace(p.post_id, posts.size());
        posts.push_back(std::move(p));
    }

    std::vector<InteractionEvent> interactions;
    for (auto& [ev, where] : raw.interactions) {
        if (!users.contains(ev.user_id)) dangling.add(where + ": user " + ev.user_id + " is not a user");
        auto it = index.find(ev.post_id);
        if (it == index.end()) {
            dangling.add(where + ": post " + ev.post_id + " does not exist");
            continue;
        }
        auto& post = posts[it->second];
        if (ev.timestamp < post.created_at)
            throw DataError(where + ": interaction precedes creation of post " + ev.post_id);
        post.counts.add(ev.kind);
        interactions.push_back(std::move(ev));
    }

    std::vector<FeedbackEvent> feedback;
    for (auto& [ev, where] : raw.feedback) {
        if (!users.contains(ev.user_id)) dangling.add(where + ": user " + ev.user_id + " is not a user");
        if (!index.contains(ev.post_id)) dangling.add(where + ": post " + ev.post_id + " does not exist");
        feedback.push_back(std::move(ev));
    }
    dangling.raise_if_any();

    snap.users = std::move(users);
    snap.posts = std::move(posts);
    snap.post_index = std::move(index);
    snap.interactions = std::move(interactions);
    snap.feedback = std::move(feedback);
}

void write_atomically(const std::filesystem::path& path, const void* data, std::size_t size) {
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write " + tmp.string());
        out.write(static_cast<const char*>(data), static_cast<std::streamsize>(size));
        if (!out) throw std::runtime_error("short write on " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

}  // namespace

const Post* StoreSnapshot::find_post(std::string_view id) const {
    auto it = post_index.find(std::string(id));
    return it == post_index.end() ? nullptr : &posts[it->second];
}

const UserRecord* StoreSnapshot::find_user(std::string_view id) const {
    auto it = users.find(std::string(id));
    return it == users.end() ? nullptr : &it->second;
}

Timestamp StoreSnapshot::logical_now() const {
    Timestamp t = 0;
    for (const auto& p : posts) t = std::max(t, p.created_at);
    for (const auto& ev : interactions) t = std::max(t, ev.timestamp);
    for (const auto& ev : feedback) t = std::max(t, ev.timestamp);
    return t;
}

ModelParams StoreSnapshot::model_params() const {
    if (model.params) return *model.params;
    return ModelParams(static_cast<std::uint32_t>(categories.size()), feature_dim);
}

bool StoreSnapshot::counts_consistent() const {
    std::unordered_map<std::string, EngagementCounts> recount;
    for (const auto& ev : interactions) recount[ev.post_id].add(ev.kind);
    return std::all_of(posts.begin(), posts.end(), [&](const Post& p) {
        auto it = recount.find(p.post_id);
        return p.counts == (it == recount.end() ? EngagementCounts{} : it->second);
    });
}

Store::Store(CategorySet categories, std::uint32_t feature_dim) {
    auto snap = std::make_shared<StoreSnapshot>();
    snap->categories = std::move(categories);
    snap->feature_dim = feature_dim;
    ModelParams(static_cast<std::uint32_t>(snap->categories.size()), feature_dim);  // validates dims
    current_ = std::move(snap);
}

std::shared_ptr<const StoreSnapshot> Store::snapshot() const {
    std::lock_guard lock(publish_mutex_);
    return current_;
}

template <typename Fn>
void Store::write(Fn&& mutate) {
    std::lock_guard writer(writer_mutex_);
    auto next = std::make_shared<StoreSnapshot>(*snapshot());
    mutate(*next);
    next->version += 1;
    std::lock_guard lock(publish_mutex_);
    current_ = std::move(next);
}

IngestCounts Store::ingest(const IngestPaths& paths, std::optional<Timestamp> now) {
    RawData raw;
    raw.users = parse_jsonl<UserRecord>(paths.users, parse_user);
    raw.posts = parse_jsonl<Post>(paths.posts, parse_post);
    raw.interactions = parse_jsonl<InteractionEvent>(paths.interactions, parse_interaction);
    IngestCounts counts{raw.users.size(), raw.posts.size(), raw.interactions.size()};
    write([&](StoreSnapshot& s) {
        StoreSnapshot fresh;
        fresh.categories = s.categories;
        fresh.feature_dim = s.feature_dim;
        build_records(std::move(raw), fresh, now.value_or(wall_now()));
        s.users = std::move(fresh.users);
        s.posts = std::move(fresh.posts);
        s.post_index = std::move(fresh.post_index);
        s.interactions = std::move(fresh.interactions);
        s.feedback.clear();
    });
    return counts;
}

Post Store::add_post(const std::string& author_id, const std::string& text, Timestamp created_at,
                     std::optional<std::string> label) {
    Post out;
    write([&](StoreSnapshot& s) {
        if (!s.find_user(author_id)) throw DataError("unknown author " + author_id);
        if (text.empty()) throw DataError("post text is empty");
        if (label && !s.categories.contains(*label)) throw DataError("unknown category " + *label);
        std::size_t n = s.posts.size() + 1;
        while (s.post_index.contains("p" + std::to_string(n))) ++n;
        out = Post{"p" + std::to_string(n), author_id, text, created_at, std::move(label), {}};
        s.post_index.emplace(out.post_id, s.posts.size());
        s.posts.push_back(out);
    });
    return out;
}

void Store::add_interaction(InteractionEvent ev) {
    write([&](StoreSnapshot& s) {
        if (!s.find_user(ev.user_id)) throw DataError("unknown user " + ev.user_id);
        auto it = s.post_index.find(ev.post_id);
        if (it == s.post_index.end()) throw DataError("unknown post " + ev.post_id);
        auto& post = s.posts[it->second];
        if (ev.timestamp < post.created_at) throw DataError("interaction precedes creation of post " + ev.post_id);
        if (ev.comment_text && ev.kind != InteractionKind::comment)
            throw DataError("comment_text is only valid on comments");
        post.counts.add(ev.kind);
        s.interactions.push_back(std::move(ev));
    });
}

void Store::add_feedback(FeedbackEvent ev) {
    write([&](StoreSnapshot& s) {
        if (!s.find_user(ev.user_id)) throw DataError("unknown user " + ev.user_id);
        if (!s.find_post(ev.post_id)) throw DataError("unknown post " + ev.post_id);
        s.feedback.push_back(std::move(ev));
    });
}

void Store::set_model(ModelParams params, std::uint32_t current_round, double last_eval_acc) {
    write([&](StoreSnapshot& s) {
        if (params.num_categories() != s.categories.size() || params.feature_dim() != s.feature_dim)
            throw ContractViolation("model dimensions do not match the store");
        s.model.params = std::make_shared<const ModelParams>(std::move(params));
        s.model.version += 1;
        s.model.current_round = current_round;
        s.model.last_eval_acc = last_eval_acc;
    });
}

std::filesystem::path Store::checkpoint_path(const std::filesystem::path& state_path) {
    auto p = state_path;
    p += ".model";
    return p;
}

std::string serialize_state(const StoreSnapshot& snap, bool has_checkpoint) {
    json users = json::array();
    for (const auto& [id, u] : snap.users) users.push_back({{"user_id", id}, {"friends", u.friends}});
    json posts = json::array();
    for (const auto& p : snap.posts) {
        json j = {{"post_id", p.post_id}, {"author_id", p.author_id}, {"text", p.text}, {"created_at", p.created_at}};
        if (p.label) j["category"] = *p.label;
        posts.push_back(std::move(j));
    }
    json interactions = json::array();
    for (const auto& ev : snap.interactions) {
        json j = {{"user_id", ev.user_id}, {"post_id", ev.post_id}, {"kind", to_string(ev.kind)},
                  {"timestamp", ev.timestamp}};
        if (ev.comment_text) j["comment_text"] = *ev.comment_text;
        interactions.push_back(std::move(j));
    }
    json feedback = json::array();
    for (const auto& ev : snap.feedback)
        feedback.push_back({{"user_id", ev.user_id}, {"post_id", ev.post_id}, {"verdict", to_string(ev.verdict)},
                            {"timestamp", ev.timestamp}});
    json doc = {
        {"version", kStateVersion},
        {"snapshot_version", snap.version},
        {"categories", snap.categories.names()},
        {"feature_dim", snap.feature_dim},
        {"users", std::move(users)},
        {"posts", std::move(posts)},
        {"interactions", std::move(interactions)},
        {"feedback", std::move(feedback)},
        {"model",
         {{"model_version", snap.model.version},
          {"current_round", snap.model.current_round},
          {"last_eval_acc", snap.model.last_eval_acc},
          {"has_checkpoint", has_checkpoint}}},
    };
    return doc.dump(1) + "\n";
}

void Store::persist(const std::filesystem::path& path) const {
    const auto snap = snapshot();
    const bool has_ckpt = static_cast<bool>(snap->model.params);
    if (has_ckpt) {
        const auto bytes = encode_checkpoint(*snap->model.params);
        write_atomically(checkpoint_path(path), bytes.data(), bytes.size());
    }
    const auto doc = serialize_state(*snap, has_ckpt);
    write_atomically(path, doc.data(), doc.size());
}

void Store::restore(const std::filesystem::path& path) {
    const auto text = read_file(path);
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw DataError(path.string() + ": corrupted state file (" + e.what() + ")");
    }
    try {
        if (!doc.is_object() || !doc.contains("version")) throw DataError(path.string() + ": missing state version");
        const auto version = doc.at("version");
        if (!version.is_number_integer() || version.get<int>() != kStateVersion)
            throw DataError(path.string() + ": unsupported state version " + version.dump() + " (expected " +
                            std::to_string(kStateVersion) + ")");

        auto next = std::make_shared<StoreSnapshot>();
        next->categories = CategorySet(doc.at("categories").get<std::vector<std::string>>());
        next->feature_dim = doc.at("feature_dim").get<std::uint32_t>();
        next->version = doc.at("snapshot_version").get<std::uint64_t>();

        RawData raw;
        const auto where = [&](const char* section, std::size_t i) {
            return path.string() + ":" + section + "[" + std::to_string(i) + "]";
        };
        const auto& users = doc.at("users");
        for (std::size_t i = 0; i < users.size(); ++i) raw.users.push_back({parse_user(users[i], where("users", i)), where("users", i)});
        const auto& posts = doc.at("posts");
        for (std::size_t i = 0; i < posts.size(); ++i) raw.posts.push_back({parse_post(posts[i], where("posts", i)), where("posts", i)});
        const auto& inter = doc.at("interactions");
        for (std::size_t i = 0; i < inter.size(); ++i)
            raw.interactions.push_back({parse_interaction(inter[i], where("interactions", i)), where("interactions", i)});
        const auto& fb = doc.at("feedback");
        for (std::size_t i = 0; i < fb.size(); ++i)
            raw.feedback.push_back({parse_feedback(fb[i], where("feedback", i)), where("feedback", i)});
        build_records(std::move(raw), *next, std::nullopt);

        const auto& m = doc.at("model");
        next->model.version = m.at("model_version").get<std::uint64_t>();
        next->model.current_round = m.at("current_round").get<std::uint32_t>();
        next->model.last_eval_acc = m.at("last_eval_acc").get<double>();
        if (m.at("has_checkpoint").get<bool>()) {
            auto params = read_checkpoint(checkpoint_path(path));
            if (params.num_categories() != next->categories.size() || params.feature_dim() != next->feature_dim)
                throw DataError(path.string() + ": checkpoint dimensions do not match the state");
            next->model.params = std::make_shared<const ModelParams>(std::move(params));
        }

        std::lock_guard writer(writer_mutex_);
        std::lock_guard lock(publish_mutex_);
        current_ = std::move(next);
    } catch (const json::exception& e) {
        throw DataError(path.string() + ": corrupted state file (" + e.what() + ")");
    } catch (const std::invalid_argument& e) {
        throw DataError(path.string() + ": " + e.what());
    } catch (const ContractViolation& e) {
        throw DataError(path.string() + ": " + e.what());
    } catch (const std::runtime_error& e) {
        if (dynamic_cast<const DataError*>(&e)) throw;
        throw DataError(path.string() + ": " + e.what());
    }
}

}  // namespace fedfeed
