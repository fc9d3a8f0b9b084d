#include "fedfeed/service.hpp"

#include <httplib.h>

#include <atomic>
#include <charconv>
#include <chrono>
#include <future>
#include <mutex>

namespace fedfeed {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

struct ApiError {
    int status;
    std::string code;
    std::string message;
    std::optional<ordered_json> detail;
};

void send_json(httplib::Response& res, int status, const ordered_json& body) {
    res.status = status;
    res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, const ApiError& e) {
    ordered_json body = {{"code", e.code}, {"message", e.message}};
    if (e.detail) body["detail"] = *e.detail;
    send_json(res, e.status, body);
}

ApiError not_found(std::string msg) { return {404, "not_found", std::move(msg), std::nullopt}; }
ApiError validation(std::string msg) { return {422, "validation", std::move(msg), std::nullopt}; }

json parse_body(const httplib::Request& req) {
    try {
        auto j = json::parse(req.body);
        if (!j.is_object()) throw validation("request body must be a JSON object");
        return j;
    } catch (const json::parse_error& e) {
        throw validation(std::string("malformed JSON body: ") + e.what());
    }
}

std::string required_string(const json& body, const char* key) {
    auto it = body.find(key);
    if (it == body.end() || !it->is_string()) throw validation(std::string("\"") + key + "\" must be a string");
    return it->get<std::string>();
}

std::optional<Timestamp> optional_time(const json& body, const char* key) {
    auto it = body.find(key);
    if (it == body.end() || it->is_null()) return std::nullopt;
    if (!it->is_number_integer()) throw validation(std::string("\"") + key + "\" must be integer epoch seconds");
    return it->get<Timestamp>();
}

std::optional<long long> parse_int(const std::string& s) {
    long long v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
    return v;
}

bool parse_bool(const std::string& name, const std::string& s) {
    if (s == "true" || s == "1") return true;
    if (s == "false" || s == "0") return false;
    throw validation("\"" + name + "\" must be true or false");
}

// The store's own clock; wall time only for an empty store.
Timestamp default_time(const StoreSnapshot& snap) {
    const auto t = snap.logical_now();
    if (t > 0) return t;
    return std::chrono::duration_cast<std::chrono::seconds>(std::chrono::system_clock::now().time_since_epoch()).count();
}

}  // namespace

struct Service::Impl {
    std::shared_ptr<const Pipeline> pipeline;
    std::shared_ptr<Store> store;
    std::optional<std::filesystem::path> state_path;
    httplib::Server server;
    std::atomic<bool> training{false};
    mutable std::mutex persist_mutex;

    void persist() const {
        if (!state_path) return;
        std::lock_guard lock(persist_mutex);
        store->persist(*state_path);
    }

    template <typename Fn>
    httplib::Server::Handler guarded(Fn fn) {
        return [fn = std::move(fn)](const httplib::Request& req, httplib::Response& res) {
            try {
                fn(req, res);
            } catch (const ApiError& e) {
                send_error(res, e);
            } catch (const NotFound& e) {
                send_error(res, not_found(e.what()));
            } catch (const std::exception& e) {
                send_error(res, {500, "internal", e.what(), std::nullopt});
            }
        };
    }

    void routes() {
        const auto& cfg = pipeline->config();
        server.set_default_headers({{"Access-Control-Allow-Origin", cfg.cors_origin},
                                    {"Access-Control-Allow-Headers", "Content-Type"},
                                    {"Access-Control-Allow-Methods", "GET, POST, OPTIONS"}});
        server.Options(R"(/api/.*)", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });

        server.Get(R"(/api/feed/([^/]+))", guarded([this](const httplib::Request& req, httplib::Response& res) {
            const auto user = req.matches[1].str();
            FeedQuery q{pipeline->config().filter, 20};
            if (req.has_param("limit")) {
                const auto v = parse_int(req.get_param_value("limit"));
                if (!v || *v < 1 || *v > 200) throw validation("limit must be an integer in [1, 200]");
                q.limit = static_cast<std::size_t>(*v);
            }
            if (req.has_param("exclude_negative"))
                q.settings.exclude_negative = parse_bool("exclude_negative", req.get_param_value("exclude_negative"));
            const auto snap = store->snapshot();
            if (req.has_param("categories")) {
                std::set<std::string> wl;
                std::string_view list = req.get_param_value("categories");
                while (!list.empty()) {
                    const auto comma = list.find(',');
                    const auto name = list.substr(0, comma);
                    if (!name.empty()) {
                        if (!snap->categories.contains(name))
                            throw validation("unknown category \"" + std::string(name) + "\"");
                        wl.emplace(name);
                    }
                    list = comma == std::string_view::npos ? std::string_view{} : list.substr(comma + 1);
                }
                q.settings.category_whitelist = std::move(wl);
            }
            if (req.has_param("tau")) {
                try {
                    q.settings.tau = std::stod(req.get_param_value("tau"));
                } catch (const std::exception&) {
                    throw validation("tau must be a number");
                }
            }
            if (!snap->find_user(user)) throw not_found("unknown user " + user);
            send_json(res, 200, pipeline->feed_body(*snap, user, q));
        }));

        server.Get(R"(/api/persona/([^/]+))", guarded([this](const httplib::Request& req, httplib::Response& res) {
            const auto user = req.matches[1].str();
            const auto snap = store->snapshot();
            if (!snap->find_user(user)) throw not_found("unknown user " + user);
            send_json(res, 200, pipeline->persona_body(*snap, user));
        }));

        server.Post("/api/feedback", guarded([this](const httplib::Request& req, httplib::Response& res) {
            const auto body = parse_body(req);
            FeedbackEvent ev;
            ev.user_id = required_string(body, "user_id");
            ev.post_id = required_string(body, "post_id");
            const auto verdict = required_string(body, "verdict");
            auto before = store->snapshot();
            if (!before->find_user(ev.user_id)) throw not_found("unknown user " + ev.user_id);
            if (!before->find_post(ev.post_id)) throw not_found("unknown post " + ev.post_id);
            const auto v = parse_verdict(verdict);
            if (!v) throw validation("verdict must be \"like\" or \"dislike\"");
            ev.verdict = *v;
            ev.timestamp = optional_time(body, "timestamp").value_or(default_time(*before));
            const auto prior = pipeline->persona(*before, ev.user_id);
            try {
                store->add_feedback(ev);
            } catch (const DataError& e) {
                throw not_found(e.what());
            }
            persist();
            const auto after = store->snapshot();
            const auto scores = pipeline->scores(*after);
            const auto profile = pipeline->persona(*after, scores, ev.user_id);
            ordered_json prev = ordered_json::object();
            ordered_json dist = ordered_json::object();
            for (std::size_t k = 0; k < profile.categories.size(); ++k) {
                prev[profile.categories.name(k)] = prior.distribution[k];
                dist[profile.categories.name(k)] = profile.distribution[k];
            }
            send_json(res, 200,
                      {{"user_id", ev.user_id},
                       {"post_id", ev.post_id},
                       {"verdict", to_string(ev.verdict)},
                       {"category", after->categories.name(scores.at(ev.post_id).category)},
                       {"previous_distribution", std::move(prev)},
                       {"distribution", std::move(dist)},
                       {"snapshot_version", after->version}});
        }));

        server.Post("/api/posts", guarded([this](const httplib::Request& req, httplib::Response& res) {
            const auto body = parse_body(req);
            const auto author = required_string(body, "author_id");
            const auto text = required_string(body, "text");
            const auto snap = store->snapshot();
            if (!snap->find_user(author)) throw not_found("unknown author " + author);
            if (text.empty()) throw validation("text must be nonempty");
            if (text.size() > 10000) throw validation("text exceeds 10000 characters");
            std::optional<std::string> label;
            if (auto it = body.find("category"); it != body.end() && !it->is_null()) {
                if (!it->is_string() || !snap->categories.contains(it->get<std::string>()))
                    throw validation("category must be one of the configured categories");
                label = it->get<std::string>();
            }
            const auto created = optional_time(body, "created_at").value_or(default_time(*snap));
            Post post;
            try {
                post = store->add_post(author, text, created, label);
            } catch (const DataError& e) {
                throw validation(e.what());
            }
            persist();
            send_json(res, 201, pipeline->post_body(*store->snapshot(), post));
        }));

        server.Post("/api/interactions", guarded([this](const httplib::Request& req, httplib::Response& res) {
            const auto body = parse_body(req);
            InteractionEvent ev;
            ev.user_id = required_string(body, "user_id");
            ev.post_id = required_string(body, "post_id");
            const auto kind = required_string(body, "kind");
            const auto snap = store->snapshot();
            if (!snap->find_user(ev.user_id)) throw not_found("unknown user " + ev.user_id);
            const auto* post = snap->find_post(ev.post_id);
            if (!post) throw not_found("unknown post " + ev.post_id);
            const auto k = parse_interaction_kind(kind);
            if (!k) throw validation("kind must be like, share, comment, view or dislike");
            ev.kind = *k;
            ev.timestamp = optional_time(body, "timestamp").value_or(std::max(default_time(*snap), post->created_at));
            if (auto it = body.find("comment_text"); it != body.end() && !it->is_null()) {
                if (!it->is_string()) throw validation("comment_text must be a string");
                ev.comment_text = it->get<std::string>();
            }
            try {
                store->add_interaction(ev);
            } catch (const DataError& e) {
                throw validation(e.what());
            }
            persist();
            ordered_json out = {{"user_id", ev.user_id},
                                {"post_id", ev.post_id},
                                {"kind", to_string(ev.kind)},
                                {"timestamp", ev.timestamp}};
            if (ev.comment_text) out["comment_text"] = *ev.comment_text;
            out["snapshot_version"] = store->snapshot()->version;
            send_json(res, 201, out);
        }));

        server.Post("/api/federated/round", guarded([this](const httplib::Request& req, httplib::Response& res) {
            TrainConfig cfg = pipeline->config().training;
            cfg.rounds = 1;
            if (!req.body.empty()) {
                const auto body = parse_body(req);
                if (auto it = body.find("rounds"); it != body.end() && !it->is_null()) {
                    if (!it->is_number_integer() || it->get<long long>() < 1 || it->get<long long>() > 10000)
                        throw validation("rounds must be an integer in [1, 10000]");
                    cfg.rounds = it->get<std::uint32_t>();
                }
            }
            if (training.exchange(true)) throw ApiError{409, "conflict", "a training run is already active", std::nullopt};
            struct Release {
                std::atomic<bool>& flag;
                ~Release() { flag = false; }
            } release{training};

            const auto snap = store->snapshot();
            PartitionSpec split{PartitionKind::explicit_assignment, {}, pipeline->config().holdout_fraction};
            auto worker = std::async(std::launch::async, [&] { return pipeline->train(*snap, cfg, split); });
            std::optional<TrainingOutcome> outcome;
            try {
                outcome.emplace(worker.get());
            } catch (const std::invalid_argument& e) {
                throw validation(e.what());
            }
            const auto& last = outcome->reports.back();
            store->set_model(std::move(outcome->global), last.round, last.eval_acc);
            persist();
            const auto after = store->snapshot();
            ordered_json reports = ordered_json::array();
            for (const auto& r : outcome->reports) reports.push_back(round_report_json(r));
            send_json(res, 200,
                      {{"reports", std::move(reports)},
                       {"model_version", after->model.version},
                       {"current_round", after->model.current_round}});
        }));

        server.Get("/api/federated/status", guarded([this](const httplib::Request&, httplib::Response& res) {
            const auto snap = store->snapshot();
            send_json(res, 200,
                      {{"current_round", snap->model.current_round},
                       {"last_eval_acc", snap->model.last_eval_acc},
                       {"model_version", snap->model.version},
                       {"running", training.load()}});
        }));

        server.set_error_handler([](const httplib::Request&, httplib::Response& res) {
            if (!res.body.empty()) return;
            if (res.status == 404) send_error(res, not_found("no such endpoint"));
            else if (res.status >= 400) send_error(res, {res.status, "validation", "bad request", std::nullopt});
        });
        server.set_exception_handler([](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
            std::string what = "unhandled error";
            try {
                std::rethrow_exception(ep);
            } catch (const std::exception& e) {
                what = e.what();
            } catch (...) {
            }
            send_error(res, {500, "internal", what, std::nullopt});
        });
    }
};

Service::Service(std::shared_ptr<const Pipeline> pipeline, std::shared_ptr<Store> store,
                 std::optional<std::filesystem::path> state_path)
    : impl_(std::make_unique<Impl>()) {
    impl_->pipeline = std::move(pipeline);
    impl_->store = std::move(store);
    impl_->state_path = std::move(state_path);
    impl_->routes();
}

Service::~Service() { stop(); }

bool Service::listen(const std::string& host, int port) { return impl_->server.listen(host, port); }

int Service::bind_any_port(const std::string& host) { return impl_->server.bind_to_any_port(host); }

bool Service::run() { return impl_->server.listen_after_bind(); }

void Service::stop() {
    if (impl_) impl_->server.stop();
}

bool Service::wait_until_ready() const {
    for (int i = 0; i < 500 && !impl_->server.is_running(); ++i)
        std::this_thread::sleep_for(std::chrono::milliseconds(10));
    return impl_->server.is_running();
}

void Service::persist() const { impl_->persist(); }

}  // namespace fedfeed
