#pragma once
// HTTP/JSON service over a Store.
//
//   GET  /api/feed/{user_id}?limit=N[&exclude_negative=bool][&categories=a,b][&tau=x]
//   POST /api/feedback        {"user_id","post_id","verdict":"like"|"dislike"[,"timestamp"]}
//   GET  /api/persona/{user_id}
//   POST /api/posts           {"author_id","text"[,"created_at"][,"category"]}
//   POST /api/interactions    {"user_id","post_id","kind"[,"timestamp"][,"comment_text"]}
//   POST /api/federated/round {"rounds"?}
//   GET  /api/federated/status
//
// Every non-2xx response body is one ApiError: {"code","message"[,"detail"]}
// with code in not_found | validation | conflict | internal.

#include "fedfeed/pipeline.hpp"
#include "fedfeed/storage.hpp"

#include <filesystem>
#include <memory>
#include <optional>
#include <string>

namespace fedfeed {

class Service {
public:
    Service(std::shared_ptr<const Pipeline> pipeline, std::shared_ptr<Store> store,
            std::optional<std::filesystem::path> state_path = std::nullopt);
    ~Service();

    Service(const Service&) = delete;
    Service& operator=(const Service&) = delete;

    // Binds and serves until stop(). Returns false if the bind fails.
    bool listen(const std::string& host, int port);
    // Binds to an ephemeral port and returns it (or -1); serve with run().
    int bind_any_port(const std::string& host = "127.0.0.1");
    bool run();
    void stop();
    bool wait_until_ready() const;

    // Writes the current state to state_path, if one was configured.
    void persist() const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace fedfeed
