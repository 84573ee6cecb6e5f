#pragma once

#include <memory>
#include <string>
#include <string_view>

#include "noisy_search/session.hpp"

namespace noisy_search {

struct HttpReply {
    int status = 200;
    std::string body;  // JSON
};

// JSON-over-HTTP routing for live sessions, independent of any socket layer:
//   POST   /sessions               create, returns summary + first query
//   GET    /sessions/{id}          summary with round history
//   POST   /sessions/{id}/answer   {"response": r} or {"found": true}, optional "round"
//   DELETE /sessions/{id}
// Errors are {"error": message} with 400 / 404 / 405 / 409.
class SessionApi {
public:
    explicit SessionApi(SessionStore& store) : store_(store) {}

    HttpReply handle(std::string_view method, std::string_view path, std::string_view body);

private:
    SessionStore& store_;
};

// cpp-httplib server bound to a SessionApi.
class SessionServer {
public:
    explicit SessionServer(SessionStore& store);
    ~SessionServer();

    // Binds to `port` (0 picks a free one) and returns the bound port, or -1.
    int bind(const std::string& host, int port);
    // Blocks serving requests until stop().
    bool listen_after_bind();
    void stop();
    bool running() const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace noisy_search
