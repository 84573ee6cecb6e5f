#include "noisy_search/service.hpp"

#include <httplib.h>

namespace noisy_search {

using nlohmann::json;

namespace {

HttpReply error_reply(int status, const std::string& msg) {
    return {status, json{{"error", msg}}.dump()};
}

HttpReply json_reply(int status, const json& j) { return {status, j.dump()}; }

// Splits "/sessions/abc/answer" into {"sessions", "abc", "answer"}.
std::vector<std::string_view> split_path(std::string_view path) {
    std::vector<std::string_view> parts;
    std::size_t pos = 0;
    while (pos < path.size()) {
        while (pos < path.size() && path[pos] == '/') ++pos;
        const std::size_t end = path.find('/', pos);
        const std::size_t stop = end == std::string_view::npos ? path.size() : end;
        if (stop > pos) parts.push_back(path.substr(pos, stop - pos));
        pos = stop;
    }
    return parts;
}

json parse_body(std::string_view body) {
    try {
        return json::parse(body.empty() ? std::string_view("{}") : body);
    } catch (const json::parse_error& e) {
        throw SessionError(SessionError::Kind::BadRequest, std::string("malformed JSON: ") + e.what());
    }
}

std::optional<std::size_t> optional_round(const json& body) {
    if (!body.contains("round")) return std::nullopt;
    return body.at("round").get<std::size_t>();
}

}  // namespace

HttpReply SessionApi::handle(std::string_view method, std::string_view path, std::string_view body) {
    store_.evict_expired();
    const auto parts = split_path(path);
    if (parts.empty() || parts[0] != "sessions" || parts.size() > 3) {
        return error_reply(404, "no such resource");
    }
    try {
        if (parts.size() == 1) {
            if (method != "POST") return error_reply(405, "use POST /sessions");
            const SessionRequest req = parse_session_request(parse_body(body));
            auto session = store_.create(req);
            auto lk = session->lock();
            return json_reply(201, session->summary(true));
        }

        const std::string id(parts[1]);
        auto session = store_.find(id);
        if (!session) return error_reply(404, "unknown session '" + id + "'");

        if (parts.size() == 2) {
            if (method == "GET") {
                auto lk = session->lock();
                return json_reply(200, session->summary(true));
            }
            if (method == "DELETE") {
                store_.erase(id);
                return json_reply(200, {{"deleted", id}});
            }
            return error_reply(405, "use GET or DELETE on a session");
        }

        if (parts[2] != "answer") return error_reply(404, "no such resource");
        if (method != "POST") return error_reply(405, "use POST to answer");
        const json j = parse_body(body);
        if (!j.is_object()) return error_reply(400, "answer body must be a JSON object");
        auto lk = session->lock();
        try {
            const auto round = optional_round(j);
            if (j.value("found", false)) {
                session->found(round);
            } else if (j.contains("response")) {
                const auto r = j.at("response").get<long long>();
                if (r < 1) return error_reply(400, "response must be >= 1");
                session->answer(static_cast<std::size_t>(r - 1), round);
            } else {
                return error_reply(400, "answer needs 'response' or 'found'");
            }
        } catch (const json::exception& e) {
            return error_reply(400, std::string("invalid answer: ") + e.what());
        }
        return json_reply(200, session->summary(false));
    } catch (const SessionError& e) {
        return error_reply(e.http_status(), e.what());
    } catch (const SearchError& e) {
        return error_reply(400, e.what());
    }
}

// ---------------------------------------------------------------------------

struct SessionServer::Impl {
    explicit Impl(SessionStore& store) : api(store) {}
    SessionApi api;
    httplib::Server server;
};

SessionServer::SessionServer(SessionStore& store) : impl_(std::make_unique<Impl>(store)) {
    auto forward = [this](const httplib::Request& req, httplib::Response& res) {
        const HttpReply r = impl_->api.handle(req.method, req.path, req.body);
        res.status = r.status;
        res.set_content(r.body, "application/json");
    };
    impl_->server.Post(R"(/sessions.*)", forward);
    impl_->server.Get(R"(/sessions.*)", forward);
    impl_->server.Delete(R"(/sessions.*)", forward);
    impl_->server.set_default_headers({{"Access-Control-Allow-Origin", "*"}});
    impl_->server.Options(R"(/sessions.*)", [](const httplib::Request&, httplib::Response& res) {
        res.set_header("Access-Control-Allow-Methods", "GET, POST, DELETE, OPTIONS");
        res.set_header("Access-Control-Allow-Headers", "Content-Type");
        res.status = 204;
    });
}

SessionServer::~SessionServer() { stop(); }

int SessionServer::bind(const std::string& host, int port) {
    if (port == 0) return impl_->server.bind_to_any_port(host);
    return impl_->server.bind_to_port(host, port) ? port : -1;
}

bool SessionServer::listen_after_bind() { return impl_->server.listen_after_bind(); }

void SessionServer::stop() {
    if (impl_ && impl_->server.is_running()) impl_->server.stop();
}

bool SessionServer::running() const { return impl_->server.is_running(); }

}  // namespace noisy_search
