#include <gtest/gtest.h>

#include <cmath>
#include <atomic>
#include <set>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "noisy_search/feedback.hpp"
#include "noisy_search/harness.hpp"
#include "noisy_search/service.hpp"
#include "noisy_search/stats.hpp"

using namespace noisy_search;
using nlohmann::json;

namespace {

json body(const HttpReply& r) { return json::parse(r.body); }

const char* kGrid64 = R"({"dataset": {"kind": "uniform-grid", "n": 64}})";

class ApiTest : public ::testing::Test {
protected:
    SessionStore store;
    SessionApi api{store};

    std::string create(const std::string& req = kGrid64) {
        const HttpReply r = api.handle("POST", "/sessions", req);
        EXPECT_EQ(r.status, 201) << r.body;
        return body(r).at("id").get<std::string>();
    }
};

}  // namespace

TEST_F(ApiTest, CreateReturnsFirstQuery) {
    const HttpReply r = api.handle("POST", "/sessions", kGrid64);
    ASSERT_EQ(r.status, 201);
    const json s = body(r);
    EXPECT_EQ(s.at("status"), "active");
    EXPECT_EQ(s.at("round"), 1);
    EXPECT_EQ(s.at("k"), 2);
    EXPECT_EQ(s.at("n"), 64);
    ASSERT_EQ(s.at("query").size(), 2u);
    for (const json& q : s.at("query")) {
        EXPECT_GE(q.at("index").get<int>(), 1);
        EXPECT_LE(q.at("index").get<int>(), 64);
    }
    EXPECT_DOUBLE_EQ(s.at("posterior").at("entropy").get<double>(), 6.0);
    EXPECT_EQ(s.at("posterior").at("support"), 64);
    EXPECT_EQ(s.at("posterior").at("histogram").size(), 64u);
    EXPECT_TRUE(s.at("history").empty());
}

TEST_F(ApiTest, DistinctIds) {
    std::set<std::string> ids;
    for (int i = 0; i < 20; ++i) ids.insert(create());
    EXPECT_EQ(ids.size(), 20u);
    EXPECT_EQ(store.size(), 20u);
}

TEST_F(ApiTest, MalformedCreateMakesNoSession) {
    EXPECT_EQ(api.handle("POST", "/sessions", "{not json").status, 400);
    EXPECT_EQ(api.handle("POST", "/sessions", "{}").status, 400);
    EXPECT_EQ(api.handle("POST", "/sessions", R"({"dataset": {"n": 1}})").status, 400);
    EXPECT_EQ(api.handle("POST", "/sessions", R"({"dataset": {"n": 64}, "strategy": "warp"})").status, 400);
    EXPECT_EQ(api.handle("POST", "/sessions", R"({"dataset": {"n": 64}, "k": 3})").status, 400);
    EXPECT_EQ(api.handle("POST", "/sessions", R"({"dataset": {"n": 64}, "theta": -1})").status, 400);
    EXPECT_EQ(api.handle("POST", "/sessions", R"({"dataset": {"n": 10, "dimension": 2, "kind": "random-cube"}})").status, 400);
    const json err = body(api.handle("POST", "/sessions", "{}"));
    EXPECT_TRUE(err.contains("error"));
    EXPECT_EQ(store.size(), 0u);
}

TEST_F(ApiTest, OptionsAreHonoured) {
    const HttpReply r = api.handle("POST", "/sessions",
                                   R"({"dataset": {"n": 100}, "strategy": "kary-intervals", "k": 4,
                                       "family": "exponential", "theta": 2})");
    ASSERT_EQ(r.status, 201) << r.body;
    const json s = body(r);
    EXPECT_EQ(s.at("k"), 4);
    EXPECT_EQ(s.at("family"), "exponential");
    EXPECT_DOUBLE_EQ(s.at("theta").get<double>(), 2.0);
    EXPECT_LE(s.at("query").size(), 4u);

    const HttpReply planar = api.handle("POST", "/sessions",
                                        R"({"dataset": {"kind": "explicit", "points": [[0,0],[1,0],[0,1],[3,3]]},
                                            "strategy": "d-ball"})");
    ASSERT_EQ(planar.status, 201) << planar.body;
    EXPECT_TRUE(body(planar).at("query")[0].at("position").is_array());
}

TEST_F(ApiTest, AnswerAdvancesRound) {
    const std::string id = create();
    const HttpReply r = api.handle("POST", "/sessions/" + id + "/answer", R"({"response": 1})");
    ASSERT_EQ(r.status, 200) << r.body;
    const json s = body(r);
    EXPECT_EQ(s.at("round"), 2);
    EXPECT_EQ(s.at("status"), "active");
    EXPECT_EQ(s.at("posterior").at("support"), 62);
    EXPECT_FALSE(s.contains("history"));

    const json full = body(api.handle("GET", "/sessions/" + id, ""));
    ASSERT_EQ(full.at("history").size(), 1u);
    EXPECT_EQ(full.at("history")[0].at("response"), 1);
    EXPECT_EQ(full.at("history")[0].at("round"), 1);
}

TEST_F(ApiTest, BadResponseIsValidationError) {
    const std::string id = create();
    const std::string path = "/sessions/" + id + "/answer";
    EXPECT_EQ(api.handle("POST", path, R"({"response": 0})").status, 400);
    EXPECT_EQ(api.handle("POST", path, R"({"response": 3})").status, 400);
    EXPECT_EQ(api.handle("POST", path, R"({"response": "one"})").status, 400);
    EXPECT_EQ(api.handle("POST", path, R"({})").status, 400);
    EXPECT_EQ(api.handle("POST", path, "[1]").status, 400);
    EXPECT_EQ(body(api.handle("GET", "/sessions/" + id, "")).at("round"), 1);
}

TEST_F(ApiTest, ReplayedRoundConflicts) {
    const std::string id = create();
    const std::string path = "/sessions/" + id + "/answer";
    EXPECT_EQ(api.handle("POST", path, R"({"response": 2, "round": 1})").status, 200);
    const HttpReply again = api.handle("POST", path, R"({"response": 2, "round": 1})");
    EXPECT_EQ(again.status, 409);
    EXPECT_TRUE(body(again).contains("error"));
    EXPECT_EQ(api.handle("POST", path, R"({"response": 2, "round": 2})").status, 200);
}

TEST_F(ApiTest, FoundClosesSession) {
    const std::string id = create();
    const std::string path = "/sessions/" + id + "/answer";
    const HttpReply r = api.handle("POST", path, R"({"found": true})");
    ASSERT_EQ(r.status, 200);
    EXPECT_EQ(body(r).at("status"), "found");
    EXPECT_TRUE(body(r).at("query").empty());
    EXPECT_EQ(api.handle("POST", path, R"({"response": 1})").status, 409);
    EXPECT_EQ(api.handle("POST", path, R"({"found": true})").status, 409);
}

TEST_F(ApiTest, QueryLimitExhausts) {
    const std::string id = create(R"({"dataset": {"n": 1000}, "max_queries": 2})");
    const std::string path = "/sessions/" + id + "/answer";
    EXPECT_EQ(body(api.handle("POST", path, R"({"response": 1})")).at("status"), "active");
    const json s = body(api.handle("POST", path, R"({"response": 1})"));
    EXPECT_EQ(s.at("status"), "exhausted");
    EXPECT_EQ(api.handle("POST", path, R"({"response": 1})").status, 409);
}

TEST_F(ApiTest, UnknownAndDeleted) {
    EXPECT_EQ(api.handle("GET", "/sessions/nope", "").status, 404);
    EXPECT_EQ(api.handle("POST", "/sessions/nope/answer", R"({"response": 1})").status, 404);
    EXPECT_EQ(api.handle("GET", "/elsewhere", "").status, 404);
    const std::string id = create();
    EXPECT_EQ(api.handle("PUT", "/sessions/" + id, "").status, 405);
    EXPECT_EQ(api.handle("GET", "/sessions", "").status, 405);
    EXPECT_EQ(api.handle("DELETE", "/sessions/" + id, "").status, 200);
    EXPECT_EQ(api.handle("GET", "/sessions/" + id, "").status, 404);
    EXPECT_EQ(api.handle("DELETE", "/sessions/" + id, "").status, 404);
}

TEST(SessionStore, EvictsIdleSessions) {
    SessionStore store{std::chrono::seconds(60)};
    SessionRequest req;
    req.dataset.n = 16;
    auto a = store.create(req);
    auto b = store.create(req);
    const auto now = std::chrono::steady_clock::now();
    EXPECT_EQ(store.evict_expired(now), 0u);
    EXPECT_EQ(store.evict_expired(now + std::chrono::seconds(120)), 2u);
    EXPECT_EQ(store.size(), 0u);
    EXPECT_FALSE(store.find(a->id()));
}

TEST(SessionStore, ConcurrentCreateAndAnswer) {
    SessionStore store;
    SessionApi api(store);
    std::vector<std::thread> workers;
    std::atomic<int> ok{0};
    for (int t = 0; t < 4; ++t) {
        workers.emplace_back([&] {
            for (int i = 0; i < 10; ++i) {
                const json s = json::parse(api.handle("POST", "/sessions", kGrid64).body);
                const std::string id = s.at("id");
                for (int r = 0; r < 5; ++r) {
                    if (api.handle("POST", "/sessions/" + id + "/answer", R"({"response": 1})").status == 200) ++ok;
                }
            }
        });
    }
    for (auto& w : workers) w.join();
    EXPECT_EQ(store.size(), 40u);
    EXPECT_EQ(ok.load(), 200);
}

TEST(SessionStore, SameSessionAnswersSerialize) {
    SessionStore store;
    SessionApi api(store);
    const std::string id = json::parse(api.handle("POST", "/sessions", R"({"dataset": {"n": 4096}})").body).at("id");
    std::vector<std::thread> workers;
    std::atomic<int> ok{0};
    for (int t = 0; t < 8; ++t) {
        workers.emplace_back([&] {
            if (api.handle("POST", "/sessions/" + id + "/answer", R"({"response": 1, "round": 1})").status == 200) ++ok;
        });
    }
    for (auto& w : workers) w.join();
    EXPECT_EQ(ok.load(), 1);
    EXPECT_EQ(json::parse(api.handle("GET", "/sessions/" + id, "").body).at("round"), 2);
}

// --- over a real socket --------------------------------------------------------

class HttpTest : public ::testing::Test {
protected:
    void SetUp() override {
        port = server.bind("127.0.0.1", 0);
        ASSERT_GT(port, 0);
        thread = std::thread([this] { server.listen_after_bind(); });
        while (!server.running()) std::this_thread::sleep_for(std::chrono::milliseconds(1));
    }
    void TearDown() override {
        server.stop();
        if (thread.joinable()) thread.join();
    }

    SessionStore store;
    SessionServer server{store};
    std::thread thread;
    int port = 0;
};

TEST_F(HttpTest, RoundTrip) {
    httplib::Client cli("127.0.0.1", port);
    auto created = cli.Post("/sessions", kGrid64, "application/json");
    ASSERT_TRUE(created);
    EXPECT_EQ(created->status, 201);
    EXPECT_EQ(created->get_header_value("Access-Control-Allow-Origin"), "*");
    const std::string id = json::parse(created->body).at("id");

    auto answered = cli.Post(("/sessions/" + id + "/answer").c_str(), R"({"response": 2})", "application/json");
    ASSERT_TRUE(answered);
    EXPECT_EQ(answered->status, 200);
    EXPECT_EQ(json::parse(answered->body).at("round"), 2);

    auto state = cli.Get(("/sessions/" + id).c_str());
    ASSERT_TRUE(state);
    EXPECT_EQ(json::parse(state->body).at("history").size(), 1u);

    auto bad = cli.Post("/sessions", "nope", "application/json");
    ASSERT_TRUE(bad);
    EXPECT_EQ(bad->status, 400);
    EXPECT_TRUE(json::parse(bad->body).contains("error"));

    auto gone = cli.Delete(("/sessions/" + id).c_str());
    ASSERT_TRUE(gone);
    EXPECT_EQ(gone->status, 200);
    auto missing = cli.Get(("/sessions/" + id).c_str());
    ASSERT_TRUE(missing);
    EXPECT_EQ(missing->status, 404);

    auto preflight = cli.Options("/sessions");
    ASSERT_TRUE(preflight);
    EXPECT_EQ(preflight->status, 204);
}

// A scripted user answering over HTTP should need as many queries as the
// simulator does for the same configuration.
TEST_F(HttpTest, ScriptedClientMatchesSimulator) {
    const std::size_t sessions = 500;
    const std::size_t n = 64;
    const UserModel user(SimilarityFamily::Polynomial, 1.0);
    const Dataset data = Dataset::uniform_grid(n);
    httplib::Client cli("127.0.0.1", port);
    Rng rng(4242);
    std::uniform_int_distribution<Index> pick(0, n - 1);

    std::vector<double> counts;
    for (std::size_t s = 0; s < sessions; ++s) {
        const Index target = pick(rng);
        auto res = cli.Post("/sessions", kGrid64, "application/json");
        ASSERT_TRUE(res);
        json state = json::parse(res->body);
        const std::string path = "/sessions/" + state.at("id").get<std::string>() + "/answer";
        while (state.at("status") == "active") {
            Query q;
            for (const json& e : state.at("query")) q.indices.push_back(e.at("index").get<Index>() - 1);
            json answer;
            if (q.contains(target)) {
                answer["found"] = true;
            } else {
                answer["response"] = sample_response(response_probs(data, user, q, target), rng) + 1;
            }
            answer["round"] = state.at("round");
            auto step = cli.Post(path.c_str(), answer.dump(), "application/json");
            ASSERT_TRUE(step);
            ASSERT_EQ(step->status, 200) << step->body;
            const std::size_t round = state.at("round");
            state = json::parse(step->body);
            if (state.at("status") == "found") counts.push_back(static_cast<double>(round));
        }
        ASSERT_EQ(state.at("status"), "found");
    }

    ExperimentSpec spec;
    spec.episodes = sessions;
    spec.grid.n = {n};
    const ExperimentResult sim = run_experiment(spec);
    const Summary http = summarize(counts);
    const CellResult& cell = sim.cells.at(0);
    const double sigma = std::sqrt(http.stderr_ * http.stderr_ + cell.stderr_ * cell.stderr_);
    EXPECT_LE(std::abs(http.mean - cell.mean), 3 * sigma)
        << "http " << http.mean << " simulator " << cell.mean;
}
