#include "noisy_search/session.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <random>

namespace noisy_search {

using nlohmann::json;

namespace {

constexpr std::size_t kMaxPoints = 100000;
constexpr std::size_t kMaxBallPoints = 5000;
constexpr std::size_t kTopMasses = 256;
constexpr std::size_t kHistogramBuckets = 64;

[[noreturn]] void bad_request(const std::string& msg) {
    throw SessionError(SessionError::Kind::BadRequest, msg);
}

json position_json(const Dataset& data, Index i) {
    if (data.dimension() == 1) return data.position(i);
    const auto p = data.point(i);
    return json(std::vector<double>(p.begin(), p.end()));
}

json query_json(const Dataset& data, const Query& q) {
    json out = json::array();
    for (Index i : q.indices) {
        out.push_back({{"index", i + 1}, {"position", position_json(data, i)}});
    }
    return out;
}

}  // namespace

std::string_view to_string(SessionStatus s) {
    switch (s) {
        case SessionStatus::Active: return "active";
        case SessionStatus::Found: return "found";
        case SessionStatus::Exhausted: return "exhausted";
    }
    return "unknown";
}

int SessionError::http_status() const noexcept {
    switch (kind_) {
        case Kind::BadRequest: return 400;
        case Kind::NotFound: return 404;
        case Kind::Conflict: return 409;
    }
    return 500;
}

SessionRequest parse_session_request(const json& body) {
    if (!body.is_object()) bad_request("request body must be a JSON object");
    if (!body.contains("dataset")) bad_request("missing 'dataset'");
    SessionRequest req;
    try {
        const json& ds = body.at("dataset");
        if (!ds.is_object()) bad_request("'dataset' must be an object");
        req.dataset.kind = parse_dataset_kind(ds.value("kind", std::string("uniform-grid")));
        if (req.dataset.kind == DatasetKind::Explicit) {
            for (const json& p : ds.at("points")) {
                req.dataset.points.push_back(p.is_array() ? p.get<std::vector<double>>()
                                                          : std::vector<double>{p.get<double>()});
            }
            req.dataset.n = req.dataset.points.size();
            req.dataset.dimension =
                req.dataset.points.empty() ? 1 : req.dataset.points.front().size();
        } else {
            req.dataset.n = ds.at("n").get<std::size_t>();
            req.dataset.dimension = ds.value("dimension", std::size_t{1});
        }
        req.dataset.spacing = ds.value("spacing", 1.0);
        if (ds.contains("norm_order")) {
            const json& p = ds.at("norm_order");
            req.dataset.norm_order = p.is_string() && p.get<std::string>() == "inf"
                                         ? std::numeric_limits<double>::infinity()
                                         : p.get<double>();
        }
        req.strategy = parse_strategy(body.value("strategy", std::string("binary-quantile")));
        req.k = body.value("k", std::size_t{2});
        req.model = UserModel(parse_family(body.value("family", std::string("polynomial"))),
                              body.value("theta", 1.0));
        req.max_queries = body.value("max_queries", std::size_t{0});
        req.seed = body.value("seed", std::uint64_t{1});
    } catch (const json::exception& e) {
        bad_request(std::string("invalid session request: ") + e.what());
    } catch (const SearchError& e) {
        bad_request(e.what());
    }
    if (req.dataset.n < 2) bad_request("dataset needs at least two points");
    if (req.dataset.n > kMaxPoints) bad_request("dataset larger than " + std::to_string(kMaxPoints));
    if (req.strategy == StrategyKind::DBall && req.dataset.n > kMaxBallPoints) {
        bad_request("d-ball sessions are limited to " + std::to_string(kMaxBallPoints) + " points");
    }
    if (req.k > req.dataset.n) bad_request("k exceeds the number of data points");
    try {
        check_strategy_compatible(req.strategy, req.dataset.dimension, req.k);
    } catch (const SearchError& e) {
        bad_request(e.what());
    }
    return req;
}

Session::Session(std::string id, const SessionRequest& request)
    : id_(std::move(id)),
      model_(request.model),
      k_(request.k),
      rng_(request.seed),
      posterior_(Posterior::uniform(std::max<std::size_t>(request.dataset.n, 1))),
      last_used_(std::chrono::steady_clock::now()) {
    try {
        data_ = std::make_unique<Dataset>(build_dataset(request.dataset, model_.theta, request.seed));
        strategy_ = make_strategy(request.strategy, *data_, k_, model_);
    } catch (const SearchError& e) {
        bad_request(e.what());
    }
    posterior_ = Posterior::uniform(data_->size());
    max_queries_ = request.max_queries ? request.max_queries : default_max_queries(data_->size());
    next_query();
}

void Session::next_query() { query_ = strategy_->select(posterior_, rng_); }

void Session::check_round(std::optional<std::size_t> expected) const {
    if (status_ != SessionStatus::Active) {
        throw SessionError(SessionError::Kind::Conflict,
                           "session is " + std::string(to_string(status_)));
    }
    if (expected && *expected != round_) {
        throw SessionError(SessionError::Kind::Conflict,
                           "round " + std::to_string(*expected) + " is not the current round (" +
                               std::to_string(round_) + ")");
    }
}

void Session::answer(std::size_t response, std::optional<std::size_t> expected_round) {
    check_round(expected_round);
    if (response >= query_.size()) {
        throw SessionError(SessionError::Kind::BadRequest,
                           "response must lie in 1.." + std::to_string(query_.size()));
    }
    history_.push_back({round_, query_, response, false, entropy(posterior_)});
    touch();
    try {
        posterior_ = posterior_update(posterior_, *data_, model_, query_, response);
    } catch (const SearchError& e) {
        status_ = SessionStatus::Exhausted;
        status_reason_ = e.what();
        return;
    }
    ++round_;
    if (round_ > max_queries_) {
        status_ = SessionStatus::Exhausted;
        status_reason_ = "query limit reached";
        return;
    }
    next_query();
}

void Session::found(std::optional<std::size_t> expected_round) {
    check_round(expected_round);
    history_.push_back({round_, query_, std::nullopt, true, entropy(posterior_)});
    status_ = SessionStatus::Found;
    touch();
}

json Session::summary(bool with_history) const {
    json s;
    s["id"] = id_;
    s["status"] = std::string(to_string(status_));
    if (!status_reason_.empty()) s["reason"] = status_reason_;
    s["round"] = round_;
    s["k"] = k_;
    s["family"] = std::string(to_string(model_.family));
    s["theta"] = model_.theta;
    s["n"] = data_->size();
    s["dimension"] = data_->dimension();
    s["max_queries"] = max_queries_;
    if (status_ == SessionStatus::Active) {
        s["query"] = query_json(*data_, query_);
    } else {
        s["query"] = json::array();
    }

    const auto& mass = posterior_.mass();
    std::vector<Index> order;
    for (Index i = 0; i < mass.size(); ++i) {
        if (mass[i] > 0.0) order.push_back(i);
    }
    const std::size_t support = order.size();
    const std::size_t top = std::min(kTopMasses, order.size());
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(top), order.end(),
                      [&](Index a, Index b) { return mass[a] > mass[b] || (mass[a] == mass[b] && a < b); });
    json top_json = json::array();
    for (std::size_t t = 0; t < top; ++t) {
        top_json.push_back({{"index", order[t] + 1}, {"mass", mass[order[t]]}});
    }
    const std::size_t buckets = std::min(kHistogramBuckets, mass.size());
    std::vector<double> hist(buckets, 0.0);
    for (Index i = 0; i < mass.size(); ++i) hist[i * buckets / mass.size()] += mass[i];
    s["posterior"] = {{"entropy", entropy(posterior_)},
                      {"support", support},
                      {"top", top_json},
                      {"histogram", hist}};

    if (with_history) {
        json h = json::array();
        for (const RoundRecord& r : history_) {
            json e;
            e["round"] = r.round;
            e["query"] = query_json(*data_, r.query);
            e["response"] = r.response ? json(*r.response + 1) : json(nullptr);
            e["found"] = r.found;
            e["entropy_before"] = r.entropy_before;
            h.push_back(std::move(e));
        }
        s["history"] = h;
    }
    return s;
}

// ---------------------------------------------------------------------------

SessionStore::SessionStore(std::chrono::seconds ttl) : ttl_(ttl), id_rng_(std::random_device{}()) {}

std::string SessionStore::next_id() {
    std::lock_guard lk(id_mutex_);
    char buf[40];
    std::snprintf(buf, sizeof buf, "%012llx%04llx",
                  static_cast<unsigned long long>(id_rng_() & 0xFFFFFFFFFFFFULL),
                  static_cast<unsigned long long>(++counter_ & 0xFFFF));
    return buf;
}

std::shared_ptr<Session> SessionStore::create(const SessionRequest& request) {
    auto session = std::make_shared<Session>(next_id(), request);
    std::unique_lock lk(mutex_);
    sessions_.emplace(session->id(), session);
    return session;
}

std::shared_ptr<Session> SessionStore::find(const std::string& id) const {
    std::shared_lock lk(mutex_);
    auto it = sessions_.find(id);
    return it == sessions_.end() ? nullptr : it->second;
}

bool SessionStore::erase(const std::string& id) {
    std::unique_lock lk(mutex_);
    return sessions_.erase(id) > 0;
}

std::size_t SessionStore::evict_expired(std::chrono::steady_clock::time_point now) {
    std::unique_lock lk(mutex_);
    std::size_t dropped = 0;
    for (auto it = sessions_.begin(); it != sessions_.end();) {
        std::chrono::steady_clock::time_point last;
        {
            auto slk = it->second->lock();
            last = it->second->last_used();
        }
        if (now - last > ttl_) {
            it = sessions_.erase(it);
            ++dropped;
        } else {
            ++it;
        }
    }
    return dropped;
}

std::size_t SessionStore::size() const {
    std::shared_lock lk(mutex_);
    return sessions_.size();
}

}  // namespace noisy_search
