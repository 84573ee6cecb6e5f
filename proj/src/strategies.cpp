#include "noisy_search/strategies.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace noisy_search {

namespace {

// Queries need two distinct points whenever the dataset has two. When fewer
// points carry mass than the strategy wants, pad with the lowest unused
// indices; those points are known non-targets and only keep the query valid.
void pad_query(Query& q, std::size_t n) {
    const std::size_t want = std::min<std::size_t>(2, n);
    for (Index i = 0; q.size() < want && i < n; ++i) {
        if (!q.contains(i)) q.indices.push_back(i);
    }
}

void require_line(const Dataset& data, const char* who) {
    if (data.dimension() != 1) {
        throw SearchError(std::string(who) + " requires 1-D data");
    }
}

double range_mass(const Posterior& posterior, Index first, Index last) {
    const auto& c = posterior.cumulative();
    return c[last] - (first == 0 ? 0.0 : c[first - 1]);
}

}  // namespace

std::string_view to_string(StrategyKind kind) {
    switch (kind) {
        case StrategyKind::BinaryQuantile: return "binary-quantile";
        case StrategyKind::DBall: return "d-ball";
        case StrategyKind::KaryIntervals: return "kary-intervals";
        case StrategyKind::TopKFallback: return "topk";
        case StrategyKind::RandomBaseline: return "random";
        case StrategyKind::MedianBisection: return "median-bisection";
    }
    return "unknown";
}

StrategyKind parse_strategy(std::string_view name) {
    for (auto k : {StrategyKind::BinaryQuantile, StrategyKind::DBall, StrategyKind::KaryIntervals,
                   StrategyKind::TopKFallback, StrategyKind::RandomBaseline,
                   StrategyKind::MedianBisection}) {
        if (name == to_string(k)) return k;
    }
    throw SearchError("unknown strategy '" + std::string(name) + "'");
}

void check_strategy_compatible(StrategyKind kind, std::size_t dimension, std::size_t k) {
    if (k < 2) throw SearchError("queries need k >= 2");
    const bool needs_pair = kind == StrategyKind::BinaryQuantile ||
                            kind == StrategyKind::MedianBisection || kind == StrategyKind::DBall;
    const bool needs_line = kind == StrategyKind::BinaryQuantile ||
                            kind == StrategyKind::MedianBisection ||
                            kind == StrategyKind::KaryIntervals;
    if (needs_pair && k != 2) {
        throw SearchError(std::string(to_string(kind)) + " requires k = 2");
    }
    if (needs_line && dimension != 1) {
        throw SearchError(std::string(to_string(kind)) + " requires 1-D data");
    }
}

// ---------------------------------------------------------------------------

QuartileSplit quartile_split(const Dataset& data, const Posterior& posterior) {
    require_line(data, "binary-quantile");
    const std::size_t n = data.size();
    if (n < 2) throw SearchError("binary-quantile needs at least two data points");
    QuartileSplit s;
    s.cut[0] = 0;
    s.cut[4] = n - 1;
    for (std::size_t q = 1; q <= 3; ++q) {
        s.cut[q] = quantile_index(posterior, static_cast<double>(q) / 4.0);
    }
    for (std::size_t q = 0; q < 4; ++q) {
        s.length[q] = data.position(s.cut[q + 1]) - data.position(s.cut[q]);
        if (!(s.length[q] > 0.0)) s.degenerate = true;
        if (s.length[q] < s.length[s.smallest]) s.smallest = q;
    }
    // Neighbour of the smallest interval that touches neither end point.
    s.queried = (s.smallest == 0 || s.smallest == 2) ? 1 : 2;
    return s;
}

Query select_binary_quantile(const Dataset& data, const Posterior& posterior) {
    const QuartileSplit s = quartile_split(data, posterior);
    const Index lo = s.cut[s.queried];
    const Index hi = s.cut[s.queried + 1];
    if (lo != hi) return Query{lo, hi};

    // Zero-length interval: the heavy point plus its nearest distinct
    // neighbour, preferring neighbours that still carry mass.
    const std::size_t n = data.size();
    auto nearest = [&](bool need_mass) -> std::optional<Index> {
        std::optional<Index> best;
        double best_d = std::numeric_limits<double>::infinity();
        for (Index i = 0; i < n; ++i) {
            if (i == lo || (need_mass && !(posterior[i] > 0.0))) continue;
            const double d = data.distance(i, lo);
            if (d < best_d) {
                best_d = d;
                best = i;
            }
        }
        return best;
    };
    auto other = nearest(true);
    if (!other) other = nearest(false);
    return *other < lo ? Query{*other, lo} : Query{lo, *other};
}

// ---------------------------------------------------------------------------

double dball_mass_threshold(std::size_t dimension) {
    return 0.5 * std::pow(14.0 * static_cast<double>(dimension), -static_cast<double>(dimension));
}

BallIndex::BallIndex(const Dataset& data) : data_(data), n_(data.size()) {
    if (n_ > std::numeric_limits<std::uint32_t>::max()) {
        throw SearchError("dataset too large for the ball index");
    }
    order_.resize(n_ * n_);
    std::vector<double> dist(n_);
    for (Index c = 0; c < n_; ++c) {
        for (Index j = 0; j < n_; ++j) dist[j] = data.distance(c, j);
        auto row = order_.begin() + static_cast<std::ptrdiff_t>(c * n_);
        std::iota(row, row + static_cast<std::ptrdiff_t>(n_), 0u);
        std::stable_sort(row, row + static_cast<std::ptrdiff_t>(n_),
                         [&](std::uint32_t a, std::uint32_t b) { return dist[a] < dist[b]; });
    }
}

BallChoice BallIndex::select(const Posterior& posterior) const {
    if (posterior.size() != n_) throw SearchError("posterior/dataset size mismatch");
    if (n_ < 2) throw SearchError("d-ball needs at least two data points");
    const double threshold = dball_mass_threshold(data_.dimension());

    bool found = false;
    Index best_center = 0;
    double best_radius = std::numeric_limits<double>::infinity();
    double best_mass = 0.0;

    for (Index c = 0; c < n_; ++c) {
        if (!(posterior[c] > 0.0)) continue;
        const std::uint32_t* row = order_.data() + c * n_;
        double mass = 0.0;
        std::size_t m = 0;
        double radius = 0.0;
        bool reached = false;
        for (; m < n_; ++m) {
            radius = data_.distance(c, row[m]);
            if (radius > best_radius) break;
            mass += posterior[row[m]];
            if (mass >= threshold) {
                reached = true;
                break;
            }
        }
        if (!reached) continue;
        // Closed ball: take every point tied at the radius.
        for (std::size_t t = m + 1; t < n_ && data_.distance(c, row[t]) <= radius; ++t) {
            mass += posterior[row[t]];
        }
        if (!found || radius < best_radius || (radius == best_radius && mass > best_mass)) {
            found = true;
            best_center = c;
            best_radius = radius;
            best_mass = mass;
        }
    }

    BallChoice choice;
    if (!found) {
        // Rounding can leave the threshold just out of reach on a tiny support.
        choice.query = select_topk_fallback(posterior, 2);
        pad_query(choice.query, n_);
        choice.fallback = true;
        return choice;
    }
    choice.center = best_center;
    choice.radius = best_radius;
    choice.ball_mass = best_mass;

    const std::uint32_t* row = order_.data() + best_center * n_;
    const double outer = 7.0 * best_radius;
    for (std::size_t t = 0; t < n_; ++t) {
        if (data_.distance(best_center, row[t]) > outer) {
            choice.query = Query{best_center, row[t]};
            return choice;
        }
    }
    choice.query = select_topk_fallback(posterior, 2);
    pad_query(choice.query, n_);
    choice.fallback = true;
    return choice;
}

Query select_dball(const Dataset& data, const Posterior& posterior) {
    return BallIndex(data).select(posterior).query;
}

bool SeparationReport::holds(double tol) const {
    return inner_ratio <= 1.0 / 3.0 + tol && outer_ratio >= 0.5 - tol;
}

SeparationReport check_separation(const Dataset& data, const BallChoice& choice) {
    SeparationReport rep;
    if (choice.fallback) return rep;
    const Index q1 = choice.query.indices[0];
    const Index q2 = choice.query.indices[1];
    for (Index x = 0; x < data.size(); ++x) {
        const double dc = data.distance(choice.center, x);
        const double d1 = data.distance(x, q1);
        const double d2 = data.distance(x, q2);
        if (dc <= choice.radius) {
            ++rep.inner_points;
            rep.inner_ratio = std::max(rep.inner_ratio, d1 / d2);
        } else if (dc > 7.0 * choice.radius && x != q2) {
            ++rep.outer_points;
            rep.outer_ratio = std::min(rep.outer_ratio, d1 / d2);
        }
    }
    return rep;
}

// ---------------------------------------------------------------------------

double kary_mass_threshold(std::size_t k) {
    return 1.0 / (14.0 * static_cast<double>(k) - 12.0);
}

bool IntervalSet::satisfies_constraints(const Dataset& data, double tol) const {
    for (std::size_t j = 0; j < intervals.size(); ++j) {
        const Interval& a = intervals[j];
        if (a.first > a.last || a.mass < min_mass - tol) return false;
        for (std::size_t m = j + 1; m < intervals.size(); ++m) {
            const Interval& b = intervals[m];
            if (!(a.last < b.first)) return false;
            const double gap = data.position(b.first) - data.position(a.last);
            const double len_a = data.position(a.last) - data.position(a.first);
            const double len_b = data.position(b.last) - data.position(b.first);
            if (gap < std::min(len_a, len_b) * (1.0 - tol)) return false;
        }
    }
    return true;
}

std::optional<IntervalSet> build_intervals(const Dataset& data, const Posterior& posterior,
                                           std::size_t k) {
    require_line(data, "kary-intervals");
    if (k < 2) throw SearchError("queries need k >= 2");
    const std::size_t n = data.size();
    IntervalSet set;
    set.min_mass = kary_mass_threshold(k);

    Index start = 0;
    std::optional<double> prev_end;
    double prev_len = 0.0;
    while (set.intervals.size() < k) {
        Index left = start;
        if (prev_end) {
            while (left < n && data.position(left) - *prev_end < prev_len) ++left;
        }
        if (left >= n) return std::nullopt;
        Index right = left;
        while (right < n && range_mass(posterior, left, right) < set.min_mass) ++right;
        if (right >= n) return std::nullopt;
        while (left < right && range_mass(posterior, left + 1, right) >= set.min_mass) ++left;

        set.intervals.push_back({left, right, range_mass(posterior, left, right)});
        prev_end = data.position(right);
        prev_len = data.position(right) - data.position(left);
        start = right + 1;
    }
    return set;
}

Query interval_endpoints(const Dataset& data, const Posterior& posterior,
                         const IntervalSet& set) {
    Query q;
    for (const Interval& iv : set.intervals) {
        if (iv.first == iv.last) {
            q.indices.push_back(iv.first);
            continue;
        }
        const double mid = 0.5 * (data.position(iv.first) + data.position(iv.last));
        double lower = 0.0;
        double upper = 0.0;
        for (Index i = iv.first; i <= iv.last; ++i) {
            if (data.position(i) <= mid) lower += posterior[i];
            if (data.position(i) >= mid) upper += posterior[i];
        }
        q.indices.push_back(lower >= upper ? iv.first : iv.last);
    }
    return q;
}

std::optional<Query> select_kary_intervals(const Dataset& data, const Posterior& posterior,
                                           std::size_t k, const UserModel& /*model*/) {
    auto set = build_intervals(data, posterior, k);
    if (!set) return std::nullopt;
    return interval_endpoints(data, posterior, *set);
}

std::vector<AnchoredPoint> anchored_points(const Dataset& data, const IntervalSet& set,
                                           const Query& query) {
    std::vector<AnchoredPoint> out;
    for (std::size_t j = 0; j < set.intervals.size(); ++j) {
        const Interval& iv = set.intervals[j];
        for (Index i = iv.first; i <= iv.last; ++i) {
            if (query.contains(i)) continue;
            const double own = data.distance(i, query.indices[j]);
            bool closest = true;
            for (std::size_t m = 0; m < query.size() && closest; ++m) {
                if (m != j && !(own < data.distance(i, query.indices[m]))) closest = false;
            }
            if (closest) out.push_back({i, j});
        }
    }
    return out;
}

// ---------------------------------------------------------------------------

Query select_topk_fallback(const Posterior& posterior, std::size_t k) {
    std::vector<Index> idx;
    for (Index i = 0; i < posterior.size(); ++i) {
        if (posterior[i] > 0.0) idx.push_back(i);
    }
    std::stable_sort(idx.begin(), idx.end(),
                     [&](Index a, Index b) { return posterior[a] > posterior[b]; });
    if (idx.size() > k) idx.resize(k);
    Query q{std::move(idx)};
    pad_query(q, posterior.size());
    return q;
}

Query select_random_baseline(const Dataset& data, const Posterior& posterior, std::size_t k,
                             Rng& rng) {
    if (posterior.size() != data.size()) throw SearchError("posterior/dataset size mismatch");
    std::vector<Index> pool;
    for (Index i = 0; i < posterior.size(); ++i) {
        if (posterior[i] > 0.0) pool.push_back(i);
    }
    if (pool.size() > k) {
        for (std::size_t j = 0; j < k; ++j) {
            std::uniform_int_distribution<std::size_t> pick(j, pool.size() - 1);
            std::swap(pool[j], pool[pick(rng)]);
        }
        pool.resize(k);
    }
    std::sort(pool.begin(), pool.end());
    Query q{std::move(pool)};
    pad_query(q, data.size());
    return q;
}

Query select_median_bisection(const Dataset& data, const Posterior& posterior) {
    require_line(data, "median-bisection");
    const std::size_t n = data.size();
    if (n < 2) throw SearchError("median-bisection needs at least two data points");
    const Index m = quantile_index(posterior, 0.5);
    return m + 1 < n ? Query{m, m + 1} : Query{n - 2, n - 1};
}

// ---------------------------------------------------------------------------

namespace {

class BinaryQuantileStrategy final : public Strategy {
public:
    explicit BinaryQuantileStrategy(const Dataset& d) : data_(d) {}
    StrategyKind kind() const noexcept override { return StrategyKind::BinaryQuantile; }
    Query select(const Posterior& p, Rng&) const override { return select_binary_quantile(data_, p); }

private:
    const Dataset& data_;
};

class DBallStrategy final : public Strategy {
public:
    explicit DBallStrategy(const Dataset& d) : index_(d) {}
    StrategyKind kind() const noexcept override { return StrategyKind::DBall; }
    Query select(const Posterior& p, Rng&) const override { return index_.select(p).query; }

private:
    BallIndex index_;
};

class KaryStrategy final : public Strategy {
public:
    KaryStrategy(const Dataset& d, std::size_t k, const UserModel& m) : data_(d), k_(k), model_(m) {}
    StrategyKind kind() const noexcept override { return StrategyKind::KaryIntervals; }
    Query select(const Posterior& p, Rng&) const override {
        if (auto q = select_kary_intervals(data_, p, k_, model_)) return *std::move(q);
        return select_topk_fallback(p, k_);
    }

private:
    const Dataset& data_;
    std::size_t k_;
    UserModel model_;
};

class TopKStrategy final : public Strategy {
public:
    explicit TopKStrategy(std::size_t k) : k_(k) {}
    StrategyKind kind() const noexcept override { return StrategyKind::TopKFallback; }
    Query select(const Posterior& p, Rng&) const override { return select_topk_fallback(p, k_); }

private:
    std::size_t k_;
};

class RandomStrategy final : public Strategy {
public:
    RandomStrategy(const Dataset& d, std::size_t k) : data_(d), k_(k) {}
    StrategyKind kind() const noexcept override { return StrategyKind::RandomBaseline; }
    Query select(const Posterior& p, Rng& rng) const override {
        return select_random_baseline(data_, p, k_, rng);
    }

private:
    const Dataset& data_;
    std::size_t k_;
};

class MedianStrategy final : public Strategy {
public:
    explicit MedianStrategy(const Dataset& d) : data_(d) {}
    StrategyKind kind() const noexcept override { return StrategyKind::MedianBisection; }
    Query select(const Posterior& p, Rng&) const override { return select_median_bisection(data_, p); }

private:
    const Dataset& data_;
};

}  // namespace

std::unique_ptr<Strategy> make_strategy(StrategyKind kind, const Dataset& data, std::size_t k,
                                        const UserModel& model) {
    check_strategy_compatible(kind, data.dimension(), k);
    switch (kind) {
        case StrategyKind::BinaryQuantile: return std::make_unique<BinaryQuantileStrategy>(data);
        case StrategyKind::DBall: return std::make_unique<DBallStrategy>(data);
        case StrategyKind::KaryIntervals: return std::make_unique<KaryStrategy>(data, k, model);
        case StrategyKind::TopKFallback: return std::make_unique<TopKStrategy>(k);
        case StrategyKind::RandomBaseline: return std::make_unique<RandomStrategy>(data, k);
        case StrategyKind::MedianBisection: return std::make_unique<MedianStrategy>(data);
    }
    throw SearchError("unknown strategy");
}

}  // namespace noisy_search
