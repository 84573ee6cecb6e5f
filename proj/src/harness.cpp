#include "noisy_search/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <limits>
#include <thread>

#include "noisy_search/adversarial.hpp"
#include "noisy_search/feedback.hpp"
#include "noisy_search/stats.hpp"

namespace noisy_search {

std::string_view to_string(DatasetKind kind) {
    switch (kind) {
        case DatasetKind::UniformGrid: return "uniform-grid";
        case DatasetKind::Adversarial: return "adversarial";
        case DatasetKind::Explicit: return "explicit";
        case DatasetKind::RandomCube: return "random-cube";
    }
    return "unknown";
}

DatasetKind parse_dataset_kind(std::string_view name) {
    for (auto k : {DatasetKind::UniformGrid, DatasetKind::Adversarial, DatasetKind::Explicit,
                   DatasetKind::RandomCube}) {
        if (name == to_string(k)) return k;
    }
    throw SearchError("unknown dataset kind '" + std::string(name) + "'");
}

Dataset build_dataset(const DatasetSpec& spec, double theta, std::uint64_t seed) {
    switch (spec.kind) {
        case DatasetKind::UniformGrid:
            if (spec.dimension != 1) throw SearchError("uniform-grid datasets are 1-D");
            return Dataset::uniform_grid(spec.n, spec.spacing);
        case DatasetKind::Adversarial:
            if (spec.dimension != 1) throw SearchError("adversarial datasets are 1-D");
            return gen_adversarial_points(spec.n, theta).dataset();
        case DatasetKind::Explicit:
            return Dataset::points(spec.points, spec.norm_order);
        case DatasetKind::RandomCube: {
            if (spec.dimension < 1) throw SearchError("dimension must be >= 1");
            Rng rng(seed);
            std::uniform_real_distribution<double> unit(0.0, 1.0);
            std::vector<std::vector<double>> rows(spec.n, std::vector<double>(spec.dimension));
            for (auto& r : rows) {
                for (double& v : r) v = unit(rng);
            }
            if (spec.dimension == 1) {
                std::sort(rows.begin(), rows.end());
            }
            return Dataset::points(std::move(rows), spec.norm_order);
        }
    }
    throw SearchError("unknown dataset kind");
}

std::size_t default_max_queries(std::size_t n) {
    const double bits = std::ceil(std::log2(static_cast<double>(std::max<std::size_t>(n, 2))));
    return 50 * static_cast<std::size_t>(bits);
}

EpisodeResult simulate_episode(const Dataset& data, const Strategy& strategy,
                               const EpisodeSettings& settings, const RoundObserver& observer) {
    const std::size_t n = data.size();
    Rng rng(settings.seed);
    EpisodeResult res;

    if (settings.target) {
        if (*settings.target >= n) throw SearchError("target index out of range");
        res.target = *settings.target;
    } else {
        std::uniform_int_distribution<Index> pick(0, n - 1);
        res.target = pick(rng);
    }
    Posterior posterior = settings.prior ? *settings.prior : Posterior::uniform(n);
    if (posterior.size() != n) throw SearchError("prior/dataset size mismatch");
    res.initial_entropy = entropy(posterior);
    const std::size_t cap = settings.max_queries ? settings.max_queries : default_max_queries(n);

    try {
        for (std::size_t round = 1; round <= cap; ++round) {
            const Query query = strategy.select(posterior, rng);
            query.validate(n);
            if (observer) observer(RoundView{round, posterior, query, res.target});
            res.queries = round;
            if (query.contains(res.target)) {
                res.terminated = true;
                if (settings.record_transcript) res.transcript.push_back({query, std::nullopt});
                break;
            }
            const ResponseDistribution dist = response_probs(data, settings.user, query, res.target);
            const std::size_t r = sample_response(dist, rng);
            Posterior next = posterior_update(posterior, data, settings.algorithm, query, r);
            const double before = entropy(posterior);
            const double after = entropy(next);
            res.gains.push_back(before - after);
            posterior = std::move(next);
            if (settings.record_transcript) res.transcript.push_back({query, r});
        }
    } catch (const std::exception& e) {
        res.failed = true;
        res.failure = e.what();
    }
    res.final_entropy = entropy(posterior);
    return res;
}

EpisodeResult run_episode(const EpisodeConfig& config, const RoundObserver& observer) {
    const Dataset data = build_dataset(config.dataset, config.settings.user.theta, config.settings.seed);
    const auto strategy = make_strategy(config.strategy, data, config.k, config.settings.algorithm);
    return simulate_episode(data, *strategy, config.settings, observer);
}

// ---------------------------------------------------------------------------

std::vector<CellConfig> expand_cells(const ExperimentSpec& spec) {
    const GridAxes& g = spec.grid;
    std::vector<CellConfig> cells;
    for (DatasetKind ds : g.datasets)
        for (std::size_t n : g.n)
            for (std::size_t dim : g.dimension)
                for (StrategyKind st : g.strategies)
                    for (std::size_t k : g.k)
                        for (SimilarityFamily fam : g.families)
                            for (double tt : g.theta_true) {
                                auto emit = [&](double ta) {
                                    CellConfig c;
                                    c.dataset = ds;
                                    c.n = ds == DatasetKind::Explicit ? spec.points.size() : n;
                                    c.dimension = ds == DatasetKind::Explicit && !spec.points.empty()
                                                      ? spec.points.front().size()
                                                      : dim;
                                    c.norm_order = spec.norm_order;
                                    c.strategy = st;
                                    c.k = k;
                                    c.family = fam;
                                    c.theta_true = tt;
                                    c.theta_assumed = ta;
                                    c.max_queries = spec.max_queries ? spec.max_queries
                                                                     : default_max_queries(c.n);
                                    cells.push_back(c);
                                };
                                if (g.theta_assumed.empty()) {
                                    emit(tt);
                                } else {
                                    for (double ta : g.theta_assumed) emit(ta);
                                }
                            }
    return cells;
}

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

struct PreparedCell {
    std::unique_ptr<Dataset> data;
    std::unique_ptr<Strategy> strategy;
    std::string error;
};

std::vector<BoundReport> cell_bounds(const CellConfig& c, const Dataset& data) {
    std::vector<BoundReport> out;
    try {
        switch (c.strategy) {
            case StrategyKind::BinaryQuantile:
                if (c.family == SimilarityFamily::Polynomial) {
                    out.push_back(theorem1_bound(c.n, c.theta_true));
                }
                break;
            case StrategyKind::KaryIntervals:
                out.push_back(theorem4_trend(c.n, c.k, c.theta_true, data.min_gap()));
                break;
            case StrategyKind::DBall:
                out.push_back(theorem2_order(c.n, data.dimension()));
                break;
            default:
                break;
        }
        if (c.dataset == DatasetKind::Adversarial && c.k >= 3 && c.n > 2 * c.k) {
            const LowerBound lb = lower_bound_horizon(c.n, c.k);
            BoundReport r;
            r.name = "theorem3_lower";
            r.inputs = {{"n", static_cast<double>(c.n)},
                        {"k", static_cast<double>(c.k)},
                        {"horizon", lb.horizon}};
            r.value = lb.expected_queries;
            r.units = "queries";
            out.push_back(r);
        }
    } catch (const SearchError&) {
        // Bounds are informational; invalid ranges simply produce none.
    }
    return out;
}

}  // namespace

std::uint64_t episode_seed(std::uint64_t master, std::size_t cell, std::size_t episode) {
    std::uint64_t h = splitmix64(master);
    h = splitmix64(h ^ static_cast<std::uint64_t>(cell));
    h = splitmix64(h ^ static_cast<std::uint64_t>(episode));
    return h;
}

std::size_t worker_count() {
    if (const char* env = std::getenv("NOISY_SEARCH_THREADS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && v > 0) return static_cast<std::size_t>(v);
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

ExperimentResult run_experiment(const ExperimentSpec& spec) {
    if (spec.spec_version != 1) {
        throw SearchError("unsupported spec_version " + std::to_string(spec.spec_version));
    }
    if (spec.episodes < 1) throw SearchError("episodes per cell must be >= 1");
    const std::vector<CellConfig> cells = expand_cells(spec);

    ExperimentResult result;
    result.spec_version = spec.spec_version;
    result.master_seed = spec.master_seed;
    result.cells.resize(cells.size());

    std::vector<PreparedCell> prepared(cells.size());
    for (std::size_t c = 0; c < cells.size(); ++c) {
        const CellConfig& cfg = cells[c];
        result.cells[c].config = cfg;
        try {
            DatasetSpec ds;
            ds.kind = cfg.dataset;
            ds.n = cfg.n;
            ds.dimension = cfg.dimension;
            ds.norm_order = cfg.norm_order;
            ds.spacing = spec.spacing;
            ds.points = spec.points;
            const UserModel assumed(cfg.family, cfg.theta_assumed);
            UserModel(cfg.family, cfg.theta_true);
            prepared[c].data = std::make_unique<Dataset>(build_dataset(
                ds, cfg.theta_true, episode_seed(spec.master_seed, c, ~std::size_t{0})));
            prepared[c].strategy = make_strategy(cfg.strategy, *prepared[c].data, cfg.k, assumed);
            result.cells[c].bounds = cell_bounds(cfg, *prepared[c].data);
        } catch (const std::exception& e) {
            prepared[c].error = e.what();
        }
    }

    const std::size_t total = cells.size() * spec.episodes;
    std::vector<EpisodeResult> episodes(total);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t job = next++; job < total; job = next++) {
            const std::size_t c = job / spec.episodes;
            const std::size_t e = job % spec.episodes;
            if (!prepared[c].error.empty()) continue;
            const CellConfig& cfg = cells[c];
            EpisodeSettings s;
            s.user = UserModel(cfg.family, cfg.theta_true);
            s.algorithm = UserModel(cfg.family, cfg.theta_assumed);
            s.max_queries = cfg.max_queries;
            s.seed = episode_seed(spec.master_seed, c, e);
            episodes[job] = simulate_episode(*prepared[c].data, *prepared[c].strategy, s);
        }
    };
    const std::size_t threads = std::min(worker_count(), std::max<std::size_t>(total, 1));
    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }

    for (std::size_t c = 0; c < cells.size(); ++c) {
        CellResult& cell = result.cells[c];
        cell.episodes = spec.episodes;
        if (!prepared[c].error.empty()) {
            cell.failed = spec.episodes;
            cell.failure = prepared[c].error;
            continue;
        }
        std::vector<double> counts;
        double gain_sum = 0.0;
        std::size_t gain_rounds = 0;
        for (std::size_t e = 0; e < spec.episodes; ++e) {
            const EpisodeResult& ep = episodes[c * spec.episodes + e];
            EpisodeRecord rec;
            rec.target = ep.target;
            rec.queries = ep.queries;
            rec.terminated = ep.terminated;
            rec.failed = ep.failed;
            rec.failure = ep.failure;
            double g = 0.0;
            for (double v : ep.gains) g += v;
            rec.mean_gain = ep.gains.empty() ? 0.0 : g / static_cast<double>(ep.gains.size());
            if (ep.failed) {
                ++cell.failed;
                if (cell.failure.empty()) cell.failure = ep.failure;
            } else {
                gain_sum += g;
                gain_rounds += ep.gains.size();
                if (ep.terminated) {
                    ++cell.terminated;
                    counts.push_back(static_cast<double>(ep.queries));
                } else {
                    ++cell.non_terminated;
                    counts.push_back(static_cast<double>(cell.config.max_queries));
                }
            }
            if (spec.record_episodes) cell.records.push_back(std::move(rec));
        }
        const Summary s = summarize(counts);
        cell.mean = s.mean;
        cell.median = s.median;
        cell.p95 = s.p95;
        cell.stderr_ = s.stderr_;
        cell.mean_gain = gain_rounds ? gain_sum / static_cast<double>(gain_rounds) : 0.0;
    }
    return result;
}

ExperimentResult mismatch_sweep(const ExperimentSpec& base, std::vector<double> theta_grid) {
    if (base.grid.theta_true.size() != 1) {
        throw SearchError("mismatch sweep needs exactly one true theta");
    }
    const double truth = base.grid.theta_true.front();
    if (std::find(theta_grid.begin(), theta_grid.end(), truth) == theta_grid.end()) {
        theta_grid.push_back(truth);
    }
    std::sort(theta_grid.begin(), theta_grid.end());
    theta_grid.erase(std::unique(theta_grid.begin(), theta_grid.end()), theta_grid.end());
    ExperimentSpec spec = base;
    spec.grid.theta_assumed = std::move(theta_grid);
    return run_experiment(spec);
}

}  // namespace noisy_search
