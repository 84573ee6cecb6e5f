#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "noisy_search/analysis.hpp"
#include "noisy_search/dataset.hpp"
#include "noisy_search/posterior.hpp"
#include "noisy_search/strategies.hpp"

namespace noisy_search {

enum class DatasetKind { UniformGrid, Adversarial, Explicit, RandomCube };

std::string_view to_string(DatasetKind kind);
DatasetKind parse_dataset_kind(std::string_view name);

struct DatasetSpec {
    DatasetKind kind = DatasetKind::UniformGrid;
    std::size_t n = 64;
    std::size_t dimension = 1;
    double norm_order = 2.0;
    double spacing = 1.0;                       // uniform grid
    std::vector<std::vector<double>> points;    // explicit
};

// Adversarial points use `theta` as the recursion exponent; random cubes draw
// n points uniformly from [0,1]^D using `seed`.
Dataset build_dataset(const DatasetSpec& spec, double theta, std::uint64_t seed);

// Default episode cap: 50 * ceil(log2 n).
std::size_t default_max_queries(std::size_t n);

struct TranscriptEntry {
    Query query;
    std::optional<std::size_t> response;  // 0-based; empty on the terminating round
};

struct EpisodeResult {
    Index target = 0;
    std::size_t queries = 0;
    bool terminated = false;
    bool failed = false;
    std::string failure;
    double initial_entropy = 0.0;
    double final_entropy = 0.0;
    // Realized H(a_t) - H(a_{t+1}) for every non-terminating round.
    std::vector<double> gains;
    std::vector<TranscriptEntry> transcript;
};

struct EpisodeSettings {
    UserModel user;        // simulates responses (theta_true)
    UserModel algorithm;   // drives posterior updates (theta_assumed)
    std::size_t max_queries = 0;  // 0 -> default_max_queries(n)
    std::uint64_t seed = 0;
    std::optional<Index> target;        // uniform draw when empty
    std::optional<Posterior> prior;     // uniform when empty
    bool record_transcript = false;
};

// What an observer sees before the target check of each round.
struct RoundView {
    std::size_t round;  // 1-based
    const Posterior& posterior;
    const Query& query;
    Index target;
};
using RoundObserver = std::function<void(const RoundView&)>;

// One search: select, stop if the target was shown, else sample a response
// from `user` and update with `algorithm`. The same seed replays the same
// transcript.
EpisodeResult simulate_episode(const Dataset& data, const Strategy& strategy,
                               const EpisodeSettings& settings,
                               const RoundObserver& observer = {});

struct EpisodeConfig {
    DatasetSpec dataset;
    StrategyKind strategy = StrategyKind::BinaryQuantile;
    std::size_t k = 2;
    EpisodeSettings settings;
};

EpisodeResult run_episode(const EpisodeConfig& config, const RoundObserver& observer = {});

// ---------------------------------------------------------------------------

struct GridAxes {
    std::vector<DatasetKind> datasets{DatasetKind::UniformGrid};
    std::vector<std::size_t> n{64};
    std::vector<std::size_t> dimension{1};
    std::vector<StrategyKind> strategies{StrategyKind::BinaryQuantile};
    std::vector<std::size_t> k{2};
    std::vector<SimilarityFamily> families{SimilarityFamily::Polynomial};
    std::vector<double> theta_true{1.0};
    std::vector<double> theta_assumed;  // empty: use theta_true
};

struct ExperimentSpec {
    int spec_version = 1;
    std::uint64_t master_seed = 20110101;
    std::size_t episodes = 100;
    std::size_t max_queries = 0;  // 0 -> default per cell
    double norm_order = 2.0;
    double spacing = 1.0;
    std::vector<std::vector<double>> points;  // for explicit datasets
    bool record_episodes = false;
    GridAxes grid;
};

struct CellConfig {
    DatasetKind dataset = DatasetKind::UniformGrid;
    std::size_t n = 0;
    std::size_t dimension = 1;
    double norm_order = 2.0;
    StrategyKind strategy = StrategyKind::BinaryQuantile;
    std::size_t k = 2;
    SimilarityFamily family = SimilarityFamily::Polynomial;
    double theta_true = 1.0;
    double theta_assumed = 1.0;
    std::size_t max_queries = 0;
};

struct EpisodeRecord {
    Index target = 0;  // 0-based
    std::size_t queries = 0;
    bool terminated = false;
    bool failed = false;
    std::string failure;
    double mean_gain = 0.0;
};

struct CellResult {
    CellConfig config;
    std::size_t episodes = 0;
    std::size_t terminated = 0;
    std::size_t non_terminated = 0;
    std::size_t failed = 0;
    std::string failure;  // first failure cause, if any
    double mean = 0.0;
    double median = 0.0;
    double p95 = 0.0;
    double stderr_ = 0.0;
    double mean_gain = 0.0;  // realized bits per non-terminating round
    std::vector<BoundReport> bounds;
    std::vector<EpisodeRecord> records;
};

struct ExperimentResult {
    int spec_version = 1;
    std::uint64_t master_seed = 0;
    std::vector<CellResult> cells;
};

// Cartesian product of the grid axes in declaration order.
std::vector<CellConfig> expand_cells(const ExperimentSpec& spec);

// Seed for episode `episode` of cell `cell`.
std::uint64_t episode_seed(std::uint64_t master, std::size_t cell, std::size_t episode);

// Worker count: NOISY_SEARCH_THREADS if set, else hardware concurrency.
std::size_t worker_count();

// Runs every cell; failures stay local to their cell. Output depends only on
// the spec, never on thread scheduling.
ExperimentResult run_experiment(const ExperimentSpec& spec);

// One cell per assumed theta (the true theta is always added to the grid).
ExperimentResult mismatch_sweep(const ExperimentSpec& base, std::vector<double> theta_grid);

}  // namespace noisy_search
