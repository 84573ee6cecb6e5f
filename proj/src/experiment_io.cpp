#include "noisy_search/experiment_io.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

namespace noisy_search {

using nlohmann::json;

namespace {

template <typename T, typename Parse>
std::vector<T> axis(const json& grid, const char* key, std::vector<T> fallback, Parse&& parse) {
    if (!grid.contains(key)) return fallback;
    const json& v = grid.at(key);
    std::vector<T> out;
    if (v.is_array()) {
        for (const json& e : v) out.push_back(parse(e));
    } else {
        out.push_back(parse(v));
    }
    return out;
}

double parse_norm(const json& v) {
    if (v.is_string()) {
        const auto s = v.get<std::string>();
        if (s == "inf" || s == "infinity") return std::numeric_limits<double>::infinity();
        throw SearchError("norm_order must be a number or \"inf\"");
    }
    return v.get<double>();
}

json norm_to_json(double p) {
    if (std::isinf(p)) return "inf";
    return p;
}

void reject_unknown(const json& obj, std::initializer_list<const char*> allowed, const char* where) {
    std::set<std::string> ok(allowed.begin(), allowed.end());
    for (const auto& [key, _] : obj.items()) {
        if (!ok.count(key)) {
            throw SearchError(std::string("unknown field '") + key + "' in " + where);
        }
    }
}

void check_version(const json& j) {
    if (!j.contains("spec_version")) throw SearchError("missing spec_version");
    const int v = j.at("spec_version").get<int>();
    if (v != kSpecVersion) {
        throw SearchError("spec_version " + std::to_string(v) + " is not supported (expected " +
                          std::to_string(kSpecVersion) + ")");
    }
}

std::string format_number(double v) { return json(v).dump(); }

}  // namespace

ExperimentSpec parse_experiment_spec(std::string_view text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw SearchError(std::string("malformed experiment spec: ") + e.what());
    }
    try {
        if (!j.is_object()) throw SearchError("experiment spec must be a JSON object");
        reject_unknown(j,
                       {"spec_version", "master_seed", "episodes", "max_queries", "norm_order",
                        "spacing", "points", "record_episodes", "grid"},
                       "experiment spec");
        check_version(j);
        ExperimentSpec spec;
        spec.spec_version = j.at("spec_version").get<int>();
        spec.master_seed = j.value("master_seed", spec.master_seed);
        spec.episodes = j.value("episodes", spec.episodes);
        spec.max_queries = j.value("max_queries", spec.max_queries);
        if (j.contains("norm_order")) spec.norm_order = parse_norm(j.at("norm_order"));
        spec.spacing = j.value("spacing", spec.spacing);
        if (j.contains("points")) {
            for (const json& p : j.at("points")) {
                spec.points.push_back(p.is_array() ? p.get<std::vector<double>>()
                                                   : std::vector<double>{p.get<double>()});
            }
        }
        spec.record_episodes = j.value("record_episodes", spec.record_episodes);
        if (j.contains("grid")) {
            const json& g = j.at("grid");
            reject_unknown(g,
                           {"dataset", "n", "dimension", "strategy", "k", "family", "theta_true",
                            "theta_assumed"},
                           "grid");
            GridAxes& a = spec.grid;
            a.datasets = axis(g, "dataset", a.datasets, [](const json& e) {
                return parse_dataset_kind(e.get<std::string>());
            });
            a.n = axis(g, "n", a.n, [](const json& e) { return e.get<std::size_t>(); });
            a.dimension =
                axis(g, "dimension", a.dimension, [](const json& e) { return e.get<std::size_t>(); });
            a.strategies = axis(g, "strategy", a.strategies, [](const json& e) {
                return parse_strategy(e.get<std::string>());
            });
            a.k = axis(g, "k", a.k, [](const json& e) { return e.get<std::size_t>(); });
            a.families = axis(g, "family", a.families, [](const json& e) {
                return parse_family(e.get<std::string>());
            });
            a.theta_true =
                axis(g, "theta_true", a.theta_true, [](const json& e) { return e.get<double>(); });
            a.theta_assumed = axis(g, "theta_assumed", a.theta_assumed,
                                   [](const json& e) { return e.get<double>(); });
        }
        if (spec.episodes < 1) throw SearchError("episodes must be >= 1");
        return spec;
    } catch (const json::exception& e) {
        throw SearchError(std::string("invalid experiment spec: ") + e.what());
    }
}

json experiment_spec_to_json(const ExperimentSpec& spec) {
    json g;
    for (auto d : spec.grid.datasets) g["dataset"].push_back(std::string(to_string(d)));
    g["n"] = spec.grid.n;
    g["dimension"] = spec.grid.dimension;
    for (auto s : spec.grid.strategies) g["strategy"].push_back(std::string(to_string(s)));
    g["k"] = spec.grid.k;
    for (auto f : spec.grid.families) g["family"].push_back(std::string(to_string(f)));
    g["theta_true"] = spec.grid.theta_true;
    if (!spec.grid.theta_assumed.empty()) g["theta_assumed"] = spec.grid.theta_assumed;
    json j;
    j["spec_version"] = spec.spec_version;
    j["master_seed"] = spec.master_seed;
    j["episodes"] = spec.episodes;
    j["max_queries"] = spec.max_queries;
    j["norm_order"] = norm_to_json(spec.norm_order);
    j["spacing"] = spec.spacing;
    if (!spec.points.empty()) j["points"] = spec.points;
    j["record_episodes"] = spec.record_episodes;
    j["grid"] = g;
    return j;
}

json result_to_json(const ExperimentResult& result) {
    json cells = json::array();
    for (const CellResult& c : result.cells) {
        json cell;
        const CellConfig& cfg = c.config;
        cell["dataset"] = std::string(to_string(cfg.dataset));
        cell["n"] = cfg.n;
        cell["dimension"] = cfg.dimension;
        cell["norm_order"] = norm_to_json(cfg.norm_order);
        cell["strategy"] = std::string(to_string(cfg.strategy));
        cell["k"] = cfg.k;
        cell["family"] = std::string(to_string(cfg.family));
        cell["theta_true"] = cfg.theta_true;
        cell["theta_assumed"] = cfg.theta_assumed;
        cell["max_queries"] = cfg.max_queries;
        cell["episodes"] = c.episodes;
        cell["terminated"] = c.terminated;
        cell["non_terminated"] = c.non_terminated;
        cell["failed"] = c.failed;
        cell["failure"] = c.failure;
        cell["mean"] = c.mean;
        cell["median"] = c.median;
        cell["p95"] = c.p95;
        cell["stderr"] = c.stderr_;
        cell["mean_gain"] = c.mean_gain;
        json bounds = json::array();
        for (const BoundReport& b : c.bounds) {
            bounds.push_back({{"name", b.name}, {"inputs", b.inputs}, {"value", b.value},
                              {"units", b.units}});
        }
        cell["bounds"] = bounds;
        if (!c.records.empty()) {
            json recs = json::array();
            for (const EpisodeRecord& r : c.records) {
                recs.push_back({{"target", r.target + 1},
                                {"queries", r.queries},
                                {"terminated", r.terminated},
                                {"failed", r.failed},
                                {"failure", r.failure},
                                {"mean_gain", r.mean_gain}});
            }
            cell["episode_records"] = recs;
        }
        cells.push_back(std::move(cell));
    }
    return {{"spec_version", result.spec_version},
            {"master_seed", result.master_seed},
            {"cells", cells}};
}

ExperimentResult result_from_json(const json& j) {
    try {
        check_version(j);
        ExperimentResult r;
        r.spec_version = j.at("spec_version").get<int>();
        r.master_seed = j.at("master_seed").get<std::uint64_t>();
        for (const json& cell : j.at("cells")) {
            CellResult c;
            CellConfig& cfg = c.config;
            cfg.dataset = parse_dataset_kind(cell.at("dataset").get<std::string>());
            cfg.n = cell.at("n").get<std::size_t>();
            cfg.dimension = cell.at("dimension").get<std::size_t>();
            cfg.norm_order = parse_norm(cell.at("norm_order"));
            cfg.strategy = parse_strategy(cell.at("strategy").get<std::string>());
            cfg.k = cell.at("k").get<std::size_t>();
            cfg.family = parse_family(cell.at("family").get<std::string>());
            cfg.theta_true = cell.at("theta_true").get<double>();
            cfg.theta_assumed = cell.at("theta_assumed").get<double>();
            cfg.max_queries = cell.at("max_queries").get<std::size_t>();
            c.episodes = cell.at("episodes").get<std::size_t>();
            c.terminated = cell.at("terminated").get<std::size_t>();
            c.non_terminated = cell.at("non_terminated").get<std::size_t>();
            c.failed = cell.at("failed").get<std::size_t>();
            c.failure = cell.at("failure").get<std::string>();
            c.mean = cell.at("mean").get<double>();
            c.median = cell.at("median").get<double>();
            c.p95 = cell.at("p95").get<double>();
            c.stderr_ = cell.at("stderr").get<double>();
            c.mean_gain = cell.at("mean_gain").get<double>();
            for (const json& b : cell.at("bounds")) {
                BoundReport br;
                br.name = b.at("name").get<std::string>();
                br.inputs = b.at("inputs").get<std::map<std::string, double>>();
                br.value = b.at("value").get<double>();
                br.units = b.at("units").get<std::string>();
                c.bounds.push_back(std::move(br));
            }
            if (cell.contains("episode_records")) {
                for (const json& e : cell.at("episode_records")) {
                    EpisodeRecord rec;
                    rec.target = e.at("target").get<std::size_t>() - 1;
                    rec.queries = e.at("queries").get<std::size_t>();
                    rec.terminated = e.at("terminated").get<bool>();
                    rec.failed = e.at("failed").get<bool>();
                    rec.failure = e.at("failure").get<std::string>();
                    rec.mean_gain = e.at("mean_gain").get<double>();
                    c.records.push_back(std::move(rec));
                }
            }
            r.cells.push_back(std::move(c));
        }
        return r;
    } catch (const json::exception& e) {
        throw SearchError(std::string("invalid experiment result: ") + e.what());
    }
}

std::string result_to_json_text(const ExperimentResult& result) {
    return result_to_json(result).dump(2) + "\n";
}

std::string result_to_csv(const ExperimentResult& result) {
    std::ostringstream out;
    out << "strategy,family,n,k,theta_true,theta_assumed,episodes,mean,median,p95,stderr,bound\n";
    for (const CellResult& c : result.cells) {
        const CellConfig& cfg = c.config;
        out << to_string(cfg.strategy) << ',' << to_string(cfg.family) << ',' << cfg.n << ','
            << cfg.k << ',' << format_number(cfg.theta_true) << ','
            << format_number(cfg.theta_assumed) << ',' << c.episodes << ','
            << format_number(c.mean) << ',' << format_number(c.median) << ','
            << format_number(c.p95) << ',' << format_number(c.stderr_) << ',';
        if (!c.bounds.empty()) out << format_number(c.bounds.front().value);
        out << '\n';
    }
    return out.str();
}

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw SearchError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text_file(const std::filesystem::path& path, std::string_view text, bool force) {
    if (!force && std::filesystem::exists(path)) {
        throw SearchError(path.string() + " exists; pass --force to overwrite");
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw SearchError("cannot write " + path.string());
    out << text;
    if (!out) throw SearchError("failed writing " + path.string());
}

void persist(const ExperimentResult& result, const std::filesystem::path& path, bool force) {
    const bool csv = path.extension() == ".csv";
    write_text_file(path, csv ? result_to_csv(result) : result_to_json_text(result), force);
}

ExperimentResult load(const std::filesystem::path& path) {
    const std::string text = read_text_file(path);
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw SearchError(path.string() + ": " + e.what());
    }
    return result_from_json(j);
}

}  // namespace noisy_search
