// Command-line front end: experiments, lemma checks, adversarial instances,
// closed-form bounds, the session server and a terminal demo.

#include <algorithm>
#include <csignal>
#include <cstdio>
#include <iostream>
#include <numeric>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "noisy_search/adversarial.hpp"
#include "noisy_search/analysis.hpp"
#include "noisy_search/experiment_io.hpp"
#include "noisy_search/feedback.hpp"
#include "noisy_search/harness.hpp"
#include "noisy_search/service.hpp"
#include "noisy_search/session.hpp"

namespace ns = noisy_search;

namespace {

constexpr std::uint64_t kDefaultSeed = 20110101;
constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitViolation = 2;

struct Options {
    std::uint64_t seed = kDefaultSeed;
    bool seed_given = false;

    std::string spec_path;
    std::string out_path;
    std::string csv_path;
    bool force = false;
    std::vector<double> mismatch;

    std::string lemma;
    std::size_t n = 0;
    std::size_t k = 0;
    double theta = 1.0;
    double user_theta = 0.0;  // 0: same as theta
    double delta0 = 1.0;
    bool delta0_given = false;
    std::size_t samples = 1000;
    double x1 = 0.0;
    double x2 = 1.0;

    std::string host = "127.0.0.1";
    int port = 8080;
    int ttl = 3600;

    std::string strategy = "binary-quantile";
    std::string family = "polynomial";
};

void emit(const std::string& text, const std::string& path, bool force) {
    if (path.empty()) {
        std::cout << text;
    } else {
        ns::write_text_file(path, text, force);
    }
}

// ---------------------------------------------------------------------------

int cmd_run(const Options& o) {
    ns::ExperimentSpec spec = ns::parse_experiment_spec(ns::read_text_file(o.spec_path));
    if (o.seed_given) spec.master_seed = o.seed;
    std::cerr << "seed: " << spec.master_seed << "\n";
    const ns::ExperimentResult result =
        o.mismatch.empty() ? ns::run_experiment(spec) : ns::mismatch_sweep(spec, o.mismatch);
    emit(ns::result_to_json_text(result), o.out_path, o.force);
    if (!o.csv_path.empty()) ns::write_text_file(o.csv_path, ns::result_to_csv(result), o.force);
    return kExitOk;
}

// Lemma checks. Each prints a short report and returns whether it held.
bool verify_lemma1(const Options& o, std::ostream& out) {
    ns::Rng rng(o.seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const std::size_t n = o.n ? o.n : 8;
    const std::size_t k = o.k ? o.k : 3;
    if (n < k + 1) throw ns::SearchError("lemma1 needs n > k");
    double worst = 0.0;
    for (std::size_t trial = 0; trial < o.samples; ++trial) {
        std::vector<double> xs(n);
        double x = 0.0;
        for (double& v : xs) v = (x += 0.1 + unit(rng));
        const ns::Dataset data = ns::Dataset::line(xs);
        const ns::UserModel model(trial % 2 ? ns::SimilarityFamily::Exponential
                                            : ns::SimilarityFamily::Polynomial,
                                  o.theta);
        std::vector<ns::Index> perm(n);
        std::iota(perm.begin(), perm.end(), ns::Index{0});
        std::shuffle(perm.begin(), perm.end(), rng);
        ns::Query q{std::vector<ns::Index>(perm.begin(), perm.begin() + static_cast<long>(k))};
        std::vector<double> w(n);
        for (ns::Index i = 0; i < n; ++i) w[i] = q.contains(i) ? 0.0 : unit(rng) + 1e-3;
        const ns::Posterior a = ns::Posterior::from_weights(w);
        const ns::ResponseDistribution A = ns::marginal_response_probs(data, model, q, a);
        double direct = 0.0;
        for (std::size_t r = 0; r < k; ++r) {
            direct += A[r] * (ns::entropy(a) - ns::entropy(ns::posterior_update(a, data, model, q, r)));
        }
        worst = std::max(worst, std::abs(direct - ns::expected_info_gain(a, data, model, q)));
    }
    out << "lemma1: " << o.samples << " instances, n=" << n << ", k=" << k
        << ", max |identity residual| = " << worst << "\n";
    return worst <= 1e-9;
}

bool verify_lemma2(const Options& o, std::ostream& out) {
    ns::Rng rng(o.seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const std::size_t k = o.k ? o.k : 4;
    const std::size_t l = o.n ? o.n : 5;
    auto random_dist = [&] {
        std::vector<double> v(k);
        double s = 0.0;
        for (double& e : v) s += (e = unit(rng) + 1e-6);
        for (double& e : v) e /= s;
        return v;
    };
    double worst = 1e300;
    for (std::size_t trial = 0; trial < o.samples; ++trial) {
        std::vector<double> alpha(l);
        std::vector<std::vector<double>> phi(l);
        std::vector<double> mix(k, 0.0);
        double total = 0.0;
        for (std::size_t i = 0; i < l; ++i) {
            alpha[i] = unit(rng) + 1e-6;
            phi[i] = random_dist();
            total += alpha[i];
            for (std::size_t j = 0; j < k; ++j) mix[j] += alpha[i] * phi[i][j];
        }
        for (double& v : mix) v /= total;
        const auto ref = random_dist();
        double lhs = 0.0, rhs = 0.0;
        for (std::size_t i = 0; i < l; ++i) {
            lhs += alpha[i] * ns::kl_divergence(phi[i], ref);
            rhs += alpha[i] * ns::kl_divergence(phi[i], mix);
        }
        worst = std::min(worst, lhs - rhs);
    }
    out << "lemma2: " << o.samples << " triples, k=" << k << ", l=" << l
        << ", min slack = " << worst << "\n";
    return worst >= -1e-12;
}

bool verify_lemma6(const Options& o, std::ostream& out) {
    const auto inst = ns::gen_adversarial_points(o.n ? o.n : 16, o.theta, o.x1, o.x2);
    const auto rep = ns::verify_similarity_bound(inst);
    out << "lemma6: n=" << inst.size() << ", theta=" << o.theta << ", " << rep.checks
        << " pairs, max S(x,x_i)/(2 S(x,x_1)) = " << rep.max_ratio << "\n";
    out << "recursion residual = " << ns::recursion_residual(inst) << "\n";
    if (rep.counterexample) {
        out << "counterexample: x = " << rep.counterexample->first + 1
            << ", x_i = " << rep.counterexample->second + 1 << "\n";
    }
    return rep.holds() && ns::recursion_residual(inst) <= 1e-9;
}

bool verify_lemma7(const Options& o, std::ostream& out) {
    auto inst = ns::gen_adversarial_points(o.n ? o.n : 10, o.theta, o.x1, o.x2);
    // points built for theta, answered by a user with a different sharpness
    if (o.user_theta > 0.0) inst.theta = o.user_theta;
    const auto rep = ns::verify_response_bound(inst, o.k ? o.k : 3, o.seed,
                                               std::max<std::size_t>(o.samples, 100000));
    out << "lemma7: n=" << inst.size() << ", k=" << (o.k ? o.k : 3) << ", theta=" << o.theta
        << ", user theta=" << inst.theta
        << (rep.exhaustive ? " (exhaustive)" : " (sampled)") << ", " << rep.queries
        << " queries, " << rep.pairs << " (query, target) pairs, max Pr(R=j)*j/2 = "
        << rep.max_ratio << "\n";
    if (rep.counterexample) {
        out << "counterexample: target " << rep.counterexample->target + 1 << ", j = "
            << rep.counterexample->response << ", Pr = " << rep.counterexample->probability << "\n";
    }
    return rep.holds();
}

int cmd_verify(const Options& o) {
    std::cerr << "seed: " << o.seed << "\n";
    bool ok = false;
    if (o.lemma == "lemma1") {
        ok = verify_lemma1(o, std::cout);
    } else if (o.lemma == "lemma2") {
        ok = verify_lemma2(o, std::cout);
    } else if (o.lemma == "lemma6") {
        ok = verify_lemma6(o, std::cout);
    } else if (o.lemma == "lemma7") {
        ok = verify_lemma7(o, std::cout);
    } else {
        std::cerr << "unknown lemma '" << o.lemma << "' (lemma1, lemma2, lemma6, lemma7)\n";
        return kExitUsage;
    }
    std::cout << (ok ? "PASS" : "VIOLATION") << "\n";
    return ok ? kExitOk : kExitViolation;
}

int cmd_gen_adversarial(const Options& o) {
    const auto inst = ns::gen_adversarial_points(o.n, o.theta, o.x1, o.x2);
    emit(ns::adversarial_to_json(inst), o.out_path, o.force);
    return kExitOk;
}

int cmd_bounds(const Options& o) {
    const auto c = ns::quartile_constants(o.theta);
    std::printf("rho      %.10g\n", c.rho);
    std::printf("phi      %.10g\n", c.phi);
    std::printf("G_rho    %.10g bits\n", c.gain);
    std::printf("theorem1 %.10g queries (n=%zu, theta=%g)\n", ns::theorem1_bound(o.n, o.theta).value,
                o.n, o.theta);
    if (o.k >= 3 && o.n > 2 * o.k) {
        const auto lb = ns::lower_bound_horizon(o.n, o.k);
        std::printf("theorem3 horizon %.10g, expected queries >= %.10g (k=%zu)\n", lb.horizon,
                    lb.expected_queries, o.k);
    }
    if (o.delta0_given || o.k >= 2) {
        const double beta = ns::lemma9_beta(o.theta, o.delta0);
        std::printf("beta     %.10g (delta0=%g)\n", beta, o.delta0);
        if (o.k >= 2) {
            std::printf("lemma10  %.10g bits (k=%zu)\n", ns::lemma10_gain(beta, o.k), o.k);
            std::printf("theorem4 log2 n / log2 k = %.10g\n",
                        ns::theorem4_trend(o.n, o.k, o.theta, o.delta0).value);
        }
    }
    return kExitOk;
}

ns::SessionServer* g_server = nullptr;

int cmd_serve(const Options& o) {
    ns::SessionStore store{std::chrono::seconds(o.ttl)};
    ns::SessionServer server(store);
    const int port = server.bind(o.host, o.port);
    if (port < 0) {
        std::cerr << "cannot bind " << o.host << ":" << o.port << "\n";
        return kExitUsage;
    }
    g_server = &server;
    std::signal(SIGINT, [](int) {
        if (g_server) g_server->stop();
    });
    std::cerr << "listening on http://" << o.host << ":" << port << "\n";
    server.listen_after_bind();
    g_server = nullptr;
    return kExitOk;
}

int cmd_demo(const Options& o) {
    ns::SessionRequest req;
    req.dataset.kind = ns::DatasetKind::UniformGrid;
    req.dataset.n = o.n ? o.n : 64;
    req.strategy = ns::parse_strategy(o.strategy);
    req.k = o.k ? o.k : 2;
    req.model = ns::UserModel(ns::parse_family(o.family), o.theta);
    req.seed = o.seed;
    ns::check_strategy_compatible(req.strategy, 1, req.k);
    ns::Session session("demo", req);

    std::cout << "Think of a number between 0 and " << req.dataset.n - 1
              << ". Each round pick the shown number closest to it.\n";
    std::string line;
    while (session.status() == ns::SessionStatus::Active) {
        std::cout << "\nround " << session.round() << "  (entropy "
                  << ns::entropy(session.posterior()) << " bits)\n";
        const auto& q = session.query();
        for (std::size_t r = 0; r < q.size(); ++r) {
            std::cout << "  [" << r + 1 << "] " << session.dataset().position(q.indices[r]) << "\n";
        }
        std::cout << "choose 1.." << q.size() << ", 'f' if your number is shown, 'q' to quit: "
                  << std::flush;
        if (!std::getline(std::cin, line) || line == "q") return kExitOk;
        if (line == "f") {
            session.found();
            break;
        }
        try {
            const long r = std::stol(line);
            if (r < 1 || static_cast<std::size_t>(r) > q.size()) throw std::out_of_range("r");
            session.answer(static_cast<std::size_t>(r - 1));
        } catch (const std::exception&) {
            std::cout << "please type a number between 1 and " << q.size() << "\n";
        }
    }
    if (session.status() == ns::SessionStatus::Found) {
        std::cout << "found after " << session.round() << " queries\n";
    } else {
        std::cout << "gave up after " << session.history().size() << " queries\n";
    }
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Noisy search with comparative feedback"};
    app.require_subcommand(1);
    Options o;
    auto add_seed = [&](CLI::App* sub) {
        sub->add_option_function<std::uint64_t>(
            "--seed",
            [&](std::uint64_t s) {
                o.seed = s;
                o.seed_given = true;
            },
            "Random seed (default " + std::to_string(kDefaultSeed) + ")");
    };

    auto* run = app.add_subcommand("run", "Run an experiment spec (JSON)");
    run->add_option("--spec", o.spec_path, "Experiment spec path")->required()->check(CLI::ExistingFile);
    run->add_option("--out", o.out_path, "Result JSON path (stdout if omitted)");
    run->add_option("--csv", o.csv_path, "Also write one CSV row per cell");
    run->add_option("--mismatch", o.mismatch, "Sweep these assumed thetas against the spec's true theta")
        ->delimiter(',');
    run->add_flag("--force", o.force, "Overwrite existing output files");
    add_seed(run);

    auto* verify = app.add_subcommand("verify", "Check a lemma numerically");
    verify->add_option("lemma", o.lemma, "lemma1 | lemma2 | lemma6 | lemma7")->required();
    verify->add_option("--n", o.n, "Number of points (lemma2: number of mixture components)");
    verify->add_option("--k", o.k, "Query size");
    verify->add_option("--theta", o.theta, "User sharpness");
    verify->add_option("--samples", o.samples, "Random instances to draw");
    verify->add_option("--user-theta", o.user_theta, "lemma7: answer with this sharpness instead");
    verify->add_option("--x1", o.x1, "First adversarial point");
    verify->add_option("--x2", o.x2, "Second adversarial point");
    add_seed(verify);

    auto* gen = app.add_subcommand("gen-adversarial", "Write the adversarial point set as JSON");
    gen->add_option("--n", o.n, "Number of points")->required();
    gen->add_option("--theta", o.theta, "Polynomial sharpness");
    gen->add_option("--x1", o.x1, "First point");
    gen->add_option("--x2", o.x2, "Second point");
    gen->add_option("--out", o.out_path, "Output path (stdout if omitted)");
    gen->add_flag("--force", o.force, "Overwrite an existing file");

    auto* bounds = app.add_subcommand("bounds", "Print closed-form constants and bounds");
    bounds->add_option("--n", o.n, "Number of points")->required();
    bounds->add_option("--k", o.k, "Query size");
    bounds->add_option("--theta", o.theta, "User sharpness");
    bounds->add_option_function<double>(
        "--delta0",
        [&](double d) {
            o.delta0 = d;
            o.delta0_given = true;
        },
        "Minimal distance between points");

    auto* serve = app.add_subcommand("serve", "Serve live search sessions over HTTP");
    serve->add_option("--host", o.host, "Bind address");
    serve->add_option("--port", o.port, "Port (0 picks a free one)");
    serve->add_option("--ttl", o.ttl, "Idle session lifetime in seconds");

    auto* demo = app.add_subcommand("demo", "Play the search interactively in the terminal");
    demo->add_option("--n", o.n, "Grid size");
    demo->add_option("--k", o.k, "Query size");
    demo->add_option("--strategy", o.strategy, "Query strategy");
    demo->add_option("--family", o.family, "polynomial | exponential");
    demo->add_option("--theta", o.theta, "Assumed sharpness");
    add_seed(demo);

    if (argc <= 1) {
        std::cerr << app.help();
        return kExitUsage;
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (*run) return cmd_run(o);
        if (*verify) return cmd_verify(o);
        if (*gen) return cmd_gen_adversarial(o);
        if (*bounds) return cmd_bounds(o);
        if (*serve) return cmd_serve(o);
        if (*demo) return cmd_demo(o);
    } catch (const ns::SearchError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const ns::SessionError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    }
    return kExitUsage;
}
