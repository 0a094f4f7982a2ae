// Command-line front end: one subcommand per experiment kind, plus a fitting
// helper for externally produced decay curves.
//
// Exit codes: 0 success, 1 internal error, 2 bad input or precondition,
// 3 under-sampled run, 4 failed verdict.

#include <algorithm>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "loopsim/analysis.hpp"

namespace {

struct GlobalOpts {
    std::string config_path;
    std::string out_dir;
    std::string seed;
    int threads = 0;
};

int run_kind(const std::string& kind, const GlobalOpts& opts) {
    loopsim::RunConfig cfg;
    if (!opts.config_path.empty()) cfg = loopsim::RunConfig::load(opts.config_path);
    cfg.set("kind", kind);
    if (!opts.seed.empty()) cfg.set("seed", opts.seed);
    if (!opts.out_dir.empty()) cfg.set("out", opts.out_dir);
    if (opts.threads > 0) cfg.set("threads", std::to_string(opts.threads));

    const loopsim::ExperimentOutcome outcome = loopsim::run_experiment(cfg);
    std::cout << outcome.summary;
    for (const std::string& f : outcome.files) std::cout << "wrote " << f << "\n";
    return outcome.pass ? 0 : 4;
}

int run_fit(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        std::cerr << "cannot open " << path << "\n";
        return 2;
    }
    std::vector<loopsim::DecayPoint> points;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::replace(line.begin(), line.end(), ',', ' ');
        std::istringstream row(line);
        loopsim::DecayPoint p;
        if (row >> p.distance >> p.mean >> p.std_err) points.push_back(p);
        // non-numeric rows (headers) are skipped
    }
    loopsim::DecayFit fit;
    try {
        fit = loopsim::fit_exponential(points);
    } catch (const std::runtime_error& e) {
        std::cerr << e.what() << "\n";
        return 2;
    }
    nlohmann::json j{{"amplitude", fit.amplitude},
                     {"rate", fit.rate},
                     {"rate_std_err", fit.rate_std_err},
                     {"r_squared", fit.r_squared},
                     {"used", fit.used},
                     {"dropped", fit.dropped}};
    std::cout << j.dump(2) << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"loop-model simulator and verification harness"};
    app.require_subcommand(1);

    GlobalOpts opts;
    app.add_option("--config", opts.config_path, "experiment config file (key = value)");
    app.add_option("--seed", opts.seed, "master seed (overrides config)");
    app.add_option("--out", opts.out_dir, "output directory (overrides config)");
    app.add_option("--threads", opts.threads, "worker threads (overrides config)");

    // subcommand name -> experiment kind
    const std::vector<std::pair<std::string, std::string>> kinds = {
        {"oracle", "oracle-sweep"},      {"estimate", "mc-sweep"},
        {"schwinger", "schwinger-sweep"}, {"quenched", "quenched-sweep"},
        {"fpp", "fpp-sweep"},            {"dominate", "domination-check"},
        {"verify-chain", "full-pipeline"},
    };
    std::string selected;
    for (const auto& [name, kind] : kinds) {
        CLI::App* sub = app.add_subcommand(name, kind + " experiment");
        sub->callback([&selected, kind = kind] { selected = kind; });
    }

    std::string fit_path;
    CLI::App* fit = app.add_subcommand("fit", "log-linear decay fit of a CSV "
                                              "(distance, mean, std_err)");
    fit->add_option("input", fit_path, "CSV file")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (fit->parsed()) return run_fit(fit_path);
        return run_kind(selected, opts);
    } catch (const loopsim::under_sampled_error& e) {
        std::cerr << "under-sampled: " << e.what() << "\n";
        return 3;
    } catch (const std::invalid_argument& e) {
        std::cerr << "invalid input: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
