#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "loopsim/analysis.hpp"
#include "loopsim/ed_oracle.hpp"
#include "loopsim/estimators.hpp"

using namespace loopsim;
namespace fs = std::filesystem;

namespace {

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

fs::path fresh_dir(const std::string& name) {
    fs::path dir = fs::temp_directory_path() / ("loopsim_test_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::vector<DecayPoint> exact_curve(double amplitude, double rate,
                                    const std::vector<double>& xs) {
    std::vector<DecayPoint> pts;
    for (double x : xs) pts.push_back({x, amplitude * std::exp(-rate * x), 0.0});
    return pts;
}

} // namespace

TEST_CASE("exponential fit recovers exact curves") {
    DecayFit fit = fit_exponential(exact_curve(2.0, 0.7, {1, 2, 3, 4, 5}));
    CHECK(fit.amplitude == doctest::Approx(2.0).epsilon(1e-9));
    CHECK(fit.rate == doctest::Approx(0.7).epsilon(1e-9));
    CHECK(fit.r_squared == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(fit.used == 5);
    CHECK(fit.dropped == 0);

    DecayFit flat = fit_exponential(exact_curve(0.3, 0.0, {1, 2, 3}));
    CHECK(std::abs(flat.rate) < 1e-9);
    CHECK(flat.amplitude == doctest::Approx(0.3).epsilon(1e-9));

    // growth keeps its sign
    DecayFit grow = fit_exponential(exact_curve(1.0, -0.4, {1, 2, 3, 4}));
    CHECK(grow.rate == doctest::Approx(-0.4).epsilon(1e-9));
}

TEST_CASE("exponential fit is invariant under amplitude rescaling") {
    auto base = exact_curve(1.4, 0.55, {2, 4, 6, 8});
    auto scaled = base;
    for (auto& p : scaled) p.mean *= 137.0;
    DecayFit f1 = fit_exponential(base);
    DecayFit f2 = fit_exponential(scaled);
    CHECK(f1.rate == doctest::Approx(f2.rate).epsilon(1e-9));
    CHECK(f2.amplitude == doctest::Approx(137.0 * f1.amplitude).epsilon(1e-6));
}

TEST_CASE("exponential fit censors points consistent with zero") {
    std::vector<DecayPoint> pts = exact_curve(1.0, 0.5, {1, 2, 3});
    pts.push_back({4.0, 1e-4, 1e-3});  // mean below three standard errors
    pts.push_back({5.0, -2e-4, 1e-3}); // negative mean
    DecayFit fit = fit_exponential(pts);
    CHECK(fit.used == 3);
    CHECK(fit.dropped == 2);
    CHECK(fit.rate == doctest::Approx(0.5).epsilon(1e-9));

    std::vector<DecayPoint> thin = exact_curve(1.0, 0.5, {1, 2});
    CHECK_THROWS_WITH_AS(static_cast<void>(fit_exponential(thin)),
                         doctest::Contains("fewer than 3 usable"), std::runtime_error);

    std::vector<DecayPoint> stacked = {{2, 1.0, 0}, {2, 0.5, 0}, {2, 0.25, 0}};
    CHECK_THROWS_WITH_AS(static_cast<void>(fit_exponential(stacked)),
                         doctest::Contains("degenerate"), std::runtime_error);
}

TEST_CASE("exponential fit tracks noisy data within its own error bars") {
    // deterministic pseudo-noise around 3 e^{-0.5 x}
    std::vector<DecayPoint> pts;
    for (int i = 1; i <= 8; ++i) {
        const double x = i;
        const double clean = 3.0 * std::exp(-0.5 * x);
        const double wiggle = 0.01 * std::sin(12.9898 * i);
        pts.push_back({x, clean * (1 + wiggle), clean * 0.012});
    }
    DecayFit fit = fit_exponential(pts);
    CHECK(std::abs(fit.rate - 0.5) < 3 * fit.rate_std_err + 1e-3);
    CHECK(fit.r_squared > 0.95);
}

TEST_CASE("exponential fit on an exact correlation profile") {
    std::vector<DecayPoint> pts;
    for (const ProfilePoint& p : decay_profile(8, SpinParam{1}, 1.0, 2.0, 1.0))
        pts.push_back({static_cast<double>(p.distance), p.value, 0.0});
    REQUIRE(pts.size() == 4);
    DecayFit fit = fit_exponential(pts);
    CHECK(fit.used == 4);
    CHECK(fit.rate > 0);
    CHECK(fit.r_squared > 0.9);
}

TEST_CASE("config parsing") {
    const std::string text =
        "# experiment description\n"
        "kind = mc-sweep\n"
        "\n"
        "dim = 2   # trailing comment\n"
        "side= 4\n"
        "beta =1.5\n"
        "distances = 1, 2 ,3\n";
    RunConfig cfg = RunConfig::parse_string(text);
    CHECK(cfg.get_str("kind") == "mc-sweep");
    CHECK(cfg.get_int("dim", 0) == 2);
    CHECK(cfg.get_int("side", 0) == 4);
    CHECK(cfg.get_real("beta", 0) == doctest::Approx(1.5));
    CHECK(cfg.get_int_list("distances") == std::vector<long>{1, 2, 3});
    CHECK(cfg.get_int("n", 777) == 777);          // fallback
    CHECK(cfg.get_str("missing", "dflt") == "dflt");
    CHECK_FALSE(cfg.has("n"));

    // serialize -> parse is the identity on the stored pairs
    RunConfig again = RunConfig::parse_string(cfg.serialize());
    CHECK(again.values == cfg.values);
}

TEST_CASE("config parsing rejects malformed input with line numbers") {
    CHECK_THROWS_WITH_AS(static_cast<void>(RunConfig::parse_string("kind = x\nbogus = 1\n")),
                         doctest::Contains("line 2"), std::invalid_argument);
    CHECK_THROWS_WITH_AS(
        static_cast<void>(RunConfig::parse_string("kind = x\n\nkind = y\n")),
        doctest::Contains("duplicate"), std::invalid_argument);
    CHECK_THROWS_WITH_AS(static_cast<void>(RunConfig::parse_string("just words\n")),
                         doctest::Contains("expected key = value"), std::invalid_argument);
    CHECK_THROWS_WITH_AS(static_cast<void>(RunConfig::parse_string("kind =   # gone\n")),
                         doctest::Contains("empty value"), std::invalid_argument);

    RunConfig cfg = RunConfig::parse_string("n = 12x\nbeta = 1.5.2\ndistances = 1,two\n");
    CHECK_THROWS_AS(static_cast<void>(cfg.get_int("n", 0)), std::invalid_argument);
    CHECK_THROWS_AS(static_cast<void>(cfg.get_real("beta", 0)), std::invalid_argument);
    CHECK_THROWS_AS(static_cast<void>(cfg.get_int_list("distances")), std::invalid_argument);

    CHECK_THROWS_AS(cfg.set("nonsense", "1"), std::invalid_argument);
    CHECK_THROWS_AS(static_cast<void>(RunConfig::load("/nonexistent/path.cfg")),
                    std::invalid_argument);
}

TEST_CASE("model construction from config") {
    RunConfig empty = RunConfig::parse_string("");
    Lattice dflt = lattice_from_config(empty);
    CHECK(dflt.dim == 1);
    CHECK(dflt.site_count() == 3);
    ModelParams m = model_from_config(empty);
    CHECK(m.beta == doctest::Approx(1.0));
    CHECK(m.u == doctest::Approx(1.0));
    CHECK(m.spin.twice_spin == 1);
    CHECK(m.field == std::vector<double>(3, 0.0));

    RunConfig chain = RunConfig::parse_string("chain_sites = 2\nfield = 0.7\n");
    ModelParams mc = model_from_config(chain);
    CHECK(mc.lattice.site_count() == 2);
    CHECK(mc.field == std::vector<double>(2, 0.7));

    Lattice lat = build_lattice(1, 4);
    CHECK(site_at_distance(lat, 2) == lat.site_at({2}));
    CHECK(site_at_distance(lat, -2) == lat.site_at({-2}));
    CHECK_THROWS(site_at_distance(lat, 3));
}

TEST_CASE("exact sweep writes closed-form values") {
    fs::path dir = fresh_dir("oracle");
    RunConfig cfg = RunConfig::parse_string(
        "kind = oracle-sweep\nchain_sites = 2\nbeta = 1\nu = 1\nseed = 3\nout = " +
        dir.string() + "\n");
    ExperimentOutcome out = run_experiment(cfg);
    CHECK(out.pass);
    REQUIRE(out.files.size() == 3);
    for (const std::string& f : out.files) CHECK(fs::exists(f));

    auto j = nlohmann::json::parse(slurp((dir / "oracle-sweep.json").string()));
    const double z = 3.0 + std::exp(-2.0);
    CHECK(j["partition"].get<double>() == doctest::Approx(z).epsilon(1e-12));
    CHECK(j["two_point"][0]["value"].get<double>() ==
          doctest::Approx((1.0 - std::exp(-2.0)) / (4.0 * z)).epsilon(1e-12));
    CHECK(j["kind"] == "oracle-sweep");
    CHECK(j["seed"] == 3);

    const std::string csv = slurp((dir / "oracle-sweep.csv").string());
    CHECK(csv.rfind("# schema=loopsim-v1 kind=oracle-sweep seed=3\n", 0) == 0);
    CHECK(csv.find("quantity,distance,value,source") != std::string::npos);
    CHECK(csv.find("partition,0,") != std::string::npos);
}

TEST_CASE("sampling sweep agrees with the exact sweep") {
    fs::path dir = fresh_dir("mc");
    RunConfig cfg = RunConfig::parse_string(
        "kind = mc-sweep\nchain_sites = 2\nbeta = 1\nu = 1\nn = 40000\nseed = 5\nout = " +
        dir.string() + "\n");
    ExperimentOutcome out = run_experiment(cfg);
    CHECK(out.pass);

    auto j = nlohmann::json::parse(slurp((dir / "mc-sweep.json").string()));
    CHECK_FALSE(j["under_sampled"].get<bool>());
    const double z = 3.0 + std::exp(-2.0);
    const double tp = (1.0 - std::exp(-2.0)) / (4.0 * z);
    CHECK(std::abs(j["partition"]["mean"].get<double>() - z) <
          5 * j["partition"]["std_err"].get<double>());
    CHECK(std::abs(j["two_point"][0]["mean"].get<double>() - tp) <
          5 * j["two_point"][0]["std_err"].get<double>() + 1e-12);
    // the closed-form bound dominates the correlation on the same stream
    CHECK(j["corollary_rhs"][0]["mean"].get<double>() + 1e-12 >
          j["two_point"][0]["mean"].get<double>() -
              5 * j["two_point"][0]["std_err"].get<double>());
}

TEST_CASE("reruns are byte-identical and thread-count invariant") {
    fs::path dir = fresh_dir("repro");
    const std::string base =
        "kind = mc-sweep\nchain_sites = 2\nbeta = 1\nu = 0.5\nfield = 0.6\n"
        "n = 3000\nseed = 9\ndistances = 1\n";
    RunConfig cfg = RunConfig::parse_string(base + "out = " + dir.string() + "\n");
    run_experiment(cfg);
    const std::string csv1 = slurp((dir / "mc-sweep.csv").string());
    const std::string json1 = slurp((dir / "mc-sweep.json").string());
    const std::string txt1 = slurp((dir / "mc-sweep.txt").string());

    run_experiment(cfg); // same config, same directory
    CHECK(slurp((dir / "mc-sweep.csv").string()) == csv1);
    CHECK(slurp((dir / "mc-sweep.json").string()) == json1);
    CHECK(slurp((dir / "mc-sweep.txt").string()) == txt1);

    // a different thread count changes only the config echo, not the numbers
    fs::path dir3 = fresh_dir("repro3");
    RunConfig cfg3 = RunConfig::parse_string(base + "threads = 3\nout = " + dir3.string() +
                                             "\n");
    run_experiment(cfg3);
    CHECK(slurp((dir3 / "mc-sweep.csv").string()) == csv1);
    auto a = nlohmann::json::parse(json1);
    auto b = nlohmann::json::parse(slurp((dir3 / "mc-sweep.json").string()));
    CHECK(a["partition"] == b["partition"]);
    CHECK(a["two_point"] == b["two_point"]);
    CHECK(a["corollary_rhs"] == b["corollary_rhs"]);
}

TEST_CASE("degenerate weights raise the under-sampling flag after writing") {
    fs::path dir = fresh_dir("undersampled");
    // a very long circle time on a single edge spreads the weights over many
    // orders of magnitude, collapsing the effective sample size
    RunConfig cfg = RunConfig::parse_string(
        "kind = mc-sweep\nchain_sites = 2\nbeta = 16\nu = 0\nn = 2000\nseed = 2\nout = " +
        dir.string() + "\n");
    CHECK_THROWS_WITH_AS(static_cast<void>(run_experiment(cfg)),
                         doctest::Contains("effective sample size"), under_sampled_error);
    const std::string csv = slurp((dir / "mc-sweep.csv").string());
    CHECK(csv.find("under-sampled") != std::string::npos);
    auto j = nlohmann::json::parse(slurp((dir / "mc-sweep.json").string()));
    CHECK(j["under_sampled"].get<bool>());
}

TEST_CASE("imaginary-time sweep carries its own oracle column") {
    fs::path dir = fresh_dir("schwinger");
    RunConfig cfg = RunConfig::parse_string(
        "kind = schwinger-sweep\nchain_sites = 2\nbeta = 1\nu = 1\nfield = 1\n"
        "x = 1\nt_list = 0, 0.5\nn = 20000\nseed = 6\nout = " +
        dir.string() + "\n");
    ExperimentOutcome out = run_experiment(cfg);
    CHECK(out.pass);
    auto j = nlohmann::json::parse(slurp((dir / "schwinger-sweep.json").string()));
    REQUIRE(j["schwinger"].size() == 2);
    for (const auto& row : j["schwinger"]) {
        const double se = row["std_err"].get<double>();
        CHECK(std::abs(row["mean"].get<double>() - row["oracle"].get<double>()) <
              6 * se + 1e-12);
    }
}

TEST_CASE("quenched sweep reports disorder variance") {
    fs::path dir = fresh_dir("quenched");
    RunConfig cfg = RunConfig::parse_string(
        "kind = quenched-sweep\nchain_sites = 2\nbeta = 1\nu = 0.5\n"
        "field_eps = 0.3\nfield_alpha = 1.2\nn = 800\nn_fields = 4\nseed = 8\nout = " +
        dir.string() + "\n");
    ExperimentOutcome out = run_experiment(cfg);
    CHECK(out.pass);
    auto j = nlohmann::json::parse(slurp((dir / "quenched-sweep.json").string()));
    REQUIRE(j["quenched_two_point"].size() == 1);
    const auto& row = j["quenched_two_point"][0];
    CHECK(row["mean"].get<double>() > 0);
    CHECK(row["between_var"].get<double>() >= 0);
    CHECK(row["inner_var"].get<double>() >= 0);
}

TEST_CASE("tail sweep fits a significant decay when the threshold bites") {
    fs::path dir = fresh_dir("fpp");
    RunConfig cfg = RunConfig::parse_string(
        "kind = fpp-sweep\ndim = 2\nslabs = 2\np = 0.8\nphi = 0.1\n"
        "distances = 2, 4, 6\nn = 20000\nseed = 4\nout = " +
        dir.string() + "\n");
    ExperimentOutcome out = run_experiment(cfg);
    CHECK(out.pass);
    auto j = nlohmann::json::parse(slurp((dir / "fpp-sweep.json").string()));
    CHECK(j["fit"]["rate"].get<double>() > 0);
    CHECK(j["fit"]["significant_decay"].get<bool>());
    REQUIRE(j["tail"].size() == 3);
    CHECK(j["tail"][0]["mean"].get<double>() > j["tail"][2]["mean"].get<double>());
}

TEST_CASE("domination experiment returns a verdict") {
    fs::path dir = fresh_dir("dominate");
    RunConfig cfg = RunConfig::parse_string(
        "kind = domination-check\ndim = 1\nside = 4\nbeta = 1\nu = 0.5\nfield = 1\n"
        "x = 2\ndelta = 0.25\nalpha = 1\nphi = 0.25\nn = 5000\nseed = 7\nout = " +
        dir.string() + "\n");
    ExperimentOutcome out = run_experiment(cfg);
    CHECK(out.pass);
    auto j = nlohmann::json::parse(slurp((dir / "domination-check.json").string()));
    CHECK(j["pass"].get<bool>());
    CHECK(j["slack"].get<double>() >= 0);
}

TEST_CASE("bound chain verifies end to end") {
    RunConfig cfg = RunConfig::parse_string(
        "dim = 1\nside = 6\nbeta = 1\nu = 0.5\nfield = 1\nx = 2\n"
        "delta = 0.25\nalpha = 1\nphi = 0.1\nn = 4000\nseed = 11\nthreads = 2\n");
    ChainReport rep = verify_corollary_chain(cfg);
    CHECK(rep.first_link);
    CHECK(rep.second_link);
    CHECK(rep.pass());
    CHECK(rep.deterministic_term ==
          doctest::Approx(std::exp(-0.25 * (0.1 * 2 - 1))).epsilon(1e-12));
    CHECK(rep.decomposition_total ==
          doctest::Approx(0.5 * (rep.deterministic_term + rep.tail.mean)).epsilon(1e-12));
    CHECK(rep.tail.mean >= 0);
    CHECK(rep.tail.mean <= 1);
    CHECK(rep.two_point.mean <= rep.bound.mean +
                                    3 * std::hypot(rep.two_point.std_err,
                                                   rep.bound.std_err));

    // the full-pipeline experiment reports the same verdict
    fs::path dir = fresh_dir("pipeline");
    cfg.set("kind", "full-pipeline");
    cfg.set("out", dir.string());
    ExperimentOutcome out = run_experiment(cfg);
    CHECK(out.pass == rep.pass());
    auto j = nlohmann::json::parse(slurp((dir / "full-pipeline.json").string()));
    CHECK(j["two_point"]["mean"].get<double>() ==
          doctest::Approx(rep.two_point.mean).epsilon(1e-12));
}

TEST_CASE("unknown experiments are rejected") {
    CHECK_THROWS_WITH_AS(
        static_cast<void>(run_experiment(RunConfig::parse_string("kind = banana\n"))),
        doctest::Contains("unknown experiment"), std::invalid_argument);
    CHECK_THROWS_WITH_AS(
        static_cast<void>(run_experiment(RunConfig::parse_string("dim = 1\n"))),
        doctest::Contains("missing 'kind'"), std::invalid_argument);
}
