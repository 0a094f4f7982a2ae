#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "loopsim/estimators.hpp"

namespace loopsim {

struct DecayPoint {
    double distance = 0;
    double mean = 0;
    double std_err = 0;
};

// Result of a log-linear fit mean ~ amplitude * exp(-rate * distance).
// The rate keeps its fitted sign; callers decide what a negative rate means.
struct DecayFit {
    double amplitude = 0;
    double rate = 0;
    double rate_std_err = 0;
    double r_squared = 0;
    int used = 0;    // points entering the fit
    int dropped = 0; // points consistent with zero (mean <= 3 stderr)
};

// Weighted least squares on (distance, log mean) with weights (mean/stderr)^2;
// exact (zero-error) points get a uniform dominating weight.  Throws when
// fewer than three usable points remain.
DecayFit fit_exponential(const std::vector<DecayPoint>& points);

// Flat key = value experiment description.  '#' starts a comment; keys are
// checked against the documented set at parse time and values stay verbatim,
// so parse -> serialize is the identity on the stored pairs.
struct RunConfig {
    std::map<std::string, std::string> values;

    static RunConfig parse(std::istream& in);
    static RunConfig parse_string(const std::string& text);
    static RunConfig load(const std::string& path);
    std::string serialize() const;

    bool has(const std::string& key) const { return values.count(key) > 0; }
    std::string get_str(const std::string& key, const std::string& fallback = "") const;
    long get_int(const std::string& key, long fallback) const;
    double get_real(const std::string& key, double fallback) const;
    std::vector<long> get_int_list(const std::string& key) const; // comma separated

    void set(const std::string& key, const std::string& value);
};

// Shared plumbing for experiment construction.
Lattice lattice_from_config(const RunConfig& cfg);
ModelParams model_from_config(const RunConfig& cfg);
int site_at_distance(const Lattice& lattice, long distance); // along axis 0

// Three-step bound verification on one parameter set: the two-point estimate,
// its closed-form upper bound, and the split of that bound into a
// deterministic term plus a passage-time tail.  Each step must not exceed the
// next by more than three combined standard errors.
struct ChainReport {
    MCEstimate two_point;
    MCEstimate bound;
    MCEstimate tail;
    double deterministic_term = 0;
    double decomposition_total = 0;   // constant * (deterministic + tail)
    double decomposition_std_err = 0;
    bool first_link = false;
    bool second_link = false;
    bool pass() const { return first_link && second_link; }
};

ChainReport verify_corollary_chain(const RunConfig& cfg);

// Executes the experiment described by the config and writes <kind>.csv,
// <kind>.json and <kind>.txt into the output directory.  `pass` reflects
// verdict-style experiments (domination, chain); data sweeps report true.
struct ExperimentOutcome {
    bool pass = true;
    std::string summary;
    std::vector<std::string> files;
};

ExperimentOutcome run_experiment(const RunConfig& cfg);

} // namespace loopsim
