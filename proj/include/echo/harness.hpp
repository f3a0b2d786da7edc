#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "echo/model.hpp"
#include "echo/simulation.hpp"

namespace echo {

inline constexpr const char* kToolVersion = "0.1.0";

// Bad configuration or usage; front ends map this to exit status 2.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct SimSpec {
    std::size_t trials = 10000;
    std::size_t voters = 100;
    std::uint64_t seed = 1;
    std::optional<CandidateType> type_L;
    std::optional<CandidateType> type_R;
    std::optional<double> independents_mass;
};

struct SweepAxis {
    std::string name;
    std::vector<double> values;
};

enum class PlotKind { ChamberMap, RegimeDiagram, ThresholdCurves };

struct Expectation {
    std::string key;
    double value;
};

struct Scenario {
    std::string name;
    ModelParams params;
    bool solve_profile = true;  // profile from the random-advertising solver
    StrategyProfile profile;
    std::optional<SimSpec> sim;
    std::vector<SweepAxis> sweep;
    std::vector<Expectation> expect;
    double expect_tolerance = 1e-12;
    std::vector<PlotKind> plots;
    double chamber_step = 0.005;
    nlohmann::json source;  // normalized config, hashed for provenance
};

Scenario parse_scenario(const nlohmann::json& config);
Scenario load_scenario(const std::filesystem::path& path);

// Command-line overrides, applied before hashing so provenance reflects them.
struct Overrides {
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> trials;
};
Scenario apply_overrides(Scenario s, const Overrides& o);

// Sets a parameter by name; "beta" and "sigma" set both sides.
void set_parameter(ModelParams& params, const std::string& name, double value);

// Cartesian product of the sweep axes, first axis varying slowest.
std::vector<Scenario> expand_sweep(const Scenario& base);

struct Verdict {
    std::string name;
    bool pass;
    double margin;  // tolerance minus observed discrepancy; negative on failure
};

struct RunResult {
    std::string scenario;
    std::uint64_t seed = 0;
    std::string version = kToolVersion;
    std::string scenario_hash;
    nlohmann::ordered_json analytic;    // flat key -> value
    nlohmann::ordered_json simulation;  // empty when no simulation was configured
    std::vector<Verdict> verdicts;
    StrategyProfile profile;

    bool all_pass() const;
};

RunResult run_scenario(const Scenario& s, unsigned jobs = 1);

enum class Format { Csv, Json };
Format format_from_string(const std::string& s);
const char* extension(Format f);

// Shortest-free fixed formatting: 17 significant digits, locale independent.
std::string format_number(double v);
// Serializes with format_number for every floating value; NaN and infinities become null.
std::string to_json_text(const nlohmann::ordered_json& j);

std::string scenario_hash(const nlohmann::json& normalized);

void write_result(const RunResult& r, const std::filesystem::path& dir, Format f);
// One row per sweep point with the axis values and the main analytic outputs.
void write_sweep_table(const std::string& name, const std::vector<SweepAxis>& axes,
                       const std::vector<Scenario>& points, const std::vector<RunResult>& results,
                       const std::filesystem::path& dir, Format f);

void emit_plot_data(const Scenario& s, const RunResult& r, PlotKind kind,
                    const std::filesystem::path& dir, Format f);
const char* to_string(PlotKind k);

struct ReportSummary {
    std::size_t files = 0;
    std::size_t verdicts = 0;
    std::size_t failures = 0;
    std::string text;
};
// Reads every result file in `dir` and tallies verdicts.
ReportSummary report(const std::filesystem::path& dir);

}  // namespace echo
