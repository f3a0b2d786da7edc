// Command-line front end: run, sweep, validate and report scenario configs.
// Exit status: 0 all verdicts pass, 1 some verdict failed, 2 usage or config error.

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <mutex>
#include <thread>

#include "echo/harness.hpp"

namespace {

constexpr int kExitPass = 0;
constexpr int kExitVerdictFailure = 1;
constexpr int kExitConfigError = 2;

std::filesystem::path default_out_dir() {
    if (const char* env = std::getenv("ECHO_OUT_DIR"); env && *env) return env;
    return "results";
}

struct Common {
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> trials;
    std::string out_dir;
    std::string format = "csv";
    unsigned jobs = 1;
};

void add_common(CLI::App* cmd, Common& c) {
    cmd->add_option("--seed", c.seed, "Override the simulation seed");
    cmd->add_option("--trials", c.trials, "Override the number of simulated trials")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--out-dir", c.out_dir,
                    "Output directory (default: $ECHO_OUT_DIR or ./results)");
    cmd->add_option("--format", c.format, "Output format")
        ->check(CLI::IsMember({"csv", "json"}));
    cmd->add_option("--jobs", c.jobs, "Worker threads")->check(CLI::Range(1u, 256u));
}

std::filesystem::path prepare_dir(const Common& c) {
    std::filesystem::path dir = c.out_dir.empty() ? default_out_dir() : std::filesystem::path(c.out_dir);
    std::filesystem::create_directories(dir);
    return dir;
}

void print_verdicts(const echo::RunResult& r) {
    std::size_t failed = 0;
    for (const auto& v : r.verdicts) {
        if (!v.pass) {
            ++failed;
            std::cout << "  FAIL " << v.name << " (margin " << echo::format_number(v.margin) << ")\n";
        }
    }
    std::cout << r.scenario << ": " << r.verdicts.size() - failed << "/" << r.verdicts.size()
              << " verdicts pass\n";
}

int run_one(const std::string& config, const Common& c) {
    const echo::Scenario s =
        echo::apply_overrides(echo::load_scenario(config), {c.seed, c.trials});
    const echo::Format fmt = echo::format_from_string(c.format);
    const auto dir = prepare_dir(c);
    const echo::RunResult r = echo::run_scenario(s, c.jobs);
    echo::write_result(r, dir, fmt);
    for (echo::PlotKind k : s.plots) echo::emit_plot_data(s, r, k, dir, fmt);
    print_verdicts(r);
    return r.all_pass() ? kExitPass : kExitVerdictFailure;
}

int run_sweep(const std::string& config, const Common& c) {
    const echo::Scenario base =
        echo::apply_overrides(echo::load_scenario(config), {c.seed, c.trials});
    if (base.sweep.empty()) throw echo::ConfigError("sweep: config has no sweep axes");
    const echo::Format fmt = echo::format_from_string(c.format);
    const auto dir = prepare_dir(c);
    const std::vector<echo::Scenario> points = echo::expand_sweep(base);
    std::vector<echo::RunResult> results(points.size());

    // points run concurrently; every file is written afterwards in point order
    std::size_t next = 0;
    std::mutex lock;
    std::exception_ptr error;
    auto worker = [&] {
        for (;;) {
            std::size_t i;
            {
                std::lock_guard<std::mutex> g(lock);
                if (next >= points.size() || error) return;
                i = next++;
            }
            try {
                results[i] = echo::run_scenario(points[i], 1);
            } catch (...) {
                std::lock_guard<std::mutex> g(lock);
                if (!error) error = std::current_exception();
            }
        }
    };
    std::vector<std::thread> pool;
    const unsigned n = std::max(1u, std::min<unsigned>(c.jobs, static_cast<unsigned>(points.size())));
    for (unsigned j = 0; j < n; ++j) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);

    bool ok = true;
    for (std::size_t i = 0; i < points.size(); ++i) {
        echo::write_result(results[i], dir, fmt);
        for (echo::PlotKind k : points[i].plots) echo::emit_plot_data(points[i], results[i], k, dir, fmt);
        print_verdicts(results[i]);
        ok = ok && results[i].all_pass();
    }
    echo::write_sweep_table(base.name, base.sweep, points, results, dir, fmt);
    return ok ? kExitPass : kExitVerdictFailure;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Election advertising and voter echo-chamber laboratory"};
    app.require_subcommand(1);
    app.set_version_flag("--version", echo::kToolVersion);

    Common run_opts, sweep_opts;
    std::string run_config, sweep_config, validate_config, report_dir;

    auto* run = app.add_subcommand("run", "Run one scenario");
    run->add_option("config", run_config, "Scenario config (JSON)")->required();
    add_common(run, run_opts);

    auto* sweep = app.add_subcommand("sweep", "Run the Cartesian product of a scenario's sweep axes");
    sweep->add_option("config", sweep_config, "Scenario config (JSON)")->required();
    add_common(sweep, sweep_opts);

    auto* validate = app.add_subcommand("validate", "Check a scenario config without running it");
    validate->add_option("config", validate_config, "Scenario config (JSON)")->required();

    auto* rep = app.add_subcommand("report", "Summarize verdicts of every result file in a directory");
    rep->add_option("results_dir", report_dir, "Directory with result files")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitPass : kExitConfigError;
    }

    try {
        if (*run) return run_one(run_config, run_opts);
        if (*sweep) return run_sweep(sweep_config, sweep_opts);
        if (*validate) {
            const echo::Scenario s = echo::load_scenario(validate_config);
            if (!s.sweep.empty()) echo::expand_sweep(s);
            std::cout << s.name << ": config ok\n";
            return kExitPass;
        }
        if (*rep) {
            const echo::ReportSummary sum = echo::report(report_dir);
            std::cout << sum.text;
            return sum.failures == 0 ? kExitPass : kExitVerdictFailure;
        }
    } catch (const echo::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfigError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfigError;
    }
    return kExitConfigError;
}
