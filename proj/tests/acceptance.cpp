// Acceptance battery: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "echo/communication.hpp"
#include "echo/harness.hpp"
#include "echo/party.hpp"
#include "echo/simulation.hpp"

using namespace echo;

namespace {

constexpr State kME{CandidateType::Moderate, CandidateType::Extremist};

struct Outcome {
    bool pass;
    std::string detail;
};

int failures = 0;

void criterion(int id, const char* title, const std::function<Outcome()>& body) {
    const auto start = std::chrono::steady_clock::now();
    Outcome out;
    try {
        out = body();
    } catch (const std::exception& e) {
        out = {false, std::string("exception: ") + e.what()};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (!out.pass) ++failures;
    std::printf("%s %2d %s: %s [%.1f s]\n", out.pass ? "PASS" : "FAIL", id, title,
                out.detail.c_str(), secs);
    std::fflush(stdout);
}

std::string fmt(const char* pattern, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, pattern, args...);
    return buf;
}

ModelParams point(double sigma, double m, double c, int k, double beta) {
    ModelParams p;
    p.sigma_L = p.sigma_R = sigma;
    p.m = m;
    p.tau = std::min(0.05, 2 * (0.25 - m) - 1e-3);
    p.c = c;
    p.k = k;
    p.beta_l = p.beta_r = beta;
    p.validate();
    return p;
}

double cutoff_by_hand(double m, double sigma, double x, double beta, int k, bool right) {
    const double silent = 1 - sigma + sigma * std::pow(1 - x, beta * k + 1);
    const double half = m / 4 * (1 - sigma) / silent;
    return right ? 0.5 + half : 0.5 - half;
}

unsigned threads() { return std::max(1u, std::thread::hardware_concurrency()); }

Outcome echo_chamber_oracle() {
    const double step = 1e-3;
    std::size_t compared = 0, mismatches = 0;
    for (int k : {1, 2, 5})
        for (double beta : {0.3, 0.8}) {
            const ModelParams p = point(0.5, 0.2, 0.02, k, beta);
            const auto prof = symmetric_random(0.5);
            const TruthfulRegion region = map_truthful_region(p, prof, step);
            const EchoCutoffs q = echo_cutoffs(p, 0.5, 0.5);
            auto near = [&](double v) {
                return std::abs(v - q.q_l) < step || std::abs(v - 0.5) < step ||
                       std::abs(v - q.q_r) < step;
            };
            for (std::size_t is = 0; is < region.grid.size(); ++is) {
                const double s = region.grid[is];
                if (near(s)) continue;
                for (std::size_t ir = 0; ir < region.grid.size(); ++ir) {
                    const double r = region.grid[ir];
                    if (near(r)) continue;
                    const bool both_left = s > q.q_l && s < 0.5 && r > q.q_l && r < 0.5;
                    const bool both_right = s > 0.5 && s < q.q_r && r > 0.5 && r < q.q_r;
                    const bool expected = r < q.q_l || r > q.q_r || both_left || both_right;
                    ++compared;
                    if (region.at(is, ir) != expected) ++mismatches;
                }
            }
        }
    return {mismatches == 0, fmt("6 points, %zu cells compared, %zu mismatches", compared, mismatches)};
}

Outcome cutoff_values() {
    const ModelParams p = point(0.5, 0.2, 0.02, 2, 0.5);
    const double half = echo_cutoffs(p, 0.5, 0.5).q_r;
    const double none = echo_cutoffs(p, 0.5, 0.0).q_r;
    const double err = std::max({std::abs(half - 0.54), std::abs(none - 0.525),
                                 std::abs(half - cutoff_by_hand(0.2, 0.5, 0.5, 0.5, 2, true))});
    return {err <= 1e-12, fmt("q_r(x=0.5)=%.15g q_r(x=0)=%.15g max error %.1e", half, none, err)};
}

Outcome monotonicity() {
    const int ks[] = {1, 2, 3, 5, 8};
    const double betas[] = {0.1, 0.3, 0.5, 0.7, 0.9};
    const double xs[] = {0.0, 0.25, 0.5, 0.75, 1.0};
    auto q = [&](int ik, int ib, int ix) {
        return echo_cutoffs(point(0.5, 0.2, 0.02, ks[ik], betas[ib]), xs[ix], xs[ix]);
    };
    std::size_t checks = 0, violations = 0;
    for (int ik = 0; ik < 5; ++ik)
        for (int ib = 0; ib < 5; ++ib)
            for (int ix = 0; ix < 5; ++ix) {
                const EchoCutoffs here = q(ik, ib, ix);
                for (int dir = 0; dir < 3; ++dir) {
                    const int jk = ik + (dir == 0), jb = ib + (dir == 1), jx = ix + (dir == 2);
                    if (jk > 4 || jb > 4 || jx > 4) continue;
                    const EchoCutoffs next = q(jk, jb, jx);
                    checks += 2;
                    if (next.q_r < here.q_r) ++violations;
                    if (next.q_l > here.q_l) ++violations;
                }
            }
    return {violations == 0, fmt("%zu finite differences, %zu violations", checks, violations)};
}

Outcome threshold_ordering() {
    std::size_t points = 0, violations = 0;
    for (int is = 1; is <= 9; ++is)
        for (int im = 5; im <= 24; ++im) {
            const auto t = benchmark_thresholds(point(is / 10.0, im / 100.0, 0.02, 2, 0.5));
            ++points;
            if (!(t.c0 < t.c_tau)) ++violations;
        }
    const auto t = benchmark_thresholds(point(0.5, 0.2, 0.02, 2, 0.5));
    const double err = std::max(std::abs(t.c0 - 0.04375), std::abs(t.c_tau - 0.325));
    return {violations == 0 && err <= 1e-12,
            fmt("%zu points, %zu violations; c0=%.15g c_tau=%.15g", points, violations, t.c0, t.c_tau)};
}

Outcome extremist_advertising() {
    std::size_t checks = 0, violations = 0;
    for (int is = 1; is <= 10; ++is)
        for (int im = 1; im <= 10; ++im) {
            const ModelParams p = point(is / 11.0, im * 0.024, 0.02, 2, 0.5);
            const RandomAdSolution sol = solve_random_ad(p);
            const StrategyProfile base = symmetric_random(sol.x);
            const double zero = party_utility(base, Party::L, CandidateType::Extremist, p);
            for (int ix = 1; ix <= 10; ++ix) {
                StrategyProfile dev = base;
                dev.L.extremist = AdPlan::random(ix / 10.0);
                ++checks;
                if (!(party_utility(dev, Party::L, CandidateType::Extremist, p) < zero)) ++violations;
            }
        }
    return {violations == 0, fmt("%zu deviations, %zu not strictly worse", checks, violations)};
}

Outcome random_ad_best_response() {
    struct Pt { double sigma, m, c; int k; double beta; };
    const Pt pts[] = {{0.5, 0.2, 0.02, 2, 0.5}, {0.5, 0.2, 0.01, 1, 0.3}, {0.3, 0.15, 0.02, 3, 0.7},
                      {0.7, 0.2, 0.005, 5, 0.5}, {0.5, 0.1, 0.01, 2, 0.9}, {0.4, 0.2, 0.03, 1, 0.8},
                      {0.5, 0.2, 0.5, 2, 0.5},   {0.6, 0.05, 0.002, 4, 0.2}};
    double worst = -1.0;
    for (const Pt& t : pts) {
        const ModelParams p = point(t.sigma, t.m, t.c, t.k, t.beta);
        const RandomAdSolution sol = solve_random_ad(p);
        const StrategyProfile conjecture = symmetric_random(sol.x);
        ElectionOptions opts;
        opts.beliefs = &conjecture;
        auto utility = [&](double x) {
            StrategyProfile prof = conjecture;
            prof.L.moderate.intensity = x;
            return party_utility(prof, Party::L, CandidateType::Moderate, p, opts);
        };
        const double at = utility(sol.x);
        for (int i = 0; i <= 1000; ++i) worst = std::max(worst, utility(i / 1000.0) - at);
    }
    return {worst <= 1e-9, fmt("8 points, largest grid gain over x* %.2e", worst)};
}

Outcome monte_carlo() {
    std::size_t comparisons = 0, outside = 0;
    double worst_z = 0.0;
    for (int k : {0, 1, 2, 5})
        for (double beta : {0.2, 0.5, 0.9}) {
            const ModelParams p = point(0.5, 0.2, 0.02, k, beta);
            const RandomAdSolution sol = solve_random_ad(p);
            const double x = sol.x > 0 && sol.x < 1 ? sol.x : 0.5;
            SimConfig c;
            c.params = p;
            c.profile = symmetric_random(x);
            c.n_trials = 100000;
            c.seed = 7;
            c.type_L = CandidateType::Moderate;
            c.type_R = CandidateType::Extremist;
            c.jobs = threads();
            const SimulationRun run = simulate(c);
            ElectionOptions opts;
            opts.exposure = Exposure::PerLink;
            opts.same_type = SameTypeStates::Unilateral;
            const double mu = vote_share(c.profile, kME, p, opts);
            const double pairs[][2] = {
                {run.vote_share.mean - mu, run.vote_share.std_error},
                {run.win_prob_map.mean - win_probability(mu, p), run.win_prob_map.std_error},
                {run.win_prob_majority.mean -
                     majority_win_probability(c.profile, kME, p, c.population(), opts),
                 run.win_prob_majority.std_error}};
            for (const auto& d : pairs) {
                ++comparisons;
                if (std::abs(d[0]) > 3 * d[1] + 1e-12) ++outside;
                if (d[1] > 0) worst_z = std::max(worst_z, std::abs(d[0]) / d[1]);
            }
        }
    return {outside == 0, fmt("12 scenarios x 3 quantities at 1e5 trials, %zu outside 3 SE, max |z| %.2f",
                              outside, worst_z)};
}

Outcome regime_diagram() {
    struct Pt { int k; double beta, c; };
    const Pt pts[] = {{10, 0.9, 0.02}, {10, 0.9, 0.05}, {10, 0.9, 0.10},
                      {1, 0.2, 0.02},  {1, 0.5, 0.05},  {2, 0.5, 0.10},
                      {1, 0.5, 0.35},  {2, 0.5, 0.35},  {5, 0.5, 0.35}};
    int matched = 0;
    std::string detail;
    for (const Pt& t : pts) {
        const ModelParams p = point(0.5, 0.2, t.c, t.k, t.beta);
        const RandomAdSolution sol = solve_random_ad(p);
        StrategyProfile opponent = symmetric_random(sol.x);
        if (!sol.advertise) opponent.R.moderate = AdPlan::none();
        BestResponseOptions opts;
        opts.n_trials = 20000;
        opts.seed = 8;
        opts.jobs = threads();
        const BestResponseReport rep = best_response_check(p, opponent, 0.05, opts);
        const bool ok = rep.matches && rep.conclusive;
        matched += ok;
        detail += fmt("\n     k=%d beta=%.1f c=%.2f predicted %s, empirical %s%s", t.k, t.beta,
                      t.c, to_string(rep.predicted), to_string(rep.empirical_best),
                      rep.conclusive ? "" : " (inconclusive)");
    }
    return {matched == 9, fmt("%d of 9 points match", matched) + detail};
}

Outcome own_side_targeting() {
    std::size_t points = 0, violations = 0, silent_violations = 0;
    double worst = 0.0, silent_gap = 0.0;
    for (int is = 1; is <= 9; ++is)
        for (int im = 1; im <= 4; ++im)
            for (double c : {0.01, 0.05, 0.1})
                for (int ix = 0; ix <= 10; ++ix) {
                    ModelParams p = point(is / 10.0, 0.06 * im, c, 2, 0.5);
                    p.tau = 0.01;
                    const double x_R = ix / 10.0;
                    StrategyProfile own = StrategyProfile::random_moderates(0.0, x_R);
                    own.L.moderate = AdPlan::target_own();
                    StrategyProfile none = StrategyProfile::random_moderates(0.0, x_R);
                    none.L.moderate = AdPlan::none();
                    if (ix == 0) own.R.moderate = none.R.moderate = AdPlan::none();
                    const double gain = party_utility(own, Party::L, CandidateType::Moderate, p) -
                                        party_utility(none, Party::L, CandidateType::Moderate, p);
                    ++points;
                    if (gain > 0) {
                        ++violations;
                        worst = std::max(worst, gain);
                    }
                    if (ix == 0) {
                        silent_gap = std::max(silent_gap, std::abs(gain + c));
                        if (gain > 0) ++silent_violations;
                    }
                }
    return {violations == 0,
            fmt("%zu grid points, %zu where own-side targeting beats no advertising (largest gain %.4f)"
                "\n     against a non-advertising opponent: %zu violations, U_own - U_none = -c to %.1e",
                points, violations, worst, silent_violations, silent_gap)};
}

Outcome mixed_equilibrium() {
    struct Pt { int k; double beta, c; };
    const Pt mixed[] = {{2, 0.5, 0.01}, {1, 0.3, 0.005}, {3, 0.8, 0.02}, {5, 0.5, 0.002}, {2, 0.3, 0.02}};
    double worst_residual = 0.0, worst_indifference = 0.0;
    int mixed_found = 0;
    std::string problems;
    for (const Pt& t : mixed) {
        const ModelParams p = point(0.5, 0.2, t.c, t.k, t.beta);
        CandidateSelection sel;
        try {
            sel = solve_candidate_selection(p);
        } catch (const SolverError& e) {
            problems += fmt("\n     k=%d beta=%.1f c=%.3f: %s", t.k, t.beta, t.c, e.what());
            continue;
        }
        if (sel.regime != CandidateRegime::Mixed) continue;
        ++mixed_found;
        worst_residual = std::max({worst_residual, std::abs(sel.residuals[0]), std::abs(sel.residuals[1])});
        ModelParams at = p;
        at.sigma_L = at.sigma_R = sel.sigma;
        const StrategyProfile prof = symmetric_random(sel.x);
        worst_indifference = std::max(
            worst_indifference,
            std::abs(party_utility(prof, Party::L, CandidateType::Moderate, at) -
                     party_utility(prof, Party::L, CandidateType::Extremist, at)));
    }
    std::size_t above = 0, extremist = 0;
    for (int k : {1, 2, 5})
        for (double beta : {0.1, 0.5, 0.9})
            for (double c : {0.02, 0.05, 0.1, 0.2, 0.5, 1.0, 2.0}) {
                const ModelParams p = point(0.5, 0.2, c, k, beta);
                double threshold;
                try {
                    threshold = c_bar(p);
                } catch (const SolverError&) {
                    continue;  // threshold undefined at this point
                }
                if (c >= threshold) {
                    const CandidateSelection sel = solve_candidate_selection(p);
                    ++above;
                    if (sel.regime == CandidateRegime::AllExtremist && sel.sigma == 0 && sel.x == 0)
                        ++extremist;
                }
            }
    const bool pass = mixed_found == 5 && worst_residual < 1e-10 && worst_indifference < 1e-8 &&
                      above > 0 && extremist == above;
    return {pass, fmt("%d/5 mixed, max residual %.1e, max indifference gap %.1e; "
                      "all-extremist at %zu/%zu points with c >= c_bar",
                      mixed_found, worst_residual, worst_indifference, extremist, above) +
                      problems};
}

Outcome benchmark_reduction() {
    std::size_t inexact = 0, wrong = 0, cases = 0;
    for (int i = 0; i <= 1000; ++i)
        for (double beta : {0.1, 0.5, 0.9})
            if (informed_fraction(i / 1000.0, 0, beta) != i / 1000.0) ++inexact;
    for (int is = 1; is <= 9; ++is)
        for (int im = 1; im <= 8; ++im) {
            ModelParams p = point(is / 10.0, im * 0.03, 0.01, 0, 0.5);
            const double c0 = benchmark_thresholds(p).c0;
            for (double factor : {0.5, 0.99, 1.01, 2.0}) {
                p.c = factor * c0;
                const RandomAdSolution sol = solve_random_ad(p);
                const bool expect_ads = factor < 1;
                ++cases;
                if (sol.advertise != expect_ads || sol.x != (expect_ads ? 1.0 : 0.0)) ++wrong;
            }
        }
    return {inexact == 0 && wrong == 0,
            fmt("informed fraction inexact at %zu points; bang-bang wrong in %zu/%zu cases", inexact,
                wrong, cases)};
}

std::string read_bytes(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

Outcome determinism() {
    const Scenario s = load_scenario(std::filesystem::path(ECHO_CONFIG_DIR) / "baseline.json");
    const auto root = std::filesystem::temp_directory_path() / "echo_acceptance_determinism";
    std::filesystem::remove_all(root);
    std::size_t files = 0, differing = 0;
    for (Format f : {Format::Csv, Format::Json}) {
        std::vector<std::filesystem::path> dirs;
        for (unsigned jobs : {1u, 1u, 4u}) {
            const auto dir = root / (std::string(extension(f) + 1) + std::to_string(dirs.size()));
            std::filesystem::create_directories(dir);
            const RunResult r = run_scenario(s, jobs);
            write_result(r, dir, f);
            for (PlotKind k : s.plots) emit_plot_data(s, r, k, dir, f);
            dirs.push_back(dir);
        }
        for (const auto& entry : std::filesystem::directory_iterator(dirs[0])) {
            const auto name = entry.path().filename();
            const std::string first = read_bytes(entry.path());
            ++files;
            for (std::size_t i = 1; i < dirs.size(); ++i)
                if (read_bytes(dirs[i] / name) != first) ++differing;
        }
    }
    std::filesystem::remove_all(root);
    return {differing == 0 && files > 0,
            fmt("%zu files compared across 3 runs each, %zu differ", files, differing)};
}

}  // namespace

int main() {
    criterion(1, "echo-chamber oracle equivalence", echo_chamber_oracle);
    criterion(2, "cutoff values", cutoff_values);
    criterion(3, "cutoff monotonicity", monotonicity);
    criterion(4, "benchmark threshold ordering", threshold_ordering);
    criterion(5, "extremists are never advertised", extremist_advertising);
    criterion(6, "random-advertising best response", random_ad_best_response);
    criterion(7, "Monte Carlo agreement", monte_carlo);
    criterion(8, "regime diagram by simulated best response", regime_diagram);
    criterion(9, "own-side targeting dominated by no advertising", own_side_targeting);
    criterion(10, "mixed candidate-selection solver", mixed_equilibrium);
    criterion(11, "no-network reduction", benchmark_reduction);
    criterion(12, "byte-identical reruns", determinism);
    std::printf("%d of 12 criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
