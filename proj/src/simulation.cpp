#include "echo/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <thread>

#include "echo/communication.hpp"

namespace echo {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

// Each trial owns a generator derived only from (seed, index), so results do not
// depend on scheduling.
std::mt19937_64 trial_stream(std::uint64_t seed, std::size_t index) {
    return std::mt19937_64(splitmix64(seed ^ (static_cast<std::uint64_t>(index) * 0x9E3779B97F4A7C15ULL)));
}

double u01(std::mt19937_64& g) { return static_cast<double>(g() >> 11) * 0x1.0p-53; }

int side_index(double bliss) { return bliss <= 0.5 ? 0 : 1; }

double type_indicator(CandidateType t) { return t == CandidateType::Moderate ? 1.0 : 0.0; }

double cost_units(const AdPlan& plan) {
    return plan.tech == Technology::None ? 0.0 : plan.intensity;
}

// Runs body(index) for every index in [0, n), split into contiguous chunks.
template <class Body>
void parallel_for(std::size_t n, unsigned jobs, Body&& body) {
    jobs = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(std::max<std::size_t>(n, 1))));
    if (jobs == 1) {
        body(0, n);
        return;
    }
    std::vector<std::thread> pool;
    const std::size_t chunk = (n + jobs - 1) / jobs;
    for (unsigned j = 0; j < jobs; ++j) {
        const std::size_t lo = j * chunk, hi = std::min(n, lo + chunk);
        if (lo >= hi) break;
        pool.emplace_back([&, lo, hi] { body(lo, hi); });
    }
    for (auto& t : pool) t.join();
}

}  // namespace

void SimConfig::validate() const {
    params.validate();
    profile.validate();
    if (beliefs) beliefs->validate();
    if (n_trials < 1) throw ModelError("n_trials", "must be at least 1");
    if (n_voters < 100) throw ModelError("n_voters", "must be at least 100");
    if (independents_mass && !(*independents_mass > 0.0 && *independents_mass < 1.0))
        throw ModelError("independents_mass", "must lie in (0,1)");
}

Population SimConfig::population() const {
    return independents_mass ? Population{*independents_mass} : Population::equal_density(params);
}

void TrialDraw::validate() const {
    const std::size_t n = bliss.size();
    const std::size_t links = n * static_cast<std::size_t>(k);
    if (k < 0) throw ModelError("draw.k", "must be non-negative");
    if (direct_L.size() != n || direct_R.size() != n)
        throw ModelError("draw.direct", "one exposure draw per voter and party");
    if (aligned.size() != links || link_L.size() != links || link_R.size() != links)
        throw ModelError("draw.links", "k link draws per voter");
    auto unit = [](const std::vector<double>& v, const char* field) {
        for (double x : v)
            if (!(x >= 0.0 && x < 1.0)) throw ModelError(field, "uniform draws must lie in [0,1)");
    };
    unit(direct_L, "draw.direct_L");
    unit(direct_R, "draw.direct_R");
    unit(link_L, "draw.link_L");
    unit(link_R, "draw.link_R");
    for (double b : bliss)
        if (!(b > 0.0 && b < 1.0)) throw ModelError("draw.bliss", "bliss points lie in (0,1)");
}

Simulator::Simulator(const SimConfig& config)
    : config_(config), conj_(config.beliefs ? *config.beliefs : config.profile),
      pop_(config.population()) {
    config_.validate();
    const ModelParams& p = config_.params;
    for (int side = 0; side < 2; ++side) {
        const Side s = side == 0 ? Side::Left : Side::Right;
        for (int party = 0; party < 2; ++party) {
            const Party J = party == 0 ? Party::L : Party::R;
            auto& table = silent_[side][party];
            table.assign(static_cast<std::size_t>(p.k) + 1, std::numeric_limits<double>::quiet_NaN());
            for (int a = 0; a <= p.k; ++a) {
                try {
                    table[a] = silent_moderate_probability(
                        p.sigma(J), conj_.exposure(J, CandidateType::Moderate, s),
                        conj_.exposure(J, CandidateType::Extremist, s), 1.0 + a);
                } catch (const ModelError&) {
                    // silence impossible under the conjecture; flagged if it ever occurs
                }
            }
        }
    }
    credible_[0].assign(kCells, 0);
    if (p.k >= 1) {
        const MessageGame game(p, conj_, p.k, p.beta_l, p.beta_r);
        for (int i = 0; i < kCells; ++i) {
            const double r = (i + 0.5) / kCells;
            credible_[0][i] = game.credible(game.receiver(r), r) ? 1 : 0;
        }
    }
}

void Simulator::draw(std::size_t trial_index, TrialDraw& out) const {
    const ModelParams& p = config_.params;
    auto g = trial_stream(config_.seed, trial_index);
    auto pick = [&](const std::optional<CandidateType>& fixed, double sigma) {
        const double u = u01(g);
        if (fixed) return *fixed;
        return u < sigma ? CandidateType::Moderate : CandidateType::Extremist;
    };
    out.theta.L = pick(config_.type_L, p.sigma_L);
    out.theta.R = pick(config_.type_R, p.sigma_R);
    out.mu = 0.5 - p.m / 4.0 + (p.m / 2.0) * u01(g);
    out.k = p.k;

    const std::size_t n = config_.n_voters;
    const std::size_t k = static_cast<std::size_t>(p.k);
    out.bliss.resize(n);
    out.direct_L.resize(n);
    out.direct_R.resize(n);
    out.aligned.resize(n * k);
    out.link_L.resize(n * k);
    out.link_R.resize(n * k);

    const double edge = 0.5 - p.m / 4.0;
    const double partisan = (1.0 - pop_.w) / 2.0;
    for (std::size_t v = 0; v < n; ++v) {
        const double group = u01(g);
        const double pos = u01(g);
        double b;
        if (group < partisan)
            b = pos * edge;
        else if (group < partisan + pop_.w)
            b = out.mu - p.tau + 2.0 * p.tau * pos;
        else
            b = 1.0 - edge + pos * edge;
        // keep bliss points strictly inside (0,1)
        out.bliss[v] = std::clamp(b, 0x1.0p-53, 1.0 - 0x1.0p-53);
        out.direct_L[v] = u01(g);
        out.direct_R[v] = u01(g);
        const double beta = p.beta(out.bliss[v] <= 0.5 ? Side::Left : Side::Right);
        for (std::size_t j = 0; j < k; ++j) {
            out.aligned[v * k + j] = u01(g) < beta ? 1 : 0;
            out.link_L[v * k + j] = u01(g);
            out.link_R[v * k + j] = u01(g);
        }
    }
}

TrialResult Simulator::run(const TrialDraw& d) const {
    const ModelParams& p = config_.params;
    if (d.k != p.k) throw ModelError("draw.k", "does not match the configured k");
    d.validate();
    const StrategyProfile& prof = config_.profile;
    double x[2][2];  // [side][party]
    for (int side = 0; side < 2; ++side) {
        const Side s = side == 0 ? Side::Left : Side::Right;
        x[side][0] = prof.exposure(Party::L, d.theta.L, s);
        x[side][1] = prof.exposure(Party::R, d.theta.R, s);
    }
    const double truth[2] = {type_indicator(d.theta.L), type_indicator(d.theta.R)};
    const std::size_t k = static_cast<std::size_t>(d.k);

    double sum_side[2] = {0.0, 0.0};
    std::size_t count_side[2] = {0, 0};
    std::size_t votes_L = 0, knows_L = 0, knows_R = 0;
    for (std::size_t v = 0; v < d.voters(); ++v) {
        const double b = d.bliss[v];
        const int side = side_index(b);
        bool informed[2] = {d.direct_L[v] < x[side][0], d.direct_R[v] < x[side][1]};
        int sources = 0;
        if (k > 0) {
            const int cell = std::min(kCells - 1, static_cast<int>(b * kCells));
            if (credible_[0][cell]) {
                // an aligned peer reports her own observations truthfully
                for (std::size_t j = 0; j < k; ++j) {
                    if (!d.aligned[v * k + j]) continue;
                    ++sources;
                    informed[0] = informed[0] || d.link_L[v * k + j] < x[side][0];
                    informed[1] = informed[1] || d.link_R[v * k + j] < x[side][1];
                }
            }
        }
        double moderate[2];
        for (int party = 0; party < 2; ++party) {
            if (informed[party]) {
                moderate[party] = truth[party];
                continue;
            }
            moderate[party] = silent_[side][party][sources];
            if (std::isnan(moderate[party]))
                throw SimulationError("voter observed silence that the conjecture rules out");
        }
        knows_L += informed[0];
        knows_R += informed[1];
        const double istar = 0.5 + p.m / 4.0 * (moderate[0] - moderate[1]);
        sum_side[side] += side == 0 ? std::min(istar, 0.5) : std::max(istar - 0.5, 0.0);
        ++count_side[side];
        if (b <= istar) ++votes_L;
    }
    if (count_side[0] == 0 || count_side[1] == 0)
        throw SimulationError("a trial sampled no voters on one side; increase n_voters");

    TrialResult r;
    r.theta = d.theta;
    r.mu = d.mu;
    r.mean_indifferent = sum_side[0] / count_side[0] + sum_side[1] / count_side[1];
    const double n = static_cast<double>(d.voters());
    r.finite_share = votes_L / n;
    r.finite_winner_L = r.finite_share > 0.5;
    ElectionOptions opts;
    opts.beliefs = &conj_;
    opts.exposure = Exposure::PerLink;
    opts.same_type = SameTypeStates::Unilateral;
    r.exact_share = population_vote_share(prof, d.theta, p, pop_, d.mu, opts);
    r.exact_winner_L = r.exact_share > 0.5;
    r.informed_L = knows_L / n;
    r.informed_R = knows_R / n;
    return r;
}

double Simulator::utility_L(const TrialDraw& d, const TrialResult& result) const {
    const ModelParams& p = config_.params;
    const double t_l = position(d.theta.L, p);
    const double t_r = position(d.theta.R, p);
    const double pi = win_probability(result.mean_indifferent, p);
    return pi * (1.0 - t_r - t_l) + (p.e() - (1.0 - t_r)) -
           p.c * cost_units(config_.profile.L.plan(d.theta.L));
}

TrialResult run_trial(const TrialDraw& draw, const StrategyProfile& profile,
                      const ModelParams& params) {
    draw.validate();
    SimConfig cfg;
    cfg.params = params;
    cfg.profile = profile;
    cfg.n_voters = std::max<std::size_t>(draw.voters(), 100);
    const Simulator sim(cfg);
    return sim.run(draw);
}

Estimate summarize(const std::vector<double>& samples) {
    Estimate e;
    e.n = samples.size();
    if (e.n == 0) {
        e.flagged = true;
        return e;
    }
    double mean = 0.0, m2 = 0.0;
    std::size_t i = 0;
    for (double x : samples) {
        ++i;
        const double delta = x - mean;
        mean += delta / static_cast<double>(i);
        m2 += delta * (x - mean);
    }
    e.mean = mean;
    if (e.n < 2) {
        e.flagged = true;
        return e;
    }
    e.std_error = std::sqrt(m2 / static_cast<double>(e.n - 1)) / std::sqrt(static_cast<double>(e.n));
    return e;
}

SimulationRun simulate(const SimConfig& config) {
    const Simulator sim(config);
    const std::size_t n = config.n_trials;
    std::vector<TrialResult> results(n);
    std::vector<double> utility(n);
    parallel_for(n, config.jobs, [&](std::size_t lo, std::size_t hi) {
        TrialDraw d;
        for (std::size_t t = lo; t < hi; ++t) {
            sim.draw(t, d);
            results[t] = sim.run(d);
            utility[t] = sim.utility_L(d, results[t]);
        }
    });

    auto collect = [&](auto&& f) {
        std::vector<double> v(n);
        for (std::size_t t = 0; t < n; ++t) v[t] = f(results[t]);
        return summarize(v);
    };
    SimulationRun out;
    out.vote_share = collect([](const TrialResult& r) { return r.mean_indifferent; });
    out.win_prob_map = collect(
        [&](const TrialResult& r) { return win_probability(r.mean_indifferent, config.params); });
    out.win_prob_majority = collect([](const TrialResult& r) { return r.exact_winner_L ? 1.0 : 0.0; });
    out.finite_majority = collect([](const TrialResult& r) { return r.finite_winner_L ? 1.0 : 0.0; });
    out.informed_L = collect([](const TrialResult& r) { return r.informed_L; });
    out.informed_R = collect([](const TrialResult& r) { return r.informed_R; });
    out.party_utility = summarize(utility);
    if (config.record_level == RecordLevel::PerTrial) out.trials = std::move(results);
    return out;
}

Estimate estimate(const SimConfig& config, Quantity quantity) {
    const SimulationRun run = simulate(config);
    switch (quantity) {
        case Quantity::VoteShare: return run.vote_share;
        case Quantity::WinProbMap: return run.win_prob_map;
        case Quantity::WinProbMajority: return run.win_prob_majority;
        case Quantity::PartyUtility: return run.party_utility;
        case Quantity::InformedL: return run.informed_L;
    }
    return {};
}

BestResponseReport best_response_check(const ModelParams& params,
                                       const StrategyProfile& opponent, double grid_step,
                                       const BestResponseOptions& opts) {
    if (!(grid_step > 0.0 && grid_step <= 0.05))
        throw ModelError("grid_step", "must lie in (0, 0.05]");

    std::vector<AdPlan> plans{AdPlan::none()};
    const int steps = static_cast<int>(std::floor(1.0 / grid_step + 1e-9));
    for (int i = 1; i <= steps; ++i) plans.push_back(AdPlan::random(std::min(1.0, i * grid_step)));
    plans.push_back(AdPlan::target_own());
    plans.push_back(AdPlan::target_opponent());

    std::vector<Simulator> sims;
    sims.reserve(plans.size());
    BestResponseReport report{};
    for (const AdPlan& plan : plans) {
        SimConfig cfg;
        cfg.n_trials = opts.n_trials;
        cfg.n_voters = opts.n_voters;
        cfg.seed = opts.seed;
        cfg.params = params;
        cfg.profile.L.moderate = plan;
        cfg.profile.R = opponent.R;
        cfg.type_L = CandidateType::Moderate;
        sims.emplace_back(cfg);
        ElectionOptions eo;
        eo.exposure = Exposure::PerLink;
        eo.same_type = SameTypeStates::Unilateral;
        report.candidates.push_back(
            {plan.tech, plan.intensity, {},
             party_utility(cfg.profile, Party::L, CandidateType::Moderate, params, eo)});
    }

    const std::size_t n = opts.n_trials;
    std::vector<std::vector<double>> utility(plans.size(), std::vector<double>(n));
    parallel_for(n, opts.jobs, [&](std::size_t lo, std::size_t hi) {
        TrialDraw d;
        for (std::size_t t = lo; t < hi; ++t) {
            sims.front().draw(t, d);  // draws do not depend on the profile
            for (std::size_t c = 0; c < sims.size(); ++c)
                utility[c][t] = sims[c].utility_L(d, sims[c].run(d));
        }
    });
    for (std::size_t c = 0; c < plans.size(); ++c) report.candidates[c].utility = summarize(utility[c]);

    std::size_t best = 0;
    for (std::size_t c = 1; c < plans.size(); ++c)
        if (report.candidates[c].utility.mean > report.candidates[best].utility.mean) best = c;
    report.empirical_best = report.candidates[best].tech;
    report.empirical_intensity = report.candidates[best].intensity;

    report.min_gap_lower_bound = std::numeric_limits<double>::infinity();
    for (Technology tech : {Technology::None, Technology::Random, Technology::TargetOwnSide,
                            Technology::TargetOpponentSide}) {
        if (tech == report.empirical_best) continue;
        std::size_t rival = plans.size();
        for (std::size_t c = 0; c < plans.size(); ++c) {
            if (report.candidates[c].tech != tech) continue;
            if (rival == plans.size() ||
                report.candidates[c].utility.mean > report.candidates[rival].utility.mean)
                rival = c;
        }
        std::vector<double> gap(n);
        for (std::size_t t = 0; t < n; ++t) gap[t] = utility[best][t] - utility[rival][t];
        const Estimate g = summarize(gap);
        report.min_gap_lower_bound = std::min(report.min_gap_lower_bound, g.mean - 3.0 * g.std_error);
    }
    report.conclusive = report.min_gap_lower_bound > 0.0;
    report.predicted = targeting_analysis(params).regime;
    report.matches = report.conclusive && report.predicted == report.empirical_best;
    return report;
}

}  // namespace echo
