#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "echo/simulation.hpp"

using namespace echo;

namespace {

constexpr State kME{CandidateType::Moderate, CandidateType::Extremist};

SimConfig config(double x, int k, double beta, std::size_t trials, std::uint64_t seed) {
    SimConfig c;
    c.n_trials = trials;
    c.seed = seed;
    c.params.k = k;
    c.params.beta_l = c.params.beta_r = beta;
    c.profile = symmetric_random(x);
    c.type_L = CandidateType::Moderate;
    c.type_R = CandidateType::Extremist;
    return c;
}

bool within(const Estimate& e, double target, double slack = 0.0) {
    return std::abs(e.mean - target) <= 3.0 * e.std_error + slack + 1e-12;
}

}  // namespace

TEST_CASE("summary statistics") {
    const Estimate e = summarize({1.0, 2.0, 3.0, 4.0});
    CHECK(e.mean == doctest::Approx(2.5));
    // sample sd sqrt(5/3), divided by sqrt(4)
    CHECK(e.std_error == doctest::Approx(std::sqrt(5.0 / 3.0) / 2.0));
    CHECK_FALSE(e.flagged);
    const Estimate single = summarize({0.7});
    CHECK(single.flagged);
    CHECK(single.std_error == 0.0);
    CHECK(single.mean == 0.7);
}

TEST_CASE("a single trial reports a flagged zero standard error") {
    const SimulationRun run = simulate(config(0.5, 2, 0.5, 1, 3));
    CHECK(run.vote_share.flagged);
    CHECK(run.vote_share.std_error == 0.0);
}

TEST_CASE("configuration checks") {
    SimConfig c = config(0.5, 2, 0.5, 10, 1);
    c.n_voters = 50;
    CHECK_THROWS_AS(c.validate(), ModelError);
    c = config(0.5, 2, 0.5, 0, 1);
    CHECK_THROWS_AS(c.validate(), ModelError);
    c = config(1.5, 2, 0.5, 10, 1);
    CHECK_THROWS_AS(c.validate(), ModelError);
}

TEST_CASE("inconsistent draws are rejected") {
    const SimConfig c = config(0.5, 2, 0.5, 10, 1);
    const Simulator sim(c);
    TrialDraw d;
    sim.draw(0, d);
    CHECK_NOTHROW(d.validate());
    TrialDraw broken = d;
    broken.direct_L.pop_back();
    CHECK_THROWS_AS(sim.run(broken), ModelError);
    broken = d;
    broken.link_R[0] = 1.5;
    CHECK_THROWS_AS(run_trial(broken, c.profile, c.params), ModelError);
}

TEST_CASE("same seed, same numbers; different seed, different numbers") {
    SimConfig c = config(0.5, 2, 0.5, 2000, 17);
    c.record_level = RecordLevel::PerTrial;
    const SimulationRun a = simulate(c);
    const SimulationRun b = simulate(c);
    CHECK(a.vote_share.mean == b.vote_share.mean);
    CHECK(a.party_utility.mean == b.party_utility.mean);
    REQUIRE(a.trials.size() == b.trials.size());
    for (std::size_t i = 0; i < a.trials.size(); ++i) {
        CHECK(a.trials[i].mean_indifferent == b.trials[i].mean_indifferent);
        CHECK(a.trials[i].mu == b.trials[i].mu);
    }
    c.seed = 18;
    CHECK(simulate(c).vote_share.mean != a.vote_share.mean);
}

TEST_CASE("thread count does not change results") {
    SimConfig c = config(0.4, 3, 0.6, 3000, 5);
    c.type_L.reset();
    c.type_R.reset();
    const SimulationRun serial = simulate(c);
    c.jobs = 4;
    const SimulationRun threaded = simulate(c);
    CHECK(serial.vote_share.mean == threaded.vote_share.mean);
    CHECK(serial.vote_share.std_error == threaded.vote_share.std_error);
    CHECK(serial.win_prob_majority.mean == threaded.win_prob_majority.mean);
    CHECK(serial.party_utility.mean == threaded.party_utility.mean);
}

TEST_CASE("each trial depends only on its own index") {
    const SimConfig c = config(0.5, 2, 0.5, 100, 9);
    const Simulator sim(c);
    TrialDraw forward, again;
    sim.draw(57, forward);
    sim.draw(3, again);
    sim.draw(57, again);
    CHECK(forward.bliss == again.bliss);
    CHECK(forward.direct_L == again.direct_L);
    CHECK(forward.aligned == again.aligned);
    CHECK(sim.run(forward).mean_indifferent == sim.run(again).mean_indifferent);
}

TEST_CASE("nobody informed: the electorate splits evenly") {
    const SimulationRun run = simulate(config(0.0, 0, 0.5, 500, 2));
    CHECK(run.vote_share.mean == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(run.vote_share.std_error == doctest::Approx(0.0));
    CHECK(run.informed_L.mean == 0.0);
}

TEST_CASE("simulated vote share brackets the per-link closed form") {
    SimConfig c = config(0.5, 2, 0.5, 20000, 11);
    const SimulationRun run = simulate(c);
    ElectionOptions opts;
    opts.exposure = Exposure::PerLink;
    CHECK(within(run.vote_share, vote_share(c.profile, kME, c.params, opts)));
    // uninformed only if the own draw and every aligned, informed peer all miss:
    // (1 - x)(1 - beta x)^k = 0.5 * 0.75^2
    CHECK(within(run.informed_L, 1.0 - 0.5 * 0.75 * 0.75));
}

TEST_CASE("symmetric candidates split the vote") {
    SimConfig c = config(0.5, 2, 0.5, 20000, 12);
    c.type_R = CandidateType::Moderate;
    const SimulationRun run = simulate(c);
    CHECK(within(run.vote_share, 0.5));
    CHECK(within(run.win_prob_map, 0.5));
}

TEST_CASE("mirroring the scenario mirrors the vote share") {
    SimConfig c = config(0.3, 2, 0.5, 20000, 13);
    c.profile = StrategyProfile::random_moderates(0.3, 0.7);
    const SimulationRun forward = simulate(c);
    SimConfig m = c;
    m.params = mirrored(c.params);
    m.profile = mirrored(c.profile);
    m.type_L = c.type_R;
    m.type_R = c.type_L;
    const SimulationRun backward = simulate(m);
    const double combined =
        std::hypot(forward.vote_share.std_error, backward.vote_share.std_error);
    CHECK(std::abs(forward.vote_share.mean - (1.0 - backward.vote_share.mean)) <=
          3.0 * combined + 1e-12);
}

TEST_CASE("more advertising or more links never inform fewer voters") {
    // common random numbers: the same seed replays the same uniforms
    const std::uint64_t seed = 21;
    double last = -1.0;
    for (double x : {0.1, 0.3, 0.5, 0.7, 0.9}) {
        const double informed = simulate(config(x, 2, 0.5, 2000, seed)).informed_L.mean;
        CHECK(informed >= last);
        last = informed;
    }
    last = -1.0;
    for (double beta : {0.1, 0.3, 0.5, 0.7, 0.9}) {
        const double informed = simulate(config(0.3, 3, beta, 2000, seed)).informed_L.mean;
        CHECK(informed >= last);
        last = informed;
    }
}

TEST_CASE("best-response check input validation and shape") {
    ModelParams p;
    const auto opponent = symmetric_random(0.5);
    CHECK_THROWS_AS(best_response_check(p, opponent, 0.1), ModelError);
    BestResponseOptions opts;
    opts.n_trials = 200;
    const BestResponseReport rep = best_response_check(p, opponent, 0.05, opts);
    // none, twenty random intensities, two targeted technologies
    CHECK(rep.candidates.size() == 23);
}
