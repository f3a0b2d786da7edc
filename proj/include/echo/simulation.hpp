#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "echo/model.hpp"
#include "echo/party.hpp"

namespace echo {

enum class RecordLevel { Summary, PerTrial };

struct SimConfig {
    std::size_t n_trials = 10000;
    std::size_t n_voters = 100;
    std::uint64_t seed = 1;
    ModelParams params;
    StrategyProfile profile;
    std::optional<StrategyProfile> beliefs;  // voters' conjecture; the actual profile if absent
    std::optional<CandidateType> type_L;     // fixed candidate type; drawn from sigma_L if absent
    std::optional<CandidateType> type_R;
    std::optional<double> independents_mass;  // equal-density default if absent
    RecordLevel record_level = RecordLevel::Summary;
    unsigned jobs = 1;

    void validate() const;
    Population population() const;
};

// All randomness of one trial. Exposure and link draws are stored as uniforms so
// the same draw can be replayed under different profiles (common random numbers):
// a voter on side S sees party J's ad iff the uniform is below x_J^S(t_J).
struct TrialDraw {
    State theta;
    double mu = 0.5;
    int k = 0;
    std::vector<double> bliss;
    std::vector<double> direct_L, direct_R;  // per voter
    std::vector<std::uint8_t> aligned;       // per voter and link, row-major
    std::vector<double> link_L, link_R;      // sender's own exposure uniforms per link

    std::size_t voters() const { return bliss.size(); }
    void validate() const;
};

struct TrialResult {
    State theta;
    double mu = 0.5;
    double mean_indifferent = 0.5;  // side-split mean indifferent point (estimates vote_share)
    double finite_share = 0.5;      // fraction of sampled voters voting L
    bool finite_winner_L = false;
    double exact_share = 0.5;       // closed-form population share at this mu
    bool exact_winner_L = false;
    double informed_L = 0.0;        // fraction of voters who know L's type
    double informed_R = 0.0;
};

class SimulationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Replays trials under one profile. Construction precomputes the credible-sender
// table on the diagonal s = r and the posterior after silence for every source count.
class Simulator {
public:
    explicit Simulator(const SimConfig& config);

    void draw(std::size_t trial_index, TrialDraw& out) const;
    TrialResult run(const TrialDraw& draw) const;
    // Party L's realized payoff in this trial given the piecewise win probability.
    double utility_L(const TrialDraw& draw, const TrialResult& result) const;

    const SimConfig& config() const { return config_; }

private:
    SimConfig config_;
    StrategyProfile conj_;
    Population pop_;
    std::vector<std::uint8_t> credible_[2];  // per side, per diagonal cell
    std::vector<double> silent_[2][2];       // [side][party][aligned count]
    static constexpr int kCells = 4000;
};

TrialResult run_trial(const TrialDraw& draw, const StrategyProfile& profile,
                      const ModelParams& params);

struct Estimate {
    double mean = 0.0;
    double std_error = 0.0;
    std::size_t n = 0;
    bool flagged = false;  // standard error undefined (n < 2), reported as zero
};

Estimate summarize(const std::vector<double>& samples);

enum class Quantity { VoteShare, WinProbMap, WinProbMajority, PartyUtility, InformedL };

struct SimulationRun {
    Estimate vote_share;
    Estimate win_prob_map;       // piecewise map applied to each trial's mean indifferent point
    Estimate win_prob_majority;  // mu randomization with an exact-mass majority
    Estimate finite_majority;    // majority among the sampled voters
    Estimate party_utility;      // party L
    Estimate informed_L;
    Estimate informed_R;
    std::vector<TrialResult> trials;  // filled only at RecordLevel::PerTrial
};

SimulationRun simulate(const SimConfig& config);
Estimate estimate(const SimConfig& config, Quantity quantity);

struct TechnologyCandidate {
    Technology tech;
    double intensity;
    Estimate utility;
    double analytic;
};

struct BestResponseReport {
    std::vector<TechnologyCandidate> candidates;
    Technology empirical_best;
    double empirical_intensity;
    // smallest lower confidence bound (mean - 3 SE) of the paired utility gap
    // between the empirical best and the best candidate of every other technology
    double min_gap_lower_bound;
    bool conclusive;
    Technology predicted;
    bool matches;
};

struct BestResponseOptions {
    std::size_t n_trials = 20000;
    std::size_t n_voters = 100;
    std::uint64_t seed = 1;
    unsigned jobs = 1;
};

// Party L chooses among no advertising, random advertising on a grid of
// intensities and both targeted technologies against R's part of `opponent`.
// Voters' conjecture is the deviating profile itself.
BestResponseReport best_response_check(const ModelParams& params,
                                       const StrategyProfile& opponent, double grid_step,
                                       const BestResponseOptions& opts = {});

}  // namespace echo
