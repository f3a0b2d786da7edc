#pragma once

#include <array>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>

#include "echo/model.hpp"

namespace echo {

// How the network's extra information sources are counted.
//  MeanField: every voter has beta*k + 1 sources (the closed-form convention).
//  PerLink:   each of the k links is aligned with probability beta, so the source
//             count is 1 + Binomial(k, beta) and voters know their own count.
enum class Exposure { MeanField, PerLink };

// How win probabilities in states where both candidates share a type are taken
// when both parties advertise at random.
//  SymmetricTie: fixed at 1/2, as in the equilibrium analysis of random advertising.
//  Unilateral:   computed from the vote share like every other state.
enum class SameTypeStates { SymmetricTie, Unilateral };

struct ElectionOptions {
    const StrategyProfile* beliefs = nullptr;  // voters' conjecture; defaults to the actual profile
    Exposure exposure = Exposure::MeanField;
    SameTypeStates same_type = SameTypeStates::SymmetricTie;
};

struct ElectionOutcome {
    double vote_share_L;
    double win_prob_L;
};

double informed_fraction(double x, int k, double beta);

// Mean indifferent point over information sets, split by ideological side
// (uniform reference electorate on (0,1)). Equals sum_I i*(I) Pr(I) when
// exposure does not depend on the voter's side.
double vote_share(const StrategyProfile& profile, State state, const ModelParams& params,
                  const ElectionOptions& opts = {});

double win_probability(double mu_star, const ModelParams& params);

ElectionOutcome election_outcome(const StrategyProfile& profile, State state,
                                 const ModelParams& params, const ElectionOptions& opts = {});

// Population with partisan masses (1-w)/2 on (0, 1/2 - m/4) and (1/2 + m/4, 1)
// and independents of mass w uniform on [mu - tau, mu + tau].
struct Population {
    double w;
    static Population equal_density(const ModelParams& params);
    double cdf(double b, double mu, const ModelParams& params) const;
};

// Share of an actual population voting L given the median-interval draw mu.
double population_vote_share(const StrategyProfile& profile, State state,
                             const ModelParams& params, const Population& pop, double mu,
                             const ElectionOptions& opts = {});

// Probability over mu ~ U[1/2 - m/4, 1/2 + m/4] that L wins a strict majority
// of the actual population.
double majority_win_probability(const StrategyProfile& profile, State state,
                                const ModelParams& params, const Population& pop,
                                const ElectionOptions& opts = {});

double party_utility(const StrategyProfile& profile, Party party, CandidateType own_type,
                     const ModelParams& params, const ElectionOptions& opts = {});

struct BenchmarkThresholds {
    double c0;
    double c_tau;
};
BenchmarkThresholds benchmark_thresholds(const ModelParams& params);

struct RandomAdSolution {
    double x;
    bool advertise;
    double rho_me;    // posterior that the opponent is extremist after silence
    double residual;  // first-order condition residual at x (0 at corners)
    int iterations;
};

class SolverError : public std::runtime_error {
public:
    enum class Kind { NonConvergence, OutsideUnitSquare, NoThreshold };
    SolverError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    Kind kind() const noexcept { return kind_; }

private:
    Kind kind_;
};

struct SolverOptions {
    int max_iterations = 10000;
    double tolerance = 1e-10;
    double damping = 0.5;
};

RandomAdSolution solve_random_ad(const ModelParams& params, const SolverOptions& opts = {});

// Displayed network threshold with rho(m,m) evaluated at the consistent x*.
double c_star(const ModelParams& params, double rho_mm);

double kbeta_bar(double m, double sigma, double rho_mm);

struct TargetingAnalysis {
    bool own_side_dominated;
    double c_hat_bar;
    double kbeta_bar;
    double rho_mm;
    double c_star;
    Technology regime;
};

TargetingAnalysis targeting_analysis(const ModelParams& params, int grid_points = 99);

struct Mixing {
    double zeta;
    bool out_of_range;
};
Mixing mixing_probability(const ModelParams& params);

enum class CandidateRegime { AllExtremist, Mixed };

// Which two-equation system pins down (sigma*, x*).
//  Consistent: first-order condition and type indifference derived from party_utility.
//  Printed:    the system exactly as displayed, with rho(m,m) in place of rho(m,e).
enum class CandidateSystem { Consistent, Printed };

struct CandidateSelection {
    double sigma;
    double x;
    CandidateRegime regime;
    double c_bar;           // NaN when the threshold formula is undefined
    bool c_bar_defined;
    std::array<double, 2> residuals;
};

double lower_p(const ModelParams& params);  // solves 16c/(2-3m) = (1+beta k) p^{beta k}
double c_bar(const ModelParams& params);

std::array<double, 2> candidate_system(const ModelParams& params, double sigma, double x,
                                       CandidateSystem system);

CandidateSelection solve_candidate_selection(const ModelParams& params,
                                             CandidateSystem system = CandidateSystem::Consistent,
                                             const SolverOptions& opts = {});

// Symmetric profile where both parties advertise moderates at random with x and
// never advertise extremists.
StrategyProfile symmetric_random(double x);

const char* to_string(CandidateRegime r);

}  // namespace echo
