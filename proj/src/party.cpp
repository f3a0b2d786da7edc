#include "echo/party.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace echo {

namespace {

constexpr CandidateType kTypes[2] = {CandidateType::Moderate, CandidateType::Extremist};

double binomial_pmf(int k, int a, double beta) {
    return std::exp(std::lgamma(k + 1.0) - std::lgamma(a + 1.0) - std::lgamma(k - a + 1.0)) *
           std::pow(beta, a) * std::pow(1.0 - beta, k - a);
}

// Calls f(side, probability, i*) for every information set a voter can hold,
// with probabilities summing to one within each side.
template <class F>
void for_each_info(const StrategyProfile& profile, State state, const ModelParams& params,
                   const ElectionOptions& opts, F&& f) {
    const StrategyProfile& conj = opts.beliefs ? *opts.beliefs : profile;
    const double m = params.m;
    for (Side side : {Side::Left, Side::Right}) {
        const double beta = params.beta(side);
        const double xl = profile.exposure(Party::L, state.L, side);
        const double xr = profile.exposure(Party::R, state.R, side);
        const double tl = state.L == CandidateType::Moderate ? 1.0 : 0.0;
        const double tr = state.R == CandidateType::Moderate ? 1.0 : 0.0;

        auto visit = [&](double weight, double sources) {
            const double gl = 1.0 - std::pow(1.0 - xl, sources);
            const double gr = 1.0 - std::pow(1.0 - xr, sources);
            const bool silent_l_possible = gl < 1.0;
            const bool silent_r_possible = gr < 1.0;
            const double pl = silent_l_possible
                                  ? silent_moderate_probability(
                                        params.sigma_L, conj.exposure(Party::L, CandidateType::Moderate, side),
                                        conj.exposure(Party::L, CandidateType::Extremist, side), sources)
                                  : 0.0;
            const double pr = silent_r_possible
                                  ? silent_moderate_probability(
                                        params.sigma_R, conj.exposure(Party::R, CandidateType::Moderate, side),
                                        conj.exposure(Party::R, CandidateType::Extremist, side), sources)
                                  : 0.0;
            for (int il = 0; il < 2; ++il) {
                const double wl = il ? gl : 1.0 - gl;
                if (wl <= 0.0) continue;
                for (int ir = 0; ir < 2; ++ir) {
                    const double wr = ir ? gr : 1.0 - gr;
                    if (wr <= 0.0) continue;
                    const double ml = il ? tl : pl;
                    const double mr = ir ? tr : pr;
                    f(side, weight * wl * wr, 0.5 + m / 4.0 * (ml - mr));
                }
            }
        };

        if (opts.exposure == Exposure::MeanField || params.k == 0) {
            visit(1.0, beta * params.k + 1.0);
        } else {
            for (int a = 0; a <= params.k; ++a) visit(binomial_pmf(params.k, a, beta), 1.0 + a);
        }
    }
}

bool both_random(const StrategyProfile& s, State state) {
    return s.L.plan(state.L).tech == Technology::Random &&
           s.R.plan(state.R).tech == Technology::Random;
}

double cost_of(const AdPlan& plan) {
    return plan.tech == Technology::None ? 0.0 : plan.intensity;
}

double silent_p(double sigma, double x, double sources) {
    return silent_moderate_probability(sigma, x, 0.0, sources);
}

}  // namespace

double informed_fraction(double x, int k, double beta) {
    if (k == 0) return x;  // 1 - (1 - x) is not exact in floating point
    return 1.0 - std::pow(1.0 - x, beta * k + 1.0);
}

double vote_share(const StrategyProfile& profile, State state, const ModelParams& params,
                  const ElectionOptions& opts) {
    double share = 0.0;
    for_each_info(profile, state, params, opts, [&](Side side, double w, double istar) {
        share += side == Side::Left ? w * std::min(istar, 0.5) : w * std::max(istar - 0.5, 0.0);
    });
    return share;
}

double win_probability(double mu, const ModelParams& params) {
    const double m = params.m;
    if (mu < 0.5 - m) return 0.0;
    if (mu > 0.5 + m) return 1.0;
    return (mu - 0.5 + m) / (2.0 * m);
}

ElectionOutcome election_outcome(const StrategyProfile& profile, State state,
                                 const ModelParams& params, const ElectionOptions& opts) {
    const double mu = vote_share(profile, state, params, opts);
    double pi = win_probability(mu, params);
    if (opts.same_type == SameTypeStates::SymmetricTie && state.L == state.R &&
        both_random(profile, state))
        pi = 0.5;
    return {mu, pi};
}

Population Population::equal_density(const ModelParams& p) {
    return {2.0 * p.tau / (1.0 - p.m / 2.0 + 2.0 * p.tau)};
}

double Population::cdf(double b, double mu, const ModelParams& p) const {
    auto clamp01 = [](double v) { return std::clamp(v, 0.0, 1.0); };
    const double edge = 0.5 - p.m / 4.0;
    const double partisans = (1.0 - w) / 2.0;
    return partisans * clamp01(b / edge) + w * clamp01((b - (mu - p.tau)) / (2.0 * p.tau)) +
           partisans * clamp01((b - (1.0 - edge)) / edge);
}

double population_vote_share(const StrategyProfile& profile, State state,
                             const ModelParams& params, const Population& pop, double mu,
                             const ElectionOptions& opts) {
    const double half = pop.cdf(0.5, mu, params);
    double share = 0.0;
    for_each_info(profile, state, params, opts, [&](Side side, double w, double istar) {
        if (side == Side::Left)
            share += w * pop.cdf(std::min(istar, 0.5), mu, params);
        else
            share += w * (pop.cdf(std::max(istar, 0.5), mu, params) - half);
    });
    return share;
}

double majority_win_probability(const StrategyProfile& profile, State state,
                                const ModelParams& params, const Population& pop,
                                const ElectionOptions& opts) {
    const double lo = 0.5 - params.m / 4.0;
    const double hi = 0.5 + params.m / 4.0;
    auto excess = [&](double mu) {
        return population_vote_share(profile, state, params, pop, mu, opts) - 0.5;
    };
    if (excess(lo) <= 0.0) return 0.0;
    if (excess(hi) > 0.0) return 1.0;
    double a = lo, b = hi;
    for (int i = 0; i < 200 && b - a > 1e-15; ++i) {
        const double mid = 0.5 * (a + b);
        (excess(mid) > 0.0 ? a : b) = mid;
    }
    return (0.5 * (a + b) - lo) / (hi - lo);
}

double party_utility(const StrategyProfile& profile, Party party, CandidateType own_type,
                     const ModelParams& params, const ElectionOptions& opts) {
    if (party == Party::R) {
        const StrategyProfile mp = mirrored(profile);
        StrategyProfile mb;
        ElectionOptions mo = opts;
        if (opts.beliefs) {
            mb = mirrored(*opts.beliefs);
            mo.beliefs = &mb;
        }
        return party_utility(mp, Party::L, own_type, mirrored(params), mo);
    }
    const double e = params.e();
    const double t_l = position(own_type, params);
    double u = 0.0;
    for (CandidateType tr : kTypes) {
        const double prob = tr == CandidateType::Moderate ? params.sigma_R : 1.0 - params.sigma_R;
        if (prob <= 0.0) continue;
        const double t_r = position(tr, params);
        const double pi = election_outcome(profile, {own_type, tr}, params, opts).win_prob_L;
        u += prob * (pi * (1.0 - t_r - t_l) + (e - (1.0 - t_r)));
    }
    return u - params.c * cost_of(profile.L.plan(own_type));
}

BenchmarkThresholds benchmark_thresholds(const ModelParams& p) {
    return {(1.0 - p.sigma_R) * (2.0 - 3.0 * p.m) / 16.0,
            (2.0 - 3.0 * p.m - p.sigma_R * p.m) / 4.0};
}

RandomAdSolution solve_random_ad(const ModelParams& p, const SolverOptions& opts) {
    const double sigma = p.sigma_R;
    const double target = 16.0 * p.c / (2.0 - 3.0 * p.m);
    if (p.k == 0) {
        const bool adv = p.c <= benchmark_thresholds(p).c0;
        return {adv ? 1.0 : 0.0, adv, adv ? 1.0 : 1.0 - sigma, 0.0, 0};
    }
    const double a = p.beta_l * p.k;
    const double n = a + 1.0;
    auto rho_me = [&](double x) { return 1.0 - silent_p(sigma, x, n); };
    auto foc = [&](double x) {
        return (1.0 - sigma) * n * rho_me(x) * std::pow(1.0 - x, a) - target;
    };
    auto participates = [&](double x) {
        return p.c * x <
               rho_me(x) * (2.0 - 3.0 * p.m + sigma * p.m) * (1.0 - std::pow(1.0 - x, n)) / 16.0;
    };
    if (foc(0.0) <= 0.0) return {0.0, false, rho_me(0.0), 0.0, 0};

    // damped fixed point on x given the belief it induces
    double x = 0.5;
    int it = 0;
    bool converged = false;
    for (; it < opts.max_iterations; ++it) {
        const double ratio = target / ((1.0 - sigma) * n * rho_me(x));
        const double next = ratio >= 1.0 ? 0.0 : 1.0 - std::pow(ratio, 1.0 / a);
        x = (1.0 - opts.damping) * x + opts.damping * next;
        if (std::abs(foc(x)) < opts.tolerance) {
            converged = true;
            break;
        }
    }
    if (!converged) {
        // bracket the largest sign change and bisect
        const int cells = 4000;
        double lo = -1.0, hi = -1.0;
        for (int i = cells; i > 0; --i) {
            const double xa = (i - 1.0) / cells, xb = static_cast<double>(i) / cells;
            if (foc(xa) > 0.0 && foc(xb) <= 0.0) {
                lo = xa;
                hi = xb;
                break;
            }
        }
        if (lo < 0.0)
            throw SolverError(SolverError::Kind::NonConvergence,
                              "random-advertising first-order condition has no bracketed root");
        for (int i = 0; i < 200 && std::abs(foc(0.5 * (lo + hi))) >= opts.tolerance; ++i) {
            const double mid = 0.5 * (lo + hi);
            (foc(mid) > 0.0 ? lo : hi) = mid;
            ++it;
        }
        x = 0.5 * (lo + hi);
        if (std::abs(foc(x)) >= opts.tolerance)
            throw SolverError(SolverError::Kind::NonConvergence,
                              "random-advertising solver did not reach tolerance");
    }
    const double residual = foc(x);
    if (!participates(x)) return {0.0, false, rho_me(0.0), residual, it};
    return {x, true, rho_me(x), residual, it};
}

double c_star(const ModelParams& p, double rho_mm) {
    return (2.0 - 3.0 * p.m) * (1.0 - p.sigma_R) * (p.beta_l * p.k + 1.0) * (1.0 - rho_mm) / 16.0;
}

double kbeta_bar(double m, double sigma, double rho) {
    const double num = (2.0 - 3.0 * m) * ((2.0 + (1.0 - rho) * sigma) + (1.0 + rho)) - 4.0 * m * sigma;
    const double den = (2.0 - 3.0 * m) * (1.0 - rho) * (1.0 - sigma);
    return num / den;
}

StrategyProfile symmetric_random(double x) { return StrategyProfile::random_moderates(x, x); }

TargetingAnalysis targeting_analysis(const ModelParams& p, int grid_points) {
    TargetingAnalysis out{};
    const RandomAdSolution sol = solve_random_ad(p);
    const double n = p.beta_l * p.k + 1.0;
    const double silent = silent_p(p.sigma_R, sol.x, n);
    out.rho_mm = silent * silent;
    out.c_hat_bar = (2.0 - 3.0 * p.m - p.sigma_R * p.m) / 4.0;
    out.kbeta_bar = kbeta_bar(p.m, p.sigma_R, out.rho_mm);
    out.c_star = c_star(p, out.rho_mm);

    out.own_side_dominated = true;
    for (int i = 1; i <= grid_points; ++i) {
        const double xr = static_cast<double>(i) / (grid_points + 1);
        StrategyProfile own = StrategyProfile::random_moderates(0.0, xr);
        own.L.moderate = AdPlan::target_own();
        StrategyProfile none = StrategyProfile::random_moderates(0.0, xr);
        none.L.moderate = AdPlan::none();
        const StrategyProfile rnd = symmetric_random(xr);
        const double u_own = party_utility(own, Party::L, CandidateType::Moderate, p);
        const double u_alt = std::max(party_utility(none, Party::L, CandidateType::Moderate, p),
                                      party_utility(rnd, Party::L, CandidateType::Moderate, p));
        if (u_own > u_alt) {
            out.own_side_dominated = false;
            break;
        }
    }

    const double bk = p.beta_l * p.k;
    if (p.c >= out.c_hat_bar && p.c >= out.c_star)
        out.regime = Technology::None;
    else if (bk >= out.kbeta_bar)
        out.regime = p.c < out.c_star ? Technology::Random : Technology::TargetOpponentSide;
    else
        out.regime = p.c < out.c_hat_bar ? Technology::TargetOpponentSide : Technology::Random;
    return out;
}

Mixing mixing_probability(const ModelParams& p) {
    const double zeta = (1.0 - p.m + 2.0 * p.c) / (1.0 - 2.0 * p.m);
    return {zeta, zeta < 0.0 || zeta > 1.0};
}

double lower_p(const ModelParams& p) {
    const double bk = p.beta_l * p.k;
    const double target = 16.0 * p.c / (2.0 - 3.0 * p.m);
    auto g = [&](double v) { return (1.0 + bk) * std::pow(v, bk) - target; };
    if (bk <= 0.0 || g(1.0) < 0.0)
        throw SolverError(SolverError::Kind::NoThreshold, "lower-p equation has no root in [0,1]");
    double lo = 0.0, hi = 1.0;
    while (hi - lo > 1e-12) {
        const double mid = 0.5 * (lo + hi);
        (g(mid) < 0.0 ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

double c_bar(const ModelParams& p) {
    const double bk = p.beta_l * p.k;
    const double den = 16.0 * (1.0 - bk * (1.0 - lower_p(p)));
    const double num = (2.0 - 7.0 * p.m) * (1.0 + bk);
    if (den <= 0.0 || num <= 0.0)
        throw SolverError(SolverError::Kind::NoThreshold, "c-bar formula is not positive here");
    return num / den;
}

std::array<double, 2> candidate_system(const ModelParams& p, double sigma, double x,
                                       CandidateSystem system) {
    const double a = p.beta_l * p.k;
    const double n = a + 1.0;
    const double u = std::pow(1.0 - x, n);
    const double silent = sigma * u / (sigma * u + 1.0 - sigma);
    const double rhs1 = 16.0 * p.c / (2.0 - 3.0 * p.m);
    const double rhs2 = (4.0 * p.m + 16.0 * p.c * x) / (2.0 - 3.0 * p.m);
    if (system == CandidateSystem::Consistent) {
        return {(1.0 - sigma) * n * (1.0 - silent) * std::pow(1.0 - x, a) - rhs1,
                (1.0 - silent) * (1.0 - u) - rhs2};
    }
    const double rho_mm = silent * silent;
    return {(1.0 - sigma) * n * (1.0 - rho_mm * std::pow(1.0 - x, a)) - rhs1,
            1.0 - rho_mm * (1.0 - u) - rhs2};
}

namespace {

// sigma that satisfies the second equation exactly at x; NaN if none exists.
double sigma_on_curve(const ModelParams& p, double x, CandidateSystem system) {
    const double n = p.beta_l * p.k + 1.0;
    const double u = std::pow(1.0 - x, n);
    const double rhs2 = (4.0 * p.m + 16.0 * p.c * x) / (2.0 - 3.0 * p.m);
    double silent;
    if (system == CandidateSystem::Consistent) {
        silent = 1.0 - rhs2 / (1.0 - u);
    } else {
        const double sq = (1.0 - rhs2) / (1.0 - u);
        if (sq < 0.0) return std::nan("");
        silent = std::sqrt(sq);
    }
    // invert silent = sigma u / (sigma u + 1 - sigma)
    return silent / (silent + u * (1.0 - silent));
}

}  // namespace

CandidateSelection solve_candidate_selection(const ModelParams& p, CandidateSystem system,
                                             const SolverOptions& opts) {
    if (p.k < 1) throw ModelError("k", "candidate selection with a network needs k >= 1");
    CandidateSelection out{};
    out.c_bar = std::nan("");
    try {
        out.c_bar = c_bar(p);
        out.c_bar_defined = true;
    } catch (const SolverError&) {
        out.c_bar_defined = false;
    }
    if (out.c_bar_defined && p.c >= out.c_bar) {
        out.regime = CandidateRegime::AllExtremist;
        return out;
    }

    auto phi = [&](double x, double& sigma) {
        sigma = sigma_on_curve(p, x, system);
        if (!std::isfinite(sigma)) return std::nan("");
        return candidate_system(p, sigma, x, system)[0];
    };

    const int cells = 4000;
    bool outside = false;
    double lo = -1.0, hi = -1.0;
    double s_prev = 0.0;
    double f_prev = phi(0.5 / cells, s_prev);
    for (int i = 1; i < cells; ++i) {
        const double x = (i + 0.5) / cells;
        double s;
        const double f = phi(x, s);
        if (std::isfinite(f) && std::isfinite(f_prev) && (f > 0.0) != (f_prev > 0.0)) {
            const bool inside = s > 0.0 && s < 1.0 && s_prev > 0.0 && s_prev < 1.0;
            if (inside) {
                lo = (i - 0.5) / cells;
                hi = x;
                break;
            }
            outside = true;
        }
        f_prev = f;
        s_prev = s;
    }
    if (lo < 0.0) {
        if (outside)
            throw SolverError(SolverError::Kind::OutsideUnitSquare,
                              "candidate-selection system has roots only outside (0,1)^2");
        throw SolverError(SolverError::Kind::NonConvergence,
                          "candidate-selection system has no bracketed root");
    }
    double s_lo;
    const bool lo_positive = phi(lo, s_lo) > 0.0;
    for (int i = 0; i < 200 && hi - lo > 1e-15; ++i) {
        const double mid = 0.5 * (lo + hi);
        double s;
        ((phi(mid, s) > 0.0) == lo_positive ? lo : hi) = mid;
    }
    double x = 0.5 * (lo + hi);
    double sigma = sigma_on_curve(p, x, system);

    // Newton polish on the full system
    for (int it = 0; it < 50; ++it) {
        const auto f = candidate_system(p, sigma, x, system);
        if (std::abs(f[0]) < opts.tolerance && std::abs(f[1]) < opts.tolerance) break;
        const double h = 1e-7;
        const auto fs = candidate_system(p, sigma + h, x, system);
        const auto fx = candidate_system(p, sigma, x + h, system);
        const double j00 = (fs[0] - f[0]) / h, j01 = (fx[0] - f[0]) / h;
        const double j10 = (fs[1] - f[1]) / h, j11 = (fx[1] - f[1]) / h;
        const double det = j00 * j11 - j01 * j10;
        if (det == 0.0) break;
        const double ds = (f[0] * j11 - f[1] * j01) / det;
        const double dx = (j00 * f[1] - j10 * f[0]) / det;
        const double ns = sigma - ds, nx = x - dx;
        if (!(ns > 0.0 && ns < 1.0 && nx > 0.0 && nx < 1.0)) break;
        sigma = ns;
        x = nx;
    }
    out.residuals = candidate_system(p, sigma, x, system);
    if (!(std::abs(out.residuals[0]) < opts.tolerance && std::abs(out.residuals[1]) < opts.tolerance))
        throw SolverError(SolverError::Kind::NonConvergence,
                          "candidate-selection residuals above tolerance");
    out.sigma = sigma;
    out.x = x;
    out.regime = CandidateRegime::Mixed;
    return out;
}

const char* to_string(CandidateRegime r) {
    return r == CandidateRegime::AllExtremist ? "all_extremist" : "mixed";
}

}  // namespace echo
