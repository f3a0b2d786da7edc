#include "echo/communication.hpp"

#include <cmath>

namespace echo {

namespace {

constexpr double kTieTolerance = 1e-12;

int side_index(Side s) { return s == Side::Left ? 0 : 1; }
Side side_of(double bliss) { return bliss <= 0.5 ? Side::Left : Side::Right; }

bool never_shown(const StrategyProfile& s, Party p) {
    return s.exposure(p, CandidateType::Moderate, Side::Left) <= 0.0 &&
           s.exposure(p, CandidateType::Moderate, Side::Right) <= 0.0;
}

int info_index(const InfoSet& info) {
    const bool l = info.obs_L == Observation::SawModerate;
    const bool r = info.obs_R == Observation::SawModerate;
    if (l && r) return 0;
    if (l) return 1;
    if (r) return 2;
    return 3;
}

}  // namespace

MessagePair truthful_pair(const InfoSet& info) {
    return {info.obs_L == Observation::SawModerate ? Message::M : Message::Empty,
            info.obs_R == Observation::SawModerate ? Message::M : Message::Empty};
}

InfoSet canonical_info(int index) {
    InfoSet info;
    info.obs_L = (index == 0 || index == 1) ? Observation::SawModerate : Observation::Nothing;
    info.obs_R = (index == 0 || index == 2) ? Observation::SawModerate : Observation::Nothing;
    return info;
}

MessagePair MessageGame::pair_of(int index) {
    return {(index & 1) ? Message::M : Message::Empty,
            (index & 2) ? Message::M : Message::Empty};
}

int MessageGame::index_of(MessagePair p) {
    return (p.left == Message::M ? 1 : 0) + (p.right == Message::M ? 2 : 0);
}

MessageGame::MessageGame(const ModelParams& params, const StrategyProfile& strategies, int k,
                         double beta_left, double beta_right)
    : params_(params), strategies_(strategies), k_(k), beta_{beta_left, beta_right} {
    for (Side side : {Side::Left, Side::Right}) {
        const int si = side_index(side);
        for (int info = 0; info < kInfoSets; ++info) {
            try {
                const Belief b = posterior(canonical_info(info), strategies_, params_, 1.0, 1.0, side);
                sender_belief_[si][info] = {b.mm, b.me, b.em, b.ee};
                feasible_[si][info] = true;
            } catch (const ModelError&) {
                sender_belief_[si][info] = {0.0, 0.0, 0.0, 0.0};
                feasible_[si][info] = false;
            }
        }
    }
}

MessageGame::Receiver MessageGame::receiver(double r) const {
    Receiver rc{};
    rc.r = r;
    const Side rs = side_of(r);
    const double beta = beta_[side_index(rs)];
    const double other_sources = beta * k_;
    const double own_sources = beta * k_ + 1.0;
    const double m = params_.m;

    // other-channel informedness by party and true type
    double g[2][2];
    double silent[2];
    for (Party p : {Party::L, Party::R}) {
        const int pi = p == Party::L ? 0 : 1;
        const double x_m = strategies_.exposure(p, CandidateType::Moderate, rs);
        const double x_e = strategies_.exposure(p, CandidateType::Extremist, rs);
        g[pi][0] = 1.0 - std::pow(1.0 - x_m, other_sources);
        g[pi][1] = 1.0 - std::pow(1.0 - x_e, other_sources);
        silent[pi] = silent_moderate_probability(params_.sigma(p), x_m, x_e, own_sources);
    }

    for (int si = 0; si < 2; ++si) {
        for (int info = 0; info < kInfoSets; ++info) {
            for (int pair = 0; pair < 4; ++pair) {
                auto& w = rc.weight[si][info][pair];
                w = {0.0, 0.0, 0.0, 0.0};
                if (!feasible_[si][info]) continue;
                const bool claim_l = pair & 1;
                const bool claim_r = pair & 2;
                for (int state = 0; state < 4; ++state) {
                    const double rho = sender_belief_[si][info][state];
                    if (rho <= 0.0) continue;
                    const int tl = state >> 1;  // 0 moderate, 1 extremist
                    const int tr = state & 1;
                    const double gl = g[0][tl];
                    const double gr = g[1][tr];
                    for (int ol = 0; ol < 2; ++ol) {
                        const double wl = ol ? gl : 1.0 - gl;
                        if (wl <= 0.0) continue;
                        for (int orr = 0; orr < 2; ++orr) {
                            const double wr = orr ? gr : 1.0 - gr;
                            if (wr <= 0.0) continue;
                            const double pl = ol ? (tl == 0 ? 1.0 : 0.0) : (claim_l ? 1.0 : silent[0]);
                            const double pr = orr ? (tr == 0 ? 1.0 : 0.0) : (claim_r ? 1.0 : silent[1]);
                            const double istar = 0.5 + m / 4.0 * (pl - pr);
                            const int outcome = r <= istar ? (tl == 0 ? 0 : 1) : (tr == 0 ? 2 : 3);
                            w[outcome] += rho * wl * wr;
                        }
                    }
                }
            }
        }
    }
    return rc;
}

double MessageGame::payoff(const Receiver& rc, double s, int info, int pair) const {
    const double m = params_.m;
    const double e = params_.e();
    const double u[4] = {-std::abs(s - m), -std::abs(s - e), -std::abs(s - (1.0 - m)),
                         -std::abs(s - (1.0 - e))};
    const auto& w = rc.weight[side_index(side_of(s))][info][pair];
    return w[0] * u[0] + w[1] * u[1] + w[2] * u[2] + w[3] * u[3];
}

int MessageGame::preferred(const Receiver& rc, double s, int info) const {
    const int truthful = index_of(truthful_pair(canonical_info(info)));
    int best = truthful;
    double best_value = payoff(rc, s, info, truthful);
    for (int pair = 0; pair < 4; ++pair) {
        if (pair == truthful) continue;
        if ((pair & 1) && never_shown(strategies_, Party::L)) continue;
        if ((pair & 2) && never_shown(strategies_, Party::R)) continue;
        const double v = payoff(rc, s, info, pair);
        if (v > best_value + kTieTolerance) {
            best = pair;
            best_value = v;
        }
    }
    return best;
}

bool MessageGame::credible(const Receiver& rc, double s) const {
    const int si = side_index(side_of(s));
    for (int info = 0; info < kInfoSets; ++info) {
        if (!feasible_[si][info]) continue;
        if (preferred(rc, s, info) != index_of(truthful_pair(canonical_info(info)))) return false;
    }
    return true;
}

namespace {

MessageGame game_for(const SenderContext& ctx, const ModelParams& params) {
    if (ctx.k < 1) throw ModelError("k", "communication needs at least one sender");
    return MessageGame(params, ctx.strategies, ctx.k, ctx.beta, ctx.beta);
}

}  // namespace

double sender_payoff(const SenderContext& ctx, MessagePair pair, const ModelParams& params) {
    if (pair.left == Message::M && never_shown(ctx.strategies, Party::L))
        throw ModelError("pair.left", "claims a moderate L candidate that is never advertised");
    if (pair.right == Message::M && never_shown(ctx.strategies, Party::R))
        throw ModelError("pair.right", "claims a moderate R candidate that is never advertised");
    const MessageGame game = game_for(ctx, params);
    const int info = info_index(ctx.info);
    if (!game.feasible(side_of(ctx.s), info))
        throw ModelError("info", "sender observation impossible under the profile");
    return game.payoff(game.receiver(ctx.r), ctx.s, info, MessageGame::index_of(pair));
}

MessagePair preferred_message(const SenderContext& ctx, const ModelParams& params) {
    const MessageGame game = game_for(ctx, params);
    const int info = info_index(ctx.info);
    if (!game.feasible(side_of(ctx.s), info))
        throw ModelError("info", "sender observation impossible under the profile");
    return MessageGame::pair_of(game.preferred(game.receiver(ctx.r), ctx.s, info));
}

MessagePair best_message(const SenderContext& ctx, const ModelParams& params) {
    const MessagePair p = preferred_message(ctx, params);
    return p == truthful_pair(ctx.info) ? p : MessagePair{};
}

bool ic_truthful(const SenderContext& ctx, const ModelParams& params) {
    const MessageGame game = game_for(ctx, params);
    return game.credible(game.receiver(ctx.r), ctx.s);
}

EchoCutoffs echo_cutoffs(const ModelParams& p, double x_L, double x_R) {
    const double k = static_cast<double>(p.k);
    const double sl = p.sigma_L;
    const double sr = p.sigma_R;
    const double wl = (1.0 - sl) / (1.0 - sl + sl * std::pow(1.0 - x_L, p.beta_l * k + 1.0));
    const double wr = (1.0 - sr) / (1.0 - sr + sr * std::pow(1.0 - x_R, p.beta_r * k + 1.0));
    return {0.5 - p.m / 4.0 * wl, 0.5 + p.m / 4.0 * wr};
}

TruthfulRegion map_truthful_region(const ModelParams& params, const StrategyProfile& strategies,
                                   double grid_step) {
    if (!(grid_step > 0.0 && grid_step <= 0.01))
        throw ModelError("grid_step", "must lie in (0, 0.01]");
    if (params.k < 1) throw ModelError("k", "communication needs at least one sender");
    TruthfulRegion region;
    region.step = grid_step;
    const auto n = static_cast<std::size_t>(std::floor(1.0 / grid_step));
    region.grid.resize(n);
    for (std::size_t i = 0; i < n; ++i) region.grid[i] = (static_cast<double>(i) + 0.5) * grid_step;
    region.truthful.assign(n * n, 0);
    const MessageGame game(params, strategies, params.k, params.beta_l, params.beta_r);
    for (std::size_t ir = 0; ir < n; ++ir) {
        const auto rc = game.receiver(region.grid[ir]);
        for (std::size_t is = 0; is < n; ++is)
            region.truthful[is * n + ir] = game.credible(rc, region.grid[is]) ? 1 : 0;
    }
    return region;
}

}  // namespace echo
