#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "echo/model.hpp"

namespace echo {

// One matched sender/receiver pair in the cheap-talk stage. `info` holds the
// sender's own ad observations; message vectors in it are ignored because
// communication is a single step.
struct SenderContext {
    double s = 0.5;
    InfoSet info;
    double r = 0.5;
    StrategyProfile strategies;
    int k = 1;
    double beta = 0.5;
};

MessagePair truthful_pair(const InfoSet& info);

// Expected utility of the sender when the receiver's vote decides the election.
// The receiver also learns from her own ad exposure and the other aligned
// senders; those channels reach her with exponent beta*k, so that together with
// the sender's single direct observation the information count is beta*k + 1.
double sender_payoff(const SenderContext& ctx, MessagePair pair, const ModelParams& params);

// Argmax over the four pairs. Ties favour the truthful pair, then fewer M
// components, then an M about L before an M about R.
MessagePair preferred_message(const SenderContext& ctx, const ModelParams& params);

// Equilibrium message: the preferred pair when it is truthful, otherwise the
// uninformative pair (a lying sender is not believed, so she babbles).
MessagePair best_message(const SenderContext& ctx, const ModelParams& params);

// Truthful communication is credible for this (s, r) only if every feasible
// sender information set prefers its truthful pair.
bool ic_truthful(const SenderContext& ctx, const ModelParams& params);

struct EchoCutoffs {
    double q_l;
    double q_r;
};

EchoCutoffs echo_cutoffs(const ModelParams& params, double x_L, double x_R);

// Canonical sender information sets, indexed by (obs_L, obs_R):
// 0 = (m,m), 1 = (m,none), 2 = (none,m), 3 = (none,none).
constexpr int kInfoSets = 4;
InfoSet canonical_info(int index);

// Precomputed evaluator for many (s, r) pairs under fixed parameters and profile.
class MessageGame {
public:
    MessageGame(const ModelParams& params, const StrategyProfile& strategies, int k,
                double beta_left, double beta_right);

    // Outcome weights per (info, pair) for a receiver at r. Outcomes are
    // L wins with m, L wins with e, R wins with m, R wins with e.
    struct Receiver {
        double r;
        // [sender side][info][pair][outcome]
        std::array<std::array<std::array<std::array<double, 4>, 4>, kInfoSets>, 2> weight;
    };

    Receiver receiver(double r) const;
    bool feasible(Side sender_side, int info) const {
        return feasible_[sender_side == Side::Left ? 0 : 1][info];
    }
    double payoff(const Receiver& rc, double s, int info, int pair) const;
    int preferred(const Receiver& rc, double s, int info) const;
    bool credible(const Receiver& rc, double s) const;

    static MessagePair pair_of(int index);
    static int index_of(MessagePair p);

private:
    ModelParams params_;
    StrategyProfile strategies_;
    int k_;
    double beta_[2];
    // sender beliefs over states [side][info][state mm,me,em,ee]
    std::array<std::array<std::array<double, 4>, kInfoSets>, 2> sender_belief_{};
    std::array<std::array<bool, kInfoSets>, 2> feasible_{};
};

struct TruthfulRegion {
    double step = 0.0;
    std::vector<double> grid;            // cell centres on (0,1)
    std::vector<std::uint8_t> truthful;  // row-major [s][r], joint credibility
    bool at(std::size_t is, std::size_t ir) const {
        return truthful[is * grid.size() + ir] != 0;
    }
};

// Evaluates ic_truthful on every (s, r) cell centre. Cell centres never hit 1/2
// exactly because 1/2 is a cell edge when 1/(2 step) is an integer.
TruthfulRegion map_truthful_region(const ModelParams& params, const StrategyProfile& strategies,
                                   double grid_step);

}  // namespace echo
