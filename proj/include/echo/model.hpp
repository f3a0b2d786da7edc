#pragma once

#include <array>
#include <stdexcept>
#include <string>
#include <vector>

namespace echo {

enum class Party { L, R };
enum class Side { Left, Right };
enum class CandidateType { Moderate, Extremist };
enum class Observation { SawModerate, Nothing };
enum class Message { M, Empty };
enum class Vote { L, R };

struct MessagePair {
    Message left = Message::Empty;
    Message right = Message::Empty;
    bool operator==(const MessagePair&) const = default;
};

// Raised for parameter or input combinations that violate a model invariant.
// `field` names the offending input so front ends can point at it.
class ModelError : public std::invalid_argument {
public:
    ModelError(std::string field, const std::string& what)
        : std::invalid_argument(field + ": " + what), field_(std::move(field)) {}
    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

struct ModelParams {
    double m = 0.2;
    double sigma_L = 0.5;
    double sigma_R = 0.5;
    double tau = 0.05;
    double c = 0.02;
    int k = 2;
    int z = 1;  // carried for completeness; one-step messaging never uses it
    double beta_l = 0.5;
    double beta_r = 0.5;
    bool symmetric = true;

    double e() const { return m / 2.0; }
    double sigma(Party p) const { return p == Party::L ? sigma_L : sigma_R; }
    double beta(Side s) const { return s == Side::Left ? beta_l : beta_r; }

    // Throws ModelError naming the first violated constraint.
    void validate() const;
};

// Returns params with the roles of the two parties exchanged.
ModelParams mirrored(const ModelParams& p);

struct State {
    CandidateType L = CandidateType::Moderate;
    CandidateType R = CandidateType::Moderate;
    bool operator==(const State&) const = default;
};

inline double position(CandidateType t, const ModelParams& p) {
    return t == CandidateType::Moderate ? p.m : p.e();
}

enum class Technology { None, Random, TargetOwnSide, TargetOpponentSide };

struct AdPlan {
    Technology tech = Technology::None;
    double intensity = 0.0;

    static AdPlan none() { return {}; }
    static AdPlan random(double x) { return {Technology::Random, x}; }
    static AdPlan target_own() { return {Technology::TargetOwnSide, 1.0}; }
    static AdPlan target_opponent() { return {Technology::TargetOpponentSide, 1.0}; }
};

struct PartyStrategy {
    AdPlan moderate;
    AdPlan extremist;
    const AdPlan& plan(CandidateType t) const {
        return t == CandidateType::Moderate ? moderate : extremist;
    }
};

struct StrategyProfile {
    PartyStrategy L;
    PartyStrategy R;

    const PartyStrategy& of(Party p) const { return p == Party::L ? L : R; }
    PartyStrategy& of(Party p) { return p == Party::L ? L : R; }

    // Probability that a voter on `side` sees party p's ad when its candidate has type t.
    double exposure(Party p, CandidateType t, Side side) const;

    // Both parties advertise moderates at random with the given intensities, extremists never.
    static StrategyProfile random_moderates(double x_L, double x_R);

    void validate() const;
};

StrategyProfile mirrored(const StrategyProfile& s);

struct InfoSet {
    Observation obs_L = Observation::Nothing;
    Observation obs_R = Observation::Nothing;
    std::vector<Message> msgs_L;
    std::vector<Message> msgs_R;
};

// Probabilities of the four states (t_L, t_R); index order mm, me, em, ee.
struct Belief {
    double mm = 0.25, me = 0.25, em = 0.25, ee = 0.25;

    static Belief from_marginals(double p_L_moderate, double p_R_moderate);
    double moderate_L() const { return mm + me; }
    double moderate_R() const { return mm + em; }
    double sum() const { return mm + me + em + ee; }
};

// P(moderate | n credible empty sources) for a party whose moderate is exposed with
// probability x_moderate per source and whose extremist with x_extremist.
double silent_moderate_probability(double prior, double x_moderate, double x_extremist,
                                   double sources);

Belief posterior(const InfoSet& info, const StrategyProfile& strategies,
                 const ModelParams& params, double effective_sources_L,
                 double effective_sources_R, Side side = Side::Left);

double indifferent_voter(const Belief& belief, const ModelParams& params);

Vote vote(double bliss, const Belief& belief, const ModelParams& params);

enum class VoterGroup { PartisanL, IndependentL, IndependentR, PartisanR };

struct VoterClass {
    VoterGroup group;
    double alpha_l;
    double alpha_r;
};

VoterClass classify_voter(double bliss, const Belief& belief_uninformed,
                          const ModelParams& params);

const char* to_string(Technology t);
const char* to_string(VoterGroup g);
Technology technology_from_string(const std::string& s);

}  // namespace echo
