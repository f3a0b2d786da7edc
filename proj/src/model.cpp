#include "echo/model.hpp"

#include <cmath>
#include <sstream>

namespace echo {

namespace {

std::string fmt(double v) {
    std::ostringstream os;
    os.imbue(std::locale::classic());
    os << v;
    return os.str();
}

void require(bool ok, const char* field, const std::string& constraint) {
    if (!ok) throw ModelError(field, "violates " + constraint);
}

bool in_open_unit(double v) { return v > 0.0 && v < 1.0; }
bool in_closed_unit(double v) { return v >= 0.0 && v <= 1.0; }

}  // namespace

void ModelParams::validate() const {
    require(m > 0.0 && m < 0.5, "m", "0 < m < 1/2 (got " + fmt(m) + ")");
    require(tau > 0.0, "tau", "tau > 0 (got " + fmt(tau) + ")");
    require(m < 0.25 - tau / 2.0, "m",
            "m < 1/4 - tau/2 (got m=" + fmt(m) + ", tau=" + fmt(tau) + ")");
    require(in_closed_unit(sigma_L), "sigma_L", "0 <= sigma_L <= 1");
    require(in_closed_unit(sigma_R), "sigma_R", "0 <= sigma_R <= 1");
    require(c > 0.0, "c", "c > 0 (got " + fmt(c) + ")");
    require(k >= 0, "k", "k >= 0");
    require(z >= 0, "z", "z >= 0");
    require(in_open_unit(beta_l), "beta_l", "0 < beta_l < 1");
    require(in_open_unit(beta_r), "beta_r", "0 < beta_r < 1");
    if (symmetric) {
        require(sigma_L == sigma_R, "sigma_R", "sigma_L == sigma_R in symmetric mode");
        require(beta_l == beta_r, "beta_r", "beta_l == beta_r in symmetric mode");
    }
}

ModelParams mirrored(const ModelParams& p) {
    ModelParams q = p;
    std::swap(q.sigma_L, q.sigma_R);
    std::swap(q.beta_l, q.beta_r);
    return q;
}

double StrategyProfile::exposure(Party p, CandidateType t, Side side) const {
    const AdPlan& plan = of(p).plan(t);
    const Side own = p == Party::L ? Side::Left : Side::Right;
    switch (plan.tech) {
        case Technology::None: return 0.0;
        case Technology::Random: return plan.intensity;
        case Technology::TargetOwnSide: return side == own ? 1.0 : 0.0;
        case Technology::TargetOpponentSide: return side == own ? 0.0 : 1.0;
    }
    return 0.0;
}

StrategyProfile StrategyProfile::random_moderates(double x_L, double x_R) {
    StrategyProfile s;
    s.L.moderate = AdPlan::random(x_L);
    s.R.moderate = AdPlan::random(x_R);
    return s;
}

void StrategyProfile::validate() const {
    auto check = [](const AdPlan& a, const char* field) {
        if (a.tech == Technology::Random || a.tech == Technology::None) {
            if (!(a.intensity >= 0.0 && a.intensity <= 1.0))
                throw ModelError(field, "intensity must lie in [0,1]");
            if (a.tech == Technology::None && a.intensity != 0.0)
                throw ModelError(field, "technology none requires intensity 0");
        } else if (a.intensity != 1.0) {
            throw ModelError(field, "targeted technologies deliver with intensity 1");
        }
    };
    check(L.moderate, "profile.L.moderate");
    check(L.extremist, "profile.L.extremist");
    check(R.moderate, "profile.R.moderate");
    check(R.extremist, "profile.R.extremist");
}

StrategyProfile mirrored(const StrategyProfile& s) {
    StrategyProfile q;
    q.L = s.R;
    q.R = s.L;
    return q;
}

Belief Belief::from_marginals(double pL, double pR) {
    Belief b;
    b.mm = pL * pR;
    b.me = pL * (1.0 - pR);
    b.em = (1.0 - pL) * pR;
    b.ee = (1.0 - pL) * (1.0 - pR);
    const double total = b.sum();
    b.mm /= total;
    b.me /= total;
    b.em /= total;
    b.ee /= total;
    return b;
}

double silent_moderate_probability(double prior, double x_moderate, double x_extremist,
                                   double sources) {
    const double stay_m = prior * std::pow(1.0 - x_moderate, sources);
    const double stay_e = (1.0 - prior) * std::pow(1.0 - x_extremist, sources);
    const double total = stay_m + stay_e;
    if (total <= 0.0)
        throw ModelError("info", "silence has zero probability under the profile");
    return stay_m / total;
}

namespace {

double marginal(Party p, Observation obs, const std::vector<Message>& msgs,
                const StrategyProfile& s, const ModelParams& params, double sources,
                Side side) {
    const double x_m = s.exposure(p, CandidateType::Moderate, side);
    const double x_e = s.exposure(p, CandidateType::Extremist, side);
    const char* field = p == Party::L ? "info.obs_L" : "info.obs_R";
    if (obs == Observation::SawModerate) {
        if (x_m <= 0.0)
            throw ModelError(field, "moderate ad observed but the profile never shows it");
        return 1.0;
    }
    for (Message msg : msgs)
        if (msg == Message::M) return 1.0;
    if (sources < 1.0) throw ModelError("effective_sources", "must be at least 1");
    return silent_moderate_probability(params.sigma(p), x_m, x_e, sources);
}

}  // namespace

Belief posterior(const InfoSet& info, const StrategyProfile& strategies,
                 const ModelParams& params, double n_L, double n_R, Side side) {
    if (info.msgs_L.size() != info.msgs_R.size())
        throw ModelError("info.msgs", "message vectors must have equal length");
    const double pL =
        marginal(Party::L, info.obs_L, info.msgs_L, strategies, params, n_L, side);
    const double pR =
        marginal(Party::R, info.obs_R, info.msgs_R, strategies, params, n_R, side);
    return Belief::from_marginals(pL, pR);
}

double indifferent_voter(const Belief& b, const ModelParams& params) {
    const double m = params.m;
    const double e = params.e();
    const double diff = b.mm * (m - m) + b.me * (m - e) + b.em * (e - m) + b.ee * (e - e);
    return 0.5 + 0.5 * diff;
}

Vote vote(double bliss, const Belief& belief, const ModelParams& params) {
    return bliss <= indifferent_voter(belief, params) ? Vote::L : Vote::R;
}

VoterClass classify_voter(double bliss, const Belief& uninformed, const ModelParams& params) {
    const double half_width = params.m / 4.0 * (1.0 - uninformed.mm);
    VoterClass out{VoterGroup::IndependentL, 0.5 - half_width, 0.5 + half_width};
    if (bliss < out.alpha_l)
        out.group = VoterGroup::PartisanL;
    else if (bliss > out.alpha_r)
        out.group = VoterGroup::PartisanR;
    else if (bliss <= 0.5)
        out.group = VoterGroup::IndependentL;
    else
        out.group = VoterGroup::IndependentR;
    return out;
}

const char* to_string(Technology t) {
    switch (t) {
        case Technology::None: return "none";
        case Technology::Random: return "random";
        case Technology::TargetOwnSide: return "target_own";
        case Technology::TargetOpponentSide: return "target_opponent";
    }
    return "?";
}

const char* to_string(VoterGroup g) {
    switch (g) {
        case VoterGroup::PartisanL: return "partisan_L";
        case VoterGroup::IndependentL: return "independent_L";
        case VoterGroup::IndependentR: return "independent_R";
        case VoterGroup::PartisanR: return "partisan_R";
    }
    return "?";
}

Technology technology_from_string(const std::string& s) {
    if (s == "none") return Technology::None;
    if (s == "random") return Technology::Random;
    if (s == "target_own") return Technology::TargetOwnSide;
    if (s == "target_opponent") return Technology::TargetOpponentSide;
    throw ModelError("technology", "unknown technology '" + s + "'");
}

}  // namespace echo
