#include "echo/harness.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <limits>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <variant>

#include "echo/communication.hpp"
#include "echo/party.hpp"

namespace echo {

using json = nlohmann::json;
using ojson = nlohmann::ordered_json;

namespace {

// ---------------------------------------------------------------- parsing

void check_keys(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
    if (!obj.is_object()) throw ConfigError(where + ": expected an object");
    for (auto it = obj.begin(); it != obj.end(); ++it)
        if (!allowed.count(it.key()))
            throw ConfigError(where + "." + it.key() + ": unknown key");
}

double get_number(const json& obj, const std::string& key, const std::string& where) {
    const json& v = obj.at(key);
    if (!v.is_number()) throw ConfigError(where + "." + key + ": expected a number");
    return v.get<double>();
}

long long get_integer(const json& v, const std::string& field) {
    if (v.is_number_integer()) return v.get<long long>();
    if (v.is_number_float()) {
        const double d = v.get<double>();
        if (std::floor(d) == d && std::abs(d) < 1e15) return static_cast<long long>(d);
    }
    throw ConfigError(field + ": expected an integer");
}

CandidateType parse_type(const json& v, const std::string& field) {
    if (v == "moderate") return CandidateType::Moderate;
    if (v == "extremist") return CandidateType::Extremist;
    throw ConfigError(field + ": expected \"moderate\" or \"extremist\"");
}

const std::set<std::string> kParamNames = {"m", "sigma", "sigma_L", "sigma_R", "tau", "c",
                                           "k", "z", "beta", "beta_l", "beta_r"};

ModelParams parse_params(const json& j) {
    check_keys(j, {"m", "sigma", "sigma_L", "sigma_R", "tau", "c", "k", "z", "beta", "beta_l",
                   "beta_r", "symmetric"},
               "params");
    ModelParams p;
    // "sigma" and "beta" set both sides first; explicit per-side keys override.
    for (const char* key : {"sigma", "beta"})
        if (j.contains(key)) set_parameter(p, key, get_number(j, key, "params"));
    for (auto it = j.begin(); it != j.end(); ++it) {
        const std::string& key = it.key();
        if (key == "sigma" || key == "beta") continue;
        if (key == "symmetric") {
            if (!it->is_boolean()) throw ConfigError("params.symmetric: expected a boolean");
            p.symmetric = it->get<bool>();
        } else if (key == "k" || key == "z") {
            set_parameter(p, key, static_cast<double>(get_integer(*it, "params." + key)));
        } else {
            set_parameter(p, key, get_number(j, key, "params"));
        }
    }
    try {
        p.validate();
    } catch (const ModelError& e) {
        throw ConfigError(std::string("params.") + e.what());
    }
    return p;
}

AdPlan parse_plan(const json& j, const std::string& where) {
    check_keys(j, {"tech", "intensity"}, where);
    if (!j.contains("tech") || !j["tech"].is_string())
        throw ConfigError(where + ".tech: required string");
    AdPlan plan;
    try {
        plan.tech = technology_from_string(j["tech"].get<std::string>());
    } catch (const ModelError& e) {
        throw ConfigError(where + "." + e.what());
    }
    switch (plan.tech) {
        case Technology::None: plan.intensity = 0.0; break;
        case Technology::Random:
            if (!j.contains("intensity")) throw ConfigError(where + ".intensity: required for random");
            plan.intensity = get_number(j, "intensity", where);
            break;
        default: plan.intensity = 1.0; break;
    }
    if (plan.tech != Technology::Random && j.contains("intensity"))
        throw ConfigError(where + ".intensity: only random advertising takes an intensity");
    return plan;
}

PartyStrategy parse_party(const json& j, const std::string& where) {
    check_keys(j, {"moderate", "extremist"}, where);
    PartyStrategy s;
    if (j.contains("moderate")) s.moderate = parse_plan(j["moderate"], where + ".moderate");
    if (j.contains("extremist")) s.extremist = parse_plan(j["extremist"], where + ".extremist");
    return s;
}

SimSpec parse_sim(const json& j) {
    check_keys(j, {"trials", "voters", "seed", "type_L", "type_R", "independents_mass"},
               "simulation");
    SimSpec s;
    if (j.contains("trials")) {
        const long long t = get_integer(j["trials"], "simulation.trials");
        if (t < 1) throw ConfigError("simulation.trials: must be at least 1");
        s.trials = static_cast<std::size_t>(t);
    }
    if (j.contains("voters")) {
        const long long v = get_integer(j["voters"], "simulation.voters");
        if (v < 100) throw ConfigError("simulation.voters: must be at least 100");
        s.voters = static_cast<std::size_t>(v);
    }
    if (j.contains("seed")) {
        if (!j["seed"].is_number_unsigned() && !j["seed"].is_number_integer())
            throw ConfigError("simulation.seed: expected a non-negative integer");
        if (j["seed"].is_number_integer() && j["seed"].get<long long>() < 0)
            throw ConfigError("simulation.seed: expected a non-negative integer");
        s.seed = j["seed"].get<std::uint64_t>();
    }
    if (j.contains("type_L")) s.type_L = parse_type(j["type_L"], "simulation.type_L");
    if (j.contains("type_R")) s.type_R = parse_type(j["type_R"], "simulation.type_R");
    if (j.contains("independents_mass")) {
        const double w = get_number(j, "independents_mass", "simulation");
        if (!(w > 0.0 && w < 1.0)) throw ConfigError("simulation.independents_mass: must lie in (0,1)");
        s.independents_mass = w;
    }
    return s;
}

PlotKind parse_plot(const json& v) {
    if (v == "chamber_map") return PlotKind::ChamberMap;
    if (v == "regime_diagram") return PlotKind::RegimeDiagram;
    if (v == "threshold_curves") return PlotKind::ThresholdCurves;
    throw ConfigError("plots: unknown plot kind " + v.dump());
}

// ---------------------------------------------------------------- output

using Cell = std::variant<double, long long, std::string, bool>;

struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<Cell>> rows;
};

std::string csv_escape(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char ch : s) {
        if (ch == '"') out += '"';
        out += ch;
    }
    return out + "\"";
}

std::string cell_text(const Cell& c) {
    if (auto d = std::get_if<double>(&c)) return format_number(*d);
    if (auto i = std::get_if<long long>(&c)) return std::to_string(*i);
    if (auto b = std::get_if<bool>(&c)) return *b ? "true" : "false";
    return csv_escape(std::get<std::string>(c));
}

ojson cell_json(const Cell& c) {
    if (auto d = std::get_if<double>(&c)) return *d;
    if (auto i = std::get_if<long long>(&c)) return *i;
    if (auto b = std::get_if<bool>(&c)) return *b;
    return std::get<std::string>(c);
}

Cell json_cell(const ojson& v) {
    if (v.is_boolean()) return v.get<bool>();
    if (v.is_number_integer()) return v.get<long long>();
    if (v.is_number()) return v.get<double>();
    if (v.is_null()) return std::numeric_limits<double>::quiet_NaN();
    return v.is_string() ? v.get<std::string>() : v.dump();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
    out << text;
    out.close();
    if (!out) throw std::runtime_error("failed writing " + path.string());
}

void write_table(const Table& t, const std::filesystem::path& path, Format f) {
    if (f == Format::Csv) {
        std::string text;
        for (std::size_t i = 0; i < t.columns.size(); ++i)
            text += (i ? "," : "") + csv_escape(t.columns[i]);
        text += '\n';
        for (const auto& row : t.rows) {
            for (std::size_t i = 0; i < row.size(); ++i) text += (i ? "," : "") + cell_text(row[i]);
            text += '\n';
        }
        write_text(path, text);
        return;
    }
    ojson j = ojson::object();
    j["columns"] = t.columns;
    ojson rows = ojson::array();
    for (const auto& row : t.rows) {
        ojson r = ojson::array();
        for (const Cell& c : row) r.push_back(cell_json(c));
        rows.push_back(std::move(r));
    }
    j["rows"] = std::move(rows);
    write_text(path, to_json_text(j) + "\n");
}

void dump_json(const ojson& j, std::string& out, int indent, bool compact_arrays) {
    const std::string pad(static_cast<std::size_t>(indent) * 2, ' ');
    switch (j.type()) {
        case ojson::value_t::null: out += "null"; return;
        case ojson::value_t::boolean: out += j.get<bool>() ? "true" : "false"; return;
        case ojson::value_t::number_integer: out += std::to_string(j.get<long long>()); return;
        case ojson::value_t::number_unsigned: out += std::to_string(j.get<unsigned long long>()); return;
        case ojson::value_t::number_float: {
            const double d = j.get<double>();
            out += std::isfinite(d) ? format_number(d) : "null";
            return;
        }
        case ojson::value_t::string: out += j.dump(); return;
        case ojson::value_t::array: {
            if (j.empty()) {
                out += "[]";
                return;
            }
            const bool flat = compact_arrays && std::none_of(j.begin(), j.end(), [](const ojson& e) {
                return e.is_structured();
            });
            out += '[';
            bool first = true;
            for (const auto& e : j) {
                if (!first) out += ',';
                first = false;
                if (!flat) out += "\n" + pad + "  ";
                dump_json(e, out, indent + 1, compact_arrays);
            }
            if (!flat) out += "\n" + pad;
            out += ']';
            return;
        }
        case ojson::value_t::object: {
            if (j.empty()) {
                out += "{}";
                return;
            }
            out += '{';
            bool first = true;
            for (auto it = j.begin(); it != j.end(); ++it) {
                if (!first) out += ',';
                first = false;
                out += "\n" + pad + "  " + ojson(it.key()).dump() + ": ";
                dump_json(it.value(), out, indent + 1, compact_arrays);
            }
            out += "\n" + pad + "}";
            return;
        }
        default: out += j.dump(); return;
    }
}

const char* info_label(int info) {
    static const char* labels[] = {"m,m", "m,0", "0,m", "0,0"};
    return labels[info];
}

// ---------------------------------------------------------------- analytics

std::vector<std::pair<State, double>> state_weights(const ModelParams& p,
                                                    const std::optional<CandidateType>& fixed_L,
                                                    const std::optional<CandidateType>& fixed_R) {
    std::vector<std::pair<State, double>> out;
    for (CandidateType tl : {CandidateType::Moderate, CandidateType::Extremist}) {
        const double wl = fixed_L ? (*fixed_L == tl ? 1.0 : 0.0)
                                  : (tl == CandidateType::Moderate ? p.sigma_L : 1.0 - p.sigma_L);
        for (CandidateType tr : {CandidateType::Moderate, CandidateType::Extremist}) {
            const double wr = fixed_R ? (*fixed_R == tr ? 1.0 : 0.0)
                                      : (tr == CandidateType::Moderate ? p.sigma_R : 1.0 - p.sigma_R);
            if (wl * wr > 0.0) out.push_back({{tl, tr}, wl * wr});
        }
    }
    return out;
}

const char* state_label(State s) {
    const bool l = s.L == CandidateType::Moderate, r = s.R == CandidateType::Moderate;
    return l ? (r ? "mm" : "me") : (r ? "em" : "ee");
}

void add_estimate(ojson& block, std::vector<Verdict>& verdicts, const std::string& name,
                  const Estimate& e, std::optional<double> analytic) {
    block[name + ".mean"] = e.mean;
    block[name + ".std_error"] = e.std_error;
    block[name + ".n"] = static_cast<long long>(e.n);
    block[name + ".flagged"] = e.flagged;
    if (!analytic) return;
    block[name + ".analytic"] = *analytic;
    const double margin = 3.0 * e.std_error + 1e-12 - std::abs(e.mean - *analytic);
    verdicts.push_back({"simulation." + name, margin >= 0.0, margin});
}

}  // namespace

// ---------------------------------------------------------------- public API

void set_parameter(ModelParams& p, const std::string& name, double v) {
    auto as_int = [&](const char* field) {
        if (std::floor(v) != v) throw ConfigError(std::string(field) + ": expected an integer");
        return static_cast<int>(v);
    };
    if (name == "m") p.m = v;
    else if (name == "sigma") p.sigma_L = p.sigma_R = v;
    else if (name == "sigma_L") p.sigma_L = v;
    else if (name == "sigma_R") p.sigma_R = v;
    else if (name == "tau") p.tau = v;
    else if (name == "c") p.c = v;
    else if (name == "k") p.k = as_int("k");
    else if (name == "z") p.z = as_int("z");
    else if (name == "beta") p.beta_l = p.beta_r = v;
    else if (name == "beta_l") p.beta_l = v;
    else if (name == "beta_r") p.beta_r = v;
    else throw ConfigError("unknown parameter '" + name + "'");
}

Scenario parse_scenario(const json& config) {
    check_keys(config, {"name", "params", "profile", "simulation", "sweep", "expect",
                        "expect_tolerance", "plots", "chamber_step"},
               "config");
    Scenario s;
    if (!config.contains("name") || !config["name"].is_string() ||
        config["name"].get<std::string>().empty())
        throw ConfigError("config.name: required non-empty string");
    s.name = config["name"].get<std::string>();
    if (s.name.find_first_of("/\\") != std::string::npos || s.name.front() == '.')
        throw ConfigError("config.name: must be usable as a file name");
    s.params = parse_params(config.value("params", json::object()));

    if (config.contains("profile")) {
        const json& prof = config["profile"];
        if (prof.is_string()) {
            if (prof != "equilibrium")
                throw ConfigError("profile: expected \"equilibrium\" or an explicit profile object");
        } else {
            check_keys(prof, {"L", "R"}, "profile");
            s.solve_profile = false;
            if (prof.contains("L")) s.profile.L = parse_party(prof["L"], "profile.L");
            if (prof.contains("R")) s.profile.R = parse_party(prof["R"], "profile.R");
            try {
                s.profile.validate();
            } catch (const ModelError& e) {
                throw ConfigError(e.what());
            }
        }
    }
    if (config.contains("simulation")) s.sim = parse_sim(config["simulation"]);

    if (config.contains("sweep")) {
        const json& sw = config["sweep"];
        if (!sw.is_array()) throw ConfigError("sweep: expected a list of {param, values}");
        std::set<std::string> seen;
        for (std::size_t i = 0; i < sw.size(); ++i) {
            const std::string where = "sweep[" + std::to_string(i) + "]";
            check_keys(sw[i], {"param", "values"}, where);
            if (!sw[i].contains("param") || !sw[i]["param"].is_string())
                throw ConfigError(where + ".param: required string");
            SweepAxis axis{sw[i]["param"].get<std::string>(), {}};
            if (!kParamNames.count(axis.name))
                throw ConfigError(where + ".param: unknown parameter '" + axis.name + "'");
            if (!seen.insert(axis.name).second)
                throw ConfigError(where + ".param: duplicate axis '" + axis.name + "'");
            if (!sw[i].contains("values") || !sw[i]["values"].is_array() || sw[i]["values"].empty())
                throw ConfigError(where + ".values: required non-empty list");
            for (const json& v : sw[i]["values"]) {
                if (!v.is_number()) throw ConfigError(where + ".values: expected numbers");
                axis.values.push_back(v.get<double>());
            }
            s.sweep.push_back(std::move(axis));
        }
    }
    if (config.contains("expect")) {
        const json& ex = config["expect"];
        if (!ex.is_object()) throw ConfigError("expect: expected an object of key -> number");
        for (auto it = ex.begin(); it != ex.end(); ++it) {
            if (!it->is_number()) throw ConfigError("expect." + it.key() + ": expected a number");
            s.expect.push_back({it.key(), it->get<double>()});
        }
    }
    if (config.contains("expect_tolerance")) {
        s.expect_tolerance = get_number(config, "expect_tolerance", "config");
        if (!(s.expect_tolerance >= 0.0)) throw ConfigError("config.expect_tolerance: must be >= 0");
    }
    if (config.contains("plots")) {
        if (!config["plots"].is_array()) throw ConfigError("plots: expected a list");
        for (const json& v : config["plots"]) s.plots.push_back(parse_plot(v));
    }
    if (config.contains("chamber_step")) {
        s.chamber_step = get_number(config, "chamber_step", "config");
        if (!(s.chamber_step > 0.0 && s.chamber_step <= 0.01))
            throw ConfigError("config.chamber_step: must lie in (0, 0.01]");
    }
    s.source = config;
    return s;
}

Scenario load_scenario(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot read config file " + path.string());
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
    return parse_scenario(j);
}

Scenario apply_overrides(Scenario s, const Overrides& o) {
    if (o.seed || o.trials) {
        if (!s.sim) s.sim = SimSpec{};
        if (!s.source.contains("simulation")) s.source["simulation"] = json::object();
    }
    if (o.seed) {
        s.sim->seed = *o.seed;
        s.source["simulation"]["seed"] = *o.seed;
    }
    if (o.trials) {
        if (*o.trials < 1) throw ConfigError("--trials: must be at least 1");
        s.sim->trials = *o.trials;
        s.source["simulation"]["trials"] = *o.trials;
    }
    return s;
}

std::vector<Scenario> expand_sweep(const Scenario& base) {
    std::vector<Scenario> points;
    std::size_t total = 1;
    for (const auto& a : base.sweep) total *= a.values.size();
    const int width = static_cast<int>(std::to_string(total > 0 ? total - 1 : 0).size());
    for (std::size_t idx = 0; idx < total; ++idx) {
        Scenario s = base;
        s.sweep.clear();
        std::size_t rest = idx;
        json point = json::object();
        // first axis varies slowest
        std::vector<std::size_t> pick(base.sweep.size());
        for (std::size_t a = base.sweep.size(); a-- > 0;) {
            pick[a] = rest % base.sweep[a].values.size();
            rest /= base.sweep[a].values.size();
        }
        for (std::size_t a = 0; a < base.sweep.size(); ++a) {
            const double v = base.sweep[a].values[pick[a]];
            set_parameter(s.params, base.sweep[a].name, v);
            point[base.sweep[a].name] = v;
        }
        try {
            s.params.validate();
        } catch (const ModelError& e) {
            throw ConfigError("sweep point " + std::to_string(idx) + ": params." + e.what());
        }
        std::string index = std::to_string(idx);
        s.name = base.name + "__" + std::string(width - static_cast<int>(index.size()), '0') + index;
        s.source.erase("sweep");
        s.source["sweep_point"] = point;
        points.push_back(std::move(s));
    }
    return points;
}

bool RunResult::all_pass() const {
    return std::all_of(verdicts.begin(), verdicts.end(), [](const Verdict& v) { return v.pass; });
}

std::string format_number(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
    return std::string(buf, res.ptr);
}

std::string to_json_text(const ojson& j) {
    std::string out;
    dump_json(j, out, 0, true);
    return out;
}

std::string scenario_hash(const json& normalized) {
    std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a
    for (unsigned char ch : normalized.dump()) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

RunResult run_scenario(const Scenario& s, unsigned jobs) {
    const ModelParams& p = s.params;
    RunResult r;
    r.scenario = s.name;
    r.seed = s.sim ? s.sim->seed : 0;
    r.scenario_hash = scenario_hash(s.source);
    ojson& a = r.analytic;
    a = ojson::object();

    a["params.m"] = p.m;
    a["params.e"] = p.e();
    a["params.sigma_L"] = p.sigma_L;
    a["params.sigma_R"] = p.sigma_R;
    a["params.tau"] = p.tau;
    a["params.c"] = p.c;
    a["params.k"] = p.k;
    a["params.z"] = p.z;
    a["params.beta_l"] = p.beta_l;
    a["params.beta_r"] = p.beta_r;

    // random-advertising equilibrium
    std::optional<RandomAdSolution> sol;
    try {
        sol = solve_random_ad(p);
        a["random_ad.x"] = sol->x;
        a["random_ad.advertise"] = sol->advertise;
        a["random_ad.rho_me"] = sol->rho_me;
        a["random_ad.residual"] = sol->residual;
        const bool interior = sol->advertise && sol->x > 0.0 && sol->x < 1.0;
        const double margin = 1e-10 - (interior ? std::abs(sol->residual) : 0.0);
        r.verdicts.push_back({"random_ad.residual", margin > 0.0, margin});
    } catch (const SolverError& e) {
        a["random_ad.error"] = e.what();
        r.verdicts.push_back({"random_ad.solved", false, -1.0});
    }

    StrategyProfile prof = s.profile;
    if (s.solve_profile) prof = symmetric_random(sol ? sol->x : 0.0);
    r.profile = prof;
    for (Party party : {Party::L, Party::R}) {
        const std::string tag = party == Party::L ? "L" : "R";
        const PartyStrategy& ps = prof.of(party);
        a["profile." + tag + ".moderate"] = to_string(ps.moderate.tech);
        a["profile." + tag + ".moderate.intensity"] = ps.moderate.intensity;
        a["profile." + tag + ".extremist"] = to_string(ps.extremist.tech);
        a["profile." + tag + ".extremist.intensity"] = ps.extremist.intensity;
    }

    const double x_L = prof.exposure(Party::L, CandidateType::Moderate, Side::Left);
    const double x_R = prof.exposure(Party::R, CandidateType::Moderate, Side::Right);
    const EchoCutoffs cut = echo_cutoffs(p, x_L, x_R);
    a["cutoffs.q_l"] = cut.q_l;
    a["cutoffs.q_r"] = cut.q_r;
    {
        const double margin = std::min(0.5 - cut.q_l, cut.q_r - 0.5);
        r.verdicts.push_back({"cutoffs.ordered", margin > 0.0, margin});
    }
    a["informed_fraction.L"] = informed_fraction(x_L, p.k, p.beta_l);
    a["informed_fraction.R"] = informed_fraction(x_R, p.k, p.beta_r);
    try {
        const double sources = p.beta_l * p.k + 1.0;
        const Belief b = posterior(InfoSet{}, prof, p, sources, sources, Side::Left);
        const VoterClass vc = classify_voter(0.5, b, p);
        a["uninformed.rho_mm"] = b.mm;
        a["uninformed.alpha_l"] = vc.alpha_l;
        a["uninformed.alpha_r"] = vc.alpha_r;
    } catch (const ModelError& e) {
        a["uninformed.error"] = e.what();
    }

    const BenchmarkThresholds bt = benchmark_thresholds(p);
    a["thresholds.c0"] = bt.c0;
    a["thresholds.c_tau"] = bt.c_tau;
    r.verdicts.push_back({"thresholds.ordered", bt.c0 < bt.c_tau, bt.c_tau - bt.c0});
    try {
        const TargetingAnalysis ta = targeting_analysis(p);
        a["thresholds.c_star"] = ta.c_star;
        a["thresholds.c_hat_bar"] = ta.c_hat_bar;
        a["thresholds.kbeta_bar"] = ta.kbeta_bar;
        a["thresholds.rho_mm"] = ta.rho_mm;
        a["targeting.own_side_dominated"] = ta.own_side_dominated;
        a["targeting.regime"] = to_string(ta.regime);
    } catch (const SolverError& e) {
        a["targeting.error"] = e.what();
    }
    const Mixing mix = mixing_probability(p);
    a["thresholds.zeta"] = mix.zeta;
    a["thresholds.zeta_out_of_range"] = mix.out_of_range;

    try {
        const CandidateSelection cs = solve_candidate_selection(p);
        a["candidate_selection.c_bar"] = cs.c_bar;
        a["candidate_selection.c_bar_defined"] = cs.c_bar_defined;
        a["candidate_selection.regime"] = to_string(cs.regime);
        if (cs.regime == CandidateRegime::Mixed) {
            a["candidate_selection.sigma"] = cs.sigma;
            a["candidate_selection.x"] = cs.x;
            const double worst = std::max(std::abs(cs.residuals[0]), std::abs(cs.residuals[1]));
            r.verdicts.push_back({"candidate_selection.residuals", worst < 1e-10, 1e-10 - worst});
        } else {
            a["candidate_selection.sigma"] = 0.0;
            a["candidate_selection.x"] = 0.0;
        }
    } catch (const std::exception& e) {
        a["candidate_selection.error"] = e.what();
    }

    for (CandidateType tl : {CandidateType::Moderate, CandidateType::Extremist}) {
        for (CandidateType tr : {CandidateType::Moderate, CandidateType::Extremist}) {
            const State st{tl, tr};
            const std::string key = std::string("state.") + state_label(st);
            try {
                const ElectionOutcome out = election_outcome(prof, st, p);
                a[key + ".vote_share"] = out.vote_share_L;
                a[key + ".win_prob"] = out.win_prob_L;
            } catch (const ModelError& e) {
                a[key + ".error"] = e.what();
            }
        }
    }
    a["party_utility.L.moderate"] = party_utility(prof, Party::L, CandidateType::Moderate, p);
    a["party_utility.R.moderate"] = party_utility(prof, Party::R, CandidateType::Moderate, p);

    for (const Expectation& ex : s.expect) {
        if (!a.contains(ex.key) || !a[ex.key].is_number())
            throw ConfigError("expect." + ex.key + ": no numeric analytic output with that key");
        const double margin = s.expect_tolerance - std::abs(a[ex.key].get<double>() - ex.value);
        r.verdicts.push_back({"expect." + ex.key, margin >= 0.0, margin});
    }

    r.simulation = ojson::object();
    if (s.sim) {
        SimConfig cfg;
        cfg.n_trials = s.sim->trials;
        cfg.n_voters = s.sim->voters;
        cfg.seed = s.sim->seed;
        cfg.params = p;
        cfg.profile = prof;
        cfg.type_L = s.sim->type_L;
        cfg.type_R = s.sim->type_R;
        cfg.independents_mass = s.sim->independents_mass;
        cfg.jobs = jobs;
        const SimulationRun run = simulate(cfg);

        ElectionOptions eo;
        eo.exposure = Exposure::PerLink;
        eo.same_type = SameTypeStates::Unilateral;
        const Population pop = cfg.population();
        double mu = 0.0, pi_map = 0.0, pi_major = 0.0, util = 0.0;
        for (const auto& [st, w] : state_weights(p, cfg.type_L, cfg.type_R)) {
            const double share = vote_share(prof, st, p, eo);
            const double pi = win_probability(share, p);
            mu += w * share;
            pi_map += w * pi;
            pi_major += w * majority_win_probability(prof, st, p, pop, eo);
            const double t_l = position(st.L, p), t_r = position(st.R, p);
            const AdPlan& plan = prof.L.plan(st.L);
            const double cost = plan.tech == Technology::None ? 0.0 : plan.intensity;
            util += w * (pi * (1.0 - t_r - t_l) + (p.e() - (1.0 - t_r)) - p.c * cost);
        }
        ojson& sb = r.simulation;
        sb["trials"] = static_cast<long long>(cfg.n_trials);
        sb["voters"] = static_cast<long long>(cfg.n_voters);
        sb["independents_mass"] = pop.w;
        add_estimate(sb, r.verdicts, "vote_share", run.vote_share, mu);
        add_estimate(sb, r.verdicts, "win_prob_map", run.win_prob_map, pi_map);
        add_estimate(sb, r.verdicts, "win_prob_majority", run.win_prob_majority, pi_major);
        add_estimate(sb, r.verdicts, "party_utility_L", run.party_utility, util);
        add_estimate(sb, r.verdicts, "finite_majority", run.finite_majority, std::nullopt);
        add_estimate(sb, r.verdicts, "informed_L", run.informed_L, std::nullopt);
        add_estimate(sb, r.verdicts, "informed_R", run.informed_R, std::nullopt);
    }
    return r;
}

Format format_from_string(const std::string& s) {
    if (s == "csv") return Format::Csv;
    if (s == "json") return Format::Json;
    throw ConfigError("--format: expected csv or json");
}

const char* extension(Format f) { return f == Format::Csv ? ".csv" : ".json"; }

const char* to_string(PlotKind k) {
    switch (k) {
        case PlotKind::ChamberMap: return "chamber_map";
        case PlotKind::RegimeDiagram: return "regime_diagram";
        case PlotKind::ThresholdCurves: return "threshold_curves";
    }
    return "?";
}

void write_result(const RunResult& r, const std::filesystem::path& dir, Format f) {
    const auto path = dir / (r.scenario + extension(f));
    if (f == Format::Json) {
        ojson j = ojson::object();
        j["scenario"] = r.scenario;
        j["seed"] = r.seed;
        j["version"] = r.version;
        j["scenario_hash"] = r.scenario_hash;
        j["analytic"] = r.analytic;
        j["simulation"] = r.simulation;
        ojson v = ojson::array();
        for (const Verdict& x : r.verdicts)
            v.push_back(ojson{{"name", x.name}, {"pass", x.pass}, {"margin", x.margin}});
        j["verdicts"] = std::move(v);
        write_text(path, to_json_text(j) + "\n");
        return;
    }
    Table t;
    t.columns = {"scenario", "seed", "version", "scenario_hash", "block", "key", "value"};
    auto row = [&](const std::string& block, const std::string& key, Cell value) {
        t.rows.push_back({r.scenario, static_cast<long long>(r.seed), r.version, r.scenario_hash,
                          block, key, std::move(value)});
    };
    for (auto it = r.analytic.begin(); it != r.analytic.end(); ++it)
        row("analytic", it.key(), json_cell(it.value()));
    for (auto it = r.simulation.begin(); it != r.simulation.end(); ++it)
        row("simulation", it.key(), json_cell(it.value()));
    for (const Verdict& v : r.verdicts) {
        row("verdict", v.name, v.pass);
        row("verdict_margin", v.name, v.margin);
    }
    write_table(t, path, f);
}

void write_sweep_table(const std::string& name, const std::vector<SweepAxis>& axes,
                       const std::vector<Scenario>& points, const std::vector<RunResult>& results,
                       const std::filesystem::path& dir, Format f) {
    static const char* keys[] = {"random_ad.x",       "cutoffs.q_l",           "cutoffs.q_r",
                                 "thresholds.c0",     "thresholds.c_tau",      "thresholds.c_star",
                                 "thresholds.c_hat_bar", "thresholds.kbeta_bar", "targeting.regime",
                                 "state.me.vote_share", "state.me.win_prob"};
    Table t;
    t.columns = {"point", "seed", "version", "scenario_hash"};
    for (const auto& a : axes) t.columns.push_back(a.name);
    for (const char* k : keys) t.columns.push_back(k);
    t.columns.push_back("verdicts_failed");
    for (std::size_t i = 0; i < results.size(); ++i) {
        const RunResult& r = results[i];
        std::vector<Cell> row{r.scenario, static_cast<long long>(r.seed), r.version, r.scenario_hash};
        const json& point = points[i].source.at("sweep_point");
        for (const auto& a : axes) row.push_back(point.at(a.name).get<double>());
        for (const char* k : keys)
            row.push_back(r.analytic.contains(k) ? json_cell(r.analytic[k]) : Cell{std::string()});
        long long failed = 0;
        for (const Verdict& v : r.verdicts) failed += v.pass ? 0 : 1;
        row.push_back(failed);
        t.rows.push_back(std::move(row));
    }
    write_table(t, dir / (name + "_sweep" + extension(f)), f);
}

void emit_plot_data(const Scenario& s, const RunResult& r, PlotKind kind,
                    const std::filesystem::path& dir, Format f) {
    const ModelParams& p = s.params;
    Table t;
    switch (kind) {
        case PlotKind::ChamberMap: {
            if (p.k < 1) throw ConfigError("chamber_map: needs k >= 1 (no communication stage otherwise)");
            t.columns = {"s", "r", "info", "truthful"};
            const MessageGame game(p, r.profile, p.k, p.beta_l, p.beta_r);
            const auto n = static_cast<std::size_t>(std::floor(1.0 / s.chamber_step));
            std::vector<double> grid(n);
            for (std::size_t i = 0; i < n; ++i) grid[i] = (static_cast<double>(i) + 0.5) * s.chamber_step;
            std::vector<MessageGame::Receiver> receivers;
            receivers.reserve(n);
            for (double rr : grid) receivers.push_back(game.receiver(rr));
            for (std::size_t is = 0; is < n; ++is) {
                for (std::size_t ir = 0; ir < n; ++ir) {
                    for (int info = 0; info < kInfoSets; ++info) {
                        const int truthful = MessageGame::index_of(truthful_pair(canonical_info(info)));
                        const bool ok = game.preferred(receivers[ir], grid[is], info) == truthful;
                        t.rows.push_back({grid[is], grid[ir], std::string(info_label(info)),
                                          static_cast<long long>(ok ? 1 : 0)});
                    }
                }
            }
            break;
        }
        case PlotKind::RegimeDiagram: {
            t.columns = {"beta_k", "k", "beta", "c", "kbeta_bar", "c_star", "c_hat_bar", "regime"};
            for (int k = 1; k <= 20; ++k) {
                for (int ci = 1; ci <= 40; ++ci) {
                    ModelParams q = p;
                    q.k = k;
                    q.c = ci * 0.01;
                    try {
                        const TargetingAnalysis ta = targeting_analysis(q);
                        t.rows.push_back({q.beta_l * k, static_cast<long long>(k), q.beta_l, q.c,
                                          ta.kbeta_bar, ta.c_star, ta.c_hat_bar,
                                          std::string(to_string(ta.regime))});
                    } catch (const SolverError& e) {
                        t.rows.push_back({q.beta_l * k, static_cast<long long>(k), q.beta_l, q.c,
                                          std::numeric_limits<double>::quiet_NaN(),
                                          std::numeric_limits<double>::quiet_NaN(),
                                          std::numeric_limits<double>::quiet_NaN(),
                                          std::string("error: ") + e.what()});
                    }
                }
            }
            break;
        }
        case PlotKind::ThresholdCurves: {
            t.columns = {"sigma", "c0", "c_tau", "c_star", "c_hat_bar"};
            for (int i = 1; i <= 19; ++i) {
                ModelParams q = p;
                q.sigma_L = q.sigma_R = i * 0.05;
                const BenchmarkThresholds bt = benchmark_thresholds(q);
                const TargetingAnalysis ta = targeting_analysis(q);
                t.rows.push_back({q.sigma_R, bt.c0, bt.c_tau, ta.c_star, ta.c_hat_bar});
            }
            break;
        }
    }
    write_table(t, dir / (r.scenario + "." + to_string(kind) + extension(f)), f);
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char ch = line[i];
        if (quoted) {
            if (ch == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                cur += '"';
                ++i;
            } else if (ch == '"') {
                quoted = false;
            } else {
                cur += ch;
            }
        } else if (ch == '"') {
            quoted = true;
        } else if (ch == ',') {
            out.push_back(std::move(cur));
            cur.clear();
        } else {
            cur += ch;
        }
    }
    out.push_back(std::move(cur));
    return out;
}

}  // namespace

ReportSummary report(const std::filesystem::path& dir) {
    if (!std::filesystem::is_directory(dir))
        throw ConfigError("report: " + dir.string() + " is not a directory");
    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::directory_iterator(dir))
        if (entry.is_regular_file()) files.push_back(entry.path());
    std::sort(files.begin(), files.end());

    ReportSummary sum;
    std::ostringstream text;
    for (const auto& path : files) {
        std::vector<std::pair<std::string, bool>> verdicts;
        std::string scenario;
        if (path.extension() == ".json") {
            std::ifstream in(path, std::ios::binary);
            json j;
            try {
                j = json::parse(in);
            } catch (const json::parse_error&) {
                continue;
            }
            if (!j.is_object() || !j.contains("verdicts")) continue;
            scenario = j.value("scenario", path.stem().string());
            for (const json& v : j["verdicts"]) verdicts.push_back({v.at("name"), v.at("pass")});
        } else if (path.extension() == ".csv") {
            std::ifstream in(path, std::ios::binary);
            std::string line;
            if (!std::getline(in, line) ||
                line != "scenario,seed,version,scenario_hash,block,key,value")
                continue;
            while (std::getline(in, line)) {
                const auto cells = split_csv_line(line);
                if (cells.size() != 7) continue;
                scenario = cells[0];
                if (cells[4] == "verdict") verdicts.push_back({cells[5], cells[6] == "true"});
            }
        } else {
            continue;
        }
        ++sum.files;
        std::size_t failed = 0;
        for (const auto& [name, pass] : verdicts) {
            ++sum.verdicts;
            if (!pass) {
                ++failed;
                text << "  FAIL " << scenario << ": " << name << "\n";
            }
        }
        sum.failures += failed;
        text << scenario << ": " << verdicts.size() << " verdicts, " << failed << " failed\n";
    }
    text << "total: " << sum.files << " result files, " << sum.verdicts << " verdicts, "
         << sum.failures << " failed\n";
    sum.text = text.str();
    return sum;
}

}  // namespace echo
