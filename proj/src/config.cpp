#include "riskmin/config.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <initializer_list>
#include <vector>

#include "riskmin/errors.hpp"

namespace riskmin {

namespace {

using nlohmann::json;

// Structural pass: every accessor records problems with a JSON-pointer style
// location instead of throwing, so a malformed file reports all its defects
// in one round.
struct Walker {
    std::vector<std::string> problems;

    bool object(const json& j, const std::string& path,
                std::initializer_list<const char*> allowed) {
        if (!j.is_object()) {
            problems.push_back("expected an object at " + path);
            return false;
        }
        for (const auto& item : j.items()) {
            const std::string& key = item.key();
            if (std::find_if(allowed.begin(), allowed.end(), [&](const char* a) {
                    return key == a;
                }) == allowed.end())
                problems.push_back("unknown key at " + path + "/" + key);
        }
        return true;
    }

    bool require(const json& j, const std::string& path, const char* key) {
        if (!j.contains(key)) {
            problems.push_back("missing required key " + path + "/" + key);
            return false;
        }
        return true;
    }

    double number(const json& j, const std::string& path, double fallback = 0.0) {
        if (!j.is_number()) {
            problems.push_back("expected a number at " + path);
            return fallback;
        }
        const double v = j.get<double>();
        if (!std::isfinite(v)) {
            problems.push_back("expected a finite number at " + path);
            return fallback;
        }
        return v;
    }

    long integer(const json& j, const std::string& path, long fallback = 0) {
        if (!j.is_number_integer()) {
            problems.push_back("expected an integer at " + path);
            return fallback;
        }
        return j.get<long>();
    }

    bool boolean(const json& j, const std::string& path, bool fallback = false) {
        if (!j.is_boolean()) {
            problems.push_back("expected a boolean at " + path);
            return fallback;
        }
        return j.get<bool>();
    }

    std::string text(const json& j, const std::string& path) {
        if (!j.is_string()) {
            problems.push_back("expected a string at " + path);
            return {};
        }
        return j.get<std::string>();
    }
};

Coefficient parse_coefficient(Walker& w, const json& j, const std::string& path) {
    Coefficient c;
    if (j.is_number()) {
        c.kind = Coefficient::Kind::Constant;
        c.base = w.number(j, path);
        return c;
    }
    if (!w.object(j, path, {"base", "slope", "ref"})) return c;
    c.kind = Coefficient::Kind::AffineLog;
    if (w.require(j, path, "base")) c.base = w.number(j.at("base"), path + "/base");
    if (w.require(j, path, "slope")) c.slope = w.number(j.at("slope"), path + "/slope");
    if (w.require(j, path, "ref")) {
        const double ref = w.number(j.at("ref"), path + "/ref", 1.0);
        if (ref > 0.0)
            c.log_ref = std::log(ref);
        else
            w.problems.push_back("expected a positive expansion point at " + path + "/ref");
    }
    return c;
}

PiecewiseRate parse_rate(Walker& w, const json& j, const std::string& path) {
    if (j.is_number()) return PiecewiseRate::constant(w.number(j, path));
    PiecewiseRate r = PiecewiseRate::constant(0.0);
    if (!w.object(j, path, {"times", "values"})) return r;
    if (!w.require(j, path, "times") || !w.require(j, path, "values")) return r;
    const json& jt = j.at("times");
    const json& jv = j.at("values");
    if (!jt.is_array() || !jv.is_array()) {
        w.problems.push_back("expected arrays at " + path + "/times and " + path + "/values");
        return r;
    }
    r.times.clear();
    r.values.clear();
    for (std::size_t i = 0; i < jt.size(); ++i)
        r.times.push_back(w.number(jt[i], path + "/times/" + std::to_string(i)));
    for (std::size_t i = 0; i < jv.size(); ++i)
        r.values.push_back(w.number(jv[i], path + "/values/" + std::to_string(i)));
    if (r.values.size() != r.times.size() + 1)
        w.problems.push_back(path + "/values must have exactly one more entry than " + path +
                             "/times");
    for (std::size_t i = 1; i < r.times.size(); ++i)
        if (!(r.times[i] > r.times[i - 1])) {
            w.problems.push_back(path + "/times must be strictly increasing");
            break;
        }
    if (r.values.empty()) r.values.push_back(0.0);
    return r;
}

IntensityParams parse_intensity(Walker& w, const json& j, const std::string& path) {
    IntensityParams p;
    if (!w.object(j, path,
                  {"kind", "value", "lambda0", "kappa", "theta", "lambda_min", "lambda_max",
                   "rho"}))
        return p;
    if (!w.require(j, path, "kind")) return p;
    const std::string kind = w.text(j.at("kind"), path + "/kind");
    if (kind == "none") {
        p.kind = IntensityParams::Kind::None;
        for (const auto& item : j.items())
            if (item.key() != "kind")
                w.problems.push_back("unknown key at " + path + "/" + item.key() +
                                     " (no-default-risk entries take only \"kind\")");
    } else if (kind == "constant") {
        p.kind = IntensityParams::Kind::Constant;
        if (w.require(j, path, "value")) p.value = w.number(j.at("value"), path + "/value");
        for (const auto& item : j.items())
            if (item.key() != "kind" && item.key() != "value")
                w.problems.push_back("unknown key at " + path + "/" + item.key() +
                                     " (constant-intensity entries take \"kind\" and \"value\")");
    } else if (kind == "jacobi") {
        p.kind = IntensityParams::Kind::Jacobi;
        if (w.require(j, path, "lambda0")) p.lambda0 = w.number(j.at("lambda0"), path + "/lambda0");
        if (w.require(j, path, "kappa")) p.kappa = w.number(j.at("kappa"), path + "/kappa");
        if (w.require(j, path, "theta")) p.theta = w.number(j.at("theta"), path + "/theta");
        if (w.require(j, path, "lambda_min"))
            p.lambda_min = w.number(j.at("lambda_min"), path + "/lambda_min");
        if (w.require(j, path, "lambda_max"))
            p.lambda_max = w.number(j.at("lambda_max"), path + "/lambda_max");
        if (w.require(j, path, "rho")) p.rho = w.number(j.at("rho"), path + "/rho");
        if (j.contains("value"))
            w.problems.push_back("unknown key at " + path + "/value (not a jacobi parameter)");
    } else {
        w.problems.push_back(path + "/kind must be one of \"none\", \"constant\", \"jacobi\"");
    }
    return p;
}

FlowSpec parse_flow(Walker& w, const json& j, const std::string& path, int n_assets) {
    FlowSpec f;
    if (!w.object(j, path, {"time", "type", "asset", "strike", "scale"})) return f;
    if (w.require(j, path, "time")) f.time = w.number(j.at("time"), path + "/time", 1.0);
    std::string type = "fixed";
    if (w.require(j, path, "type")) type = w.text(j.at("type"), path + "/type");
    const bool needs_asset = type != "fixed";
    if (type == "fixed")
        f.kind = FlowSpec::Kind::Fixed;
    else if (type == "forward")
        f.kind = FlowSpec::Kind::Forward;
    else if (type == "call")
        f.kind = FlowSpec::Kind::Call;
    else if (type == "put")
        f.kind = FlowSpec::Kind::Put;
    else
        w.problems.push_back(path +
                             "/type must be one of \"fixed\", \"forward\", \"call\", \"put\"");
    if (needs_asset) {
        if (w.require(j, path, "asset")) {
            f.asset = static_cast<int>(w.integer(j.at("asset"), path + "/asset"));
            if (f.asset < 0 || f.asset >= n_assets)
                w.problems.push_back(path + "/asset must index a configured asset");
        }
        if (w.require(j, path, "strike"))
            f.strike = w.number(j.at("strike"), path + "/strike");
    } else {
        if (j.contains("asset"))
            w.problems.push_back("unknown key at " + path + "/asset (fixed flows have none)");
        if (j.contains("strike"))
            w.problems.push_back("unknown key at " + path + "/strike (fixed flows have none)");
    }
    if (w.require(j, path, "scale")) f.scale = w.number(j.at("scale"), path + "/scale", 1.0);
    return f;
}

json rate_to_json(const PiecewiseRate& r) {
    if (r.times.empty()) return json(r.values.at(0));
    return json{{"times", r.times}, {"values", r.values}};
}

json coefficient_to_json(const Coefficient& c) {
    if (c.kind == Coefficient::Kind::Constant) return json(c.base);
    return json{{"base", c.base}, {"slope", c.slope}, {"ref", std::exp(c.log_ref)}};
}

json intensity_to_json(const IntensityParams& p) {
    switch (p.kind) {
        case IntensityParams::Kind::None:
            return json{{"kind", "none"}};
        case IntensityParams::Kind::Constant:
            return json{{"kind", "constant"}, {"value", p.value}};
        case IntensityParams::Kind::Jacobi:
        default:
            return json{{"kind", "jacobi"},      {"lambda0", p.lambda0},
                        {"kappa", p.kappa},      {"theta", p.theta},
                        {"lambda_min", p.lambda_min}, {"lambda_max", p.lambda_max},
                        {"rho", p.rho}};
    }
}

}  // namespace

EngineConfig parse_config(const json& doc, const CliOverrides& overrides) {
    Walker w;
    EngineConfig cfg;

    w.object(doc, "", {"grid", "market", "credit", "contract", "solver", "xva", "run"});
    if (!w.problems.empty() && !doc.is_object()) throw ConfigError(w.problems);

    // grid
    if (w.require(doc, "", "grid") && w.object(doc.at("grid"), "/grid", {"horizon", "steps"})) {
        const json& g = doc.at("grid");
        if (w.require(g, "/grid", "horizon"))
            cfg.grid.horizon = w.number(g.at("horizon"), "/grid/horizon", 1.0);
        if (w.require(g, "/grid", "steps"))
            cfg.grid.n_steps = static_cast<int>(w.integer(g.at("steps"), "/grid/steps", 1));
    }

    // market
    if (w.require(doc, "", "market") &&
        w.object(doc.at("market"), "/market", {"assets", "rates", "bounds"})) {
        const json& m = doc.at("market");
        if (w.require(m, "/market", "assets")) {
            const json& ja = m.at("assets");
            if (!ja.is_array() || ja.empty()) {
                w.problems.push_back("/market/assets must be a non-empty array");
            } else {
                for (std::size_t i = 0; i < ja.size(); ++i) {
                    const std::string path = "/market/assets/" + std::to_string(i);
                    AssetSpec a;
                    if (w.object(ja[i], path, {"s0", "drift", "vol", "repo_rate"})) {
                        if (w.require(ja[i], path, "s0"))
                            a.s0 = w.number(ja[i].at("s0"), path + "/s0", 100.0);
                        if (w.require(ja[i], path, "drift"))
                            a.drift = parse_coefficient(w, ja[i].at("drift"), path + "/drift");
                        if (w.require(ja[i], path, "vol"))
                            a.vol = parse_coefficient(w, ja[i].at("vol"), path + "/vol");
                        if (w.require(ja[i], path, "repo_rate"))
                            a.repo_rate = parse_rate(w, ja[i].at("repo_rate"), path + "/repo_rate");
                    }
                    cfg.market.assets.push_back(a);
                }
            }
        }
        if (w.require(m, "/market", "rates") &&
            w.object(m.at("rates"), "/market/rates",
                     {"discount", "funding", "collateral_lend", "collateral_borrow"})) {
            const json& jr = m.at("rates");
            if (w.require(jr, "/market/rates", "discount"))
                cfg.market.rates.discount =
                    parse_rate(w, jr.at("discount"), "/market/rates/discount");
            if (w.require(jr, "/market/rates", "funding"))
                cfg.market.rates.funding = parse_rate(w, jr.at("funding"), "/market/rates/funding");
            if (w.require(jr, "/market/rates", "collateral_lend"))
                cfg.market.rates.collateral_lend =
                    parse_rate(w, jr.at("collateral_lend"), "/market/rates/collateral_lend");
            if (w.require(jr, "/market/rates", "collateral_borrow"))
                cfg.market.rates.collateral_borrow =
                    parse_rate(w, jr.at("collateral_borrow"), "/market/rates/collateral_borrow");
        }
        if (m.contains("bounds") &&
            w.object(m.at("bounds"), "/market/bounds", {"rate", "market_price_of_risk"})) {
            const json& jb = m.at("bounds");
            if (jb.contains("rate"))
                cfg.market.bounds.rate = w.number(jb.at("rate"), "/market/bounds/rate", 0.1);
            if (jb.contains("market_price_of_risk"))
                cfg.market.bounds.market_price_of_risk = w.number(
                    jb.at("market_price_of_risk"), "/market/bounds/market_price_of_risk", 1.0);
        }
    }

    // credit
    if (w.require(doc, "", "credit") &&
        w.object(doc.at("credit"), "/credit", {"bank", "counterparty"})) {
        const json& c = doc.at("credit");
        if (w.require(c, "/credit", "bank"))
            cfg.credit.bank = parse_intensity(w, c.at("bank"), "/credit/bank");
        if (w.require(c, "/credit", "counterparty"))
            cfg.credit.counterparty =
                parse_intensity(w, c.at("counterparty"), "/credit/counterparty");
    }

    // contract
    const int n_assets = static_cast<int>(cfg.market.assets.size());
    if (w.require(doc, "", "contract") &&
        w.object(doc.at("contract"), "/contract",
                 {"flows", "recovery_bank", "recovery_cpty", "collateral"})) {
        const json& c = doc.at("contract");
        if (w.require(c, "/contract", "flows")) {
            const json& jf = c.at("flows");
            if (!jf.is_array() || jf.empty())
                w.problems.push_back("/contract/flows must be a non-empty array");
            else
                for (std::size_t i = 0; i < jf.size(); ++i)
                    cfg.contract.flows.push_back(
                        parse_flow(w, jf[i], "/contract/flows/" + std::to_string(i), n_assets));
        }
        if (w.require(c, "/contract", "recovery_bank"))
            cfg.contract.recovery_bank =
                w.number(c.at("recovery_bank"), "/contract/recovery_bank", 0.4);
        if (w.require(c, "/contract", "recovery_cpty"))
            cfg.contract.recovery_cpty =
                w.number(c.at("recovery_cpty"), "/contract/recovery_cpty", 0.4);
        if (c.contains("collateral") &&
            w.object(c.at("collateral"), "/contract/collateral", {"alpha", "threshold"})) {
            const json& jc = c.at("collateral");
            if (jc.contains("alpha"))
                cfg.contract.collateral.alpha =
                    w.number(jc.at("alpha"), "/contract/collateral/alpha");
            if (jc.contains("threshold"))
                cfg.contract.collateral.threshold =
                    w.number(jc.at("threshold"), "/contract/collateral/threshold");
        }
    }

    // solver
    if (doc.contains("solver") &&
        w.object(doc.at("solver"), "/solver",
                 {"price_degree", "intensity_degree", "condition_threshold",
                  "picard_refinements"})) {
        const json& s = doc.at("solver");
        if (s.contains("price_degree"))
            cfg.regression.price_degree =
                static_cast<int>(w.integer(s.at("price_degree"), "/solver/price_degree", 3));
        if (s.contains("intensity_degree"))
            cfg.regression.intensity_degree = static_cast<int>(
                w.integer(s.at("intensity_degree"), "/solver/intensity_degree", 1));
        if (s.contains("condition_threshold"))
            cfg.regression.condition_threshold =
                w.number(s.at("condition_threshold"), "/solver/condition_threshold", 1e8);
        if (s.contains("picard_refinements"))
            cfg.picard_refinements = static_cast<int>(
                w.integer(s.at("picard_refinements"), "/solver/picard_refinements", 1));
    }

    // xva
    if (doc.contains("xva") &&
        w.object(doc.at("xva"), "/xva",
                 {"cva_estimator", "fva_estimator", "strict_display", "two_step", "kva",
                  "fixed_point"})) {
        const json& x = doc.at("xva");
        if (x.contains("cva_estimator")) {
            const std::string v = w.text(x.at("cva_estimator"), "/xva/cva_estimator");
            if (v == "direct")
                cfg.xva.cva_estimator = CvaEstimator::Direct;
            else if (v == "intensity")
                cfg.xva.cva_estimator = CvaEstimator::Intensity;
            else
                w.problems.push_back(
                    "/xva/cva_estimator must be \"direct\" or \"intensity\"");
        }
        if (x.contains("fva_estimator")) {
            const std::string v = w.text(x.at("fva_estimator"), "/xva/fva_estimator");
            if (v == "hedge")
                cfg.xva.fva_estimator = FvaEstimator::Hedge;
            else if (v == "fixed_point")
                cfg.xva.fva_estimator = FvaEstimator::FixedPoint;
            else
                w.problems.push_back(
                    "/xva/fva_estimator must be \"hedge\" or \"fixed_point\"");
        }
        if (x.contains("strict_display"))
            cfg.xva.strict_display = w.boolean(x.at("strict_display"), "/xva/strict_display");
        if (x.contains("two_step") &&
            w.object(x.at("two_step"), "/xva/two_step", {"enabled", "inner_paths"})) {
            const json& t = x.at("two_step");
            if (t.contains("enabled"))
                cfg.xva.two_step = w.boolean(t.at("enabled"), "/xva/two_step/enabled");
            if (t.contains("inner_paths"))
                cfg.xva.inner_paths = static_cast<int>(
                    w.integer(t.at("inner_paths"), "/xva/two_step/inner_paths", 64));
        }
        if (x.contains("kva") &&
            w.object(x.at("kva"), "/xva/kva", {"enabled", "hurdle", "alpha", "horizon"})) {
            const json& k = x.at("kva");
            if (k.contains("enabled"))
                cfg.xva.kva.enabled = w.boolean(k.at("enabled"), "/xva/kva/enabled");
            if (k.contains("hurdle"))
                cfg.xva.kva.hurdle = w.number(k.at("hurdle"), "/xva/kva/hurdle", 0.1);
            if (k.contains("alpha"))
                cfg.xva.kva.alpha = w.number(k.at("alpha"), "/xva/kva/alpha", 0.975);
            if (k.contains("horizon"))
                cfg.xva.kva.horizon = w.number(k.at("horizon"), "/xva/kva/horizon");
        }
        if (x.contains("fixed_point") &&
            w.object(x.at("fixed_point"), "/xva/fixed_point", {"max_iters", "tol"})) {
            const json& f = x.at("fixed_point");
            if (f.contains("max_iters"))
                cfg.xva.fixed_point_max_iters = static_cast<int>(
                    w.integer(f.at("max_iters"), "/xva/fixed_point/max_iters", 50));
            if (f.contains("tol"))
                cfg.xva.fixed_point_tol = w.number(f.at("tol"), "/xva/fixed_point/tol", 1e-8);
        }
    }

    // run
    if (w.require(doc, "", "run") &&
        w.object(doc.at("run"), "/run",
                 {"seed", "paths", "output_dir", "cache", "threads", "sample_paths"})) {
        const json& r = doc.at("run");
        if (w.require(r, "/run", "seed")) {
            const long s = w.integer(r.at("seed"), "/run/seed");
            if (s < 0)
                w.problems.push_back("/run/seed must be non-negative");
            else
                cfg.run.seed = static_cast<std::uint64_t>(s);
        }
        if (w.require(r, "/run", "paths"))
            cfg.run.n_paths = static_cast<int>(w.integer(r.at("paths"), "/run/paths"));
        if (r.contains("output_dir")) cfg.run.output_dir = w.text(r.at("output_dir"), "/run/output_dir");
        if (r.contains("cache")) cfg.run.cache = w.boolean(r.at("cache"), "/run/cache", true);
        if (r.contains("threads"))
            cfg.run.threads = static_cast<int>(w.integer(r.at("threads"), "/run/threads", 1));
        if (r.contains("sample_paths"))
            cfg.run.sample_paths =
                static_cast<int>(w.integer(r.at("sample_paths"), "/run/sample_paths", 10));
    }

    // CLI overrides join the effective configuration before range checks.
    if (overrides.seed) cfg.run.seed = *overrides.seed;
    if (overrides.paths) cfg.run.n_paths = *overrides.paths;
    if (overrides.steps) cfg.grid.n_steps = *overrides.steps;
    if (overrides.output_dir) cfg.run.output_dir = *overrides.output_dir;
    if (overrides.threads) cfg.run.threads = *overrides.threads;
    if (overrides.no_cache) cfg.run.cache = false;
    if (overrides.strict_display) cfg.xva.strict_display = true;

    // Range checks on the effective values.
    if (!(cfg.grid.horizon > 0.0) || !std::isfinite(cfg.grid.horizon))
        w.problems.push_back("/grid/horizon must be positive");
    if (cfg.grid.n_steps < 1) w.problems.push_back("/grid/steps must be at least 1");
    if (cfg.run.n_paths < 2) w.problems.push_back("/run/paths must be at least 2");
    if (cfg.run.threads < 1) w.problems.push_back("/run/threads must be at least 1");
    if (cfg.run.sample_paths < 0) w.problems.push_back("/run/sample_paths must be non-negative");
    if (cfg.run.output_dir.empty()) w.problems.push_back("/run/output_dir must be non-empty");
    if (cfg.regression.price_degree < 1)
        w.problems.push_back("/solver/price_degree must be at least 1");
    if (cfg.regression.intensity_degree < 0)
        w.problems.push_back("/solver/intensity_degree must be non-negative");
    if (!(cfg.regression.condition_threshold > 1.0))
        w.problems.push_back("/solver/condition_threshold must exceed 1");
    if (cfg.picard_refinements < 0 || cfg.picard_refinements > 16)
        w.problems.push_back("/solver/picard_refinements must lie in [0, 16]");
    if (cfg.xva.two_step && cfg.xva.inner_paths < 2)
        w.problems.push_back("/xva/two_step/inner_paths must be at least 2");
    if (cfg.xva.kva.enabled) {
        if (!(cfg.xva.kva.alpha > 0.0 && cfg.xva.kva.alpha < 1.0))
            w.problems.push_back("/xva/kva/alpha must lie strictly inside (0, 1)");
        if (cfg.xva.kva.hurdle < 0.0) w.problems.push_back("/xva/kva/hurdle must be non-negative");
        if (cfg.xva.kva.horizon < 0.0)
            w.problems.push_back("/xva/kva/horizon must be non-negative");
        if (cfg.xva.kva.horizon > 0.0 && cfg.grid.n_steps >= 1) {
            const double ratio = cfg.xva.kva.horizon / cfg.grid.dt();
            const double rounded = std::llround(ratio);
            if (rounded < 1.0 || std::fabs(ratio - rounded) > 1e-9 * std::max(1.0, ratio))
                w.problems.push_back("/xva/kva/horizon must sit on the time grid");
        }
    }
    if (cfg.xva.fixed_point_max_iters < 1)
        w.problems.push_back("/xva/fixed_point/max_iters must be at least 1");
    if (!(cfg.xva.fixed_point_tol > 0.0))
        w.problems.push_back("/xva/fixed_point/tol must be positive");

    if (!w.problems.empty()) throw ConfigError(w.problems);

    // Semantic validation of the assembled model.
    validate_market(cfg.market, cfg.grid);
    validate_credit(cfg.credit);
    validate_contract(cfg.contract, cfg.grid);
    return cfg;
}

EngineConfig load_config(const std::string& path, const CliOverrides& overrides) {
    std::ifstream in(path);
    if (!in) throw ConfigError({"cannot read configuration file: " + path});
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError({std::string("configuration is not valid JSON: ") + e.what()});
    }
    return parse_config(doc, overrides);
}

json effective_config(const EngineConfig& cfg) {
    json assets = json::array();
    for (const AssetSpec& a : cfg.market.assets)
        assets.push_back(json{{"s0", a.s0},
                              {"drift", coefficient_to_json(a.drift)},
                              {"vol", coefficient_to_json(a.vol)},
                              {"repo_rate", rate_to_json(a.repo_rate)}});
    json flows = json::array();
    for (const FlowSpec& f : cfg.contract.flows) {
        json jf{{"time", f.time}, {"scale", f.scale}};
        switch (f.kind) {
            case FlowSpec::Kind::Fixed:
                jf["type"] = "fixed";
                break;
            case FlowSpec::Kind::Forward:
                jf["type"] = "forward";
                break;
            case FlowSpec::Kind::Call:
                jf["type"] = "call";
                break;
            case FlowSpec::Kind::Put:
                jf["type"] = "put";
                break;
        }
        if (f.kind != FlowSpec::Kind::Fixed) {
            jf["asset"] = f.asset;
            jf["strike"] = f.strike;
        }
        flows.push_back(jf);
    }
    return json{
        {"grid", {{"horizon", cfg.grid.horizon}, {"steps", cfg.grid.n_steps}}},
        {"market",
         {{"assets", assets},
          {"rates",
           {{"discount", rate_to_json(cfg.market.rates.discount)},
            {"funding", rate_to_json(cfg.market.rates.funding)},
            {"collateral_lend", rate_to_json(cfg.market.rates.collateral_lend)},
            {"collateral_borrow", rate_to_json(cfg.market.rates.collateral_borrow)}}},
          {"bounds",
           {{"rate", cfg.market.bounds.rate},
            {"market_price_of_risk", cfg.market.bounds.market_price_of_risk}}}}},
        {"credit",
         {{"bank", intensity_to_json(cfg.credit.bank)},
          {"counterparty", intensity_to_json(cfg.credit.counterparty)}}},
        {"contract",
         {{"flows", flows},
          {"recovery_bank", cfg.contract.recovery_bank},
          {"recovery_cpty", cfg.contract.recovery_cpty},
          {"collateral",
           {{"alpha", cfg.contract.collateral.alpha},
            {"threshold", cfg.contract.collateral.threshold}}}}},
        {"solver",
         {{"price_degree", cfg.regression.price_degree},
          {"intensity_degree", cfg.regression.intensity_degree},
          {"condition_threshold", cfg.regression.condition_threshold},
          {"picard_refinements", cfg.picard_refinements}}},
        {"xva",
         {{"cva_estimator",
           cfg.xva.cva_estimator == CvaEstimator::Direct ? "direct" : "intensity"},
          {"fva_estimator",
           cfg.xva.fva_estimator == FvaEstimator::Hedge ? "hedge" : "fixed_point"},
          {"strict_display", cfg.xva.strict_display},
          {"two_step", {{"enabled", cfg.xva.two_step}, {"inner_paths", cfg.xva.inner_paths}}},
          {"kva",
           {{"enabled", cfg.xva.kva.enabled},
            {"hurdle", cfg.xva.kva.hurdle},
            {"alpha", cfg.xva.kva.alpha},
            {"horizon", cfg.xva.kva.horizon}}},
          {"fixed_point",
           {{"max_iters", cfg.xva.fixed_point_max_iters}, {"tol", cfg.xva.fixed_point_tol}}}}},
        {"run",
         {{"seed", cfg.run.seed},
          {"paths", cfg.run.n_paths},
          {"output_dir", cfg.run.output_dir},
          {"cache", cfg.run.cache},
          {"threads", cfg.run.threads},
          {"sample_paths", cfg.run.sample_paths}}}};
}

std::uint64_t config_hash(const EngineConfig& cfg) {
    // Execution plumbing (thread count, cache policy, artifact location) does
    // not change any computed number, so it stays out of the hash; reports
    // must be byte-identical across worker counts.
    json canon = effective_config(cfg);
    canon["run"].erase("threads");
    canon["run"].erase("cache");
    canon["run"].erase("output_dir");
    const std::string dump = canon.dump();
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (unsigned char c : dump) {
        h ^= c;
        h *= 0x100000001B3ULL;
    }
    return h;
}

std::string config_hash_hex(const EngineConfig& cfg) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(config_hash(cfg)));
    return std::string(buf);
}

}  // namespace riskmin
