#include "riskmin/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include <nlohmann/json.hpp>

#include "riskmin/errors.hpp"
#include "riskmin/version.hpp"

namespace riskmin {

namespace {

using nlohmann::json;

json estimate_json(const Estimate& e) {
    return json{{"estimate", e.value}, {"std_error", e.se}};
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw NumericalError("report", "artifact", "cannot write " + path);
    out << text;
    if (!out.good()) throw NumericalError("report", "artifact", "cannot write " + path);
}

// All CSV numbers go through one shortest-17-digit format so reruns are
// byte-identical.
std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

class Csv {
  public:
    void cell(const std::string& s) {
        if (!line_.empty()) line_ += ',';
        line_ += s;
    }
    void cell(double v) { cell(fmt(v)); }
    void cell(long v) { cell(std::to_string(v)); }
    void end_row() {
        body_ += line_;
        body_ += '\n';
        line_.clear();
    }
    const std::string& text() const { return body_; }

  private:
    std::string line_;
    std::string body_;
};

int sampled_paths(const ReportInputs& in) {
    if (!in.physical || !in.config) return 0;
    return std::min(in.config->run.sample_paths, in.physical->n_paths);
}

}  // namespace

void write_report(const std::string& dir, const ReportInputs& in) {
    const EngineConfig& cfg = *in.config;
    json doc;
    doc["schema"] = "riskmin-report-1";
    doc["engine_version"] = kVersion;
    doc["config_hash"] = in.hash_hex;
    doc["seed"] = cfg.run.seed;
    doc["n_paths"] = cfg.run.n_paths;
    doc["grid"] = json{{"horizon", cfg.grid.horizon}, {"steps", cfg.grid.n_steps}};
    doc["modes"] = json{
        {"cva_estimator", cfg.xva.cva_estimator == CvaEstimator::Direct ? "direct" : "intensity"},
        {"fva_estimator",
         cfg.xva.fva_estimator == FvaEstimator::Hedge ? "hedge" : "fixed_point"},
        {"strict_display", cfg.xva.strict_display},
        {"two_step", cfg.xva.two_step},
        {"kva", cfg.xva.kva.enabled}};

    if (in.clean) {
        doc["clean_value"] = estimate_json(in.clean->v0_weighted);
        doc["clean_value_unweighted"] =
            json{{"estimate", in.clean->v0}, {"std_error", in.clean->v0_se}};
    } else {
        doc["clean_value"] = nullptr;
        doc["clean_value_unweighted"] = nullptr;
    }

    if (in.bsde) {
        doc["solver"] = json{{"y0", in.bsde->y0},
                             {"y0_se", in.bsde->y0_se},
                             {"z0", in.bsde->z0},
                             {"z0_extrapolated", in.bsde->z0_extrapolated}};
    } else {
        doc["solver"] = nullptr;
    }

    if (in.xva) {
        const XvaResults& x = *in.xva;
        json adj;
        adj["cva"] = estimate_json(x.cva);
        adj["dva"] = estimate_json(x.dva);
        adj["colva"] = estimate_json(x.colva);
        adj["fva"] = estimate_json(x.fva);
        adj["cva_direct"] = estimate_json(x.cva_direct);
        adj["cva_intensity"] = estimate_json(x.cva_intensity);
        adj["dva_direct"] = estimate_json(x.dva_direct);
        adj["dva_intensity"] = estimate_json(x.dva_intensity);
        adj["cva_two_step"] = x.two_step_enabled ? estimate_json(x.cva_two_step) : json(nullptr);
        adj["kva"] = x.kva_enabled ? estimate_json(x.kva) : json(nullptr);
        doc["adjustments"] = adj;
        doc["values"] = json{{"hedge_value", estimate_json(x.hedge_value)},
                             {"total", estimate_json(x.total)},
                             {"decomposition_gap", estimate_json(x.gap)},
                             {"v_full", estimate_json(x.v_full)}};
        doc["warnings"] = x.warnings;
    } else {
        doc["adjustments"] = nullptr;
        doc["values"] = nullptr;
        doc["warnings"] = json::array();
    }

    write_text(dir + "/report.json", doc.dump(2) + "\n");
}

void write_diagnostics(const std::string& dir, const ReportInputs& in) {
    json doc;
    doc["schema"] = "riskmin-diagnostics-1";
    doc["config_hash"] = in.hash_hex;

    if (in.credit) {
        doc["credit"] = json{{"default_count", in.credit->default_count},
                             {"tie_count", in.credit->tie_count}};
    } else {
        doc["credit"] = nullptr;
    }

    if (in.ledger) {
        doc["ledger"] = json{{"flows_at_default", in.ledger->flows_at_default},
                             {"assembly_max_err", in.ledger->decomposition_max_err}};
    } else {
        doc["ledger"] = nullptr;
    }

    if (in.clean || in.bsde) {
        json ridge = json::array();
        auto add_events = [&](const std::vector<RidgeEvent>& events, const char* stage) {
            for (const RidgeEvent& e : events)
                ridge.push_back(json{{"stage", stage},
                                     {"node", e.node},
                                     {"condition", e.condition},
                                     {"ridge", e.ridge}});
        };
        if (in.clean) add_events(in.clean->ridge_events, "clean_value");
        if (in.bsde) add_events(in.bsde->ridge_events, "solve");
        doc["ridge_events"] = ridge;
    } else {
        doc["ridge_events"] = nullptr;
    }
    doc["g_roundtrip_max_err"] = in.gsol ? json(in.gsol->max_roundtrip_err) : json(nullptr);

    if (in.fs) {
        const FsChecks& f = *in.fs;
        doc["hedge"] = json{
            {"residual_rel_l2", f.residual_rel_l2},
            {"target_sd", f.target_sd},
            {"worst_cost_increment_z", f.worst_cost_z},
            {"worst_orthogonality_z", f.worst_orthogonality_z},
            {"zero_achieving_max_err", f.zero_achieving_max_err},
            {"quadratic_bound", f.quadratic_bound},
            {"quadratic_max", f.quadratic_max},
            {"quadratic_violations", f.quadratic_violations}};
    } else {
        doc["hedge"] = nullptr;
    }

    if (in.xva) {
        const XvaResults& x = *in.xva;
        long skipped = 0;
        for (std::uint8_t s : x.es_skipped) skipped += s;
        double exposure_abs_max = 0.0;
        if (in.closeout)
            for (double y : in.closeout->exposure)
                exposure_abs_max = std::max(exposure_abs_max, std::fabs(y));
        doc["xva"] = json{{"direct_fallback", x.direct_fallback},
                          {"fva_iterations", x.fva_iterations},
                          {"es_nodes_skipped", skipped},
                          {"exposure_abs_max", exposure_abs_max},
                          {"integrability", "assumed; empirical tail summarized by "
                                            "exposure_abs_max, not verified"}};
    } else {
        doc["xva"] = nullptr;
    }

    if (in.invariants) {
        json arr = json::array();
        for (const InvariantResult& r : *in.invariants)
            arr.push_back(json{{"name", r.name},
                               {"pass", r.pass},
                               {"observed", r.observed},
                               {"tolerance", r.tolerance},
                               {"detail", r.detail}});
        doc["invariants"] = arr;
    } else {
        doc["invariants"] = json::array();
    }

    write_text(dir + "/diagnostics.json", doc.dump(2) + "\n");
}

void write_manifest(const std::string& dir, const ReportInputs& in,
                    const std::map<std::string, double>& stage_seconds,
                    const std::map<std::string, std::string>& cache_outcomes,
                    const std::vector<std::string>& warnings) {
    json doc;
    doc["schema"] = "riskmin-manifest-1";
    doc["engine_version"] = kVersion;
    doc["config_hash"] = in.hash_hex;
    doc["effective_config"] = effective_config(*in.config);
    doc["stage_seconds"] = stage_seconds;
    doc["cache"] = cache_outcomes;
    doc["warnings"] = warnings;
    write_text(dir + "/manifest.json", doc.dump(2) + "\n");
}

void write_csvs(const std::string& dir, const ReportInputs& in) {
    const EngineConfig& cfg = *in.config;
    const TimeGrid& grid = cfg.grid;

    // Headline metrics in the flat exchange layout.
    {
        Csv csv;
        for (const char* h : {"metric", "estimate", "std_error", "mode", "n_paths", "seed",
                              "config_hash"})
            csv.cell(std::string(h));
        csv.end_row();
        if (in.xva) {
            const XvaResults& x = *in.xva;
            const std::string cva_mode =
                (cfg.xva.cva_estimator == CvaEstimator::Direct && !x.direct_fallback)
                    ? "direct"
                    : "intensity";
            const std::string fva_mode =
                cfg.xva.fva_estimator == FvaEstimator::Hedge ? "hedge" : "fixed_point";
            auto row = [&](const char* metric, const Estimate& e, const std::string& mode) {
                csv.cell(std::string(metric));
                csv.cell(e.value);
                csv.cell(e.se);
                csv.cell(mode);
                csv.cell(static_cast<long>(cfg.run.n_paths));
                csv.cell(std::to_string(cfg.run.seed));
                csv.cell(in.hash_hex);
                csv.end_row();
            };
            row("clean_value", x.clean, "-");
            row("cva", x.cva, cva_mode);
            row("dva", x.dva, cva_mode);
            row("colva", x.colva, "-");
            row("fva", x.fva, fva_mode);
            row("hedge_value", x.hedge_value, "-");
            row("total", x.total, "-");
            row("decomposition_gap", x.gap, "-");
            if (x.two_step_enabled) row("cva_two_step", x.cva_two_step, "two_step");
            if (x.kva_enabled) row("kva", x.kva, "expected_shortfall");
            row("v_full", x.v_full, "-");
        }
        write_text(dir + "/xva_metrics.csv", csv.text());
    }

    // Per-node means of the backward solution fields.
    {
        Csv csv;
        csv.cell(std::string("node"));
        csv.cell(std::string("time"));
        csv.cell(std::string("y_mean"));
        const int d = in.physical ? in.physical->n_assets : 0;
        for (int i = 0; i < d; ++i) csv.cell("z" + std::to_string(i) + "_mean");
        csv.cell(std::string("jump_bank_mean"));
        csv.cell(std::string("jump_cpty_mean"));
        csv.end_row();
        if (in.bsde && in.gsol && in.physical) {
            const int n = in.physical->n_paths;
            for (int k = 0; k < grid.n_nodes(); ++k) {
                csv.cell(static_cast<long>(k));
                csv.cell(grid.time(k));
                double acc = 0.0;
                for (int p = 0; p < n; ++p) acc += in.bsde->ybar[in.physical->idx(k, p)];
                csv.cell(acc / n);
                for (int i = 0; i < d; ++i) {
                    acc = 0.0;
                    for (int p = 0; p < n; ++p)
                        acc += in.bsde->zbar[static_cast<std::size_t>(i)][in.physical->idx(k, p)];
                    csv.cell(acc / n);
                }
                acc = 0.0;
                for (int p = 0; p < n; ++p) acc += in.gsol->jump_bank[in.physical->idx(k, p)];
                csv.cell(acc / n);
                acc = 0.0;
                for (int p = 0; p < n; ++p) acc += in.gsol->jump_cpty[in.physical->idx(k, p)];
                csv.cell(acc / n);
                csv.end_row();
            }
        }
        write_text(dir + "/bsde_summary.csv", csv.text());
    }

    // Per-step adjustment integrand profiles.
    {
        Csv csv;
        for (const char* h : {"step", "time", "epe", "ene", "collateral_mean", "cva_step",
                              "dva_step", "colva_step", "fva_step", "es", "es_skipped"})
            csv.cell(std::string(h));
        csv.end_row();
        if (in.xva) {
            const XvaResults& x = *in.xva;
            for (int k = 0; k < grid.n_steps; ++k) {
                const std::size_t uk = static_cast<std::size_t>(k);
                csv.cell(static_cast<long>(k));
                csv.cell(grid.time(k));
                csv.cell(x.epe[uk]);
                csv.cell(x.ene[uk]);
                csv.cell(x.collateral_mean[uk]);
                csv.cell(x.cva_steps[uk]);
                csv.cell(x.dva_steps[uk]);
                csv.cell(x.colva_steps[uk]);
                csv.cell(x.fva_steps[uk]);
                csv.cell(x.kva_enabled ? x.es_nodes[uk] : 0.0);
                csv.cell(static_cast<long>(x.kva_enabled ? x.es_skipped[uk] : 0));
                csv.end_row();
            }
        }
        write_text(dir + "/xva_profile.csv", csv.text());
    }

    // Cost-process fan over the sampled scenarios.
    {
        Csv csv;
        const int sample = in.hedge ? sampled_paths(in) : 0;
        csv.cell(std::string("node"));
        csv.cell(std::string("time"));
        for (int p = 0; p < sample; ++p) csv.cell("cost_" + std::to_string(p));
        csv.end_row();
        if (in.hedge && sample > 0) {
            for (int k = 0; k < grid.n_nodes(); ++k) {
                csv.cell(static_cast<long>(k));
                csv.cell(grid.time(k));
                for (int p = 0; p < sample; ++p)
                    csv.cell(in.hedge->cost[in.physical->idx(k, p)]);
                csv.end_row();
            }
        }
        write_text(dir + "/cost_fan.csv", csv.text());
    }

    // Strategy paths for the sampled scenarios, long format.
    {
        Csv csv;
        csv.cell(std::string("path"));
        csv.cell(std::string("node"));
        csv.cell(std::string("time"));
        const int d = in.physical ? in.physical->n_assets : 0;
        for (int i = 0; i < d; ++i) csv.cell("xi" + std::to_string(i));
        for (const char* h : {"psi_fund", "wealth", "gains", "cost"}) csv.cell(std::string(h));
        csv.end_row();
        const int sample = in.hedge ? sampled_paths(in) : 0;
        if (in.hedge && sample > 0) {
            for (int p = 0; p < sample; ++p) {
                for (int k = 0; k < grid.n_nodes(); ++k) {
                    const std::size_t at = in.physical->idx(k, p);
                    csv.cell(static_cast<long>(p));
                    csv.cell(static_cast<long>(k));
                    csv.cell(grid.time(k));
                    for (int i = 0; i < d; ++i)
                        csv.cell(in.hedge->xi[static_cast<std::size_t>(i)][at]);
                    csv.cell(in.hedge->psi_fund[at]);
                    csv.cell(in.hedge->wealth[at]);
                    csv.cell(in.hedge->gains[at]);
                    csv.cell(in.hedge->cost[at]);
                    csv.end_row();
                }
            }
        }
        write_text(dir + "/strategy_sample.csv", csv.text());
    }
}

}  // namespace riskmin
