// Acceptance harness: drives the command-line binary over the bundled
// fixture configurations and checks the headline behaviour of the engine,
// printing one PASS/FAIL line per criterion.  The binary under test and the
// fixture directory arrive through compile definitions so the harness runs
// against the freshly built artifacts.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#ifdef __unix__
#include <sys/wait.h>
#endif

#include <nlohmann/json.hpp>

#include "riskmin/rng.hpp"
#include "riskmin/stats.hpp"

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct CriterionResult {
    int number = 0;
    std::string name;
    bool pass = false;
    std::string detail;
};

std::vector<CriterionResult> g_results;

void record(int number, const std::string& name, bool pass, const std::string& detail) {
    g_results.push_back({number, name, pass, detail});
}

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

const fs::path& work_dir() {
    static const fs::path dir = [] {
        fs::path d = fs::temp_directory_path() / "riskmin_acceptance";
        fs::remove_all(d);
        fs::create_directories(d);
        return d;
    }();
    return dir;
}

fs::path config_path(const std::string& name) {
    return fs::path(RISKMIN_CONFIG_DIR) / name;
}

// Runs the CLI with the given arguments; stdout/stderr land in a log file
// next to the artifacts.  Returns the process exit code (-1 if it did not
// exit normally).
int run_cli(const std::string& args, const fs::path& log) {
    const std::string cmd =
        std::string(RISKMIN_CLI_PATH) + " " + args + " > " + log.string() + " 2>&1";
    std::fprintf(stderr, "[acceptance] %s\n", cmd.c_str());
    const int status = std::system(cmd.c_str());
    if (status == -1) return -1;
#ifdef WIFEXITED
    if (WIFEXITED(status)) return WEXITSTATUS(status);
    return -1;
#else
    return status;
#endif
}

// Runs `all` on a config file into `out`; returns the exit code.
int run_all(const fs::path& config, const fs::path& out, const std::string& extra = "") {
    fs::create_directories(out);
    return run_cli("all --config " + config.string() + " --out " + out.string() +
                       (extra.empty() ? "" : " " + extra),
                   out.string() + ".log");
}

json load_json(const fs::path& p) {
    std::ifstream in(p);
    if (!in) throw std::runtime_error("cannot read " + p.string());
    return json::parse(in);
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// Writes a mutated copy of a fixture configuration into the work directory.
template <typename Mutate>
fs::path mutated_config(const std::string& fixture, const std::string& name, Mutate mutate) {
    json doc = load_json(config_path(fixture));
    mutate(doc);
    const fs::path p = work_dir() / name;
    std::ofstream out(p);
    out << doc.dump(2) << "\n";
    return p;
}

double estimate(const json& j) { return j.at("estimate").get<double>(); }
double std_error(const json& j) { return j.at("std_error").get<double>(); }

double black_scholes_call(double s, double k, double r, double sigma, double t) {
    const double d1 = (std::log(s / k) + (r + 0.5 * sigma * sigma) * t) / (sigma * std::sqrt(t));
    const double d2 = d1 - sigma * std::sqrt(t);
    return s * riskmin::normal_cdf(d1) - k * std::exp(-r * t) * riskmin::normal_cdf(d2);
}

// Quadratic-bound violations accumulated over every fixture run performed.
long g_quadratic_violations = 0;
int g_quadratic_runs = 0;

void tally_quadratic(const fs::path& out) {
    const json diag = load_json(out / "diagnostics.json");
    if (diag.at("hedge").is_null()) return;
    g_quadratic_violations += diag.at("hedge").at("quadratic_violations").get<long>();
    ++g_quadratic_runs;
}

}  // namespace

int main() {
    const fs::path work = work_dir();

    // ---------------------------------------------------------------- run 1:
    // complete market, timed.
    const fs::path cm_out = work / "cm";
    const auto t0 = std::chrono::steady_clock::now();
    const int cm_rc = run_all(config_path("complete_market.json"), cm_out);
    const double cm_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    // Criterion 1: analytic price recovery within statistical resolution.
    {
        bool pass = false;
        std::string detail = "run failed with exit code " + std::to_string(cm_rc);
        if (cm_rc == 0) {
            const json report = load_json(cm_out / "report.json");
            const double bs = black_scholes_call(100.0, 100.0, 0.02, 0.2, 1.0);
            const json& clean = report.at("clean_value_unweighted");
            const json& y0 = report.at("solver");
            const double clean_err = std::fabs(estimate(clean) - bs);
            const double clean_tol = std::max(3.0 * std_error(clean), 0.005 * bs);
            const double y0_err = std::fabs(y0.at("y0").get<double>() - bs);
            const double y0_tol = std::max(3.0 * y0.at("y0_se").get<double>(), 0.005 * bs);
            pass = clean_err <= clean_tol && y0_err <= y0_tol && cm_seconds < 60.0;
            detail = "clean " + fmt(estimate(clean)) + " and value " +
                     fmt(y0.at("y0").get<double>()) + " vs analytic " + fmt(bs) +
                     " (tolerances " + fmt(clean_tol) + ", " + fmt(y0_tol) + "); " +
                     fmt(cm_seconds) + "s";
            tally_quadratic(cm_out);
        }
        record(1, "complete-market price recovery", pass, detail);
    }

    // Criterion 2: initial hedge ratio vs the analytic delta.
    {
        bool pass = false;
        std::string detail = "run failed";
        if (cm_rc == 0) {
            const json report = load_json(cm_out / "report.json");
            const double z0 = report.at("solver").at("z0").at(0).get<double>();
            const double xi0 = z0 / (100.0 * 0.2);  // fixture spot and volatility
            const double delta = riskmin::normal_cdf(0.2);
            pass = std::fabs(xi0 - delta) <= 0.02 * delta;
            detail = "position " + fmt(xi0) + " vs delta " + fmt(delta);
        }
        record(2, "initial hedge ratio", pass, detail);
    }

    // ---------------------------------------------------------------- run 2:
    // zero-loss collapse chain.
    {
        const fs::path out = work / "collapse";
        const int rc = run_all(config_path("collapse.json"), out);
        bool pass = false;
        std::string detail = "run failed with exit code " + std::to_string(rc);
        if (rc == 0) {
            const json report = load_json(out / "report.json");
            const json& adj = report.at("adjustments");
            const bool zeros = estimate(adj.at("cva")) == 0.0 && std_error(adj.at("cva")) == 0.0 &&
                               estimate(adj.at("dva")) == 0.0 && std_error(adj.at("dva")) == 0.0 &&
                               estimate(adj.at("colva")) == 0.0 &&
                               estimate(adj.at("fva")) == 0.0;
            const json& gap = report.at("values").at("decomposition_gap");
            const bool identity = std::fabs(estimate(gap)) <= 3.0 * std_error(gap);
            pass = zeros && identity;
            detail = std::string("credit/collateral/funding adjustments ") +
                     (zeros ? "all exactly zero" : "NOT all zero") + "; value minus clean " +
                     fmt(estimate(gap)) + " within 3 SE " + fmt(3.0 * std_error(gap));
            tally_quadratic(out);
        }
        record(3, "zero-loss collapse chain", pass, detail);
    }

    // ---------------------------------------------------------------- run 3:
    // constant-intensity credit adjustment vs the closed form.
    const fs::path ccva_config = config_path("constant_intensity_cva.json");
    {
        const fs::path out = work / "ccva";
        const int rc = run_all(ccva_config, out);
        bool pass = false;
        std::string detail = "run failed with exit code " + std::to_string(rc);
        if (rc == 0) {
            const json cfg = load_json(ccva_config);
            const double lb = cfg.at("credit").at("bank").at("value").get<double>();
            const double lc = cfg.at("credit").at("counterparty").at("value").get<double>();
            const double amount = cfg.at("contract").at("flows").at(0).at("scale").get<double>();
            const double lgd = 1.0 - cfg.at("contract").at("recovery_cpty").get<double>();
            const double lam = lb + lc;
            const double closed = lgd * amount * lc * (1.0 - std::exp(-lam)) / lam;
            const json report = load_json(out / "report.json");
            const json& cva = report.at("adjustments").at("cva");
            pass = std::fabs(estimate(cva) - closed) <= 3.0 * std_error(cva);
            detail = "estimate " + fmt(estimate(cva)) + " vs closed form " + fmt(closed) +
                     " (3 SE " + fmt(3.0 * std_error(cva)) + ")";
            tally_quadratic(out);
        }
        record(4, "constant-intensity credit adjustment", pass, detail);
    }

    // ---------------------------------------------------------------- run 4:
    // full fixture; identity, martingale diagnostics, refinement, determinism.
    const fs::path full_config = config_path("full_xva.json");
    const fs::path full_out = work / "full";
    const int full_rc = run_all(full_config, full_out);
    if (full_rc == 0) tally_quadratic(full_out);

    // Criterion 5: decomposition identity on the full fixture.
    {
        bool pass = false;
        std::string detail = "run failed with exit code " + std::to_string(full_rc);
        if (full_rc == 0) {
            const json report = load_json(full_out / "report.json");
            const json& gap = report.at("values").at("decomposition_gap");
            pass = std::fabs(estimate(gap)) <= 3.0 * std_error(gap);
            detail = "gap " + fmt(estimate(gap)) + " within 3 SE " +
                     fmt(3.0 * std_error(gap));
        }
        record(5, "value decomposition identity", pass, detail);
    }

    // Criterion 6: cost-process martingality and orthogonality at every node.
    {
        bool pass = false;
        std::string detail = "run failed";
        if (full_rc == 0) {
            const json diag = load_json(full_out / "diagnostics.json");
            const json& hedge = diag.at("hedge");
            const double cost_z = hedge.at("worst_cost_increment_z").get<double>();
            const double orth_z = hedge.at("worst_orthogonality_z").get<double>();
            pass = cost_z <= 3.0 && orth_z <= 3.0;
            detail = "worst cost increment z " + fmt(cost_z) + ", worst orthogonality z " +
                     fmt(orth_z);
        }
        record(6, "cost martingality and orthogonality", pass, detail);
    }

    // Criterion 7: residual shrinks from (25 steps, degree 2) to (50, 3).
    {
        const fs::path coarse_cfg =
            mutated_config("full_xva.json", "full_coarse.json", [](json& d) {
                d["grid"]["steps"] = 25;
                d["solver"] = json{{"price_degree", 2}};
            });
        const fs::path out = work / "full_coarse";
        const int rc = run_all(coarse_cfg, out);
        bool pass = false;
        std::string detail = "run failed with exit code " + std::to_string(rc);
        if (rc == 0 && full_rc == 0) {
            const double coarse =
                load_json(out / "diagnostics.json").at("hedge").at("residual_rel_l2").get<double>();
            const double fine = load_json(full_out / "diagnostics.json")
                                    .at("hedge")
                                    .at("residual_rel_l2")
                                    .get<double>();
            pass = fine < coarse && fine < 0.05;
            detail = "relative L2 residual " + fmt(coarse) + " (25 steps, degree 2) -> " +
                     fmt(fine) + " (50 steps, degree 3)";
            tally_quadratic(out);
        }
        record(7, "residual refinement", pass, detail);
    }

    // ---------------------------------------------------------------- run 5:
    // conditional (two-step) estimator.
    {
        const fs::path out = work / "two_step";
        const int rc = run_all(config_path("two_step.json"), out);
        bool pass = false;
        std::string detail = "run failed with exit code " + std::to_string(rc);
        double agree_err = 0.0, agree_tol = 0.0;
        if (rc == 0) {
            const json report = load_json(out / "report.json");
            const json& adj = report.at("adjustments");
            const json& direct = adj.at("cva_direct");
            const json& two_step = adj.at("cva_two_step");
            agree_err = std::fabs(estimate(two_step) - estimate(direct));
            agree_tol = 3.0 * std::hypot(std_error(two_step), std_error(direct));
            pass = agree_err <= agree_tol;
            tally_quadratic(out);
        }

        // Degenerate case: deterministic intensities leave nothing to
        // resimulate, so the conditional estimator must reproduce the
        // intensity form to machine precision on matched paths.
        const fs::path degen_cfg =
            mutated_config("constant_intensity_cva.json", "two_step_degenerate.json", [](json& d) {
                d["xva"]["two_step"] = json{{"enabled", true}, {"inner_paths", 8}};
                d["run"]["paths"] = 20000;
            });
        const fs::path degen_out = work / "two_step_degenerate";
        const int degen_rc = run_all(degen_cfg, degen_out);
        bool degen_pass = false;
        double degen_err = 0.0;
        if (degen_rc == 0) {
            const json adj = load_json(degen_out / "report.json").at("adjustments");
            degen_err =
                std::fabs(estimate(adj.at("cva_two_step")) - estimate(adj.at("cva_intensity")));
            degen_pass = degen_err <= 1e-12 * std::max(1.0, estimate(adj.at("cva_intensity")));
        }
        if (rc == 0)
            detail = "two-step vs direct differ by " + fmt(agree_err) + " (3 combined SE " +
                     fmt(agree_tol) + "); degenerate-case mismatch " + fmt(degen_err);
        record(9, "conditional estimator equivalence", pass && degen_pass, detail);
    }

    // ---------------------------------------------------------------- run 6:
    // capital charge limits.
    {
        const fs::path base_out = work / "kva_base";
        const int base_rc = run_all(config_path("kva.json"), base_out);

        const fs::path dbl_cfg = mutated_config("kva.json", "kva_double.json", [](json& d) {
            d["grid"]["steps"] = d["grid"]["steps"].get<int>() * 2;
        });
        const fs::path dbl_out = work / "kva_double";
        const int dbl_rc = run_all(dbl_cfg, dbl_out);

        const fs::path zero_cfg = mutated_config("kva.json", "kva_zero.json", [](json& d) {
            d["xva"]["kva"]["hurdle"] = 0.0;
        });
        const fs::path zero_out = work / "kva_zero";
        const int zero_rc = run_all(zero_cfg, zero_out);

        bool pass = false;
        std::string detail;
        if (base_rc == 0 && dbl_rc == 0 && zero_rc == 0) {
            const auto kva_of = [](const fs::path& out) {
                return load_json(out / "report.json").at("adjustments").at("kva");
            };
            const double base = estimate(kva_of(base_out));
            const double dbl = estimate(kva_of(dbl_out));
            const json zero = kva_of(zero_out);
            const bool zero_exact = estimate(zero) == 0.0 && std_error(zero) == 0.0;
            const bool halves = dbl <= 0.6 * base && base > 0.0;

            // Shortfall estimator on a known three-point distribution:
            // P(-1)=0.5, P(1)=0.3, P(2)=0.2 has ES at level 0.7 of 5/3.
            riskmin::CounterRng rng(2024, riskmin::Stream::TwoStepInner);
            const int n_batches = 30, m = 2000;
            std::vector<double> batch_means(n_batches);
            std::vector<double> sample(m);
            for (int b = 0; b < n_batches; ++b) {
                for (int i = 0; i < m; ++i) {
                    const double u = rng.uniform(static_cast<std::uint64_t>(b), i);
                    sample[static_cast<std::size_t>(i)] = u < 0.5 ? -1.0 : (u < 0.8 ? 1.0 : 2.0);
                }
                batch_means[static_cast<std::size_t>(b)] =
                    riskmin::superquantile(sample, 0.7);
            }
            const riskmin::Estimate es = riskmin::mean_se(batch_means);
            const bool es_ok = std::fabs(es.value - 5.0 / 3.0) <= 3.0 * es.se;

            pass = zero_exact && halves && es_ok;
            detail = "zero-hurdle charge " + std::string(zero_exact ? "exact 0" : "NOT 0") +
                     "; step doubling " + fmt(base) + " -> " + fmt(dbl) +
                     "; shortfall estimator " + fmt(es.value) + " vs 5/3 (3 SE " +
                     fmt(3.0 * es.se) + ")";
        } else {
            detail = "runs failed with exit codes " + std::to_string(base_rc) + "/" +
                     std::to_string(dbl_rc) + "/" + std::to_string(zero_rc);
        }
        record(10, "capital charge limits", pass, detail);
    }

    // ---------------------------------------------------------------- run 7:
    // byte determinism across reruns and worker counts.
    {
        const fs::path out = work / "full_threads";
        const int rc = full_rc == 0 ? run_all(full_config, out, "--threads 3") : -1;
        bool pass = false;
        std::string detail = "run failed";
        if (rc == 0) {
            const char* names[] = {"report.json",    "xva_metrics.csv",     "bsde_summary.csv",
                                   "xva_profile.csv", "cost_fan.csv",        "strategy_sample.csv"};
            pass = true;
            std::string first_diff;
            for (const char* name : names)
                if (slurp(full_out / name) != slurp(out / name)) {
                    pass = false;
                    if (first_diff.empty()) first_diff = name;
                }
            detail = pass ? "report and CSV artifacts byte-identical across worker counts"
                          : "artifact differs: " + first_diff;
        }
        record(11, "byte determinism", pass, detail);
    }

    // Criterion 8 aggregates the quadratic-bound tallies of all runs above.
    record(8, "pathwise risk-budget bound",
           g_quadratic_runs > 0 && g_quadratic_violations == 0,
           std::to_string(g_quadratic_violations) + " violations across " +
               std::to_string(g_quadratic_runs) + " fixture runs");

    // ------------------------------------------------------------- reporting
    std::sort(g_results.begin(), g_results.end(),
              [](const CriterionResult& a, const CriterionResult& b) {
                  return a.number < b.number;
              });
    int failures = 0;
    for (const CriterionResult& r : g_results) {
        if (!r.pass) ++failures;
        std::printf("%s  %2d  %-40s %s\n", r.pass ? "PASS" : "FAIL", r.number, r.name.c_str(),
                    r.detail.c_str());
    }
    std::printf("%d/%d criteria passed\n", static_cast<int>(g_results.size()) - failures,
                static_cast<int>(g_results.size()));
    return failures == 0 ? 0 : 1;
}
