// Python bindings: a thin veneer over the pipeline.  The configuration
// travels as a JSON string (the same document the CLI reads) and the result
// comes back as a plain dict, so the binding adds no schema of its own.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cstdint>
#include <string>

#include <nlohmann/json.hpp>

#include "riskmin/config.hpp"
#include "riskmin/errors.hpp"
#include "riskmin/pipeline.hpp"
#include "riskmin/version.hpp"

namespace py = pybind11;

namespace {

riskmin::CliOverrides overrides_from_dict(const py::dict& d) {
    riskmin::CliOverrides ov;
    for (const auto& item : d) {
        const std::string key = py::cast<std::string>(item.first);
        if (key == "seed")
            ov.seed = py::cast<std::uint64_t>(item.second);
        else if (key == "paths")
            ov.paths = py::cast<int>(item.second);
        else if (key == "steps")
            ov.steps = py::cast<int>(item.second);
        else if (key == "output_dir")
            ov.output_dir = py::cast<std::string>(item.second);
        else if (key == "threads")
            ov.threads = py::cast<int>(item.second);
        else if (key == "no_cache")
            ov.no_cache = py::cast<bool>(item.second);
        else if (key == "strict_display")
            ov.strict_display = py::cast<bool>(item.second);
        else
            throw riskmin::ConfigError("unknown override: " + key);
    }
    return ov;
}

riskmin::EngineConfig parse_document(const std::string& config_json, const py::dict& overrides) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(config_json);
    } catch (const nlohmann::json::parse_error& e) {
        throw riskmin::ConfigError(std::string("configuration is not valid JSON: ") + e.what());
    }
    return riskmin::parse_config(doc, overrides_from_dict(overrides));
}

py::dict run(const std::string& config_json, const std::string& stage, const py::dict& overrides) {
    const riskmin::EngineConfig config = parse_document(config_json, overrides);
    const riskmin::Stage parsed_stage = riskmin::parse_stage(stage);

    riskmin::PipelineOutcome outcome;
    {
        py::gil_scoped_release release;
        outcome = riskmin::run_pipeline(config, parsed_stage);
    }

    py::dict result;
    result["exit_code"] = outcome.exit_code;
    result["config_hash"] = riskmin::config_hash_hex(config);
    result["output_dir"] = config.run.output_dir;
    result["warnings"] = outcome.warnings;
    if (outcome.has_clean) result["clean_value"] = outcome.clean_value;
    if (outcome.has_solution) result["y0"] = outcome.y0;
    if (outcome.has_xva) {
        result["total"] = outcome.total;
        result["gap"] = outcome.gap;
        result["gap_se"] = outcome.gap_se;
    }
    py::list invariants;
    for (const riskmin::InvariantResult& inv : outcome.invariants) {
        py::dict row;
        row["name"] = inv.name;
        row["pass"] = inv.pass;
        row["observed"] = inv.observed;
        row["tolerance"] = inv.tolerance;
        row["detail"] = inv.detail;
        invariants.append(row);
    }
    result["invariants"] = invariants;
    return result;
}

std::string hash_of(const std::string& config_json, const py::dict& overrides) {
    return riskmin::config_hash_hex(parse_document(config_json, overrides));
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Monte Carlo pricing, hedging, and valuation-adjustment engine";

    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const riskmin::ConfigError& e) {
            PyErr_SetString(PyExc_ValueError, e.what());
        } catch (const riskmin::NumericalError& e) {
            PyErr_SetString(PyExc_RuntimeError, e.what());
        }
    });

    m.def("run", &run, py::arg("config_json"), py::arg("stage") = "all",
          py::arg("overrides") = py::dict(),
          "Run the pipeline on a JSON configuration string; returns a dict "
          "with exit_code, headline values, warnings, and (for the diagnose "
          "stage) the invariant battery.  Artifacts are written to the "
          "configured output directory.");
    m.def("config_hash", &hash_of, py::arg("config_json"),
          py::arg("overrides") = py::dict(),
          "Hash of the effective configuration, as carried in artifact names.");
    m.def("version", [] { return std::string(riskmin::kVersion); });
}
