#pragma once

#include <map>
#include <string>
#include <vector>

#include "riskmin/bsde.hpp"
#include "riskmin/config.hpp"
#include "riskmin/contract.hpp"
#include "riskmin/credit.hpp"
#include "riskmin/hedging.hpp"
#include "riskmin/market.hpp"
#include "riskmin/xva.hpp"

namespace riskmin {

// One line of the diagnose battery.
struct InvariantResult {
    std::string name;
    bool pass = false;
    double observed = 0.0;
    double tolerance = 0.0;
    std::string detail;
};

// Everything the writers may need; stages that have not run stay null and
// their report sections are emitted as null (the key set is stable).
struct ReportInputs {
    const EngineConfig* config = nullptr;
    std::string hash_hex;
    const MarketPaths* physical = nullptr;
    const CreditScenarios* credit = nullptr;
    const CleanValue* clean = nullptr;
    const CloseOutPaths* closeout = nullptr;
    const LedgerPaths* ledger = nullptr;
    const BsdeSolution* bsde = nullptr;
    const GSolution* gsol = nullptr;
    const HedgePaths* hedge = nullptr;
    const FsChecks* fs = nullptr;
    const XvaResults* xva = nullptr;
    const std::vector<InvariantResult>* invariants = nullptr;
};

// Byte-deterministic artifacts: identical configuration and seed produce
// identical bytes, independent of thread count.
void write_report(const std::string& dir, const ReportInputs& in);
void write_diagnostics(const std::string& dir, const ReportInputs& in);
void write_csvs(const std::string& dir, const ReportInputs& in);

// The manifest carries wall-clock timings and cache outcomes; it is the one
// artifact excluded from byte comparisons.
void write_manifest(const std::string& dir, const ReportInputs& in,
                    const std::map<std::string, double>& stage_seconds,
                    const std::map<std::string, std::string>& cache_outcomes,
                    const std::vector<std::string>& warnings);

}  // namespace riskmin
