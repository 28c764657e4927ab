#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace riskmin {

// Raised when a configuration fails schema or semantic validation.  Carries the
// full list of problems (one per offending key/value) so callers can report all
// of them at once.  The CLI maps this to exit code 2.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(std::vector<std::string> problems)
        : std::runtime_error(join(problems)), problems_(std::move(problems)) {}

    explicit ConfigError(const std::string& problem)
        : ConfigError(std::vector<std::string>{problem}) {}

    const std::vector<std::string>& problems() const { return problems_; }

private:
    static std::string join(const std::vector<std::string>& problems) {
        std::string out = "configuration invalid:";
        for (const auto& p : problems) out += "\n  - " + p;
        return out;
    }

    std::vector<std::string> problems_;
};

// Raised when a computation produces values outside its admissible range
// (non-finite regression targets, market-price-of-risk bound violations, ...).
// Carries the pipeline stage and the offending quantity so the failure can be
// reported precisely.  The CLI maps this to exit code 3.
class NumericalError : public std::runtime_error {
public:
    NumericalError(std::string stage, std::string quantity, std::string detail)
        : std::runtime_error("numerical abort in stage '" + stage + "', quantity '" +
                             quantity + "': " + detail),
          stage_(std::move(stage)),
          quantity_(std::move(quantity)) {}

    const std::string& stage() const { return stage_; }
    const std::string& quantity() const { return quantity_; }

private:
    std::string stage_;
    std::string quantity_;
};

}  // namespace riskmin
