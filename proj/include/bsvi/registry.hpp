#pragma once

#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "bsvi/problem_model.hpp"

namespace bsvi {

/// Closed-form companions of a registered problem. Any member may be empty.
struct AnalyticSolution {
    /// Exact X_t given the Brownian path value W_t (strong reference for the Euler scheme).
    std::function<void(double t, std::span<const double> w, std::span<double> x)> forward;
    /// Y_t = u(t, X_t) evaluated on a (simulated) state.
    std::function<double(double t, std::span<const double> x)> y;
    /// Z_t = v(t, X_t), d components.
    std::function<void(double t, std::span<const double> x, std::span<double> z)> z;
};

using ProblemParams = std::map<std::string, std::string>;

/// Typed access to problem parameters with per-problem defaults.
class ParamReader {
public:
    ParamReader(const ProblemParams& given, const ProblemParams& defaults) : given_(given), defaults_(defaults) {}
    double number(const std::string& key) const;
    std::string text(const std::string& key) const;

private:
    const std::string& raw(const std::string& key) const;
    const ProblemParams& given_;
    const ProblemParams& defaults_;
};

struct ProblemEntry {
    std::string name;
    std::string summary;
    /// Accepted keys and their default values.
    ProblemParams defaults;
    std::function<ProblemSpec(const ParamReader&)> build;
    /// Empty when the problem has no closed form; may return nullopt for
    /// parameter choices (e.g. nonzero phi) that break the closed form.
    std::function<std::optional<AnalyticSolution>(const ParamReader&)> analytic;
};

const std::vector<ProblemEntry>& problem_registry();
/// Throws ConfigError for an unknown name.
const ProblemEntry& find_problem(const std::string& name);

struct ProblemInstance {
    ProblemSpec spec;
    std::optional<AnalyticSolution> analytic;
};

/// Builds a registered problem. Keys not accepted by the problem are a
/// ConfigError, as are malformed values.
ProblemInstance make_problem(const std::string& name, const ProblemParams& params = {});

}  // namespace bsvi
