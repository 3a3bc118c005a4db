#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "bsvi/convex_ops.hpp"

namespace bsvi {

/// Coefficient signatures. Vector outputs are written into caller-owned spans
/// so the simulation loops do not allocate.
using DriftFn = std::function<void(double t, std::span<const double> x, std::span<double> out)>;
/// Writes the m x d diffusion matrix row-major into out.
using DiffusionFn = std::function<void(double t, std::span<const double> x, std::span<double> out)>;
using GeneratorFn =
    std::function<double(double t, std::span<const double> x, double y, std::span<const double> z)>;
using BoundaryGeneratorFn = std::function<double(double t, std::span<const double> x, double y)>;
using TerminalFn = std::function<double(std::span<const double> x)>;

/// Decoupled forward-backward system with a scalar backward component.
///
/// Forward: dX = b(t,X) dt + sigma(t,X) dW (- grad l(X) dA when a domain is set).
/// Backward: -dY + d phi(Y) dt contains F(t,X,Y,Z) dt (+ G dA) - Z dW, Y_T = g(X_T).
struct ProblemSpec {
    std::string name;
    std::size_t state_dim = 1;     ///< m
    std::size_t brownian_dim = 1;  ///< d
    DriftFn drift;
    DiffusionFn diffusion;
    GeneratorFn generator;
    BoundaryGeneratorFn boundary_generator;  ///< empty => G == 0
    TerminalFn terminal;
    ConvexFunction phi;
    std::optional<ConvexSet> domain;  ///< empty => unreflected forward
    double horizon = 1.0;
    double initial_time = 0.0;
    std::vector<double> initial_x{0.0};
    double lipschitz = 0.0;  ///< declared joint Lipschitz constant of b, sigma, F, g

    /// Throws std::invalid_argument when a structural invariant fails: missing
    /// coefficients, horizon <= initial time, dimension mismatch, initial point
    /// outside the closed domain.
    void check() const;

    bool reflected() const { return domain.has_value(); }
    double level(std::span<const double> x) const;
};

/// Uniform grid t_i = t0 + i (T - t0) / n. Nodes are derived from (n, T), never
/// accumulated, so t_n == T exactly.
class Partition {
public:
    Partition(double horizon, std::size_t steps, double initial_time = 0.0);

    std::size_t steps() const { return steps_; }
    double horizon() const { return horizon_; }
    double initial_time() const { return initial_time_; }
    double step_size() const { return (horizon_ - initial_time_) / static_cast<double>(steps_); }
    double node(std::size_t i) const;
    std::vector<double> nodes() const;

    bool operator==(const Partition&) const = default;

private:
    double horizon_;
    std::size_t steps_;
    double initial_time_;
};

/// Throws std::invalid_argument for n == 0 or T <= 0.
Partition make_partition(double horizon, std::size_t steps);

struct LsmcPoly {
    int degree = 3;
};
struct Binning {
    std::size_t bins = 16;
};
struct TreeExact {};
using EstimatorKind = std::variant<LsmcPoly, Binning, TreeExact>;

std::string estimator_name(const EstimatorKind& kind);

enum class SchemeVariant { implicit, explicit_ };
enum class IncrementLaw { gaussian, rademacher };

std::string to_string(SchemeVariant v);
std::string to_string(IncrementLaw law);

struct SchemeParams {
    double a_exponent = 1.0 / 3.0;  ///< eps = h^a, a in (0, 1/2)
    std::size_t num_paths = 10000;
    double fixed_point_tol = 1e-12;
    int fixed_point_max_iter = 500;
    EstimatorKind estimator = LsmcPoly{3};
    SchemeVariant variant = SchemeVariant::implicit;
    std::uint64_t seed = 20240917;
    IncrementLaw law = IncrementLaw::gaussian;
    std::size_t tree_cap = 20;      ///< max n * d for full tree enumeration
    bool clip_to_range = false;     ///< truncate regression outputs to the sample range
    bool generalized_with_generator = false;  ///< add h F(t_i, X_i, Y_i, Z_i) to the reflected scheme
    unsigned workers = 1;

    /// Throws std::invalid_argument when a parameter is out of range.
    void check() const;
    /// Penalization parameter for a given step size.
    double epsilon(double h) const;
};

struct Violation {
    enum class Kind { non_finite, lipschitz, contraction };
    Kind kind;
    std::string coefficient;
    std::string detail;
    double ratio = 0.0;
};

struct ValidationReport {
    std::vector<Violation> violations;

    bool empty() const { return violations.empty(); }
    bool has(Violation::Kind kind) const;
    bool has(Violation::Kind kind, const std::string& coefficient) const;
};

/// Probes the coefficients on a deterministic Sobol point set (64 points per
/// scalar argument) and reports non-finite outputs, empirical Lipschitz ratios
/// above 1.5 x the declared constant, and a contraction warning when
/// h (K + h^-a) >= 1. Never throws on a well-formed spec.
ValidationReport validate_spec(const ProblemSpec& spec, const SchemeParams& params, const Partition& partition);

}  // namespace bsvi
