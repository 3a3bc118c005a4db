#pragma once

#include <functional>
#include <limits>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace bsvi {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Closed interval [lo, hi] of the extended reals, possibly empty. Used for
/// one-dimensional subdifferentials and effective domains.
struct ExtInterval {
    double lo = 0.0;
    double hi = 0.0;
    bool empty = false;

    static ExtInterval point(double v) { return {v, v, false}; }
    static ExtInterval none() { return {0.0, 0.0, true}; }
    static ExtInterval whole() { return {-kInf, kInf, false}; }

    /// Membership with absolute tolerance.
    bool contains(double v, double tol = 0.0) const {
        return !empty && v >= lo - tol && v <= hi + tol;
    }

    /// Element of least absolute value. Requires !empty.
    double min_norm() const;

    /// Distance from v to the interval (infinite when empty).
    double distance(double v) const;
};

/// Proper convex lower semicontinuous function on the real line.
///
/// Catalog entries carry closed-form resolvents. Custom entries supply a value
/// function, a subdifferential and an effective domain; their resolvent is
/// computed numerically.
class ConvexFunction {
public:
    struct Zero {};
    /// phi(y) = c y^2 / 2, c >= 0.
    struct Quadratic { double c; };
    /// phi(y) = c |y|, c >= 0.
    struct Abs { double c; };
    /// Indicator of [lo, hi]; either bound may be infinite.
    struct IndicatorInterval { double lo; double hi; };
    /// Indicator of {p}.
    struct IndicatorPoint { double p; };
    struct Custom {
        std::string name;
        std::function<double(double)> value;
        std::function<ExtInterval(double)> subdifferential;
        ExtInterval domain = ExtInterval::whole();
    };

    using Kind = std::variant<Zero, Quadratic, Abs, IndicatorInterval, IndicatorPoint, Custom>;

    ConvexFunction() : kind_(Zero{}) {}
    explicit ConvexFunction(Kind kind);

    static ConvexFunction zero() { return ConvexFunction(Zero{}); }
    static ConvexFunction quadratic(double c) { return ConvexFunction(Quadratic{c}); }
    static ConvexFunction abs(double c) { return ConvexFunction(Abs{c}); }
    static ConvexFunction indicator(double lo, double hi) {
        return ConvexFunction(IndicatorInterval{lo, hi});
    }
    static ConvexFunction indicator_point(double p) { return ConvexFunction(IndicatorPoint{p}); }
    static ConvexFunction custom(Custom c) { return ConvexFunction(std::move(c)); }

    const Kind& kind() const { return kind_; }
    bool is_zero() const { return std::holds_alternative<Zero>(kind_); }
    bool is_custom() const { return std::holds_alternative<Custom>(kind_); }

    /// phi(y), +inf outside the domain.
    double value(double y) const;
    /// Subdifferential at y; empty outside dom(d phi).
    ExtInterval subdifferential(double y) const;
    /// Closure of the effective domain.
    ExtInterval domain() const;

    /// Config-file spelling, e.g. "abs:2" or "indicator:[0,inf]".
    std::string name() const;

private:
    Kind kind_;
};

/// Parses `zero | quadratic:c | abs:c | indicator:[l,u] | indicator_point:p`.
/// Bounds accept `inf` / `-inf`. Throws ConfigError on malformed input.
ConvexFunction parse_convex_function(const std::string& text);

/// Every catalog kind with representative parameters, for property sweeps.
std::vector<ConvexFunction> catalog_samples();

/// J_eps(x) = argmin_y phi(y) + |y - x|^2 / (2 eps). Closed form for catalog
/// entries, numeric_resolvent for custom ones.
double resolvent(const ConvexFunction& phi, double x, double eps);

/// Resolvent by safeguarded one-dimensional minimization, usable on any entry.
/// A golden-section phase on the strongly convex objective shrinks a bracket
/// obtained from strong convexity; bisection on the optimality inclusion
/// (x - y) / eps in d phi(y) finishes to 1e-10 on the argument. Throws
/// ConvergenceError after 200 iterations.
double numeric_resolvent(const ConvexFunction& phi, double x, double eps);

/// Yosida approximation (x - J_eps(x)) / eps.
double yosida_gradient(const ConvexFunction& phi, double x, double eps);

// ---------------------------------------------------------------------------
// Projection onto closed convex sets of R^k.

struct IntervalSet {
    double lo;
    double hi;
};

struct BallSet {
    std::vector<double> center;
    double radius;
};

/// {x : normal . x <= offset}
struct HalfspaceSet {
    std::vector<double> normal;
    double offset;
};

using ConvexSet = std::variant<IntervalSet, BallSet, HalfspaceSet>;

struct Projection {
    std::vector<double> point;
    double distance;
};

/// Throws std::invalid_argument for an empty interval, negative radius,
/// zero normal, or a dimension mismatch.
void validate_set(const ConvexSet& set, std::size_t dim);

/// Euclidean projection of x onto the set.
Projection project_to_convex(const ConvexSet& set, std::span<const double> x);

/// Signed level function with unit gradient on the boundary: <= 0 exactly on
/// the closed set.
double level_function(const ConvexSet& set, std::span<const double> x);

/// Ambient dimension the set lives in (1 for intervals).
std::size_t set_dimension(const ConvexSet& set);

/// `interval:[l,u] | ball:[c1,...,ck]:r | halfspace:[n1,...,nk]:offset`
ConvexSet parse_convex_set(const std::string& text);
std::string set_name(const ConvexSet& set);

}  // namespace bsvi
