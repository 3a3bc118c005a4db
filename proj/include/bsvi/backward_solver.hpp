#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <vector>

#include "bsvi/convex_ops.hpp"
#include "bsvi/forward_sim.hpp"
#include "bsvi/problem_model.hpp"

namespace bsvi {

/// Node values of a backward scheme: Y[j][i], Z[j][i] (d components) and
/// U[j][i], for paths j < M and nodes i <= n.
class BackwardSolution {
public:
    BackwardSolution(Partition partition, std::size_t paths, std::size_t brownian_dim);

    const Partition& partition() const { return partition_; }
    std::size_t paths() const { return paths_; }
    std::size_t steps() const { return partition_.steps(); }
    std::size_t brownian_dim() const { return dim_; }

    double y(std::size_t path, std::size_t node) const { return y_[path * (steps() + 1) + node]; }
    double u(std::size_t path, std::size_t node) const { return u_[path * (steps() + 1) + node]; }
    std::span<const double> z(std::size_t path, std::size_t node) const {
        return {z_.data() + (path * (steps() + 1) + node) * dim_, dim_};
    }

    SchemeVariant variant = SchemeVariant::implicit;
    double a_exponent = 1.0 / 3.0;
    EstimatorKind estimator = LsmcPoly{3};
    bool generalized = false;

    /// Writes one time layer (arrays of length M, M*d, M).
    void set_layer(std::size_t node, std::span<const double> y, std::span<const double> z,
                   std::span<const double> u);

    bool operator==(const BackwardSolution& other) const;

private:
    Partition partition_;
    std::size_t paths_;
    std::size_t dim_;
    std::vector<double> y_, z_, u_;
};

/// Receives backward layers as they are produced, from node n down to 0.
class LayerSink {
public:
    virtual ~LayerSink() = default;
    virtual void layer(std::size_t node, std::span<const double> y, std::span<const double> z,
                       std::span<const double> u) = 0;
};

struct FixedPointResult {
    double value;
    int iterations;
    double residual;
};

/// Solves y = c + h [F(t, x, y, z) - grad phi_eps(y)]. Plain Picard iteration when
/// h (K + 1/eps) < 1, otherwise the damped map y <- (1 - th) y + th map(y) with
/// th = 1 / (1 + h (K + 1/eps)). Starts from c and stops once |y - map(y)| <= tol.
/// Throws ConvergenceError carrying the last residual after max_iter maps.
FixedPointResult solve_fixed_point(double c, std::span<const double> x, std::span<const double> z, double t,
                                   const ProblemSpec& spec, double h, double eps, double tol, int max_iter);

/// Yosida-penalized backward scheme on a simulated forward ensemble.
///
/// Terminal layer Y = g(X_n), Z = 0, U = grad phi_eps(Y). For i = n-1..0, with
/// c = E^i(Y_{i+1}) and Z_i = E^i(Y_{i+1} dW_i) / h:
///   implicit: Y_i solves Y_i = c + h [F(t_i, X_i, Y_i, Z_i) - grad phi_eps(Y_i)]
///   explicit: Y_i = c + h E^i[F(t_i, X_i, Y_{i+1}, Z_i) - grad phi_eps(Y_{i+1})]
///   U_i = grad phi_eps(c),  eps = h^a.
/// Errors from the estimator or the fixed point are rethrown as BackwardError
/// tagged with the step.
BackwardSolution solve_bsvi(const ProblemSpec& spec, const SchemeParams& params, const ForwardEnsemble& forward);
void solve_bsvi(const ProblemSpec& spec, const SchemeParams& params, const ForwardEnsemble& forward,
                LayerSink& sink);

/// Scheme for the generalized inequality with a boundary term (phi == 0):
///   Y_i = E^i[Y_{i+1} - G(t_{i+1}, X_{i+1}, Y_{i+1}) dA_i],
///   Z_i = E^i[(Y_{i+1} - G(t_{i+1}, X_{i+1}, Y_{i+1}) dA_i) dW_i] / h,
/// with Y_n = g(X_n) and U == 0. The generator F is ignored unless
/// params.generalized_with_generator, in which case Y_i solves
/// Y_i = E^i[...] + h F(t_i, X_i, Y_i, Z_i). Throws std::invalid_argument for an
/// unreflected ensemble or a nonzero phi.
BackwardSolution solve_generalized(const ProblemSpec& spec, const SchemeParams& params,
                                   const ForwardEnsemble& forward);
void solve_generalized(const ProblemSpec& spec, const SchemeParams& params, const ForwardEnsemble& forward,
                       LayerSink& sink);

/// CSV with columns path,step,t,x0..,Y,z0..,U[,A].
void write_solution_csv(std::ostream& os, const ForwardEnsemble& forward, const BackwardSolution& sol);

}  // namespace bsvi
