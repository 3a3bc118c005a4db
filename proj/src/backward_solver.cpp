#include "bsvi/backward_solver.hpp"

#include <cmath>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "bsvi/cond_exp.hpp"
#include "bsvi/errors.hpp"
#include "bsvi/parallel.hpp"
#include "bsvi/text_util.hpp"

namespace bsvi {

BackwardSolution::BackwardSolution(Partition partition, std::size_t paths, std::size_t brownian_dim)
    : partition_(partition), paths_(paths), dim_(brownian_dim), y_(paths * (partition.steps() + 1), 0.0),
      z_(paths * (partition.steps() + 1) * brownian_dim, 0.0), u_(paths * (partition.steps() + 1), 0.0) {}

void BackwardSolution::set_layer(std::size_t node, std::span<const double> y, std::span<const double> z,
                                 std::span<const double> u) {
    const std::size_t stride = steps() + 1;
    for (std::size_t j = 0; j < paths_; ++j) {
        y_[j * stride + node] = y[j];
        u_[j * stride + node] = u[j];
        for (std::size_t k = 0; k < dim_; ++k) z_[(j * stride + node) * dim_ + k] = z[j * dim_ + k];
    }
}

bool BackwardSolution::operator==(const BackwardSolution& other) const {
    return partition_ == other.partition_ && paths_ == other.paths_ && dim_ == other.dim_ && y_ == other.y_ &&
           z_ == other.z_ && u_ == other.u_;
}

FixedPointResult solve_fixed_point(double c, std::span<const double> x, std::span<const double> z, double t,
                                   const ProblemSpec& spec, double h, double eps, double tol, int max_iter) {
    if (!(h > 0.0) || !(eps > 0.0) || !(tol > 0.0))
        throw std::invalid_argument("solve_fixed_point: h, eps and tol must be > 0");
    const double lip = h * (spec.lipschitz + 1.0 / eps);
    const double theta = lip < 1.0 ? 1.0 : 1.0 / (1.0 + lip);
    double y = c;
    double residual = kInf;
    for (int it = 1; it <= max_iter; ++it) {
        const double mapped = c + h * (spec.generator(t, x, y, z) - yosida_gradient(spec.phi, y, eps));
        residual = std::abs(y - mapped);
        if (!std::isfinite(mapped)) break;
        if (residual <= tol) return {y, it, residual};
        y = (1.0 - theta) * y + theta * mapped;
    }
    std::ostringstream os;
    os << "fixed point did not converge in " << max_iter << " iterations (residual " << residual << ")";
    throw ConvergenceError(os.str(), residual, max_iter);
}

namespace {

class StoringSink final : public LayerSink {
public:
    explicit StoringSink(BackwardSolution& sol) : sol_(sol) {}
    void layer(std::size_t node, std::span<const double> y, std::span<const double> z,
               std::span<const double> u) override {
        sol_.set_layer(node, y, z, u);
    }

private:
    BackwardSolution& sol_;
};

void check_inputs(const ProblemSpec& spec, const SchemeParams& params, const ForwardEnsemble& forward) {
    spec.check();
    params.check();
    if (forward.state_dim() != spec.state_dim || forward.increments().dim() != spec.brownian_dim)
        throw std::invalid_argument("forward ensemble dimensions do not match the problem");
    if (std::holds_alternative<TreeExact>(params.estimator)) {
        if (!forward.increments().enumerated())
            throw std::invalid_argument("tree_exact needs an enumerated Rademacher ensemble");
        if (spec.brownian_dim != 1) throw std::invalid_argument("tree_exact requires d = 1");
        if (forward.steps() > params.tree_cap) throw std::invalid_argument("tree_exact: n exceeds the tree cap");
    }
}

std::vector<double> gather_states(const ForwardEnsemble& fwd, std::size_t node) {
    const std::size_t M = fwd.paths(), m = fwd.state_dim();
    std::vector<double> out(M * m);
    for (std::size_t j = 0; j < M; ++j) {
        const auto s = fwd.state(j, node);
        std::copy(s.begin(), s.end(), out.begin() + static_cast<std::ptrdiff_t>(j * m));
    }
    return out;
}

std::vector<double> gather_increments(const ForwardEnsemble& fwd, std::size_t step) {
    const std::size_t M = fwd.paths(), d = fwd.increments().dim();
    std::vector<double> out(M * d);
    for (std::size_t j = 0; j < M; ++j) {
        const auto w = fwd.increments().at(j, step);
        std::copy(w.begin(), w.end(), out.begin() + static_cast<std::ptrdiff_t>(j * d));
    }
    return out;
}

// Per-path regression target at step i: the quantity whose conditional
// expectation becomes c_j, before the dW weighting.
using TargetFn = std::function<double(std::size_t path, std::size_t step, double y_next)>;
// Per-path update from (c, z) to the layer value; returns (Y, U).
using UpdateFn = std::function<std::pair<double, double>(std::size_t path, std::size_t step, double c,
                                                         std::span<const double> z)>;

struct Recursion {
    const ProblemSpec& spec;
    const SchemeParams& params;
    const ForwardEnsemble& fwd;
    LayerSink& sink;
};

// Runs the backward pass shared by both schemes. `explicit_bracket`, when set,
// adds h * E^i[bracket] to c instead of calling `update`.
void backward_pass(const Recursion& rec, const TargetFn& target, const UpdateFn& update, double eps,
                   bool explicit_variant) {
    const ProblemSpec& spec = rec.spec;
    const SchemeParams& params = rec.params;
    const ForwardEnsemble& fwd = rec.fwd;
    const std::size_t M = fwd.paths(), n = fwd.steps(), m = spec.state_dim, d = spec.brownian_dim;
    const Partition& part = fwd.partition();
    const double h = part.step_size();
    const FitOptions fit_opts{fwd.increments().enumerated(), params.clip_to_range};

    std::vector<double> y(M), z(M * d, 0.0), u(M);
    for (std::size_t j = 0; j < M; ++j) {
        y[j] = spec.terminal(fwd.state(j, n));
        if (!std::isfinite(y[j])) throw BackwardError("non-finite terminal value on path " + std::to_string(j), n);
        u[j] = yosida_gradient(spec.phi, y[j], eps);
    }
    rec.sink.layer(n, y, z, u);

    std::vector<double> y_next(M), c(M), targets(M * (1 + d)), bracket;
    for (std::size_t step = n; step-- > 0;) {
        try {
            std::swap(y, y_next);
            const auto states = gather_states(fwd, step);
            const auto dw = gather_increments(fwd, step);
            for (std::size_t j = 0; j < M; ++j) {
                const double v = target(j, step, y_next[j]);
                targets[j * (1 + d)] = v;
                for (std::size_t k = 0; k < d; ++k) targets[j * (1 + d) + 1 + k] = v * dw[j * d + k];
            }
            const StateSample sample{states, m};
            const auto est = ConditionalEstimator::fit(sample, targets, 1 + d, params.estimator, fit_opts);
            parallel_for(M, params.workers, [&](std::size_t begin, std::size_t end) {
                std::vector<double> out(1 + d);
                for (std::size_t j = begin; j < end; ++j) {
                    est.evaluate(sample.row(j), out);
                    c[j] = out[0];
                    for (std::size_t k = 0; k < d; ++k) z[j * d + k] = out[1 + k] / h;
                }
            });

            if (explicit_variant) {
                const double t = part.node(step);
                bracket.resize(M);
                for (std::size_t j = 0; j < M; ++j) {
                    const std::span<const double> zj(z.data() + j * d, d);
                    bracket[j] = spec.generator(t, sample.row(j), y_next[j], zj) -
                                 yosida_gradient(spec.phi, y_next[j], eps);
                }
                const auto est_b = ConditionalEstimator::fit(sample, bracket, 1, params.estimator, fit_opts);
                parallel_for(M, params.workers, [&](std::size_t begin, std::size_t end) {
                    for (std::size_t j = begin; j < end; ++j) {
                        y[j] = c[j] + h * est_b.evaluate(sample.row(j));
                        u[j] = yosida_gradient(spec.phi, c[j], eps);
                    }
                });
            } else {
                parallel_for(M, params.workers, [&](std::size_t begin, std::size_t end) {
                    for (std::size_t j = begin; j < end; ++j) {
                        const auto [yj, uj] = update(j, step, c[j], std::span<const double>(z.data() + j * d, d));
                        y[j] = yj;
                        u[j] = uj;
                    }
                });
            }
        } catch (const BackwardError&) {
            throw;
        } catch (const Error& e) {
            throw BackwardError(e.what(), step);
        }
        rec.sink.layer(step, y, z, u);
    }
}

}  // namespace

void solve_bsvi(const ProblemSpec& spec, const SchemeParams& params, const ForwardEnsemble& forward,
                LayerSink& sink) {
    check_inputs(spec, params, forward);
    const Partition& part = forward.partition();
    const double h = part.step_size();
    const double eps = params.epsilon(h);
    const TargetFn target = [](std::size_t, std::size_t, double y_next) { return y_next; };
    const UpdateFn update = [&](std::size_t j, std::size_t step, double c, std::span<const double> z) {
        const auto fp = solve_fixed_point(c, forward.state(j, step), z, part.node(step), spec, h, eps,
                                          params.fixed_point_tol, params.fixed_point_max_iter);
        return std::pair{fp.value, yosida_gradient(spec.phi, c, eps)};
    };
    backward_pass({spec, params, forward, sink}, target, update, eps,
                  params.variant == SchemeVariant::explicit_);
}

BackwardSolution solve_bsvi(const ProblemSpec& spec, const SchemeParams& params, const ForwardEnsemble& forward) {
    BackwardSolution sol(forward.partition(), forward.paths(), spec.brownian_dim);
    sol.variant = params.variant;
    sol.a_exponent = params.a_exponent;
    sol.estimator = params.estimator;
    StoringSink sink(sol);
    solve_bsvi(spec, params, forward, sink);
    return sol;
}

void solve_generalized(const ProblemSpec& spec, const SchemeParams& params, const ForwardEnsemble& forward,
                       LayerSink& sink) {
    check_inputs(spec, params, forward);
    if (!forward.reflected()) throw std::invalid_argument("solve_generalized needs a reflected forward ensemble");
    if (!spec.phi.is_zero()) throw std::invalid_argument("solve_generalized supports phi == 0 only");
    const Partition& part = forward.partition();
    const double h = part.step_size();
    const double eps = params.epsilon(h);
    const TargetFn target = [&](std::size_t j, std::size_t step, double y_next) {
        const double da = forward.boundary_increment(j, step);
        if (!spec.boundary_generator || da == 0.0) return y_next;
        return y_next - spec.boundary_generator(part.node(step + 1), forward.state(j, step + 1), y_next) * da;
    };
    const UpdateFn update = [&](std::size_t j, std::size_t step, double c, std::span<const double> z) {
        if (!params.generalized_with_generator) return std::pair{c, 0.0};
        const auto fp = solve_fixed_point(c, forward.state(j, step), z, part.node(step), spec, h, eps,
                                          params.fixed_point_tol, params.fixed_point_max_iter);
        return std::pair{fp.value, 0.0};
    };
    backward_pass({spec, params, forward, sink}, target, update, eps, false);
}

BackwardSolution solve_generalized(const ProblemSpec& spec, const SchemeParams& params,
                                   const ForwardEnsemble& forward) {
    BackwardSolution sol(forward.partition(), forward.paths(), spec.brownian_dim);
    sol.variant = SchemeVariant::implicit;
    sol.a_exponent = params.a_exponent;
    sol.estimator = params.estimator;
    sol.generalized = true;
    StoringSink sink(sol);
    solve_generalized(spec, params, forward, sink);
    return sol;
}

void write_solution_csv(std::ostream& os, const ForwardEnsemble& forward, const BackwardSolution& sol) {
    const std::size_t m = forward.state_dim(), d = sol.brownian_dim();
    os << "path,step,t";
    for (std::size_t r = 0; r < m; ++r) os << ",x" << r;
    os << ",Y";
    for (std::size_t k = 0; k < d; ++k) os << ",z" << k;
    os << ",U";
    if (forward.reflected()) os << ",A";
    os << '\n';
    for (std::size_t j = 0; j < sol.paths(); ++j)
        for (std::size_t i = 0; i <= sol.steps(); ++i) {
            os << j << ',' << i << ',' << format_csv(sol.partition().node(i));
            for (double v : forward.state(j, i)) os << ',' << format_csv(v);
            os << ',' << format_csv(sol.y(j, i));
            for (double v : sol.z(j, i)) os << ',' << format_csv(v);
            os << ',' << format_csv(sol.u(j, i));
            if (forward.reflected()) os << ',' << format_csv(forward.boundary(j, i));
            os << '\n';
        }
}

}  // namespace bsvi
