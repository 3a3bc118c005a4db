#include "bsvi/forward_sim.hpp"

#include <cmath>
#include <ostream>
#include <stdexcept>

#include "bsvi/errors.hpp"
#include "bsvi/parallel.hpp"
#include "bsvi/text_util.hpp"

namespace bsvi {

ForwardEnsemble::ForwardEnsemble(std::shared_ptr<const IncrementEnsemble> increments, std::size_t state_dim,
                                 std::vector<double> states, std::optional<std::vector<double>> boundary)
    : increments_(std::move(increments)), state_dim_(state_dim), states_(std::move(states)),
      boundary_(std::move(boundary)) {
    if (!increments_) throw std::invalid_argument("forward ensemble needs increments");
    const std::size_t nodes = increments_->paths() * (increments_->steps() + 1);
    if (states_.size() != nodes * state_dim_) throw std::invalid_argument("forward states have wrong size");
    if (boundary_ && boundary_->size() != nodes) throw std::invalid_argument("boundary process has wrong size");
}

namespace {

void check_dims(const ProblemSpec& spec, const IncrementEnsemble& inc) {
    spec.check();
    if (inc.dim() != spec.brownian_dim)
        throw std::invalid_argument("increment dimension " + std::to_string(inc.dim()) +
                                    " does not match Brownian dimension " + std::to_string(spec.brownian_dim));
    if (inc.partition().horizon() != spec.horizon || inc.partition().initial_time() != spec.initial_time)
        throw std::invalid_argument("increment partition does not span the problem horizon");
}

// Shared loop; `reflect` decides whether proposals leaving the domain are projected.
ForwardEnsemble run_euler(const ProblemSpec& spec, std::shared_ptr<const IncrementEnsemble> increments,
                          unsigned workers, bool reflect) {
    const IncrementEnsemble& inc = *increments;
    check_dims(spec, inc);
    const std::size_t M = inc.paths(), n = inc.steps(), m = spec.state_dim, d = spec.brownian_dim;
    const Partition& part = inc.partition();
    const double h = part.step_size();

    std::vector<double> states(M * (n + 1) * m);
    std::optional<std::vector<double>> boundary;
    if (reflect) boundary.emplace(M * (n + 1), 0.0);

    parallel_for(M, workers, [&](std::size_t begin, std::size_t end) {
        std::vector<double> drift(m), diff(m * d);
        for (std::size_t j = begin; j < end; ++j) {
            double* x = states.data() + j * (n + 1) * m;
            std::copy(spec.initial_x.begin(), spec.initial_x.end(), x);
            double a = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                const double t = part.node(i);
                const std::span<const double> xi(x + i * m, m);
                const std::span<double> next(x + (i + 1) * m, m);
                spec.drift(t, xi, drift);
                spec.diffusion(t, xi, diff);
                const auto dw = inc.at(j, i);
                for (std::size_t r = 0; r < m; ++r) {
                    double v = xi[r] + drift[r] * h;
                    for (std::size_t k = 0; k < d; ++k) v += diff[r * d + k] * dw[k];
                    next[r] = v;
                }
                for (double v : next)
                    if (!std::isfinite(v)) throw SimulationError("non-finite forward state", j, i + 1);
                if (reflect && level_function(*spec.domain, next) > 0.0) {
                    const Projection p = project_to_convex(*spec.domain, next);
                    std::copy(p.point.begin(), p.point.end(), next.begin());
                    a += p.distance;
                }
                if (reflect) (*boundary)[j * (n + 1) + i + 1] = a;
            }
        }
    });
    return ForwardEnsemble(std::move(increments), m, std::move(states), std::move(boundary));
}

}  // namespace

ForwardEnsemble euler_simulate(const ProblemSpec& spec, std::shared_ptr<const IncrementEnsemble> increments,
                               unsigned workers) {
    if (spec.reflected()) throw std::invalid_argument("euler_simulate: problem has a domain; use the projected scheme");
    return run_euler(spec, std::move(increments), workers, false);
}

ForwardEnsemble projected_euler_simulate(const ProblemSpec& spec,
                                         std::shared_ptr<const IncrementEnsemble> increments, unsigned workers) {
    if (!spec.reflected()) throw std::invalid_argument("projected_euler_simulate: problem has no domain");
    return run_euler(spec, std::move(increments), workers, true);
}

ForwardEnsemble simulate_forward(const ProblemSpec& spec, std::shared_ptr<const IncrementEnsemble> increments,
                                 unsigned workers) {
    return spec.reflected() ? projected_euler_simulate(spec, std::move(increments), workers)
                            : euler_simulate(spec, std::move(increments), workers);
}

void write_forward_csv(std::ostream& os, const ForwardEnsemble& fwd) {
    os << "path,step,t";
    for (std::size_t r = 0; r < fwd.state_dim(); ++r) os << ",x" << r;
    if (fwd.reflected()) os << ",A";
    os << '\n';
    for (std::size_t j = 0; j < fwd.paths(); ++j)
        for (std::size_t i = 0; i <= fwd.steps(); ++i) {
            os << j << ',' << i << ',' << format_csv(fwd.partition().node(i));
            for (double v : fwd.state(j, i)) os << ',' << format_csv(v);
            if (fwd.reflected()) os << ',' << format_csv(fwd.boundary(j, i));
            os << '\n';
        }
}

}  // namespace bsvi
