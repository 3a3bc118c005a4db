#pragma once

#include <cstddef>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "bsvi/problem_model.hpp"
#include "bsvi/rng_paths.hpp"

namespace bsvi {

/// Simulated forward states X[j][i] (and the boundary process A[j][i] for
/// reflected runs) on the nodes of the increments' partition.
class ForwardEnsemble {
public:
    ForwardEnsemble(std::shared_ptr<const IncrementEnsemble> increments, std::size_t state_dim,
                    std::vector<double> states, std::optional<std::vector<double>> boundary);

    const IncrementEnsemble& increments() const { return *increments_; }
    std::shared_ptr<const IncrementEnsemble> increments_ptr() const { return increments_; }
    const Partition& partition() const { return increments_->partition(); }
    std::size_t paths() const { return increments_->paths(); }
    std::size_t steps() const { return increments_->steps(); }
    std::size_t state_dim() const { return state_dim_; }
    bool reflected() const { return boundary_.has_value(); }

    std::span<const double> state(std::size_t path, std::size_t node) const {
        return {states_.data() + (path * (steps() + 1) + node) * state_dim_, state_dim_};
    }
    /// A[j][i]; requires reflected().
    double boundary(std::size_t path, std::size_t node) const { return (*boundary_)[path * (steps() + 1) + node]; }
    /// A[j][i+1] - A[j][i]; zero for unreflected ensembles.
    double boundary_increment(std::size_t path, std::size_t step) const {
        return boundary_ ? boundary(path, step + 1) - boundary(path, step) : 0.0;
    }

private:
    std::shared_ptr<const IncrementEnsemble> increments_;
    std::size_t state_dim_;
    std::vector<double> states_;
    std::optional<std::vector<double>> boundary_;
};

/// Classical Euler scheme X_{i+1} = X_i + b(t_i, X_i) h + sigma(t_i, X_i) dW_i.
/// Throws std::invalid_argument if the problem has a domain or dimensions
/// disagree, SimulationError on a non-finite state.
ForwardEnsemble euler_simulate(const ProblemSpec& spec, std::shared_ptr<const IncrementEnsemble> increments,
                               unsigned workers = 1);

/// Projected Euler scheme for the reflected SDE: Euler proposal, then
/// Euclidean projection onto the closed domain when the level function is
/// positive, with A incremented by the projection distance.
ForwardEnsemble projected_euler_simulate(const ProblemSpec& spec,
                                         std::shared_ptr<const IncrementEnsemble> increments,
                                         unsigned workers = 1);

/// Dispatches on spec.reflected().
ForwardEnsemble simulate_forward(const ProblemSpec& spec, std::shared_ptr<const IncrementEnsemble> increments,
                                 unsigned workers = 1);

/// CSV with columns path,step,t,x0..x{m-1}[,A].
void write_forward_csv(std::ostream& os, const ForwardEnsemble& fwd);

}  // namespace bsvi
