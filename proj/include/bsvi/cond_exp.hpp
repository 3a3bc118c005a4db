#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <vector>

#include "bsvi/problem_model.hpp"

namespace bsvi {

/// Row-major M x dim view over sample states.
struct StateSample {
    std::span<const double> data;
    std::size_t dim = 1;

    std::size_t rows() const { return dim == 0 ? 0 : data.size() / dim; }
    std::span<const double> row(std::size_t j) const { return data.subspan(j * dim, dim); }
};

struct FitOptions {
    /// Samples are the complete equal-weight Rademacher tree (required by tree_exact).
    bool enumerated = false;
    /// Truncate outputs to the per-output sample range of the targets.
    bool clip = false;
};

/// Estimator of E(target | state) fitted on a sample; supports several target
/// columns sharing one basis or grouping. Immutable after fitting.
///
/// - lsmc: least squares on monomials of total degree <= p in the standardized
///   state, solved by column-pivoted Householder QR (rank revealing; constant
///   state coordinates drop out, so a degenerate sample yields the sample mean).
/// - binning: equal-count bins on the first state coordinate, bin means.
/// - tree_exact: mean over all paths sharing the exact state; on a complete
///   Rademacher tree this is the exact conditional expectation.
class ConditionalEstimator {
public:
    /// targets is M x outputs, row-major. Throws EstimatorError when the
    /// regression is underdetermined, targets are non-finite, or tree_exact is
    /// requested on a sample that is not a full enumeration.
    static ConditionalEstimator fit(StateSample states, std::span<const double> targets, std::size_t outputs,
                                    const EstimatorKind& kind, FitOptions options = {});

    std::size_t outputs() const { return outputs_; }
    std::size_t state_dim() const { return state_dim_; }
    const EstimatorKind& kind() const { return kind_; }

    void evaluate(std::span<const double> state, std::span<double> out) const;
    /// First output.
    double evaluate(std::span<const double> state) const;

    /// Numerical rank of the regression matrix (lsmc); number of groups otherwise.
    std::size_t rank() const { return rank_; }
    /// |R_00| / |R_kk| over the retained pivots of the QR factorization (lsmc).
    double condition_estimate() const { return condition_; }
    /// Regression coefficients (lsmc), basis-major: coef[b * outputs + q].
    const std::vector<double>& coefficients() const { return coef_; }
    /// Standardized monomial features of a state (lsmc).
    std::vector<double> features(std::span<const double> state) const;

private:
    ConditionalEstimator() = default;

    void fit_lsmc(StateSample states, std::span<const double> targets, int degree);
    void fit_binning(StateSample states, std::span<const double> targets, std::size_t bins);
    void fit_tree(StateSample states, std::span<const double> targets);
    std::size_t group_of(std::span<const double> state) const;

    EstimatorKind kind_;
    std::size_t outputs_ = 1;
    std::size_t state_dim_ = 1;
    bool clip_ = false;
    std::vector<double> lo_, hi_;
    std::size_t rank_ = 0;
    double condition_ = 1.0;

    // lsmc
    std::vector<double> center_, scale_;
    int degree_ = 0;
    std::vector<std::vector<int>> exponents_;
    std::vector<double> coef_;

    // binning / tree: group means, group-major
    std::vector<double> group_means_;
    std::vector<double> edges_;
    std::map<std::vector<double>, std::size_t> tree_groups_;
};

ConditionalEstimator fit_conditional(std::span<const double> values, StateSample states, const EstimatorKind& kind,
                                     FitOptions options = {});
double evaluate_conditional(const ConditionalEstimator& est, std::span<const double> state);

/// Estimator of Z_i = E(V dW_i | X_i) / h, one output per Brownian component.
class ZEstimator {
public:
    ZEstimator(ConditionalEstimator inner, double h) : inner_(std::move(inner)), h_(h) {}
    void evaluate(std::span<const double> state, std::span<double> out) const;
    std::size_t dim() const { return inner_.outputs(); }

private:
    ConditionalEstimator inner_;
    double h_;
};

/// increments is M x d row-major (dW_i per path).
ZEstimator fit_z_regression(std::span<const double> next_values, std::span<const double> increments,
                            std::size_t brownian_dim, StateSample states, const EstimatorKind& kind, double h,
                            FitOptions options = {});

/// Exponent tuples of all monomials of total degree <= degree in dim variables,
/// graded order, constant first.
std::vector<std::vector<int>> monomial_exponents(std::size_t dim, int degree);

}  // namespace bsvi
