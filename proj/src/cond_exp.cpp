#include "bsvi/cond_exp.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <sstream>

#include "bsvi/errors.hpp"

namespace bsvi {

namespace {

constexpr double kRankThreshold = 1e-10;

}  // namespace

std::vector<std::vector<int>> monomial_exponents(std::size_t dim, int degree) {
    std::vector<std::vector<int>> out;
    std::vector<int> cur(dim, 0);
    for (int total = 0; total <= degree; ++total) {
        std::vector<std::vector<int>> level;
        // exact total degree
        std::function<void(std::size_t, int)> rec = [&](std::size_t pos, int rem) {
            if (pos + 1 == dim) {
                cur[pos] = rem;
                level.push_back(cur);
                return;
            }
            for (int e = rem; e >= 0; --e) {
                cur[pos] = e;
                rec(pos + 1, rem - e);
            }
        };
        rec(0, total);
        out.insert(out.end(), level.begin(), level.end());
    }
    return out;
}

ConditionalEstimator ConditionalEstimator::fit(StateSample states, std::span<const double> targets,
                                               std::size_t outputs, const EstimatorKind& kind, FitOptions options) {
    const std::size_t M = states.rows();
    if (M == 0 || outputs == 0) throw EstimatorError("empty sample", 0.0);
    if (targets.size() != M * outputs) throw EstimatorError("target matrix has wrong size", 0.0);
    for (double v : targets)
        if (!std::isfinite(v)) throw EstimatorError("non-finite regression target", 0.0);

    ConditionalEstimator est;
    est.kind_ = kind;
    est.outputs_ = outputs;
    est.state_dim_ = states.dim;
    est.clip_ = options.clip;
    est.lo_.assign(outputs, std::numeric_limits<double>::infinity());
    est.hi_.assign(outputs, -std::numeric_limits<double>::infinity());
    for (std::size_t j = 0; j < M; ++j)
        for (std::size_t q = 0; q < outputs; ++q) {
            est.lo_[q] = std::min(est.lo_[q], targets[j * outputs + q]);
            est.hi_[q] = std::max(est.hi_[q], targets[j * outputs + q]);
        }

    if (auto* l = std::get_if<LsmcPoly>(&kind)) {
        est.fit_lsmc(states, targets, l->degree);
    } else if (auto* b = std::get_if<Binning>(&kind)) {
        est.fit_binning(states, targets, b->bins);
    } else {
        if (!options.enumerated)
            throw EstimatorError("tree_exact requires a fully enumerated Rademacher ensemble", 0.0);
        est.fit_tree(states, targets);
    }
    return est;
}

std::vector<double> ConditionalEstimator::features(std::span<const double> state) const {
    const std::size_t m = state_dim_;
    const int degree = degree_;
    // powers[r][p] = z_r^p
    std::vector<double> powers(m * (degree + 1));
    for (std::size_t r = 0; r < m; ++r) {
        const double z = scale_[r] > 0.0 ? (state[r] - center_[r]) / scale_[r] : 0.0;
        double p = 1.0;
        for (int k = 0; k <= degree; ++k) {
            powers[r * (degree + 1) + k] = p;
            p *= z;
        }
    }
    std::vector<double> out(exponents_.size());
    for (std::size_t b = 0; b < exponents_.size(); ++b) {
        double v = 1.0;
        for (std::size_t r = 0; r < m; ++r) v *= powers[r * (degree + 1) + exponents_[b][r]];
        out[b] = v;
    }
    return out;
}

void ConditionalEstimator::fit_lsmc(StateSample states, std::span<const double> targets, int degree) {
    const std::size_t M = states.rows(), m = states.dim, q = outputs_;
    degree_ = degree;
    exponents_ = monomial_exponents(m, degree);
    const std::size_t p = exponents_.size();
    if (M < p) {
        std::ostringstream os;
        os << "underdetermined regression: " << M << " samples for " << p << " basis functions";
        throw EstimatorError(os.str(), std::numeric_limits<double>::infinity());
    }

    center_.assign(m, 0.0);
    scale_.assign(m, 0.0);
    for (std::size_t r = 0; r < m; ++r) {
        double s = 0.0;
        for (std::size_t j = 0; j < M; ++j) s += states.row(j)[r];
        const double mean = s / static_cast<double>(M);
        double ss = 0.0;
        for (std::size_t j = 0; j < M; ++j) ss += (states.row(j)[r] - mean) * (states.row(j)[r] - mean);
        const double sd = std::sqrt(ss / static_cast<double>(M));
        center_[r] = mean;
        // A coordinate that does not vary carries no information; its features vanish.
        scale_[r] = sd > 1e-12 * (1.0 + std::abs(mean)) ? sd : 0.0;
    }

    Eigen::MatrixXd design(M, p);
    for (std::size_t j = 0; j < M; ++j) {
        const auto f = features(states.row(j));
        for (std::size_t b = 0; b < p; ++b) design(j, b) = f[b];
    }
    Eigen::MatrixXd rhs(M, q);
    for (std::size_t j = 0; j < M; ++j)
        for (std::size_t k = 0; k < q; ++k) rhs(j, k) = targets[j * q + k];

    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
    qr.setThreshold(kRankThreshold);
    rank_ = static_cast<std::size_t>(qr.rank());
    const auto& R = qr.matrixR();
    condition_ = rank_ > 0 ? std::abs(R(0, 0)) / std::abs(R(rank_ - 1, rank_ - 1)) : std::numeric_limits<double>::infinity();
    if (rank_ == 0) throw EstimatorError("singular regression matrix", condition_);
    const Eigen::MatrixXd beta = qr.solve(rhs);
    coef_.resize(p * q);
    for (std::size_t b = 0; b < p; ++b)
        for (std::size_t k = 0; k < q; ++k) coef_[b * q + k] = beta(b, k);
}

void ConditionalEstimator::fit_binning(StateSample states, std::span<const double> targets, std::size_t bins) {
    const std::size_t M = states.rows(), q = outputs_;
    std::vector<double> first(M);
    for (std::size_t j = 0; j < M; ++j) first[j] = states.row(j)[0];
    std::vector<double> sorted = first;
    std::sort(sorted.begin(), sorted.end());
    edges_.clear();
    for (std::size_t b = 1; b < bins; ++b) edges_.push_back(sorted[b * M / bins]);

    const std::size_t nb = edges_.size() + 1;
    group_means_.assign(nb * q, 0.0);
    std::vector<std::size_t> counts(nb, 0);
    for (std::size_t j = 0; j < M; ++j) {
        const std::size_t g = static_cast<std::size_t>(std::upper_bound(edges_.begin(), edges_.end(), first[j]) -
                                                       edges_.begin());
        ++counts[g];
        for (std::size_t k = 0; k < q; ++k) group_means_[g * q + k] += targets[j * q + k];
    }
    rank_ = 0;
    for (std::size_t g = 0; g < nb; ++g)
        if (counts[g] > 0) {
            ++rank_;
            for (std::size_t k = 0; k < q; ++k) group_means_[g * q + k] /= static_cast<double>(counts[g]);
        }
    // Bins left empty by ties borrow the nearest populated neighbour.
    for (std::size_t g = 0; g < nb; ++g) {
        if (counts[g] > 0) continue;
        std::size_t src = nb;
        for (std::size_t off = 1; off < nb && src == nb; ++off) {
            if (g + off < nb && counts[g + off] > 0) src = g + off;
            else if (g >= off && counts[g - off] > 0) src = g - off;
        }
        for (std::size_t k = 0; k < q; ++k) group_means_[g * q + k] = group_means_[src * q + k];
    }
}

void ConditionalEstimator::fit_tree(StateSample states, std::span<const double> targets) {
    const std::size_t M = states.rows(), q = outputs_;
    std::vector<std::size_t> counts;
    std::vector<std::size_t> group(M);
    for (std::size_t j = 0; j < M; ++j) {
        const auto row = states.row(j);
        auto [it, inserted] = tree_groups_.try_emplace(std::vector<double>(row.begin(), row.end()), counts.size());
        if (inserted) counts.push_back(0);
        group[j] = it->second;
        ++counts[it->second];
    }
    // Enumerated paths sharing a sign prefix are contiguous, aligned blocks. Sum each
    // block pairwise (the +/- halves then cancel exactly), then add block sums per state.
    std::size_t block = (M & (M - 1)) == 0 ? M : 1;
    auto constant_on_blocks = [&](std::size_t b) {
        for (std::size_t j = 0; j < M; ++j)
            if (group[j] != group[j - j % b]) return false;
        return true;
    };
    while (block > 1 && !constant_on_blocks(block)) block /= 2;
    group_means_.assign(counts.size() * q, 0.0);
    std::vector<double> buf(block * q);
    for (std::size_t start = 0; start < M; start += block) {
        std::copy(targets.begin() + start * q, targets.begin() + (start + block) * q, buf.begin());
        for (std::size_t len = block; len > 1; len /= 2)
            for (std::size_t r = 0; r < len / 2; ++r)
                for (std::size_t k = 0; k < q; ++k) buf[r * q + k] += buf[(r + len / 2) * q + k];
        for (std::size_t k = 0; k < q; ++k) group_means_[group[start] * q + k] += buf[k];
    }
    for (std::size_t g = 0; g < counts.size(); ++g)
        for (std::size_t k = 0; k < q; ++k) group_means_[g * q + k] /= static_cast<double>(counts[g]);
    rank_ = counts.size();
}

std::size_t ConditionalEstimator::group_of(std::span<const double> state) const {
    if (std::holds_alternative<Binning>(kind_))
        return static_cast<std::size_t>(std::upper_bound(edges_.begin(), edges_.end(), state[0]) - edges_.begin());
    const std::vector<double> key(state.begin(), state.end());
    if (auto it = tree_groups_.find(key); it != tree_groups_.end()) return it->second;
    // Off-tree query: nearest recorded state.
    std::size_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (const auto& [s, g] : tree_groups_) {
        double dd = 0.0;
        for (std::size_t r = 0; r < s.size(); ++r) dd += (s[r] - key[r]) * (s[r] - key[r]);
        if (dd < best_d) {
            best_d = dd;
            best = g;
        }
    }
    return best;
}

void ConditionalEstimator::evaluate(std::span<const double> state, std::span<double> out) const {
    const std::size_t q = outputs_;
    if (std::holds_alternative<LsmcPoly>(kind_)) {
        const auto f = features(state);
        for (std::size_t k = 0; k < q; ++k) {
            double v = 0.0;
            for (std::size_t b = 0; b < f.size(); ++b) v += coef_[b * q + k] * f[b];
            out[k] = v;
        }
    } else {
        const std::size_t g = group_of(state);
        for (std::size_t k = 0; k < q; ++k) out[k] = group_means_[g * q + k];
    }
    if (clip_)
        for (std::size_t k = 0; k < q; ++k) out[k] = std::clamp(out[k], lo_[k], hi_[k]);
}

double ConditionalEstimator::evaluate(std::span<const double> state) const {
    std::vector<double> out(outputs_);
    evaluate(state, out);
    return out[0];
}

ConditionalEstimator fit_conditional(std::span<const double> values, StateSample states, const EstimatorKind& kind,
                                     FitOptions options) {
    return ConditionalEstimator::fit(states, values, 1, kind, options);
}

double evaluate_conditional(const ConditionalEstimator& est, std::span<const double> state) {
    return est.evaluate(state);
}

void ZEstimator::evaluate(std::span<const double> state, std::span<double> out) const {
    inner_.evaluate(state, out);
    for (double& v : out) v /= h_;
}

ZEstimator fit_z_regression(std::span<const double> next_values, std::span<const double> increments,
                            std::size_t brownian_dim, StateSample states, const EstimatorKind& kind, double h,
                            FitOptions options) {
    const std::size_t M = next_values.size(), d = brownian_dim;
    if (increments.size() != M * d) throw EstimatorError("increment matrix has wrong size", 0.0);
    std::vector<double> targets(M * d);
    for (std::size_t j = 0; j < M; ++j)
        for (std::size_t k = 0; k < d; ++k) targets[j * d + k] = next_values[j] * increments[j * d + k];
    return ZEstimator(ConditionalEstimator::fit(states, targets, d, kind, options), h);
}

}  // namespace bsvi
