#include "bsvi/study.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <memory>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "bsvi/backward_solver.hpp"
#include "bsvi/errors.hpp"
#include "bsvi/forward_sim.hpp"
#include "bsvi/registry.hpp"
#include "bsvi/rng_paths.hpp"
#include "bsvi/text_util.hpp"

namespace bsvi {

double ConvergenceReport::headline(const ReportRow& row) const {
    return quantity == Quantity::forward ? row.error_X_strong : row.error_Y_sup;
}

double fit_rate(std::span<const std::pair<double, double>> pairs) {
    if (pairs.size() < 2) throw std::invalid_argument("fit_rate needs at least 2 points");
    double sx = 0.0, sy = 0.0;
    for (const auto& [h, e] : pairs) {
        if (!(h > 0.0) || !(e > 0.0) || !std::isfinite(h) || !std::isfinite(e))
            throw std::invalid_argument("fit_rate: step sizes and errors must be positive and finite");
        sx += std::log(h);
        sy += std::log(e);
    }
    const double n = static_cast<double>(pairs.size());
    const double mx = sx / n, my = sy / n;
    double sxx = 0.0, sxy = 0.0;
    for (const auto& [h, e] : pairs) {
        sxx += (std::log(h) - mx) * (std::log(h) - mx);
        sxy += (std::log(h) - mx) * (std::log(e) - my);
    }
    if (sxx == 0.0) throw std::invalid_argument("fit_rate: step sizes must not all be equal");
    return sxy / sxx;
}

namespace {

double rate_or_nan(const std::vector<ReportRow>& rows, double ReportRow::*column) {
    std::vector<std::pair<double, double>> pairs;
    for (const auto& r : rows) {
        if (!(r.*column > 0.0)) return ConvergenceReport::kNaN;
        pairs.emplace_back(r.h, r.*column);
    }
    if (pairs.size() < 2) return ConvergenceReport::kNaN;
    return fit_rate(pairs);
}

}  // namespace

void annotate_report(ConvergenceReport& report) {
    if (report.quantity == Quantity::forward) {
        report.rate_X = rate_or_nan(report.rows, &ReportRow::error_X_strong);
    } else {
        report.rate_Y = rate_or_nan(report.rows, &ReportRow::error_Y_sup);
        report.rate_Z = rate_or_nan(report.rows, &ReportRow::error_Z_l2);
    }
    report.unreliable = false;
    report.at_noise_floor = false;
    if (report.replicates < 2 || report.rows.empty()) return;
    report.at_noise_floor = true;
    for (const auto& r : report.rows) {
        const double e = report.headline(r);
        if (r.spread > 0.3 * e) report.unreliable = true;
        if (!(e < 5.0 * r.spread)) report.at_noise_floor = false;
    }
}

namespace {

using Clock = std::chrono::steady_clock;

struct RowErrors {
    double y_sup = 0.0, z_l2 = 0.0, y_l2 = 0.0, x_strong = 0.0;
};

// Keeps only what the coarse comparisons need from a fine backward run: Y at
// nodes shared by every coarse grid, and per coarse step the moments
// S1 = sum h_f Z_f and S2 = sum h_f Z_f^2 of the fine Z over the block.
class ReferenceSink final : public LayerSink {
public:
    ReferenceSink(std::size_t paths, std::size_t n_ref, std::size_t dim, double h_fine,
                  const std::vector<std::size_t>& n_list)
        : paths_(paths), n_ref_(n_ref), dim_(dim), h_fine_(h_fine), n_list_(n_list) {
        stride_ = 0;
        for (std::size_t n : n_list) stride_ = std::gcd(stride_, n_ref / n);
        y_.assign(paths * (n_ref / stride_ + 1), 0.0);
        for (std::size_t n : n_list) {
            s1_.emplace_back(paths * n * dim, 0.0);
            s2_.emplace_back(paths * n * dim, 0.0);
        }
    }

    void layer(std::size_t node, std::span<const double> y, std::span<const double> z,
               std::span<const double>) override {
        const std::size_t cols = n_ref_ / stride_ + 1;
        if (node % stride_ == 0)
            for (std::size_t j = 0; j < paths_; ++j) y_[j * cols + node / stride_] = y[j];
        if (node == n_ref_) return;
        for (std::size_t q = 0; q < n_list_.size(); ++q) {
            const std::size_t n = n_list_[q], block = n_ref_ / n, ci = node / block;
            for (std::size_t j = 0; j < paths_; ++j)
                for (std::size_t k = 0; k < dim_; ++k) {
                    const double v = z[j * dim_ + k];
                    s1_[q][(j * n + ci) * dim_ + k] += h_fine_ * v;
                    s2_[q][(j * n + ci) * dim_ + k] += h_fine_ * v * v;
                }
        }
    }

    double y(std::size_t path, std::size_t fine_node) const {
        return y_[path * (n_ref_ / stride_ + 1) + fine_node / stride_];
    }
    double s1(std::size_t q, std::size_t path, std::size_t step, std::size_t k) const {
        return s1_[q][(path * n_list_[q] + step) * dim_ + k];
    }
    double s2(std::size_t q, std::size_t path, std::size_t step, std::size_t k) const {
        return s2_[q][(path * n_list_[q] + step) * dim_ + k];
    }

private:
    std::size_t paths_, n_ref_, dim_;
    double h_fine_;
    std::vector<std::size_t> n_list_;
    std::size_t stride_;
    std::vector<double> y_;
    std::vector<std::vector<double>> s1_, s2_;
};

BackwardSolution solve_backward(const ProblemSpec& spec, const SchemeParams& params, const ForwardEnsemble& fwd) {
    return spec.reflected() ? solve_generalized(spec, params, fwd) : solve_bsvi(spec, params, fwd);
}

void solve_backward(const ProblemSpec& spec, const SchemeParams& params, const ForwardEnsemble& fwd,
                    LayerSink& sink) {
    if (spec.reflected())
        solve_generalized(spec, params, fwd, sink);
    else
        solve_bsvi(spec, params, fwd, sink);
}

// Block sums taken last-to-first, so the check does not repeat coarsen's own
// summation order.
double coupling_gap(const IncrementEnsemble& fine, const IncrementEnsemble& coarse) {
    const std::size_t block = fine.steps() / coarse.steps(), d = fine.dim();
    double gap = 0.0;
    for (std::size_t j = 0; j < coarse.paths(); ++j)
        for (std::size_t i = 0; i < coarse.steps(); ++i)
            for (std::size_t k = 0; k < d; ++k) {
                double s = 0.0;
                for (std::size_t l = block; l-- > 0;) s += fine.at(j, i * block + l)[k];
                gap = std::max(gap, std::abs(s - coarse.at(j, i)[k]));
            }
    return gap;
}

RowErrors forward_errors_analytic(const ForwardEnsemble& fwd, const AnalyticSolution& ref) {
    const std::size_t M = fwd.paths(), n = fwd.steps(), m = fwd.state_dim(), d = fwd.increments().dim();
    std::vector<double> worst(n + 1, 0.0);
    std::vector<double> w(d), x(m);
    for (std::size_t j = 0; j < M; ++j) {
        std::fill(w.begin(), w.end(), 0.0);
        for (std::size_t i = 0; i <= n; ++i) {
            if (i > 0)
                for (std::size_t k = 0; k < d; ++k) w[k] += fwd.increments().at(j, i - 1)[k];
            ref.forward(fwd.partition().node(i), w, x);
            const auto xs = fwd.state(j, i);
            for (std::size_t r = 0; r < m; ++r) worst[i] += (xs[r] - x[r]) * (xs[r] - x[r]);
        }
    }
    RowErrors e;
    for (double v : worst) e.x_strong = std::max(e.x_strong, v / static_cast<double>(M));
    e.x_strong = std::sqrt(e.x_strong);
    return e;
}

RowErrors forward_errors_self(const ForwardEnsemble& fwd, const ForwardEnsemble& fine) {
    const std::size_t M = fwd.paths(), n = fwd.steps(), m = fwd.state_dim(), block = fine.steps() / n;
    double worst = 0.0;
    for (std::size_t i = 0; i <= n; ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < M; ++j) {
            const auto a = fwd.state(j, i), b = fine.state(j, i * block);
            for (std::size_t r = 0; r < m; ++r) s += (a[r] - b[r]) * (a[r] - b[r]);
        }
        worst = std::max(worst, s / static_cast<double>(M));
    }
    RowErrors e;
    e.x_strong = std::sqrt(worst);
    return e;
}

RowErrors backward_errors_analytic(const ForwardEnsemble& fwd, const BackwardSolution& sol,
                                   const AnalyticSolution& ref) {
    const std::size_t M = fwd.paths(), n = fwd.steps(), d = sol.brownian_dim();
    const double h = fwd.partition().step_size();
    std::vector<double> zr(d);
    RowErrors e;
    for (std::size_t i = 0; i <= n; ++i) {
        const double t = fwd.partition().node(i);
        double sy = 0.0, sz = 0.0;
        for (std::size_t j = 0; j < M; ++j) {
            const auto x = fwd.state(j, i);
            const double dy = sol.y(j, i) - ref.y(t, x);
            sy += dy * dy;
            if (i < n && ref.z) {
                ref.z(t, x, zr);
                for (std::size_t k = 0; k < d; ++k) sz += (sol.z(j, i)[k] - zr[k]) * (sol.z(j, i)[k] - zr[k]);
            }
        }
        e.y_sup = std::max(e.y_sup, sy / static_cast<double>(M));
        if (i < n) {
            e.y_l2 += h * sy / static_cast<double>(M);
            e.z_l2 += h * sz / static_cast<double>(M);
        }
    }
    return e;
}

RowErrors backward_errors_self(const BackwardSolution& sol, const ReferenceSink& ref, std::size_t q,
                               std::size_t n_ref) {
    const std::size_t M = sol.paths(), n = sol.steps(), d = sol.brownian_dim(), block = n_ref / n;
    const double h = sol.partition().step_size();
    RowErrors e;
    for (std::size_t i = 0; i <= n; ++i) {
        double sy = 0.0, sz = 0.0;
        for (std::size_t j = 0; j < M; ++j) {
            const double dy = sol.y(j, i) - ref.y(j, i * block);
            sy += dy * dy;
            if (i < n)
                for (std::size_t k = 0; k < d; ++k) {
                    const double zc = sol.z(j, i)[k];
                    sz += h * zc * zc - 2.0 * zc * ref.s1(q, j, i, k) + ref.s2(q, j, i, k);
                }
        }
        e.y_sup = std::max(e.y_sup, sy / static_cast<double>(M));
        if (i < n) {
            e.y_l2 += h * sy / static_cast<double>(M);
            e.z_l2 += sz / static_cast<double>(M);
        }
    }
    e.z_l2 = std::max(e.z_l2, 0.0);
    return e;
}

struct Prepared {
    ProblemInstance problem;
    std::vector<std::size_t> n_list;
    std::size_t n_base = 0;  ///< grid every coarse run is coupled to
    bool tree = false;
};

Prepared prepare(const StudyConfig& config) {
    Prepared p{make_problem(config.problem, config.problem_params), config.n_list, 0, false};
    std::sort(p.n_list.begin(), p.n_list.end());
    p.n_list.erase(std::unique(p.n_list.begin(), p.n_list.end()), p.n_list.end());
    if (p.n_list.empty() || p.n_list.front() == 0) throw ConfigError("n list must hold positive values");
    p.tree = std::holds_alternative<TreeExact>(config.scheme.estimator);
    try {
        config.scheme.check();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }

    const ReferenceMode& ref = config.reference;
    if (ref.kind == ReferenceMode::Kind::analytic) {
        if (ref.name != config.problem) throw ConfigError("unknown analytic reference '" + ref.name + "' for problem '" + config.problem + "'");
        const auto& a = p.problem.analytic;
        const bool ok = a && (config.quantity == Quantity::forward ? bool(a->forward) : bool(a->y));
        if (!ok) throw ConfigError("problem '" + config.problem + "' has no closed form for this study");
        std::size_t l = 1;
        for (std::size_t n : p.n_list) {
            l = std::lcm(l, n);
            if (l > (std::size_t{1} << 20)) throw ConfigError("n list has no common refinement below 2^20 steps");
        }
        p.n_base = l;
    } else {
        if (p.tree) throw ConfigError("tree_exact studies need an analytic reference");
        for (std::size_t n : p.n_list)
            if (ref.n_ref % n != 0)
                throw ConfigError("n_ref " + std::to_string(ref.n_ref) + " is not a multiple of n = " + std::to_string(n));
        p.n_base = ref.n_ref;
    }
    if (p.tree && p.n_list.back() > config.scheme.tree_cap)
        throw ConfigError("tree_exact study: n exceeds the tree cap");
    if (p.problem.spec.reflected() && config.quantity == Quantity::backward && !p.problem.spec.phi.is_zero())
        throw ConfigError("reflected problems support phi = zero only");
    return p;
}

std::vector<ReportRow> run_replicate(const StudyConfig& config, const Prepared& prep, std::uint64_t seed,
                                     double& coupling) {
    const ProblemSpec& spec = prep.problem.spec;
    SchemeParams params = config.scheme;
    params.seed = seed;
    const unsigned workers = params.workers;
    const bool self = config.reference.kind == ReferenceMode::Kind::self;
    const bool forward_only = config.quantity == Quantity::forward;

    std::vector<ReportRow> rows;
    std::shared_ptr<const IncrementEnsemble> fine;
    std::unique_ptr<ForwardEnsemble> fine_fwd;
    std::unique_ptr<ReferenceSink> ref_sink;
    if (!prep.tree) {
        const Partition base(spec.horizon, prep.n_base, spec.initial_time);
        fine = std::make_shared<const IncrementEnsemble>(
            sample_increments(base, params.num_paths, spec.brownian_dim, params.law, seed, workers));
        if (self) {
            fine_fwd = std::make_unique<ForwardEnsemble>(simulate_forward(spec, fine, workers));
            if (!forward_only) {
                ref_sink = std::make_unique<ReferenceSink>(params.num_paths, prep.n_base, spec.brownian_dim,
                                                           base.step_size(), prep.n_list);
                solve_backward(spec, params, *fine_fwd, *ref_sink);
                fine_fwd.reset();
            }
        }
    }

    for (std::size_t q = 0; q < prep.n_list.size(); ++q) {
        const std::size_t n = prep.n_list[q];
        const auto start = Clock::now();
        const Partition part(spec.horizon, n, spec.initial_time);
        std::shared_ptr<const IncrementEnsemble> inc;
        if (prep.tree) {
            inc = std::make_shared<const IncrementEnsemble>(
                enumerate_rademacher_tree(part, spec.brownian_dim, params.tree_cap));
        } else {
            inc = std::make_shared<const IncrementEnsemble>(coarsen(*fine, prep.n_base / n));
            const double gap = coupling_gap(*fine, *inc);
            coupling = std::max(coupling, gap);
            if (gap > 1e-14) throw Error("coarse increments are not block sums of the fine increments");
        }
        const ForwardEnsemble fwd = simulate_forward(spec, inc, workers);
        RowErrors e;
        if (forward_only) {
            e = self ? forward_errors_self(fwd, *fine_fwd) : forward_errors_analytic(fwd, *prep.problem.analytic);
        } else {
            const BackwardSolution sol = solve_backward(spec, params, fwd);
            e = self ? backward_errors_self(sol, *ref_sink, q, prep.n_base)
                     : backward_errors_analytic(fwd, sol, *prep.problem.analytic);
        }
        ReportRow row;
        row.n = n;
        row.h = part.step_size();
        row.eps = params.epsilon(row.h);
        row.error_Y_sup = e.y_sup;
        row.error_Z_l2 = e.z_l2;
        row.error_Y_l2 = e.y_l2;
        row.error_X_strong = e.x_strong;
        row.wall_time = std::chrono::duration<double>(Clock::now() - start).count();
        rows.push_back(row);
    }
    return rows;
}

}  // namespace

ConvergenceReport run_study(const StudyConfig& config) {
    const Prepared prep = prepare(config);
    ConvergenceReport report;
    report.problem = config.problem;
    report.reference = config.reference.describe();
    report.quantity = config.quantity;
    report.replicates = config.replicates;

    std::vector<std::vector<ReportRow>> reps;
    for (std::size_t r = 0; r < config.replicates; ++r)
        reps.push_back(run_replicate(config, prep, config.scheme.seed + r, report.coupling_gap));

    const double R = static_cast<double>(config.replicates);
    for (std::size_t q = 0; q < prep.n_list.size(); ++q) {
        ReportRow row = reps[0][q];
        row.error_Y_sup = row.error_Z_l2 = row.error_Y_l2 = row.error_X_strong = row.wall_time = 0.0;
        double lo = kInf, hi = -kInf;
        for (const auto& rep : reps) {
            const ReportRow& x = rep[q];
            row.error_Y_sup += x.error_Y_sup / R;
            row.error_Z_l2 += x.error_Z_l2 / R;
            row.error_Y_l2 += x.error_Y_l2 / R;
            row.error_X_strong += x.error_X_strong / R;
            row.wall_time += x.wall_time;
            lo = std::min(lo, report.headline(x));
            hi = std::max(hi, report.headline(x));
        }
        row.spread = hi - lo;
        report.rows.push_back(row);
    }
    annotate_report(report);
    return report;
}

std::string summarize(const ConvergenceReport& report) {
    std::ostringstream os;
    os << "problem " << report.problem << ", reference " << report.reference << ", " << report.rows.size()
       << " grids, " << report.replicates << " replicate(s)\n";
    auto rate = [](double v) { return std::isnan(v) ? std::string("n/a") : format_short(v); };
    if (report.quantity == Quantity::forward)
        os << "rate X: " << rate(report.rate_X) << '\n';
    else
        os << "rate Y: " << rate(report.rate_Y) << "  rate Z: " << rate(report.rate_Z) << '\n';
    if (report.unreliable) os << "flag: unreliable (replicate spread above 30% of the error)\n";
    if (report.at_noise_floor) os << "flag: at noise floor (errors below 5x the replicate spread)\n";
    return os.str();
}

}  // namespace bsvi
