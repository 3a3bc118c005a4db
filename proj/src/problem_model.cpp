#include "bsvi/problem_model.hpp"

#include <algorithm>
#include <boost/random/sobol.hpp>
#include <cmath>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

namespace bsvi {

void ProblemSpec::check() const {
    if (!drift || !diffusion || !generator || !terminal)
        throw std::invalid_argument("problem '" + name + "': drift, diffusion, generator and terminal are required");
    if (state_dim == 0 || brownian_dim == 0) throw std::invalid_argument("problem dimensions must be >= 1");
    if (initial_x.size() != state_dim) throw std::invalid_argument("initial_x has wrong dimension");
    if (!(horizon > 0.0)) throw std::invalid_argument("horizon must be > 0");
    if (!(initial_time < horizon) || !(initial_time >= 0.0))
        throw std::invalid_argument("initial time must lie in [0, T)");
    if (!(lipschitz >= 0.0)) throw std::invalid_argument("declared Lipschitz constant must be >= 0");
    if (domain) {
        validate_set(*domain, state_dim);
        if (level(initial_x) > 0.0) throw std::invalid_argument("initial point lies outside the domain");
    }
}

double ProblemSpec::level(std::span<const double> x) const {
    return domain ? level_function(*domain, x) : -kInf;
}

Partition::Partition(double horizon, std::size_t steps, double initial_time)
    : horizon_(horizon), steps_(steps), initial_time_(initial_time) {
    if (steps == 0) throw std::invalid_argument("partition needs n >= 1");
    if (!(horizon > initial_time) || !std::isfinite(horizon))
        throw std::invalid_argument("partition needs T > t0");
}

double Partition::node(std::size_t i) const {
    if (i == steps_) return horizon_;
    if (i > steps_) throw std::out_of_range("partition node index");
    return initial_time_ + (horizon_ - initial_time_) * static_cast<double>(i) / static_cast<double>(steps_);
}

std::vector<double> Partition::nodes() const {
    std::vector<double> out(steps_ + 1);
    for (std::size_t i = 0; i <= steps_; ++i) out[i] = node(i);
    return out;
}

Partition make_partition(double horizon, std::size_t steps) {
    if (!(horizon > 0.0)) throw std::invalid_argument("partition needs T > 0");
    return Partition(horizon, steps, 0.0);
}

std::string estimator_name(const EstimatorKind& kind) {
    if (auto* l = std::get_if<LsmcPoly>(&kind)) return "lsmc(" + std::to_string(l->degree) + ")";
    if (auto* b = std::get_if<Binning>(&kind)) return "binning(" + std::to_string(b->bins) + ")";
    return "tree_exact";
}

std::string to_string(SchemeVariant v) { return v == SchemeVariant::implicit ? "implicit" : "explicit"; }
std::string to_string(IncrementLaw law) { return law == IncrementLaw::gaussian ? "gaussian" : "rademacher"; }

void SchemeParams::check() const {
    if (!(a_exponent > 0.0 && a_exponent < 0.5)) throw std::invalid_argument("a must lie in (0, 1/2)");
    if (num_paths == 0) throw std::invalid_argument("number of paths must be >= 1");
    if (!(fixed_point_tol > 0.0)) throw std::invalid_argument("fixed-point tolerance must be > 0");
    if (fixed_point_max_iter <= 0) throw std::invalid_argument("fixed-point iteration budget must be > 0");
    if (auto* l = std::get_if<LsmcPoly>(&estimator); l && l->degree < 0)
        throw std::invalid_argument("regression degree must be >= 0");
    if (auto* b = std::get_if<Binning>(&estimator); b && b->bins == 0)
        throw std::invalid_argument("binning needs >= 1 bin");
    if (std::holds_alternative<TreeExact>(estimator) && law != IncrementLaw::rademacher)
        throw std::invalid_argument("tree_exact requires the rademacher increment law");
    if (workers == 0) throw std::invalid_argument("workers must be >= 1");
}

double SchemeParams::epsilon(double h) const { return std::pow(h, a_exponent); }

bool ValidationReport::has(Violation::Kind kind) const {
    return std::any_of(violations.begin(), violations.end(), [&](const Violation& v) { return v.kind == kind; });
}

bool ValidationReport::has(Violation::Kind kind, const std::string& coefficient) const {
    return std::any_of(violations.begin(), violations.end(),
                       [&](const Violation& v) { return v.kind == kind && v.coefficient == coefficient; });
}

namespace {

constexpr std::size_t kProbesPerDim = 64;
constexpr double kProbeHalfWidth = 2.0;
constexpr double kLipschitzSlack = 1.5;

double norm_diff(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) s += (a[k] - b[k]) * (a[k] - b[k]);
    return std::sqrt(s);
}

bool all_finite(std::span<const double> v) {
    return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

struct Probe {
    double t;
    std::vector<double> x;
    double y;
    std::vector<double> z;
};

std::vector<Probe> probe_points(const ProblemSpec& spec) {
    const std::size_t m = spec.state_dim, d = spec.brownian_dim;
    const std::size_t dims = 1 + m + 1 + d;
    boost::random::sobol gen(dims);
    const double scale = 1.0 / 4294967296.0;
    std::vector<Probe> out(kProbesPerDim * dims);
    const double t_lo = spec.initial_time, t_hi = spec.horizon;
    for (auto& p : out) {
        auto u = [&] { return (static_cast<double>(gen()) + 0.5) * scale; };
        p.t = t_lo + (t_hi - t_lo) * u();
        p.x.resize(m);
        for (std::size_t k = 0; k < m; ++k) p.x[k] = spec.initial_x[k] + kProbeHalfWidth * (2.0 * u() - 1.0);
        p.y = kProbeHalfWidth * (2.0 * u() - 1.0);
        p.z.resize(d);
        for (auto& zk : p.z) zk = kProbeHalfWidth * (2.0 * u() - 1.0);
    }
    return out;
}

class Checker {
public:
    Checker(const ProblemSpec& spec, ValidationReport& report) : spec_(spec), report_(report) {}

    void non_finite(const std::string& coeff, const Probe& p) {
        if (!flagged_.insert(coeff).second) return;
        std::ostringstream os;
        os << coeff << " is not finite at t=" << p.t;
        report_.violations.push_back({Violation::Kind::non_finite, coeff, os.str(), 0.0});
    }

    void ratio(const std::string& coeff, double num, double den) {
        if (!(den > 0.0) || !std::isfinite(num)) return;
        double& worst = worst_[coeff];
        worst = std::max(worst, num / den);
    }

    void finish() {
        for (const auto& [coeff, r] : worst_) {
            if (r <= kLipschitzSlack * spec_.lipschitz + 1e-12) continue;
            std::ostringstream os;
            os << coeff << ": empirical Lipschitz ratio " << r << " exceeds 1.5 x declared K=" << spec_.lipschitz;
            report_.violations.push_back({Violation::Kind::lipschitz, coeff, os.str(), r});
        }
    }

private:
    const ProblemSpec& spec_;
    ValidationReport& report_;
    std::set<std::string> flagged_;
    std::map<std::string, double> worst_;
};

}  // namespace

ValidationReport validate_spec(const ProblemSpec& spec, const SchemeParams& params, const Partition& partition) {
    ValidationReport report;
    const std::size_t m = spec.state_dim, d = spec.brownian_dim;
    const auto probes = probe_points(spec);
    Checker check(spec, report);

    std::vector<double> b0(m), b1(m), s0(m * d), s1(m * d);
    for (std::size_t k = 0; k < probes.size(); ++k) {
        const Probe& p = probes[k];
        const Probe& q = probes[(k + 1) % probes.size()];
        // Pairs share the time argument: the Lipschitz condition is in the state variables.
        spec.drift(p.t, p.x, b0);
        spec.drift(p.t, q.x, b1);
        spec.diffusion(p.t, p.x, s0);
        spec.diffusion(p.t, q.x, s1);
        const double dx = norm_diff(p.x, q.x);
        if (!all_finite(b0)) check.non_finite("b", p);
        if (!all_finite(s0)) check.non_finite("sigma", p);
        check.ratio("b", norm_diff(b0, b1), dx);
        check.ratio("sigma", norm_diff(s0, s1), dx);

        const double f0 = spec.generator(p.t, p.x, p.y, p.z);
        const double f1 = spec.generator(p.t, q.x, q.y, q.z);
        if (!std::isfinite(f0)) check.non_finite("F", p);
        double dxyz = dx * dx + (p.y - q.y) * (p.y - q.y);
        for (std::size_t j = 0; j < d; ++j) dxyz += (p.z[j] - q.z[j]) * (p.z[j] - q.z[j]);
        check.ratio("F", std::abs(f0 - f1), std::sqrt(dxyz));

        const double g0 = spec.terminal(p.x), g1 = spec.terminal(q.x);
        if (!std::isfinite(g0)) check.non_finite("g", p);
        check.ratio("g", std::abs(g0 - g1), dx);

        if (spec.boundary_generator) {
            const double G0 = spec.boundary_generator(p.t, p.x, p.y);
            const double G1 = spec.boundary_generator(p.t, q.x, q.y);
            if (!std::isfinite(G0)) check.non_finite("G", p);
            check.ratio("G", std::abs(G0 - G1), std::sqrt(dx * dx + (p.y - q.y) * (p.y - q.y)));
        }
    }
    check.finish();

    const double h = partition.step_size();
    const double contraction = h * (spec.lipschitz + std::pow(h, -params.a_exponent));
    if (contraction >= 1.0) {
        std::ostringstream os;
        os << "h (K + h^-a) = " << contraction << " >= 1: implicit fixed point may not contract";
        report.violations.push_back({Violation::Kind::contraction, "scheme", os.str(), contraction});
    }
    return report;
}

}  // namespace bsvi
