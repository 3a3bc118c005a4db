#include "bsvi/convex_ops.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>
#include <utility>

#include "bsvi/errors.hpp"
#include "bsvi/text_util.hpp"

namespace bsvi {

double ExtInterval::min_norm() const {
    if (lo <= 0.0 && hi >= 0.0) return 0.0;
    return lo > 0.0 ? lo : hi;
}

double ExtInterval::distance(double v) const {
    if (empty) return kInf;
    if (v < lo) return lo - v;
    if (v > hi) return v - hi;
    return 0.0;
}

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

void check_kind(const ConvexFunction::Kind& kind) {
    std::visit(overloaded{
                   [](const ConvexFunction::Zero&) {},
                   [](const ConvexFunction::Quadratic& q) {
                       if (!(q.c >= 0.0) || !std::isfinite(q.c))
                           throw std::invalid_argument("quadratic coefficient must be finite and >= 0");
                   },
                   [](const ConvexFunction::Abs& a) {
                       if (!(a.c >= 0.0) || !std::isfinite(a.c))
                           throw std::invalid_argument("abs coefficient must be finite and >= 0");
                   },
                   [](const ConvexFunction::IndicatorInterval& ind) {
                       if (!(ind.lo <= ind.hi) || ind.lo == kInf || ind.hi == -kInf)
                           throw std::invalid_argument("indicator interval must be nonempty");
                   },
                   [](const ConvexFunction::IndicatorPoint& p) {
                       if (!std::isfinite(p.p))
                           throw std::invalid_argument("indicator point must be finite");
                   },
                   [](const ConvexFunction::Custom& c) {
                       if (!c.value || !c.subdifferential)
                           throw std::invalid_argument("custom convex function needs value and subdifferential");
                       if (c.domain.empty || c.domain.lo > c.domain.hi)
                           throw std::invalid_argument("custom convex function needs a nonempty domain");
                   },
               },
               kind);
}

}  // namespace

ConvexFunction::ConvexFunction(Kind kind) : kind_(std::move(kind)) { check_kind(kind_); }

double ConvexFunction::value(double y) const {
    return std::visit(
        overloaded{
            [](const Zero&) { return 0.0; },
            [y](const Quadratic& q) { return 0.5 * q.c * y * y; },
            [y](const Abs& a) { return a.c * std::abs(y); },
            [y](const IndicatorInterval& ind) { return (y >= ind.lo && y <= ind.hi) ? 0.0 : kInf; },
            [y](const IndicatorPoint& p) { return y == p.p ? 0.0 : kInf; },
            [y](const Custom& c) { return c.value(y); },
        },
        kind_);
}

ExtInterval ConvexFunction::subdifferential(double y) const {
    return std::visit(
        overloaded{
            [](const Zero&) { return ExtInterval::point(0.0); },
            [y](const Quadratic& q) { return ExtInterval::point(q.c * y); },
            [y](const Abs& a) {
                if (y > 0.0) return ExtInterval::point(a.c);
                if (y < 0.0) return ExtInterval::point(-a.c);
                return ExtInterval{-a.c, a.c, false};
            },
            [y](const IndicatorInterval& ind) {
                if (y < ind.lo || y > ind.hi) return ExtInterval::none();
                const double lo = (y == ind.lo) ? -kInf : 0.0;
                const double hi = (y == ind.hi) ? kInf : 0.0;
                return ExtInterval{lo, hi, false};
            },
            [y](const IndicatorPoint& p) { return y == p.p ? ExtInterval::whole() : ExtInterval::none(); },
            [y](const Custom& c) { return c.subdifferential(y); },
        },
        kind_);
}

ExtInterval ConvexFunction::domain() const {
    return std::visit(overloaded{
                          [](const IndicatorInterval& ind) { return ExtInterval{ind.lo, ind.hi, false}; },
                          [](const IndicatorPoint& p) { return ExtInterval::point(p.p); },
                          [](const Custom& c) { return c.domain; },
                          [](const auto&) { return ExtInterval::whole(); },
                      },
                      kind_);
}

std::string ConvexFunction::name() const {
    return std::visit(overloaded{
                          [](const Zero&) { return std::string("zero"); },
                          [](const Quadratic& q) { return "quadratic:" + format_short(q.c); },
                          [](const Abs& a) { return "abs:" + format_short(a.c); },
                          [](const IndicatorInterval& ind) {
                              return "indicator:[" + format_short(ind.lo) + "," + format_short(ind.hi) + "]";
                          },
                          [](const IndicatorPoint& p) { return "indicator_point:" + format_short(p.p); },
                          [](const Custom& c) { return "custom:" + c.name; },
                      },
                      kind_);
}

ConvexFunction parse_convex_function(const std::string& raw) {
    const std::string text = trim(raw);
    const auto colon = text.find(':');
    const std::string head = text.substr(0, colon);
    const std::string arg = colon == std::string::npos ? std::string() : trim(text.substr(colon + 1));
    try {
        if (head == "zero" && colon == std::string::npos) return ConvexFunction::zero();
        if (head == "quadratic") return ConvexFunction::quadratic(parse_double(arg));
        if (head == "abs") return ConvexFunction::abs(parse_double(arg));
        if (head == "indicator_point") return ConvexFunction::indicator_point(parse_double(arg));
        if (head == "indicator") {
            const auto bounds = parse_bracket_list(arg);
            if (bounds.size() != 2) throw ConfigError("indicator needs [l,u]");
            return ConvexFunction::indicator(bounds[0], bounds[1]);
        }
    } catch (const std::invalid_argument& e) {
        throw ConfigError("bad convex function '" + text + "': " + e.what());
    }
    throw ConfigError("unknown convex function '" + text + "'");
}

std::vector<ConvexFunction> catalog_samples() {
    return {
        ConvexFunction::zero(),
        ConvexFunction::quadratic(1.0),
        ConvexFunction::quadratic(3.5),
        ConvexFunction::abs(1.0),
        ConvexFunction::abs(0.25),
        ConvexFunction::indicator(0.0, kInf),
        ConvexFunction::indicator(-kInf, 1.0),
        ConvexFunction::indicator(-0.5, 2.0),
        ConvexFunction::indicator_point(0.0),
        ConvexFunction::indicator_point(1.5),
    };
}

double resolvent(const ConvexFunction& phi, double x, double eps) {
    if (!(eps > 0.0)) throw std::invalid_argument("resolvent: eps must be > 0");
    using CF = ConvexFunction;
    return std::visit(overloaded{
                          [x](const CF::Zero&) { return x; },
                          [x, eps](const CF::Quadratic& q) { return x / (1.0 + eps * q.c); },
                          [x, eps](const CF::Abs& a) {
                              const double t = eps * a.c;
                              if (x > t) return x - t;
                              if (x < -t) return x + t;
                              return 0.0;
                          },
                          [x](const CF::IndicatorInterval& ind) { return std::clamp(x, ind.lo, ind.hi); },
                          [](const CF::IndicatorPoint& p) { return p.p; },
                          [&phi, x, eps](const CF::Custom&) { return numeric_resolvent(phi, x, eps); },
                      },
                      phi.kind());
}

double numeric_resolvent(const ConvexFunction& phi, double x, double eps) {
    if (!(eps > 0.0)) throw std::invalid_argument("numeric_resolvent: eps must be > 0");
    constexpr int kBudget = 200;
    constexpr int kGoldenIters = 30;
    constexpr double kArgTol = 1e-10;

    const ExtInterval dom = phi.domain();
    // -1: y lies left of the minimizer, +1: right of it, 0: y is optimal.
    auto side = [&](double y) -> int {
        if (y < dom.lo) return -1;
        if (y > dom.hi) return 1;
        const ExtInterval sub = phi.subdifferential(y);
        if (sub.empty) return y <= dom.lo ? -1 : 1;
        const double shift = (y - x) / eps;
        if (sub.hi + shift < 0.0) return -1;
        if (sub.lo + shift > 0.0) return 1;
        return 0;
    };
    auto objective = [&](double y) {
        const double d = y - x;
        return phi.value(y) + d * d / (2.0 * eps);
    };

    int iter = 0;
    const double y0 = std::clamp(x, dom.lo, dom.hi);
    const int s0 = side(y0);
    if (s0 == 0) return y0;

    // Strong convexity (modulus 1/eps): |y* - y0| <= eps * dist(0, d psi(y0)).
    double a = y0, b = y0;
    const ExtInterval sub0 = phi.subdifferential(y0);
    const double shift0 = (y0 - x) / eps;
    const double reach =
        sub0.empty ? kInf : eps * ExtInterval{sub0.lo + shift0, sub0.hi + shift0, false}.distance(0.0);
    if (std::isfinite(reach)) {
        if (s0 < 0) b = std::min(dom.hi, y0 + reach);
        else a = std::max(dom.lo, y0 - reach);
    } else {
        double step = eps * (1.0 + std::abs(x));
        for (;;) {
            if (++iter > kBudget)
                throw ConvergenceError("numeric_resolvent: bracket expansion failed", step, iter);
            const double probe = s0 < 0 ? y0 + step : y0 - step;
            if (side(probe) != s0) {
                (s0 < 0 ? b : a) = probe;
                break;
            }
            (s0 < 0 ? a : b) = probe;
            step *= 2.0;
        }
    }

    constexpr double kInvPhi = 0.6180339887498949;
    double c = b - kInvPhi * (b - a);
    double d = a + kInvPhi * (b - a);
    double fc = objective(c), fd = objective(d);
    for (int g = 0; g < kGoldenIters && b - a > kArgTol; ++g, ++iter) {
        if (fc <= fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - kInvPhi * (b - a);
            fc = objective(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + kInvPhi * (b - a);
            fd = objective(d);
        }
    }

    while (b - a > kArgTol) {
        if (++iter > kBudget)
            throw ConvergenceError("numeric_resolvent: bisection budget exhausted", b - a, iter);
        const double m = 0.5 * (a + b);
        if (m <= a || m >= b) break;
        const int s = side(m);
        if (s == 0) return m;
        (s < 0 ? a : b) = m;
    }
    return 0.5 * (a + b);
}

double yosida_gradient(const ConvexFunction& phi, double x, double eps) {
    return (x - resolvent(phi, x, eps)) / eps;
}

// ---------------------------------------------------------------------------

std::size_t set_dimension(const ConvexSet& set) {
    return std::visit(overloaded{
                          [](const IntervalSet&) { return std::size_t{1}; },
                          [](const BallSet& b) { return b.center.size(); },
                          [](const HalfspaceSet& h) { return h.normal.size(); },
                      },
                      set);
}

void validate_set(const ConvexSet& set, std::size_t dim) {
    std::visit(overloaded{
                   [](const IntervalSet& iv) {
                       if (!(iv.lo <= iv.hi) || iv.lo == kInf || iv.hi == -kInf)
                           throw std::invalid_argument("empty interval");
                   },
                   [](const BallSet& b) {
                       if (!(b.radius >= 0.0)) throw std::invalid_argument("ball radius must be >= 0");
                       if (b.center.empty()) throw std::invalid_argument("ball needs a center");
                   },
                   [](const HalfspaceSet& h) {
                       double nn = 0.0;
                       for (double v : h.normal) nn += v * v;
                       if (!(nn > 0.0)) throw std::invalid_argument("halfspace normal must be nonzero");
                   },
               },
               set);
    if (set_dimension(set) != dim)
        throw std::invalid_argument("set dimension " + std::to_string(set_dimension(set)) +
                                    " does not match point dimension " + std::to_string(dim));
}

Projection project_to_convex(const ConvexSet& set, std::span<const double> x) {
    validate_set(set, x.size());
    Projection out{std::vector<double>(x.begin(), x.end()), 0.0};
    std::visit(overloaded{
                   [&](const IntervalSet& iv) {
                       out.point[0] = std::clamp(x[0], iv.lo, iv.hi);
                       out.distance = std::abs(x[0] - out.point[0]);
                   },
                   [&](const BallSet& b) {
                       double r2 = 0.0;
                       for (std::size_t k = 0; k < x.size(); ++k) r2 += (x[k] - b.center[k]) * (x[k] - b.center[k]);
                       const double r = std::sqrt(r2);
                       if (r <= b.radius) return;
                       const double scale = b.radius / r;
                       for (std::size_t k = 0; k < x.size(); ++k)
                           out.point[k] = b.center[k] + scale * (x[k] - b.center[k]);
                       out.distance = r - b.radius;
                   },
                   [&](const HalfspaceSet& h) {
                       double nn = 0.0, nx = 0.0;
                       for (std::size_t k = 0; k < x.size(); ++k) {
                           nn += h.normal[k] * h.normal[k];
                           nx += h.normal[k] * x[k];
                       }
                       const double excess = nx - h.offset;
                       if (excess <= 0.0) return;
                       for (std::size_t k = 0; k < x.size(); ++k) out.point[k] = x[k] - excess / nn * h.normal[k];
                       out.distance = excess / std::sqrt(nn);
                   },
               },
               set);
    return out;
}

double level_function(const ConvexSet& set, std::span<const double> x) {
    return std::visit(overloaded{
                          [&](const IntervalSet& iv) { return std::max(iv.lo - x[0], x[0] - iv.hi); },
                          [&](const BallSet& b) {
                              double r2 = 0.0;
                              for (std::size_t k = 0; k < x.size(); ++k)
                                  r2 += (x[k] - b.center[k]) * (x[k] - b.center[k]);
                              return std::sqrt(r2) - b.radius;
                          },
                          [&](const HalfspaceSet& h) {
                              double nn = 0.0, nx = 0.0;
                              for (std::size_t k = 0; k < x.size(); ++k) {
                                  nn += h.normal[k] * h.normal[k];
                                  nx += h.normal[k] * x[k];
                              }
                              return (nx - h.offset) / std::sqrt(nn);
                          },
                      },
                      set);
}

namespace {

// "[a,b,...]:tail" -> (list, tail)
std::pair<std::vector<double>, double> parse_list_and_scalar(const std::string& arg) {
    const auto close = arg.find(']');
    if (close == std::string::npos || close + 1 >= arg.size() || arg[close + 1] != ':')
        throw ConfigError("expected [..]:value, got '" + arg + "'");
    return {parse_bracket_list(arg.substr(0, close + 1)), parse_double(arg.substr(close + 2))};
}

}  // namespace

ConvexSet parse_convex_set(const std::string& raw) {
    const std::string text = trim(raw);
    const auto colon = text.find(':');
    if (colon == std::string::npos) throw ConfigError("bad set '" + text + "'");
    const std::string head = text.substr(0, colon);
    const std::string arg = trim(text.substr(colon + 1));
    ConvexSet set;
    try {
        if (head == "interval") {
            const auto b = parse_bracket_list(arg);
            if (b.size() != 2) throw ConfigError("interval needs [l,u]");
            set = IntervalSet{b[0], b[1]};
        } else if (head == "ball") {
            auto [c, r] = parse_list_and_scalar(arg);
            set = BallSet{std::move(c), r};
        } else if (head == "halfspace") {
            auto [nrm, off] = parse_list_and_scalar(arg);
            set = HalfspaceSet{std::move(nrm), off};
        } else {
            throw ConfigError("unknown set kind '" + head + "'");
        }
        validate_set(set, set_dimension(set));
    } catch (const std::invalid_argument& e) {
        throw ConfigError("bad set '" + text + "': " + e.what());
    }
    return set;
}

std::string set_name(const ConvexSet& set) {
    auto list = [](const std::vector<double>& v) {
        std::string s = "[";
        for (std::size_t k = 0; k < v.size(); ++k) s += (k ? "," : "") + format_short(v[k]);
        return s + "]";
    };
    return std::visit(overloaded{
                          [](const IntervalSet& iv) {
                              return "interval:[" + format_short(iv.lo) + "," + format_short(iv.hi) + "]";
                          },
                          [&](const BallSet& b) { return "ball:" + list(b.center) + ":" + format_short(b.radius); },
                          [&](const HalfspaceSet& h) {
                              return "halfspace:" + list(h.normal) + ":" + format_short(h.offset);
                          },
                      },
                      set);
}

}  // namespace bsvi
