#include "bsvi/registry.hpp"

#include <cmath>
#include <stdexcept>

#include "bsvi/errors.hpp"
#include "bsvi/text_util.hpp"

namespace bsvi {

const std::string& ParamReader::raw(const std::string& key) const {
    if (auto it = given_.find(key); it != given_.end()) return it->second;
    if (auto it = defaults_.find(key); it != defaults_.end()) return it->second;
    throw ConfigError("missing problem parameter '" + key + "'");
}

double ParamReader::number(const std::string& key) const {
    try {
        return parse_double(raw(key));
    } catch (const std::invalid_argument&) {
        throw ConfigError("problem parameter '" + key + "' is not a number: " + raw(key));
    }
}

std::string ParamReader::text(const std::string& key) const { return raw(key); }

namespace {

// Scaffolding shared by the scalar problems below: m = d = 1, F == 0, phi from
// the `phi` key.
ProblemSpec scalar_base(const std::string& name, const ParamReader& p) {
    ProblemSpec s;
    s.name = name;
    s.horizon = p.number("T");
    s.initial_x = {p.number("x0")};
    s.phi = parse_convex_function(p.text("phi"));
    s.generator = [](double, std::span<const double>, double, std::span<const double>) { return 0.0; };
    return s;
}

void constant_drift(ProblemSpec& s, double b) {
    s.drift = [b](double, std::span<const double>, std::span<double> out) { out[0] = b; };
}

void constant_vol(ProblemSpec& s, double v) {
    s.diffusion = [v](double, std::span<const double>, std::span<double> out) { out[0] = v; };
}

ProblemParams with_common(ProblemParams own, const std::string& phi = "zero") {
    own.emplace("T", "1");
    own.emplace("x0", "0");
    own.emplace("phi", phi);
    return own;
}

std::vector<ProblemEntry> build_registry() {
    std::vector<ProblemEntry> reg;

    reg.push_back({"gbm", "geometric Brownian motion dX = mu X dt + vol X dW, g(x) = x",
                   with_common({{"mu", "0.05"}, {"vol", "0.2"}, {"x0", "1"}}),
                   [](const ParamReader& p) {
                       ProblemSpec s = scalar_base("gbm", p);
                       const double mu = p.number("mu"), vol = p.number("vol");
                       s.drift = [mu](double, std::span<const double> x, std::span<double> out) { out[0] = mu * x[0]; };
                       s.diffusion = [vol](double, std::span<const double> x, std::span<double> out) {
                           out[0] = vol * x[0];
                       };
                       s.terminal = [](std::span<const double> x) { return x[0]; };
                       s.lipschitz = std::max({std::abs(mu), std::abs(vol), 1.0});
                       return s;
                   },
                   [](const ParamReader& p) -> std::optional<AnalyticSolution> {
                       const double mu = p.number("mu"), vol = p.number("vol"), x0 = p.number("x0");
                       const double T = p.number("T");
                       AnalyticSolution a;
                       a.forward = [=](double t, std::span<const double> w, std::span<double> x) {
                           x[0] = x0 * std::exp((mu - 0.5 * vol * vol) * t + vol * w[0]);
                       };
                       if (!parse_convex_function(p.text("phi")).is_zero()) return a;
                       a.y = [=](double t, std::span<const double> x) { return x[0] * std::exp(mu * (T - t)); };
                       a.z = [=](double t, std::span<const double> x, std::span<double> z) {
                           z[0] = vol * x[0] * std::exp(mu * (T - t));
                       };
                       return a;
                   }});

    reg.push_back({"martingale", "scaled Brownian motion X = x0 + vol W, g(x) = x, so Y = X and Z = vol",
                   with_common({{"vol", "1"}}),
                   [](const ParamReader& p) {
                       ProblemSpec s = scalar_base("martingale", p);
                       constant_drift(s, 0.0);
                       constant_vol(s, p.number("vol"));
                       s.terminal = [](std::span<const double> x) { return x[0]; };
                       s.lipschitz = std::max(1.0, std::abs(p.number("vol")));
                       return s;
                   },
                   [](const ParamReader& p) -> std::optional<AnalyticSolution> {
                       const double vol = p.number("vol"), x0 = p.number("x0");
                       AnalyticSolution a;
                       a.forward = [=](double, std::span<const double> w, std::span<double> x) { x[0] = x0 + vol * w[0]; };
                       if (!parse_convex_function(p.text("phi")).is_zero()) return a;
                       a.y = [](double, std::span<const double> x) { return x[0]; };
                       a.z = [=](double, std::span<const double>, std::span<double> z) { z[0] = vol; };
                       return a;
                   }});

    reg.push_back({"linear_decay", "deterministic backward decay: sigma = 0, F(y) = -r y, g = c",
                   with_common({{"r", "1"}, {"c", "1"}}),
                   [](const ParamReader& p) {
                       ProblemSpec s = scalar_base("linear_decay", p);
                       const double r = p.number("r"), c = p.number("c");
                       constant_drift(s, 0.0);
                       constant_vol(s, 0.0);
                       s.generator = [r](double, std::span<const double>, double y, std::span<const double>) {
                           return -r * y;
                       };
                       s.terminal = [c](std::span<const double>) { return c; };
                       s.lipschitz = std::abs(r);
                       return s;
                   },
                   [](const ParamReader& p) -> std::optional<AnalyticSolution> {
                       if (!parse_convex_function(p.text("phi")).is_zero()) return std::nullopt;
                       const double r = p.number("r"), c = p.number("c"), T = p.number("T"), x0 = p.number("x0");
                       AnalyticSolution a;
                       a.forward = [=](double, std::span<const double>, std::span<double> x) { x[0] = x0; };
                       a.y = [=](double t, std::span<const double>) { return c * std::exp(-r * (T - t)); };
                       a.z = [](double, std::span<const double>, std::span<double> z) { z[0] = 0.0; };
                       return a;
                   }});

    reg.push_back({"abs_payoff", "Brownian forward, g(x) = |x|, F = 0, constraint phi (default y >= 0)",
                   with_common({{"vol", "1"}}, "indicator:[0,inf]"),
                   [](const ParamReader& p) {
                       ProblemSpec s = scalar_base("abs_payoff", p);
                       constant_drift(s, 0.0);
                       constant_vol(s, p.number("vol"));
                       s.terminal = [](std::span<const double> x) { return std::abs(x[0]); };
                       s.lipschitz = std::max(1.0, std::abs(p.number("vol")));
                       return s;
                   },
                   {}});

    reg.push_back({"nonlinear",
                   "Ornstein-Uhlenbeck forward, F = -r y + k sin(y) + theta z, g(x) = sin(x)",
                   with_common({{"vol", "1"}, {"kappa", "0.5"}, {"r", "0.5"}, {"k", "0.5"}, {"theta", "0.3"}}),
                   [](const ParamReader& p) {
                       ProblemSpec s = scalar_base("nonlinear", p);
                       const double kappa = p.number("kappa"), r = p.number("r"), k = p.number("k");
                       const double theta = p.number("theta");
                       s.drift = [kappa](double, std::span<const double> x, std::span<double> out) {
                           out[0] = -kappa * x[0];
                       };
                       constant_vol(s, p.number("vol"));
                       s.generator = [r, k, theta](double, std::span<const double>, double y,
                                                   std::span<const double> z) {
                           return -r * y + k * std::sin(y) + theta * z[0];
                       };
                       s.terminal = [](std::span<const double> x) { return std::sin(x[0]); };
                       s.lipschitz = std::max({std::abs(kappa), std::abs(r) + std::abs(k) + std::abs(theta), 1.0});
                       return s;
                   },
                   {}});

    reg.push_back({"reflected_drift",
                   "constant drift pushing out of the domain, projected forward, G(y) = gamma + gamma_y y, "
                   "g(x) = slope x",
                   with_common({{"drift", "2"}, {"vol", "0.5"}, {"domain", "interval:[-1,1]"}, {"gamma", "1"},
                                {"gamma_y", "0"}, {"slope", "0"}}),
                   [](const ParamReader& p) {
                       ProblemSpec s = scalar_base("reflected_drift", p);
                       constant_drift(s, p.number("drift"));
                       constant_vol(s, p.number("vol"));
                       try {
                           s.domain = parse_convex_set(p.text("domain"));
                           validate_set(*s.domain, 1);
                       } catch (const std::invalid_argument& e) {
                           throw ConfigError(std::string("domain: ") + e.what());
                       }
                       const double gamma = p.number("gamma"), gamma_y = p.number("gamma_y");
                       if (gamma != 0.0 || gamma_y != 0.0)
                           s.boundary_generator = [gamma, gamma_y](double, std::span<const double>, double y) {
                               return gamma + gamma_y * y;
                           };
                       const double slope = p.number("slope");
                       s.terminal = [slope](std::span<const double> x) { return slope * x[0]; };
                       s.lipschitz = std::max({std::abs(p.number("vol")), std::abs(slope), std::abs(gamma_y), 1.0});
                       return s;
                   },
                   {}});

    reg.push_back({"constant", "Brownian forward with constant terminal value g = c and F = 0",
                   with_common({{"vol", "1"}, {"c", "1"}}),
                   [](const ParamReader& p) {
                       ProblemSpec s = scalar_base("constant", p);
                       const double c = p.number("c");
                       constant_drift(s, 0.0);
                       constant_vol(s, p.number("vol"));
                       s.terminal = [c](std::span<const double>) { return c; };
                       s.lipschitz = 1.0;
                       return s;
                   },
                   [](const ParamReader& p) -> std::optional<AnalyticSolution> {
                       const auto phi = parse_convex_function(p.text("phi"));
                       const double c = p.number("c");
                       if (!phi.subdifferential(c).contains(0.0)) return std::nullopt;
                       AnalyticSolution a;
                       a.y = [c](double, std::span<const double>) { return c; };
                       a.z = [](double, std::span<const double>, std::span<double> z) { z[0] = 0.0; };
                       return a;
                   }});
    return reg;
}

}  // namespace

const std::vector<ProblemEntry>& problem_registry() {
    static const std::vector<ProblemEntry> reg = build_registry();
    return reg;
}

const ProblemEntry& find_problem(const std::string& name) {
    for (const auto& e : problem_registry())
        if (e.name == name) return e;
    throw ConfigError("unknown problem '" + name + "'");
}

ProblemInstance make_problem(const std::string& name, const ProblemParams& params) {
    const ProblemEntry& entry = find_problem(name);
    for (const auto& [key, value] : params)
        if (!entry.defaults.count(key)) throw ConfigError("problem '" + name + "' has no parameter '" + key + "'");
    const ParamReader reader(params, entry.defaults);
    ProblemInstance inst{entry.build(reader), std::nullopt};
    try {
        inst.spec.check();
    } catch (const std::invalid_argument& e) {
        throw ConfigError("problem '" + name + "': " + e.what());
    }
    if (entry.analytic) inst.analytic = entry.analytic(reader);
    return inst;
}

}  // namespace bsvi
