#include "bsvi/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <cmath>
#include <fstream>
#include <optional>
#include <set>

#include "bsvi/errors.hpp"
#include "bsvi/text_util.hpp"

namespace bsvi {

namespace pt = boost::property_tree;

std::string ReferenceMode::describe() const {
    if (kind == Kind::analytic) return "analytic:" + name;
    return "self:" + std::to_string(n_ref);
}

namespace {

double number(const std::string& key, const std::string& value) {
    try {
        return parse_double(value);
    } catch (const std::invalid_argument&) {
        throw ConfigError("'" + key + "' expects a number, got '" + value + "'");
    }
}

std::size_t count(const std::string& key, const std::string& value) {
    const double v = number(key, value);
    if (!(v >= 0.0) || v != std::floor(v) || v > 1e15)
        throw ConfigError("'" + key + "' expects a nonnegative integer, got '" + value + "'");
    return static_cast<std::size_t>(v);
}

bool flag(const std::string& key, const std::string& value) {
    if (value == "true" || value == "1" || value == "yes" || value == "on") return true;
    if (value == "false" || value == "0" || value == "no" || value == "off") return false;
    throw ConfigError("'" + key + "' expects true or false, got '" + value + "'");
}

void apply_scheme(const pt::ptree& section, SchemeParams& s) {
    std::string estimator = "lsmc";
    std::optional<int> degree;
    std::optional<std::size_t> bins;
    for (const auto& [key, node] : section) {
        const std::string v = trim(node.data());
        if (key == "a") s.a_exponent = number(key, v);
        else if (key == "paths") s.num_paths = count(key, v);
        else if (key == "estimator") estimator = v;
        else if (key == "degree") degree = static_cast<int>(count(key, v));
        else if (key == "bins") bins = count(key, v);
        else if (key == "variant") {
            if (v == "implicit") s.variant = SchemeVariant::implicit;
            else if (v == "explicit") s.variant = SchemeVariant::explicit_;
            else throw ConfigError("variant must be implicit or explicit, got '" + v + "'");
        } else if (key == "seed") s.seed = count(key, v);
        else if (key == "law") {
            if (v == "gaussian") s.law = IncrementLaw::gaussian;
            else if (v == "rademacher") s.law = IncrementLaw::rademacher;
            else throw ConfigError("law must be gaussian or rademacher, got '" + v + "'");
        } else if (key == "tol") s.fixed_point_tol = number(key, v);
        else if (key == "max_iter") s.fixed_point_max_iter = static_cast<int>(count(key, v));
        else if (key == "tree_cap") s.tree_cap = count(key, v);
        else if (key == "clip") s.clip_to_range = flag(key, v);
        else if (key == "generalized_with_generator") s.generalized_with_generator = flag(key, v);
        else if (key == "workers") s.workers = static_cast<unsigned>(count(key, v));
        else throw ConfigError("unknown key '" + key + "' in [scheme]");
    }
    if (estimator == "lsmc") {
        s.estimator = LsmcPoly{degree.value_or(3)};
        if (bins) throw ConfigError("'bins' only applies to estimator = binning");
    } else if (estimator == "binning") {
        s.estimator = Binning{bins.value_or(16)};
        if (degree) throw ConfigError("'degree' only applies to estimator = lsmc");
    } else if (estimator == "tree_exact") {
        s.estimator = TreeExact{};
        if (degree || bins) throw ConfigError("tree_exact takes neither 'degree' nor 'bins'");
    } else {
        throw ConfigError("estimator must be lsmc, binning or tree_exact, got '" + estimator + "'");
    }
    try {
        s.check();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("[scheme]: ") + e.what());
    }
}

void apply_study(const pt::ptree& section, StudyConfig& c) {
    bool have_n = false, have_ref = false;
    for (const auto& [key, node] : section) {
        const std::string v = trim(node.data());
        if (key == "n") {
            std::vector<double> raw;
            try {
                raw = parse_bracket_list(!v.empty() && v.front() == '[' ? v : "[" + v + "]");
            } catch (const std::invalid_argument& e) {
                throw ConfigError(std::string("n: ") + e.what());
            }
            c.n_list.clear();
            for (double x : raw) c.n_list.push_back(count(key, format_short(x)));
            have_n = true;
        } else if (key == "reference") {
            c.reference = parse_reference(v);
            have_ref = true;
        } else if (key == "quantity") {
            if (v == "backward") c.quantity = Quantity::backward;
            else if (v == "forward") c.quantity = Quantity::forward;
            else throw ConfigError("quantity must be backward or forward, got '" + v + "'");
        } else if (key == "replicates") {
            c.replicates = count(key, v);
        } else {
            throw ConfigError("unknown key '" + key + "' in [study]");
        }
    }
    if (!have_n) throw ConfigError("[study] needs an n list");
    if (!have_ref) throw ConfigError("[study] needs a reference");
    if (c.n_list.empty()) throw ConfigError("[study] n list is empty");
    for (std::size_t n : c.n_list)
        if (n == 0) throw ConfigError("[study] n values must be >= 1");
    if (c.replicates == 0) throw ConfigError("[study] replicates must be >= 1");
}

}  // namespace

ReferenceMode parse_reference(const std::string& text) {
    const auto colon = text.find(':');
    if (colon == std::string::npos) throw ConfigError("reference must be analytic:<name> or self:<n_ref>");
    const std::string kind = trim(text.substr(0, colon)), arg = trim(text.substr(colon + 1));
    ReferenceMode r;
    if (kind == "analytic") {
        if (arg.empty()) throw ConfigError("analytic reference needs a name");
        r.kind = ReferenceMode::Kind::analytic;
        r.name = arg;
    } else if (kind == "self") {
        r.kind = ReferenceMode::Kind::self;
        r.n_ref = count("self", arg);
        if (r.n_ref == 0) throw ConfigError("self reference needs n_ref >= 1");
    } else {
        throw ConfigError("unknown reference kind '" + kind + "'");
    }
    return r;
}

StudyConfig parse_config(std::istream& is) {
    pt::ptree tree;
    try {
        pt::read_ini(is, tree);
    } catch (const pt::ini_parser_error& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    StudyConfig c;
    std::set<std::string> seen;
    for (const auto& [name, section] : tree) {
        if (section.empty() && !section.data().empty())
            throw ConfigError("key '" + name + "' outside any section");
        seen.insert(name);
    }
    for (const auto& [name, section] : tree) {
        if (name == "problem") {
            for (const auto& [key, node] : section) {
                if (key == "name") c.problem = trim(node.data());
                else c.problem_params[key] = trim(node.data());
            }
        } else if (name == "scheme") {
            apply_scheme(section, c.scheme);
        } else if (name == "study") {
            apply_study(section, c);
        } else {
            throw ConfigError("unknown section [" + name + "]");
        }
    }
    if (!seen.count("problem") || c.problem.empty()) throw ConfigError("[problem] needs a name");
    if (!seen.count("study")) throw ConfigError("missing [study] section");
    // Validates the problem keys now rather than at run time.
    make_problem(c.problem, c.problem_params);
    return c;
}

StudyConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    return parse_config(in);
}

}  // namespace bsvi
