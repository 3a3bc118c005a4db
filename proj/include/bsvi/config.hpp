#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

#include "bsvi/problem_model.hpp"
#include "bsvi/registry.hpp"

namespace bsvi {

enum class Quantity { backward, forward };

struct ReferenceMode {
    enum class Kind { analytic, self };
    Kind kind = Kind::analytic;
    std::string name;       ///< analytic reference name
    std::size_t n_ref = 0;  ///< fine grid for self reference

    std::string describe() const;
};

/// `analytic:<name>` or `self:<n_ref>`. Throws ConfigError.
ReferenceMode parse_reference(const std::string& text);

struct StudyConfig {
    std::string problem;
    ProblemParams problem_params;
    SchemeParams scheme;
    std::vector<std::size_t> n_list;
    ReferenceMode reference;
    Quantity quantity = Quantity::backward;
    std::size_t replicates = 1;
};

/// Sectioned key=value text with sections [problem], [scheme], [study].
/// Unknown sections or keys, duplicate keys and malformed values throw
/// ConfigError. Problem keys are checked against the registry entry.
StudyConfig parse_config(std::istream& is);
StudyConfig load_config(const std::string& path);

}  // namespace bsvi
