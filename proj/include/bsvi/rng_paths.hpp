#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "bsvi/problem_model.hpp"

namespace bsvi {

/// Philox4x32-10 counter-based generator (Salmon et al., Random123). A pure
/// function of (key, counter), so any draw can be regenerated independently.
class Philox4x32 {
public:
    using Counter = std::array<std::uint32_t, 4>;
    using Key = std::array<std::uint32_t, 2>;

    static Counter generate(Counter ctr, Key key);
};

/// Brownian increments dW[j][i][k] for paths j < M, steps i < n, components k < d.
class IncrementEnsemble {
public:
    IncrementEnsemble(Partition partition, std::size_t paths, std::size_t dim, IncrementLaw law,
                      std::uint64_t seed, bool enumerated, std::vector<double> data);

    const Partition& partition() const { return partition_; }
    std::size_t paths() const { return paths_; }
    std::size_t steps() const { return partition_.steps(); }
    std::size_t dim() const { return dim_; }
    IncrementLaw law() const { return law_; }
    std::uint64_t seed() const { return seed_; }
    /// True when the paths are the complete equal-weight Rademacher tree.
    bool enumerated() const { return enumerated_; }

    std::span<const double> at(std::size_t path, std::size_t step) const {
        return {data_.data() + (path * steps() + step) * dim_, dim_};
    }
    std::span<const double> data() const { return data_; }

private:
    Partition partition_;
    std::size_t paths_;
    std::size_t dim_;
    IncrementLaw law_;
    std::uint64_t seed_;
    bool enumerated_;
    std::vector<double> data_;
};

/// Standard normal (gaussian law) or +-1 (rademacher law) draw keyed by
/// (seed, path, step, component). Independent of generation order.
double unit_draw(std::uint64_t seed, std::uint64_t path, std::uint32_t step, std::uint32_t component,
                 IncrementLaw law);

/// Random ensemble: N(0, h) per entry, or +-sqrt(h) with equal probability.
IncrementEnsemble sample_increments(const Partition& partition, std::size_t paths, std::size_t dim,
                                    IncrementLaw law, std::uint64_t seed, unsigned workers = 1);

/// All 2^(n d) Rademacher sign patterns, path j reading its signs from the
/// binary digits of j, most significant first (0 => +sqrt(h)). Throws
/// std::invalid_argument when n d exceeds the cap.
IncrementEnsemble enumerate_rademacher_tree(const Partition& partition, std::size_t dim, std::size_t cap = 20);

/// Increments on the partition with n / factor steps whose entries are the
/// sums of consecutive blocks of `factor` fine increments.
IncrementEnsemble coarsen(const IncrementEnsemble& fine, std::size_t factor);

/// Binary dump: little-endian u64 seed, M, n, d, law (0 gaussian, 1 rademacher),
/// f64 T, f64 t0, then M*n*d f64 values in row-major (path, step, component) order.
void write_increments(std::ostream& os, const IncrementEnsemble& ens);
IncrementEnsemble read_increments(std::istream& is);

}  // namespace bsvi
