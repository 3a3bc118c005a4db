#include "bsvi/rng_paths.hpp"

#include <cmath>
#include <cstring>
#include <type_traits>
#include <istream>
#include <numbers>
#include <ostream>
#include <stdexcept>

#include "bsvi/parallel.hpp"

namespace bsvi {

namespace {

constexpr std::uint32_t kMul0 = 0xD2511F53u;
constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) {
    const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
    hi = static_cast<std::uint32_t>(p >> 32);
    lo = static_cast<std::uint32_t>(p);
}

// 53-bit uniform in (0, 1).
inline double to_open_unit(std::uint32_t hi, std::uint32_t lo) {
    const std::uint64_t bits = ((static_cast<std::uint64_t>(hi) << 32) | lo) >> 11;
    return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
}

}  // namespace

Philox4x32::Counter Philox4x32::generate(Counter ctr, Key key) {
    for (int round = 0; round < 10; ++round) {
        if (round > 0) {
            key[0] += kWeyl0;
            key[1] += kWeyl1;
        }
        std::uint32_t hi0, lo0, hi1, lo1;
        mulhilo(kMul0, ctr[0], hi0, lo0);
        mulhilo(kMul1, ctr[2], hi1, lo1);
        ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    }
    return ctr;
}

double unit_draw(std::uint64_t seed, std::uint64_t path, std::uint32_t step, std::uint32_t component,
                 IncrementLaw law) {
    const Philox4x32::Key key{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)};
    const Philox4x32::Counter ctr{static_cast<std::uint32_t>(path), static_cast<std::uint32_t>(path >> 32), step,
                                  component};
    const auto r = Philox4x32::generate(ctr, key);
    if (law == IncrementLaw::rademacher) return (r[0] >> 31) ? -1.0 : 1.0;
    const double u1 = to_open_unit(r[0], r[1]);
    const double u2 = to_open_unit(r[2], r[3]);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

IncrementEnsemble::IncrementEnsemble(Partition partition, std::size_t paths, std::size_t dim, IncrementLaw law,
                                     std::uint64_t seed, bool enumerated, std::vector<double> data)
    : partition_(partition), paths_(paths), dim_(dim), law_(law), seed_(seed), enumerated_(enumerated),
      data_(std::move(data)) {
    if (paths_ == 0 || dim_ == 0) throw std::invalid_argument("increment ensemble needs M >= 1 and d >= 1");
    if (data_.size() != paths_ * partition_.steps() * dim_)
        throw std::invalid_argument("increment data has wrong size");
}

IncrementEnsemble sample_increments(const Partition& partition, std::size_t paths, std::size_t dim,
                                    IncrementLaw law, std::uint64_t seed, unsigned workers) {
    if (paths == 0 || dim == 0) throw std::invalid_argument("sample_increments needs M >= 1 and d >= 1");
    const std::size_t n = partition.steps();
    const double sqrt_h = std::sqrt(partition.step_size());
    std::vector<double> data(paths * n * dim);
    parallel_for(paths, workers, [&](std::size_t begin, std::size_t end) {
        for (std::size_t j = begin; j < end; ++j)
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t k = 0; k < dim; ++k)
                    data[(j * n + i) * dim + k] =
                        sqrt_h * unit_draw(seed, j, static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(k), law);
    });
    return IncrementEnsemble(partition, paths, dim, law, seed, false, std::move(data));
}

IncrementEnsemble enumerate_rademacher_tree(const Partition& partition, std::size_t dim, std::size_t cap) {
    const std::size_t n = partition.steps();
    const std::size_t levels = n * dim;
    if (dim == 0) throw std::invalid_argument("tree enumeration needs d >= 1");
    if (levels > cap)
        throw std::invalid_argument("tree enumeration of " + std::to_string(levels) + " sign levels exceeds cap " +
                                    std::to_string(cap));
    const std::size_t paths = std::size_t{1} << levels;
    const double sqrt_h = std::sqrt(partition.step_size());
    std::vector<double> data(paths * levels);
    for (std::size_t j = 0; j < paths; ++j)
        for (std::size_t b = 0; b < levels; ++b)
            data[j * levels + b] = ((j >> (levels - 1 - b)) & 1u) ? -sqrt_h : sqrt_h;
    return IncrementEnsemble(partition, paths, dim, IncrementLaw::rademacher, 0, true, std::move(data));
}

IncrementEnsemble coarsen(const IncrementEnsemble& fine, std::size_t factor) {
    const std::size_t nf = fine.steps();
    if (factor == 0 || nf % factor != 0)
        throw std::invalid_argument("coarsening factor " + std::to_string(factor) + " does not divide n = " +
                                    std::to_string(nf));
    const std::size_t nc = nf / factor, d = fine.dim(), M = fine.paths();
    const Partition& pf = fine.partition();
    Partition coarse_partition(pf.horizon(), nc, pf.initial_time());
    std::vector<double> data(M * nc * d, 0.0);
    for (std::size_t j = 0; j < M; ++j)
        for (std::size_t i = 0; i < nc; ++i)
            for (std::size_t k = 0; k < d; ++k) {
                double s = 0.0;
                for (std::size_t r = 0; r < factor; ++r) s += fine.at(j, i * factor + r)[k];
                data[(j * nc + i) * d + k] = s;
            }
    return IncrementEnsemble(coarse_partition, M, d, fine.law(), fine.seed(), false, std::move(data));
}

namespace {

template <typename T>
void put(std::ostream& os, T v) {
    unsigned char buf[sizeof(T)];
    std::uint64_t bits;
    if constexpr (std::is_same_v<T, double>) {
        std::memcpy(&bits, &v, sizeof bits);
    } else {
        bits = static_cast<std::uint64_t>(v);
    }
    for (std::size_t b = 0; b < sizeof(T); ++b) buf[b] = static_cast<unsigned char>(bits >> (8 * b));
    os.write(reinterpret_cast<const char*>(buf), sizeof buf);
}

template <typename T>
T get(std::istream& is) {
    unsigned char buf[sizeof(T)];
    if (!is.read(reinterpret_cast<char*>(buf), sizeof buf)) throw std::runtime_error("truncated increment file");
    std::uint64_t bits = 0;
    for (std::size_t b = 0; b < sizeof(T); ++b) bits |= static_cast<std::uint64_t>(buf[b]) << (8 * b);
    if constexpr (std::is_same_v<T, double>) {
        double v;
        std::memcpy(&v, &bits, sizeof v);
        return v;
    } else {
        return static_cast<T>(bits);
    }
}

}  // namespace

void write_increments(std::ostream& os, const IncrementEnsemble& ens) {
    put<std::uint64_t>(os, ens.seed());
    put<std::uint64_t>(os, ens.paths());
    put<std::uint64_t>(os, ens.steps());
    put<std::uint64_t>(os, ens.dim());
    put<std::uint64_t>(os, ens.law() == IncrementLaw::gaussian ? 0 : 1);
    put<double>(os, ens.partition().horizon());
    put<double>(os, ens.partition().initial_time());
    for (double v : ens.data()) put<double>(os, v);
}

IncrementEnsemble read_increments(std::istream& is) {
    const auto seed = get<std::uint64_t>(is);
    const auto M = get<std::uint64_t>(is);
    const auto n = get<std::uint64_t>(is);
    const auto d = get<std::uint64_t>(is);
    const auto law_code = get<std::uint64_t>(is);
    const double T = get<double>(is);
    const double t0 = get<double>(is);
    if (law_code > 1) throw std::runtime_error("unknown increment law code");
    std::vector<double> data(M * n * d);
    for (auto& v : data) v = get<double>(is);
    return IncrementEnsemble(Partition(T, n, t0), M, d, law_code == 0 ? IncrementLaw::gaussian : IncrementLaw::rademacher,
                             seed, false, std::move(data));
}

}  // namespace bsvi
