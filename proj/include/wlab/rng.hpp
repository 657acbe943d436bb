#pragma once

// Counter-based random streams (Philox4x32-10). Every draw is a pure function
// of (key, counter), so the value for iteration t / offspring k / coordinate
// block j never depends on execution order or thread count.

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <utility>

namespace wlab::rng {

using Block = std::array<std::uint32_t, 4>;
using Key = std::array<std::uint32_t, 2>;

inline Block philox4x32_10(Block ctr, Key key) {
    constexpr std::uint32_t kM0 = 0xD2511F53u;
    constexpr std::uint32_t kM1 = 0xCD9E8D57u;
    constexpr std::uint32_t kW0 = 0x9E3779B9u;
    constexpr std::uint32_t kW1 = 0xBB67AE85u;
    for (int round = 0; round < 10; ++round) {
        const std::uint64_t p0 = static_cast<std::uint64_t>(kM0) * ctr[0];
        const std::uint64_t p1 = static_cast<std::uint64_t>(kM1) * ctr[2];
        ctr = {static_cast<std::uint32_t>(p1 >> 32) ^ ctr[1] ^ key[0],
               static_cast<std::uint32_t>(p1),
               static_cast<std::uint32_t>(p0 >> 32) ^ ctr[3] ^ key[1],
               static_cast<std::uint32_t>(p0)};
        key[0] += kW0;
        key[1] += kW1;
    }
    return ctr;
}

/// Purpose tags keep the streams of different consumers disjoint for one seed.
enum class Purpose : std::uint64_t {
    Sampling = 1,
    Hessian = 2,
    ImportanceMc = 3,
    CdfOracle = 4,
};

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

inline Key derive_key(std::uint64_t seed, Purpose purpose) {
    const std::uint64_t k = splitmix64(seed ^ splitmix64(static_cast<std::uint64_t>(purpose)));
    return {static_cast<std::uint32_t>(k), static_cast<std::uint32_t>(k >> 32)};
}

inline double to_unit_open_closed(std::uint32_t hi, std::uint32_t lo) {
    const std::uint64_t x = (static_cast<std::uint64_t>(hi) << 32) | lo;
    return static_cast<double>((x >> 11) + 1) * 0x1.0p-53;  // (0, 1]
}

inline double to_unit(std::uint32_t hi, std::uint32_t lo) {
    const std::uint64_t x = (static_cast<std::uint64_t>(hi) << 32) | lo;
    return static_cast<double>(x >> 11) * 0x1.0p-53;  // [0, 1)
}

/// Two standard normals from one Philox block (Box-Muller).
inline std::pair<double, double> normal_pair(const Block& bits) {
    const double u1 = to_unit_open_closed(bits[0], bits[1]);
    const double u2 = to_unit(bits[2], bits[3]);
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * std::numbers::pi * u2;
    return {r * std::cos(theta), r * std::sin(theta)};
}

/// Counter layout: {block, substream, stream_lo, stream_hi}.
inline Block counter(std::uint64_t stream, std::uint32_t substream, std::uint32_t block) {
    return {block, substream, static_cast<std::uint32_t>(stream),
            static_cast<std::uint32_t>(stream >> 32)};
}

/// Sequential view over one (stream, substream) pair.
class Substream {
public:
    Substream(Key key, std::uint64_t stream, std::uint32_t substream = 0)
        : key_(key), stream_(stream), substream_(substream) {}

    Block next_block() { return philox4x32_10(counter(stream_, substream_, block_++), key_); }

    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        const auto [a, b] = normal_pair(next_block());
        spare_ = b;
        has_spare_ = true;
        return a;
    }

    double uniform() {
        if (has_spare_uniform_) {
            has_spare_uniform_ = false;
            return spare_uniform_;
        }
        const Block b = next_block();
        spare_uniform_ = to_unit(b[2], b[3]);
        has_spare_uniform_ = true;
        return to_unit(b[0], b[1]);
    }

    /// Uniform on [lo, hi].
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

private:
    Key key_;
    std::uint64_t stream_;
    std::uint32_t substream_;
    std::uint32_t block_ = 0;
    bool has_spare_ = false;
    double spare_ = 0.0;
    bool has_spare_uniform_ = false;
    double spare_uniform_ = 0.0;
};

}  // namespace wlab::rng
