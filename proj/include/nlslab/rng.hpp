#pragma once

// Counter-based random numbers.  Every draw is a pure function of
// (seed, sample index, mode, tag), so ensembles are reproducible and
// independent of evaluation order or thread count.

#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>

namespace nlslab {

/// Philox4x32-10 block cipher (Salmon et al., Random123).
class Philox4x32 {
public:
    using Counter = std::array<std::uint32_t, 4>;
    using Key = std::array<std::uint32_t, 2>;

    static Counter generate(Counter ctr, Key key) {
        for (int round = 0; round < 10; ++round) {
            if (round > 0) {
                key[0] += kWeyl0;
                key[1] += kWeyl1;
            }
            const std::uint64_t p0 = static_cast<std::uint64_t>(kMul0) * ctr[0];
            const std::uint64_t p1 = static_cast<std::uint64_t>(kMul1) * ctr[2];
            const auto hi0 = static_cast<std::uint32_t>(p0 >> 32), lo0 = static_cast<std::uint32_t>(p0);
            const auto hi1 = static_cast<std::uint32_t>(p1 >> 32), lo1 = static_cast<std::uint32_t>(p1);
            ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
        }
        return ctr;
    }

private:
    static constexpr std::uint32_t kMul0 = 0xD2511F53u;
    static constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
    static constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
    static constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;
};

/// Stream tags keep unrelated consumers of the same (seed, index) apart.
enum class StreamTag : std::uint32_t {
    coefficients = 0,
    rotation_reference = 1,
    rotation_rotated = 2,
    uniform_points = 3,
    classical_points = 4,
};

struct SampleStream {
    std::uint64_t seed = 0;
    std::uint64_t index = 0;

    SampleStream at(std::uint64_t i) const { return {seed, i}; }

    /// Two independent uniforms in (0, 1) for (mode, tag).
    std::array<double, 2> uniforms(std::uint32_t mode, StreamTag tag = StreamTag::coefficients) const {
        const Philox4x32::Counter ctr{static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32), mode,
                                      static_cast<std::uint32_t>(tag)};
        const Philox4x32::Key key{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)};
        const auto out = Philox4x32::generate(ctr, key);
        const std::uint64_t a = (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
        const std::uint64_t b = (static_cast<std::uint64_t>(out[2]) << 32) | out[3];
        constexpr double scale = 0x1.0p-53;
        return {((a >> 11) + 0.5) * scale, ((b >> 11) + 0.5) * scale};
    }

    /// Complex standard normal g = (g1 + i g2)/sqrt(2), E|g|^2 = 1.
    std::complex<double> complex_normal(std::uint32_t mode, StreamTag tag = StreamTag::coefficients) const {
        const auto [u1, u2] = uniforms(mode, tag);
        const double r = std::sqrt(-std::log(u1));  // sqrt(-2 log u) / sqrt(2)
        const double theta = 2.0 * std::numbers::pi * u2;
        return {r * std::cos(theta), r * std::sin(theta)};
    }
};

} // namespace nlslab
