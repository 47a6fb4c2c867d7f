#pragma once

// Counter-based random numbers. Every simulated sample owns a substream keyed
// by (seed, stream, sample index), so a sample's value never depends on which
// worker produced it or in what order.

#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <span>

namespace shrinkinfo {

// Philox4x32-10 block function (Salmon, Moraes, Dror, Shaw 2011).
class Philox4x32 {
public:
    using Counter = std::array<std::uint32_t, 4>;
    using Key = std::array<std::uint32_t, 2>;

    static constexpr Counter block(Counter ctr, Key key) noexcept {
        for (int round = 0; round < 10; ++round) {
            if (round > 0) {
                key[0] += kWeyl0;
                key[1] += kWeyl1;
            }
            const std::uint64_t p0 = static_cast<std::uint64_t>(kMul0) * ctr[0];
            const std::uint64_t p1 = static_cast<std::uint64_t>(kMul1) * ctr[2];
            const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
            const auto lo0 = static_cast<std::uint32_t>(p0);
            const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
            const auto lo1 = static_cast<std::uint32_t>(p1);
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

// Standard normal quantile, Wichura's AS 241 (PPND16); relative accuracy
// about 1e-16 over (0, 1).
inline double normal_quantile(double p) noexcept {
    const double q = p - 0.5;
    if (std::fabs(q) <= 0.425) {
        const double r = 0.180625 - q * q;
        return q *
               (((((((2509.0809287301226727 * r + 33430.575583588128105) * r + 67265.770927008700853) * r +
                    45921.953931549871457) * r + 13731.693765509461125) * r + 1971.5909503065514427) * r +
                 133.14166789178437745) * r + 3.387132872796366608) /
               (((((((5226.495278852854561 * r + 28729.085735721942674) * r + 39307.89580009271061) * r +
                    21213.794301586595867) * r + 5394.1960214247511077) * r + 687.1870074920579083) * r +
                 42.313330701600911252) * r + 1.0);
    }
    double r = q < 0.0 ? p : 1.0 - p;
    r = std::sqrt(-std::log(r));
    double x;
    if (r <= 5.0) {
        r -= 1.6;
        x = (((((((7.7454501427834140764e-4 * r + 0.0227238449892691845833) * r + 0.24178072517745061177) * r +
                 1.27045825245236838258) * r + 3.64784832476320460504) * r + 5.7694972214606914055) * r +
              4.6303378461565452959) * r + 1.42343711074968357734) /
            (((((((1.05075007164441684324e-9 * r + 5.475938084995344946e-4) * r + 0.0151986665636164571966) * r +
                 0.14810397642748007459) * r + 0.68976733498510000455) * r + 1.6763848301838038494) * r +
              2.05319162663775882187) * r + 1.0);
    } else {
        r -= 5.0;
        x = (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r + 0.0012426609473880784386) * r +
                 0.026532189526576123093) * r + 0.29656057182850489123) * r + 1.7848265399172913358) * r +
              5.4637849111641143699) * r + 6.6579046435011037772) /
            (((((((2.04426310338993978564e-15 * r + 1.4215117583164458887e-7) * r + 1.8463183175100546818e-5) * r +
                 7.868691311456132591e-4) * r + 0.0148753612908506148525) * r + 0.13692988092273580531) * r +
              0.59983220655588793769) * r + 1.0);
    }
    return q < 0.0 ? -x : x;
}

// Maps 64 random bits to the open interval (0, 1) on a 2^-53 lattice.
constexpr double bits_to_open_unit(std::uint64_t bits) noexcept {
    return (static_cast<double>(bits >> 12) + 0.5) * 0x1.0p-52;
}

// Fills `out` with independent standard normals for substream
// (seed, stream, index). Block j of the substream is Philox at counter
// (index_lo, index_hi, stream, j); each block yields two 64-bit words, each
// mapped to a normal by inverse CDF.
inline void standard_normals(std::uint64_t seed, std::uint32_t stream, std::uint64_t index,
                             std::span<double> out) noexcept {
    const Philox4x32::Key key{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)};
    std::size_t filled = 0;
    for (std::uint32_t j = 0; filled < out.size(); ++j) {
        const auto r = Philox4x32::block(
            {static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32), stream, j}, key);
        const std::uint64_t w0 = (static_cast<std::uint64_t>(r[1]) << 32) | r[0];
        const std::uint64_t w1 = (static_cast<std::uint64_t>(r[3]) << 32) | r[2];
        out[filled++] = normal_quantile(bits_to_open_unit(w0));
        if (filled < out.size()) {
            out[filled++] = normal_quantile(bits_to_open_unit(w1));
        }
    }
}

// 32-bit mixing used to derive substream ids (murmur3 finalizer).
constexpr std::uint32_t mix32(std::uint32_t h) noexcept {
    h ^= h >> 16;
    h *= 0x85EBCA6Bu;
    h ^= h >> 13;
    h *= 0xC2B2AE35u;
    h ^= h >> 16;
    return h;
}

inline std::uint32_t hash_double(double x) noexcept {
    if (x == 0.0) {
        x = 0.0;  // -0.0 and 0.0 label the same distribution
    }
    const auto bits = std::bit_cast<std::uint64_t>(x);
    return mix32(static_cast<std::uint32_t>(bits) ^ mix32(static_cast<std::uint32_t>(bits >> 32)));
}

}  // namespace shrinkinfo
