#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <utility>

namespace sramyield {

/// Philox4x32-10 counter-based generator (Salmon et al., SC'11). Stateless:
/// the output is a pure function of (counter, key).
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
            const std::uint64_t p0 = std::uint64_t{kMul0} * ctr[0];
            const std::uint64_t p1 = std::uint64_t{kMul1} * ctr[2];
            ctr = {static_cast<std::uint32_t>(p1 >> 32) ^ ctr[1] ^ key[0], static_cast<std::uint32_t>(p1),
                   static_cast<std::uint32_t>(p0 >> 32) ^ ctr[3] ^ key[1], static_cast<std::uint32_t>(p0)};
        }
        return ctr;
    }

private:
    static constexpr std::uint32_t kMul0 = 0xD2511F53u;
    static constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
    static constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
    static constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;
};

/// Independent substreams of one Monte Carlo run.
enum class Stream : std::uint32_t {
    devices = 0,          // per-sample transistor thresholds
    offset = 1,           // sense-amplifier offset
    characterization = 2, // small-sample distribution fits
};

/// Standard normal pairs for sample `index` of `stream` under `seed`. Any two
/// distinct (seed, stream, index, block) tuples give independent draws, so
/// results do not depend on how indices are scheduled across threads.
inline std::pair<double, double> normal_pair(std::uint64_t seed, Stream stream, std::uint64_t index,
                                             std::uint32_t block = 0) {
    const Philox4x32::Counter ctr{static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32),
                                  static_cast<std::uint32_t>(stream), block};
    const Philox4x32::Key key{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)};
    const auto r = Philox4x32::generate(ctr, key);
    // Two 53-bit uniforms; u1 lies in (0, 1] so the log is finite.
    constexpr double kScale = 1.0 / 9007199254740992.0;  // 2^-53
    const std::uint64_t a = (std::uint64_t{r[0]} << 32 | r[1]) >> 11;
    const std::uint64_t b = (std::uint64_t{r[2]} << 32 | r[3]) >> 11;
    const double u1 = (static_cast<double>(a) + 1.0) * kScale;
    const double u2 = static_cast<double>(b) * kScale;
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * M_PI * u2;
    return {radius * std::cos(angle), radius * std::sin(angle)};
}

}  // namespace sramyield
