#pragma once

// Counter-based Philox4x32-10 generator and keyed streams.
//
// Every random quantity is a pure function of (key, stream, substream,
// block), so values never depend on traversal order or thread schedule.

#include <array>
#include <cstdint>

namespace dpre {

class Philox4x32 {
public:
    using Counter = std::array<std::uint32_t, 4>;
    using Key = std::array<std::uint32_t, 2>;

    static constexpr Counter generate(Counter ctr, Key key)
    {
        for (int round = 0; round < 10; ++round) {
            if (round > 0) {
                key[0] += kWeylA;
                key[1] += kWeylB;
            }
            const std::uint64_t p0 = static_cast<std::uint64_t>(kMulA) * ctr[0];
            const std::uint64_t p1 = static_cast<std::uint64_t>(kMulB) * ctr[2];
            const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
            const auto lo0 = static_cast<std::uint32_t>(p0);
            const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
            const auto lo1 = static_cast<std::uint32_t>(p1);
            ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
        }
        return ctr;
    }

private:
    static constexpr std::uint32_t kMulA = 0xD2511F53u;
    static constexpr std::uint32_t kMulB = 0xCD9E8D57u;
    static constexpr std::uint32_t kWeylA = 0x9E3779B9u;
    static constexpr std::uint32_t kWeylB = 0xBB67AE85u;
};

// SplitMix64 finalizer, used to derive independent keys from one seed.
constexpr std::uint64_t mix64(std::uint64_t x)
{
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

/// Sequential view over the blocks of one keyed stream. The counter is
/// laid out as {block, substream lo, substream hi, stream}.
class RngStream {
public:
    constexpr RngStream(std::uint64_t key, std::uint32_t stream, std::uint64_t substream = 0)
        : key_{static_cast<std::uint32_t>(key), static_cast<std::uint32_t>(key >> 32)},
          ctr_{0u, static_cast<std::uint32_t>(substream),
               static_cast<std::uint32_t>(substream >> 32), stream}
    {
    }

    constexpr Philox4x32::Counter next_block()
    {
        const auto out = Philox4x32::generate(ctr_, key_);
        ++ctr_[0];
        return out;
    }

    constexpr std::uint64_t next_u64()
    {
        if (spare_valid_) {
            spare_valid_ = false;
            return spare_;
        }
        const auto blk = next_block();
        spare_ = (static_cast<std::uint64_t>(blk[3]) << 32) | blk[2];
        spare_valid_ = true;
        return (static_cast<std::uint64_t>(blk[1]) << 32) | blk[0];
    }

    // Uniform on the open interval (0, 1) with 53 random bits.
    constexpr double next_uniform() { return to_open_unit(next_u64()); }

    // Uniform integer in [0, bound) by multiply-shift.
    std::uint64_t next_below(std::uint64_t bound)
    {
        return static_cast<std::uint64_t>(
            (static_cast<unsigned __int128>(next_u64()) * bound) >> 64);
    }

    static constexpr double to_open_unit(std::uint64_t bits)
    {
        return (static_cast<double>(bits >> 12) + 0.5) * 0x1.0p-52;
    }

private:
    Philox4x32::Key key_;
    Philox4x32::Counter ctr_;
    std::uint64_t spare_ = 0;
    bool spare_valid_ = false;
};

} // namespace dpre
