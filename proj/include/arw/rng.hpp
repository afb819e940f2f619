#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <string_view>
#include <vector>

namespace arw {

// Philox4x32-10 (Salmon et al., SC 2011). Counter-based: the generator state
// is (key, counter) and every (key, counter) pair maps to an independent
// 128-bit block, so per-sample substreams keyed by (seed, sample index) give
// bit-identical output regardless of thread scheduling.
class Philox {
public:
    Philox(uint64_t key, uint64_t stream) {
        key_[0] = static_cast<uint32_t>(key);
        key_[1] = static_cast<uint32_t>(key >> 32);
        ctr_[0] = static_cast<uint32_t>(stream);
        ctr_[1] = static_cast<uint32_t>(stream >> 32);
        ctr_[2] = 0;
        ctr_[3] = 0;
        pos_ = 4;
    }

    using result_type = uint32_t;
    static constexpr uint32_t min() { return 0; }
    static constexpr uint32_t max() { return 0xffffffffu; }

    uint32_t operator()() { return next_u32(); }

    uint32_t next_u32() {
        if (pos_ == 4) refill();
        return out_[pos_++];
    }

    uint64_t next_u64() {
        const uint64_t lo = next_u32();
        const uint64_t hi = next_u32();
        return (hi << 32) | lo;
    }

    /// Uniform on [0,1), 53-bit resolution.
    double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    /// Uniform on (0,1); safe for log().
    double next_open() {
        const double u = next_double();
        return u > 0.0 ? u : 0x1.0p-53;
    }

    /// Standard normal via Box-Muller (two uniforms per call, second value
    /// discarded to keep the draw count deterministic per call).
    double next_normal() {
        const double u1 = next_open();
        const double u2 = next_double();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
    }

    /// Index into a cumulative weight table (ascending, back() ~= 1).
    int next_index(const std::vector<double>& cumulative) {
        const double u = next_double();
        const int n = static_cast<int>(cumulative.size());
        for (int i = 0; i < n - 1; ++i)
            if (u < cumulative[i]) return i;
        return n - 1;
    }

private:
    static void round(std::array<uint32_t, 4>& c, const std::array<uint32_t, 2>& k) {
        const uint64_t p0 = 0xD2511F53ull * c[0];
        const uint64_t p1 = 0xCD9E8D57ull * c[2];
        const uint32_t hi0 = static_cast<uint32_t>(p0 >> 32), lo0 = static_cast<uint32_t>(p0);
        const uint32_t hi1 = static_cast<uint32_t>(p1 >> 32), lo1 = static_cast<uint32_t>(p1);
        c = {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
    }

    void refill() {
        std::array<uint32_t, 4> c = ctr_;
        std::array<uint32_t, 2> k = key_;
        for (int r = 0; r < 10; ++r) {
            round(c, k);
            k[0] += 0x9E3779B9u;
            k[1] += 0xBB67AE85u;
        }
        out_ = c;
        pos_ = 0;
        if (++ctr_[2] == 0) ++ctr_[3];
    }

    std::array<uint32_t, 4> ctr_, out_;
    std::array<uint32_t, 2> key_;
    int pos_;
};

inline uint64_t splitmix64(uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

/// Derive a named substream key from the run seed. All randomness flows from
/// one seed through names ("simulate.eta", "spectrum.kappa", ...), so modules
/// never share or race on a stream.
inline uint64_t substream_key(uint64_t seed, std::string_view name) {
    uint64_t h = 0xcbf29ce484222325ull;  // FNV-1a
    for (const char ch : name) {
        h ^= static_cast<unsigned char>(ch);
        h *= 0x100000001b3ull;
    }
    return splitmix64(seed ^ splitmix64(h));
}

}  // namespace arw
