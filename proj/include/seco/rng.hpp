#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace seco {

// splitmix64 finalizer; used to decorrelate seeds for derived streams.
inline std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Deterministic random source. mt19937_64 supplies the bits (its output is
// pinned by the standard); all value mappings are explicit here so results
// do not depend on the standard library's distribution implementations.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(mix64(seed)) {}

    // Independent stream derived from (seed, stream); used so per-item
    // generation can run in any order and still match serial output.
    static Rng stream(std::uint64_t seed, std::uint64_t stream_id) {
        return Rng(mix64(seed) ^ mix64(mix64(stream_id) + 0x6a09e667f3bcc909ULL));
    }

    std::uint64_t raw() { return engine_(); }

    // Uniform in [0, 1), 53-bit resolution.
    double uniform() { return static_cast<double>(raw() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Standard normal via Box-Muller; draws two uniforms per call so the
    // mapping from engine state to output is stateless.
    double normal() {
        const double u1 = 1.0 - uniform();  // (0, 1]
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
    }

    // Uniform integer in [0, n); rejection sampling keeps it exactly uniform.
    std::uint64_t below(std::uint64_t n) {
        const std::uint64_t rem = (UINT64_MAX % n + 1) % n;  // 2^64 mod n
        const std::uint64_t bound = UINT64_MAX - rem;
        std::uint64_t v;
        do {
            v = raw();
        } while (v > bound);
        return v % n;
    }

    bool coin() { return (raw() >> 63) != 0; }

    template <typename T>
    void shuffle(std::vector<T>& items) {
        for (std::size_t i = items.size(); i > 1; --i) {
            const std::size_t j = static_cast<std::size_t>(below(i));
            std::swap(items[i - 1], items[j]);
        }
    }

private:
    std::mt19937_64 engine_;
};

}  // namespace seco
