#pragma once

// Counter-based random streams.  A stream is a 64-bit key plus a counter, and
// every draw is a pure function of (key, counter).  Streams split by label or
// index, so replicate r of a run with seed s always sees the same numbers no
// matter how work is scheduled across threads.

#include <cstdint>
#include <string_view>

#include "egc/math.hpp"

namespace egc {

namespace detail {

inline constexpr std::uint64_t golden = 0x9E3779B97F4A7C15ull;

inline std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

inline std::uint64_t fnv1a(std::string_view s) {
    std::uint64_t h = 0xCBF29CE484222325ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001B3ull;
    }
    return h;
}

} // namespace detail

class RandomStream {
  public:
    explicit RandomStream(std::uint64_t seed) : key_(detail::mix64(seed + detail::golden)) {}

    /// Derive an independent child stream; pure in (parent key, label).
    RandomStream branch(std::uint64_t label) const {
        RandomStream s(*this);
        s.key_ = detail::mix64(key_ ^ detail::mix64(label + detail::golden));
        s.counter_ = 0;
        return s;
    }
    RandomStream branch(std::string_view label) const { return branch(detail::fnv1a(label)); }

    std::uint64_t next_u64() { return value_at(counter_++); }

    /// Uniform draw in the open interval (0,1).
    double uniform() { return to_unit(next_u64()); }

    double normal() { return math::norm_quantile(uniform()); }

    /// Random value i of this stream without advancing the counter.
    double uniform_at(std::uint64_t i) const { return to_unit(value_at(i)); }

    std::uint64_t key() const { return key_; }

  private:
    std::uint64_t value_at(std::uint64_t i) const {
        return detail::mix64(key_ + (i + 1) * detail::golden);
    }
    static double to_unit(std::uint64_t x) {
        return (static_cast<double>(x >> 11) + 0.5) * 0x1.0p-53;
    }

    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

} // namespace egc
