#pragma once

// Sample Kendall tau (tau-b) in O(n log n): sort by the first coordinate,
// then count discordant pairs as merge-sort inversions of the second.

#include <algorithm>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

namespace egc {

namespace detail {

inline std::uint64_t merge_count(std::vector<double>& y, std::vector<double>& buf,
                                 std::size_t lo, std::size_t hi) {
    if (hi - lo < 2) return 0;
    const std::size_t mid = lo + (hi - lo) / 2;
    std::uint64_t s = merge_count(y, buf, lo, mid) + merge_count(y, buf, mid, hi);
    std::size_t i = lo, j = mid, k = lo;
    while (i < mid && j < hi) {
        if (y[j] < y[i]) {
            s += mid - i;  // y[i..mid) all exceed y[j]
            buf[k++] = y[j++];
        } else {
            buf[k++] = y[i++];
        }
    }
    while (i < mid) buf[k++] = y[i++];
    while (j < hi) buf[k++] = y[j++];
    std::copy(buf.begin() + std::ptrdiff_t(lo), buf.begin() + std::ptrdiff_t(hi),
              y.begin() + std::ptrdiff_t(lo));
    return s;
}

} // namespace detail

inline double kendall_tau(std::span<const double> x, std::span<const double> y) {
    const std::size_t n = x.size();
    if (n != y.size() || n < 2) throw std::invalid_argument("kendall_tau: need paired data");
    std::vector<std::size_t> idx(n);
    for (std::size_t i = 0; i < n; ++i) idx[i] = i;
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
        return x[a] < x[b] || (x[a] == x[b] && y[a] < y[b]);
    });

    const auto pairs = [](std::uint64_t t) { return t * (t - 1) / 2; };
    const std::uint64_t n0 = pairs(n);
    std::uint64_t n1 = 0, n3 = 0;
    std::vector<double> ys(n);
    for (std::size_t i = 0; i < n; ++i) ys[i] = y[idx[i]];
    for (std::size_t i = 0; i < n;) {
        std::size_t j = i;
        while (j + 1 < n && x[idx[j + 1]] == x[idx[i]]) ++j;
        n1 += pairs(j - i + 1);
        for (std::size_t a = i; a <= j;) {
            std::size_t b = a;
            while (b + 1 <= j && ys[b + 1] == ys[a]) ++b;
            n3 += pairs(b - a + 1);
            a = b + 1;
        }
        i = j + 1;
    }
    std::vector<double> buf(n);
    const std::uint64_t discordant = detail::merge_count(ys, buf, 0, n);
    std::uint64_t n2 = 0;
    std::sort(ys.begin(), ys.end());
    for (std::size_t i = 0; i < n;) {
        std::size_t j = i;
        while (j + 1 < n && ys[j + 1] == ys[i]) ++j;
        n2 += pairs(j - i + 1);
        i = j + 1;
    }
    const double num = double(n0) - double(n1) - double(n2) + double(n3) -
                       2.0 * double(discordant);
    const double den = std::sqrt((double(n0) - double(n1)) * (double(n0) - double(n2)));
    if (den == 0.0) return 0.0;
    return num / den;
}

} // namespace egc
