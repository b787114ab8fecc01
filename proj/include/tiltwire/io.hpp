/*
 * io.hpp — deterministic table output: fixed 15-significant-digit float
 * formatting (identical runs produce byte-identical files) and the
 * start:stop:count tilt-grid syntax.
 */

#pragma once

#include <cstdio>
#include <stdexcept>
#include <string>
#include <vector>

namespace tiltwire {

/// %.15g, locale-independent enough for CSV regression artifacts.
inline std::string fmt15(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.15g", x);
    return buf;
}

inline std::string fmt15(int x) { return std::to_string(x); }

/// "start:stop:count" -> count equally spaced values including both ends.
inline std::vector<double> parse_grid(const std::string& s) {
    double lo = 0, hi = 0;
    int count = 0;
    if (std::sscanf(s.c_str(), "%lf:%lf:%d", &lo, &hi, &count) != 3)
        throw std::domain_error("grid syntax is start:stop:count, got '" + s + "'");
    if (count < 1) throw std::domain_error("grid count must be >= 1");
    if (count == 1) return {lo};
    std::vector<double> g(count);
    for (int i = 0; i < count; ++i) g[i] = lo + (hi - lo) * i / (count - 1);
    return g;
}

}  // namespace tiltwire
