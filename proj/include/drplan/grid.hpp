#pragma once

// Binary chip arrays, real-valued working grids, seeded instance
// generation and defect metrics.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace drplan {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;
    bool operator==(const Vec2&) const = default;
};

struct Vec2i {
    int x = 0;
    int y = 0;
    bool operator==(const Vec2i&) const = default;
};

// Row-major window [y0, y0+h) x [x0, x0+w) in the shared integer
// coordinate system; donor and target origins coincide at (0,0).
struct Frame {
    int y0 = 0;
    int x0 = 0;
    int h = 0;
    int w = 0;

    bool contains(int y, int x) const {
        return y >= y0 && y < y0 + h && x >= x0 && x < x0 + w;
    }
    long long area() const { return static_cast<long long>(h) * w; }
    bool operator==(const Frame&) const = default;
};

inline Frame dilated(const Frame& f, int m) {
    return {f.y0 - m, f.x0 - m, f.h + 2 * m, f.w + 2 * m};
}

inline Frame translated(const Frame& f, int dy, int dx) {
    return {f.y0 + dy, f.x0 + dx, f.h, f.w};
}

inline Frame bounding(const Frame& a, const Frame& b) {
    const int y0 = std::min(a.y0, b.y0);
    const int x0 = std::min(a.x0, b.x0);
    const int y1 = std::max(a.y0 + a.h, b.y0 + b.h);
    const int x1 = std::max(a.x0 + a.w, b.x0 + b.w);
    return {y0, x0, y1 - y0, x1 - x0};
}

inline bool intersects(const Frame& a, const Frame& b) {
    return a.y0 < b.y0 + b.h && b.y0 < a.y0 + a.h &&
           a.x0 < b.x0 + b.w && b.x0 < a.x0 + a.w;
}

/// Binary occupancy grid. Reads outside the extent return oob_fill:
/// 0 for donor-role arrays, 1 for target-role arrays.
struct ChipArray {
    int width = 0;
    int height = 0;
    std::uint8_t oob_fill = 0;
    std::vector<std::uint8_t> cells;  // row-major, each cell 0 or 1

    ChipArray() = default;
    ChipArray(int height_, int width_, std::uint8_t oob, std::uint8_t fill = 1)
        : width(width_), height(height_), oob_fill(oob),
          cells(static_cast<std::size_t>(height_) * width_, fill) {
        if (height_ < 1 || width_ < 1)
            throw std::invalid_argument("ChipArray: dimensions must be positive");
        if (oob > 1 || fill > 1)
            throw std::invalid_argument("ChipArray: cells are binary");
    }

    std::uint8_t at(int y, int x) const {
        if (y < 0 || y >= height || x < 0 || x >= width) return oob_fill;
        return cells[static_cast<std::size_t>(y) * width + x];
    }
    std::uint8_t& cell(int y, int x) {
        return cells[static_cast<std::size_t>(y) * width + x];
    }
    std::uint8_t cell(int y, int x) const {
        return cells[static_cast<std::size_t>(y) * width + x];
    }
    Frame extent() const { return {0, 0, height, width}; }
    bool operator==(const ChipArray&) const = default;
};

/// Real-valued grid over an arbitrary frame; reads outside return oob.
struct Grid {
    Frame frame;
    double oob = 0.0;
    std::vector<double> cells;

    Grid() = default;
    Grid(Frame f, double oob_, double fill = 0.0)
        : frame(f), oob(oob_), cells(static_cast<std::size_t>(f.area()), fill) {}

    double at(int y, int x) const {
        if (!frame.contains(y, x)) return oob;
        return cells[static_cast<std::size_t>(y - frame.y0) * frame.w + (x - frame.x0)];
    }
    // row r is local (0-based within the frame)
    double* row(int r) { return cells.data() + static_cast<std::size_t>(r) * frame.w; }
    const double* row(int r) const {
        return cells.data() + static_cast<std::size_t>(r) * frame.w;
    }
    double& cell(int y, int x) {
        return cells[static_cast<std::size_t>(y - frame.y0) * frame.w + (x - frame.x0)];
    }
    void add_scalar(double v) {
        for (double& c : cells) c += v;
    }
    bool operator==(const Grid&) const = default;
};

inline Grid to_grid(const ChipArray& a) {
    Grid g(a.extent(), static_cast<double>(a.oob_fill));
    for (std::size_t i = 0; i < a.cells.size(); ++i)
        g.cells[i] = static_cast<double>(a.cells[i]);
    return g;
}

/// Converts a grid holding exact 0.0/1.0 values back to a chip array.
inline ChipArray to_chip(const Grid& g, std::uint8_t oob_fill) {
    if (g.frame.y0 != 0 || g.frame.x0 != 0)
        throw std::invalid_argument("to_chip: grid frame must sit at the origin");
    ChipArray a(g.frame.h, g.frame.w, oob_fill, 0);
    for (std::size_t i = 0; i < g.cells.size(); ++i) {
        const double v = g.cells[i];
        if (v != 0.0 && v != 1.0)
            throw std::invalid_argument("to_chip: non-binary cell value " + std::to_string(v));
        a.cells[i] = static_cast<std::uint8_t>(v);
    }
    return a;
}

// ------------------------------------------------------------------
// Seeded randomness (splitmix64): deterministic across platforms.
// ------------------------------------------------------------------

class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }
    /// Uniform in [0, 1).
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
    /// Uniform in [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    /// Uniform integer in [lo, hi] inclusive.
    int uniform_int(int lo, int hi) {
        return lo + static_cast<int>(next() % static_cast<std::uint64_t>(hi - lo + 1));
    }

private:
    std::uint64_t state_;
};

/// Derives an independent stream seed (base seed x stream index).
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
    Rng r(seed ^ (0xA24BAED4963EE407ULL * (stream + 1)));
    return r.next();
}

// ------------------------------------------------------------------
// Instance generation and defect metrics
// ------------------------------------------------------------------

struct InstanceSpec {
    int donor_width = 0;
    int donor_height = 0;
    int target_width = 0;
    int target_height = 0;
    double d1 = 0.0;  // donor defect rate
    double d2 = 0.0;  // target defect rate
    std::uint64_t seed = 0;

    void validate() const {
        if (donor_width < 1 || donor_height < 1 || target_width < 1 || target_height < 1)
            throw std::invalid_argument("InstanceSpec: zero-area dimensions");
        if (d1 < 0.0 || d1 > 1.0 || d2 < 0.0 || d2 > 1.0)
            throw std::invalid_argument("InstanceSpec: defect rates must lie in [0,1]");
    }
    static InstanceSpec square(int size, double d1, double d2, std::uint64_t seed) {
        return {size, size, size, size, d1, d2, seed};
    }
};

/// Draws a (donor, target) pair with iid cell defects at rates d1/d2.
/// Pure function of the spec: identical specs yield identical arrays.
inline std::pair<ChipArray, ChipArray> generate_instance(const InstanceSpec& spec) {
    spec.validate();
    Rng rng(spec.seed);
    ChipArray donor(spec.donor_height, spec.donor_width, /*oob=*/0);
    for (auto& c : donor.cells) c = rng.uniform() < spec.d1 ? 0 : 1;
    ChipArray target(spec.target_height, spec.target_width, /*oob=*/1);
    for (auto& c : target.cells) c = rng.uniform() < spec.d2 ? 0 : 1;
    return {std::move(donor), std::move(target)};
}

/// Count of in-bounds empty sites.
inline long long defect_count(const ChipArray& a) {
    long long n = 0;
    for (std::uint8_t c : a.cells) n += (c == 0);
    return n;
}

/// Fraction of in-bounds empty sites.
inline double defect_rate(const ChipArray& a) {
    return static_cast<double>(defect_count(a)) / static_cast<double>(a.cells.size());
}

/// Defect count of a grid holding exact 0.0/1.0 values.
inline long long binary_defect_count(const Grid& g) {
    long long n = 0;
    for (double v : g.cells) {
        if (v == 0.0)
            ++n;
        else if (v != 1.0)
            throw std::invalid_argument("binary_defect_count: non-binary cell");
    }
    return n;
}

}  // namespace drplan
