#pragma once

// Interpolated 2D shift of a grid, with analytic gradients w.r.t. both
// the source cells and the shift vector.
//
//   out(p) = sum_q src(q) * k(p.y - s.y - q.y) * k(p.x - s.x - q.x)
//
// Taps outside the source extent read src.oob. At integer s the kernel
// collapses to a delta, so the shift is an exact index translation.

#include <cmath>
#include <stdexcept>

#include "drplan/grid.hpp"
#include "drplan/kernel.hpp"

namespace drplan {

inline bool integer_valued(double v) { return std::floor(v) == v; }
inline bool integer_valued(Vec2 v) { return integer_valued(v.x) && integer_valued(v.y); }

namespace detail {

// 4-tap kernel weights around a real-valued sample position.
struct Taps4 {
    int q0;        // first source coordinate (global)
    double w[4];   // kernel weights at q0..q0+3
};

inline Taps4 value_taps(double pos, CubicKernel k) {
    const int q0 = static_cast<int>(std::floor(pos)) - 1;
    Taps4 t{q0, {}};
    for (int i = 0; i < 4; ++i) t.w[i] = kernel_eval(pos - (q0 + i), k);
    return t;
}

inline Taps4 deriv_taps(double pos, CubicKernel k) {
    const int q0 = static_cast<int>(std::floor(pos)) - 1;
    Taps4 t{q0, {}};
    for (int i = 0; i < 4; ++i) t.w[i] = kernel_deriv(pos - (q0 + i), k);
    return t;
}

// Integer translation: dst row <- src row shifted by sx, with fill outside.
inline void translate_row(const Grid& src, double fill, int src_y, int sx, double* dst,
                          const Frame& out) {
    const int local_y = src_y - src.frame.y0;
    if (local_y < 0 || local_y >= src.frame.h) {
        std::fill(dst, dst + out.w, fill);
        return;
    }
    // out global x in [out.x0, out.x0+out.w) reads src at x - sx
    const int in_lo = std::max(out.x0, src.frame.x0 + sx);
    const int in_hi = std::min(out.x0 + out.w, src.frame.x0 + src.frame.w + sx);
    if (in_lo >= in_hi) {
        std::fill(dst, dst + out.w, fill);
        return;
    }
    std::fill(dst, dst + (in_lo - out.x0), fill);
    const double* s = src.row(local_y) + (in_lo - sx - src.frame.x0);
    std::copy(s, s + (in_hi - in_lo), dst + (in_lo - out.x0));
    std::fill(dst + (in_hi - out.x0), dst + out.w, fill);
}

}  // namespace detail

/// General path: 4x4 cubic-convolution sampling (used directly by tests
/// and by non-integer shifts).
inline Grid shift_sample_general(const Grid& src, Vec2 s, Frame out, CubicKernel kern = {}) {
    Grid res(out, src.oob);
    std::vector<detail::Taps4> xt(static_cast<std::size_t>(out.w));
    for (int j = 0; j < out.w; ++j)
        xt[static_cast<std::size_t>(j)] = detail::value_taps((out.x0 + j) - s.x, kern);
    for (int i = 0; i < out.h; ++i) {
        const auto yt = detail::value_taps((out.y0 + i) - s.y, kern);
        double* dst = res.row(i);
        for (int j = 0; j < out.w; ++j) {
            const auto& xw = xt[static_cast<std::size_t>(j)];
            double acc = 0.0;
            for (int r = 0; r < 4; ++r) {
                const double wy = yt.w[r];
                double rowacc = 0.0;
                for (int c = 0; c < 4; ++c)
                    rowacc += xw.w[c] * src.at(yt.q0 + r, xw.q0 + c);
                acc += wy * rowacc;
            }
            dst[j] = acc;
        }
    }
    return res;
}

/// Shift forward. Integer shifts take the exact-translation path.
inline Grid shift_sample(const Grid& src, Vec2 s, Frame out, CubicKernel kern = {}) {
    if (!integer_valued(s)) return shift_sample_general(src, s, out, kern);
    const int sy = static_cast<int>(s.y), sx = static_cast<int>(s.x);
    Grid res(out, src.oob);
    for (int i = 0; i < out.h; ++i)
        detail::translate_row(src, src.oob, out.y0 + i - sy, sx, res.row(i), out);
    return res;
}

/// Spec-facing convenience: shift a chip array by an integer vector and
/// sample on a width x height window at the origin.
inline Grid shift_forward(const ChipArray& c, Vec2i a, int sample_height, int sample_width,
                          CubicKernel kern = {}) {
    return shift_sample(to_grid(c), {static_cast<double>(a.x), static_cast<double>(a.y)},
                        Frame{0, 0, sample_height, sample_width}, kern);
}

struct ShiftTape {
    Grid src;
    Vec2 s;
    Frame out_frame;
    CubicKernel kern;
};

struct ShiftGrads {
    Grid grad_src;  // on src.frame (cells outside it are oob constants)
    Vec2 grad_s;
};

/// Reverse pass of shift_sample. upstream must live on the recorded
/// output frame; reads outside it contribute zero.
inline ShiftGrads shift_backward(const ShiftTape& t, const Grid& upstream) {
    if (upstream.frame != t.out_frame)
        throw std::invalid_argument("shift_backward: tape mismatch (upstream frame)");
    const Grid& src = t.src;
    ShiftGrads g{Grid(src.frame, 0.0), {0.0, 0.0}};

    if (integer_valued(t.s)) {
        const int sy = static_cast<int>(t.s.y), sx = static_cast<int>(t.s.x);
        // grad_src is the upstream translated back (zero where no output read it)
        for (int i = 0; i < src.frame.h; ++i)
            detail::translate_row(upstream, 0.0, src.frame.y0 + i + sy, -sx,
                                  g.grad_src.row(i), src.frame);
        // d out(p) / d s = kd1 * (src(right) - src(left)) per axis, with
        // kd1 = k'(1); interior taps vanish because k'(0) = 0.
        const double kd1 = kernel_deriv(1.0, t.kern);
        double gx = 0.0, gy = 0.0;
        for (int i = 0; i < t.out_frame.h; ++i) {
            const int py = t.out_frame.y0 + i;
            const int y0 = py - sy;
            const double* up = upstream.row(i);
            for (int j = 0; j < t.out_frame.w; ++j) {
                const double u = up[j];
                if (u == 0.0) continue;
                const int x0 = t.out_frame.x0 + j - sx;
                gx += u * (src.at(y0, x0 + 1) - src.at(y0, x0 - 1));
                gy += u * (src.at(y0 + 1, x0) - src.at(y0 - 1, x0));
            }
        }
        g.grad_s = {kd1 * gx, kd1 * gy};
        return g;
    }

    // General path: scatter value-weights into grad_src and accumulate
    // derivative-weights into grad_s (note d/ds k(p - s - q) = -k').
    std::vector<detail::Taps4> xt(static_cast<std::size_t>(t.out_frame.w));
    std::vector<detail::Taps4> xd(static_cast<std::size_t>(t.out_frame.w));
    for (int j = 0; j < t.out_frame.w; ++j) {
        const double pos = (t.out_frame.x0 + j) - t.s.x;
        xt[static_cast<std::size_t>(j)] = detail::value_taps(pos, t.kern);
        xd[static_cast<std::size_t>(j)] = detail::deriv_taps(pos, t.kern);
    }
    double gx = 0.0, gy = 0.0;
    for (int i = 0; i < t.out_frame.h; ++i) {
        const double ypos = (t.out_frame.y0 + i) - t.s.y;
        const auto yt = detail::value_taps(ypos, t.kern);
        const auto yd = detail::deriv_taps(ypos, t.kern);
        const double* up = upstream.row(i);
        for (int j = 0; j < t.out_frame.w; ++j) {
            const double u = up[j];
            if (u == 0.0) continue;
            const auto& xw = xt[static_cast<std::size_t>(j)];
            const auto& xdw = xd[static_cast<std::size_t>(j)];
            for (int r = 0; r < 4; ++r) {
                const int qy = yt.q0 + r;
                for (int c = 0; c < 4; ++c) {
                    const int qx = xw.q0 + c;
                    const double v = src.at(qy, qx);
                    gx -= u * yt.w[r] * xdw.w[c] * v;
                    gy -= u * yd.w[r] * xw.w[c] * v;
                    if (src.frame.contains(qy, qx))
                        g.grad_src.cell(qy, qx) += u * yt.w[r] * xw.w[c];
                }
            }
        }
    }
    g.grad_s = {gx, gy};
    return g;
}

}  // namespace drplan
