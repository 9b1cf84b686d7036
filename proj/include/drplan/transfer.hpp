#pragma once

// One differentiable transfer step: STE-rounded shift of the donor onto
// a working frame, elementwise transfer onto empty target sites, and the
// shift back. Forward and reverse passes are written out by hand.

#include <cmath>
#include <stdexcept>
#include <utility>
#include <vector>

#include "drplan/grid.hpp"
#include "drplan/shift.hpp"

namespace drplan {

/// Round half away from zero, per component. The backward Jacobian of
/// this op is defined as the identity (straight-through estimator).
inline Vec2i ste_round(Vec2 v) {
    if (!std::isfinite(v.x) || !std::isfinite(v.y))
        throw std::invalid_argument("ste_round: shift must be finite");
    if (std::abs(v.x) > 1e9 || std::abs(v.y) > 1e9)
        throw std::invalid_argument("ste_round: shift magnitude out of range");
    return {static_cast<int>(std::lround(v.x)), static_cast<int>(std::lround(v.y))};
}

/// Continuous learnable shift with its rounded integer actuation.
struct ShiftParam {
    Vec2 v{0.0, 0.0};
    Vec2i a{0, 0};
    Vec2 grad{0.0, 0.0};

    void set(Vec2 nv) {
        v = nv;
        a = ste_round(v);
    }
    static ShiftParam from(Vec2 v0) {
        ShiftParam p;
        p.set(v0);
        return p;
    }
};

// ------------------------------------------------------------------
// Transfer equations
// ------------------------------------------------------------------

struct TransferTape {
    Grid d1;
    Grid c2;
};

/// d1' = d1 - d1*(1 - c2),  c2' = c2 + d1*(1 - c2), elementwise.
/// Binary inputs yield binary outputs.
inline std::pair<Grid, Grid> transfer_forward(const Grid& d1, const Grid& c2) {
    if (d1.frame != c2.frame)
        throw std::invalid_argument("transfer_forward: grids must share sample dims");
    Grid d1p(d1.frame, d1.oob - d1.oob * (1.0 - c2.oob));
    Grid c2p(c2.frame, c2.oob + d1.oob * (1.0 - c2.oob));
    for (std::size_t i = 0; i < d1.cells.size(); ++i) {
        const double moved = d1.cells[i] * (1.0 - c2.cells[i]);
        d1p.cells[i] = d1.cells[i] - moved;
        c2p.cells[i] = c2.cells[i] + moved;
    }
    return {std::move(d1p), std::move(c2p)};
}

inline std::pair<Grid, Grid> transfer_backward(const TransferTape& t, const Grid& up_d1p,
                                               const Grid& up_c2p) {
    if (up_d1p.frame != t.d1.frame || up_c2p.frame != t.d1.frame)
        throw std::invalid_argument("transfer_backward: tape mismatch");
    Grid g_d1(t.d1.frame, 0.0);
    Grid g_c2(t.d1.frame, 0.0);
    for (std::size_t i = 0; i < g_d1.cells.size(); ++i) {
        const double c2 = t.c2.cells[i];
        const double d1 = t.d1.cells[i];
        g_d1.cells[i] = up_d1p.cells[i] * c2 + up_c2p.cells[i] * (1.0 - c2);
        g_c2.cells[i] = up_d1p.cells[i] * d1 + up_c2p.cells[i] * (1.0 - d1);
    }
    return {std::move(g_d1), std::move(g_c2)};
}

// ------------------------------------------------------------------
// Composed transfer module
// ------------------------------------------------------------------

namespace detail {

// Kernel support is 2 cells; one extra covers the sub-cell offset of
// continuous shifts plus finite-difference probes.
inline constexpr int kFrameMargin = 3;

inline Grid materialize(const Grid& src, Frame f) {
    Grid out(f, src.oob);
    for (int i = 0; i < f.h; ++i)
        translate_row(src, src.oob, f.y0 + i, 0, out.row(i), f);
    return out;
}

inline Grid crop(const Grid& src, Frame f, double oob) {
    Grid out(f, oob);
    for (int i = 0; i < f.h; ++i)
        translate_row(src, 0.0, f.y0 + i, 0, out.row(i), f);
    return out;
}

}  // namespace detail

struct ModuleTape {
    Vec2 shift;  // shift applied in the forward pass (integer-valued when rounded)
    bool rounded = true;
    bool bypass = false;  // shifted donor cannot reach the target extent: exact no-op
    Frame donor_frame;
    Frame target_frame;
    Frame work_frame;
    ShiftTape fwd;       // donor -> working frame
    TransferTape xfer;   // on the working frame
    ShiftTape back;      // transferred remainder -> donor frame
};

/// Reverse-order tape of module steps. The backward pass consumes steps
/// strictly from the most recent one back.
// TODO: reuse step grid buffers across iterations; on 500x500 runs the
// alloc/free churn is roughly a third of wall time.
struct GradTape {
    std::vector<ModuleTape> steps;
    std::size_t cursor = 0;

    void reset() {
        steps.clear();
        cursor = 0;
    }
};

struct ModuleGrads {
    Grid grad_c1;
    Grid grad_c2;
    Vec2 grad_v;
};

/// Forward pass of one transfer step. `rounded` selects STE actuation
/// (production path) vs a fully continuous shift (surrogate evaluation);
/// pass a null tape for forward-only use. c1 is taken by value so the
/// tape can keep it without another copy.
inline std::pair<Grid, Grid> transfer_module_forward(Grid c1, const Grid& c2, Vec2 v,
                                                     bool rounded, GradTape* tape,
                                                     CubicKernel kern = {}) {
    Vec2 w = v;
    if (rounded) {
        const Vec2i a = ste_round(v);
        w = {static_cast<double>(a.x), static_cast<double>(a.y)};
    }
    const Vec2i snap{static_cast<int>(std::lround(w.x)), static_cast<int>(std::lround(w.y))};
    const Frame shifted_donor = translated(c1.frame, snap.y, snap.x);

    if (rounded && !intersects(dilated(shifted_donor, detail::kFrameMargin), c2.frame)) {
        // No shifted donor cell (nor any gradient stencil tap) can touch the
        // target extent, and an integer shift there and back is exact: the
        // step is a provable no-op.
        if (tape) {
            ModuleTape t;
            t.shift = w;
            t.rounded = rounded;
            t.bypass = true;
            t.donor_frame = c1.frame;
            t.target_frame = c2.frame;
            tape->steps.push_back(std::move(t));
            tape->cursor = tape->steps.size();
        }
        return {std::move(c1), c2};
    }

    const Frame work = dilated(bounding(c2.frame, shifted_donor), detail::kFrameMargin);
    Grid d1 = shift_sample(c1, w, work, kern);
    Grid c2w = detail::materialize(c2, work);
    auto [d1p, c2p] = transfer_forward(d1, c2w);
    Grid c1n = shift_sample(d1p, {-w.x, -w.y}, c1.frame, kern);
    Grid c2n = detail::crop(c2p, c2.frame, c2.oob);

    if (tape) {
        ModuleTape t;
        t.shift = w;
        t.rounded = rounded;
        t.donor_frame = c1.frame;
        t.target_frame = c2.frame;
        t.work_frame = work;
        t.fwd = ShiftTape{std::move(c1), w, work, kern};
        t.xfer = TransferTape{std::move(d1), std::move(c2w)};
        t.back = ShiftTape{std::move(d1p), {-w.x, -w.y}, c1.frame, kern};
        tape->steps.push_back(std::move(t));
        tape->cursor = tape->steps.size();
    }
    return {std::move(c1n), std::move(c2n)};
}

/// Spec-facing overload: STE-rounded actuation driven by a ShiftParam.
inline std::pair<Grid, Grid> transfer_module_forward(const Grid& c1, const Grid& c2,
                                                     const ShiftParam& p, GradTape& tape,
                                                     CubicKernel kern = {}) {
    if (p.a != ste_round(p.v))
        throw std::invalid_argument("transfer_module_forward: p.a inconsistent with p.v");
    return transfer_module_forward(c1, c2, p.v, /*rounded=*/true, &tape, kern);
}

/// Reverse pass of the most recent unconsumed module step. Chains the
/// shift-back, transfer, and shift adjoints; both shift legs contribute
/// to grad_v (the -w leg with flipped sign), and the STE Jacobian is the
/// identity, so grad_v is also the gradient w.r.t. the continuous shift.
inline ModuleGrads transfer_module_backward(GradTape& tape, const Grid& up_c1,
                                            const Grid& up_c2) {
    if (tape.cursor == 0)
        throw std::invalid_argument("transfer_module_backward: tape exhausted");
    const ModuleTape& t = tape.steps[--tape.cursor];
    if (up_c1.frame != t.donor_frame || up_c2.frame != t.target_frame)
        throw std::invalid_argument("transfer_module_backward: tape mismatch (frames)");

    if (t.bypass) return {up_c1, up_c2, {0.0, 0.0}};

    ShiftGrads g_back = shift_backward(t.back, up_c1);
    // embed upstream with zero fill: cells on the pad ring are oob
    // constants of c2, not parameters
    Grid up_c2w(t.work_frame, 0.0);
    for (int i = 0; i < t.work_frame.h; ++i)
        detail::translate_row(up_c2, 0.0, t.work_frame.y0 + i, 0, up_c2w.row(i), t.work_frame);
    auto [g_d1, g_c2w] = transfer_backward(t.xfer, g_back.grad_src, up_c2w);
    ShiftGrads g_fwd = shift_backward(t.fwd, g_d1);

    ModuleGrads out;
    out.grad_c1 = std::move(g_fwd.grad_src);
    out.grad_c2 = detail::crop(g_c2w, t.target_frame, 0.0);
    out.grad_v = {g_fwd.grad_s.x - g_back.grad_s.x, g_fwd.grad_s.y - g_back.grad_s.y};
    if (!std::isfinite(out.grad_v.x) || !std::isfinite(out.grad_v.y))
        throw std::runtime_error("transfer_module_backward: non-finite shift gradient");
    return out;
}

}  // namespace drplan
