"""Structural algebra on networks.

Operations here rewrite networks while preserving the computed function:
scaled addition, composition, width padding, input substitution, conversion
of skip-form nets to plain feedforward form, re-layering of shallow nets
into deep ones, and rewriting of bounded-ramp activations into ReLU pairs.

Signed values that must survive a ReLU layer untouched are stored with a
positivity shift: a channel holds ``v + c`` with ``c`` picked from interval
analysis so the ReLU argument stays nonnegative over the domain box, and
every consumer subtracts ``c`` through its bias. All shift constants are
recorded on the result's ``shifts`` metadata.
"""

from __future__ import annotations

import numpy as np

from .errors import (
    ConversionError,
    NoFreeChannelError,
    ParameterError,
    StructuralError,
)
from .nets import (
    Box,
    RELU_ACTIVATION,
    SIGMOIDAL_ACTIVATION,
    ShallowNet,
    SkipNet,
    StandardNet,
    affine_net,
    interval_bounds,
)

__all__ = [
    "add",
    "compose",
    "pad_width",
    "substitute_inputs",
    "skip_to_standard",
    "wide_to_deep",
    "sigmoidal_to_relu",
    "count_params",
    "count_params_standard",
]


def _require(cond: bool, message: str):
    if not cond:
        raise StructuralError(message)


def _same_domain(f1: SkipNet, f2: SkipNet):
    _require(
        np.array_equal(f1.domain.lo, f2.domain.lo)
        and np.array_equal(f1.domain.hi, f2.domain.hi),
        "operands must share a domain box",
    )


def _coeff_range(coeffs: np.ndarray, lo: np.ndarray, hi: np.ndarray) -> tuple:
    """Range of ``coeffs . v`` when each v[i] lies in [lo[i], hi[i]]."""
    pos = np.clip(coeffs, 0.0, None)
    neg = np.clip(coeffs, None, 0.0)
    return float(pos @ lo + neg @ hi), float(pos @ hi + neg @ lo)


# ---------------------------------------------------------------------------
# Scaled addition


def add(f1: SkipNet, f2: SkipNet, alpha1: float, alpha2: float) -> SkipNet:
    """Net computing ``alpha1 * f1(x) + alpha2 * f2(x)``.

    Hidden layers stack, f1's first, so the result depth is the sum of the
    operand depths and the width is unchanged. Operands must share input
    dimension, width, and domain box; a depth-0 operand folds into the
    other's output coefficients without adding layers.
    """
    _require(f1.input_dim == f2.input_dim, "input dimensions differ")
    _same_domain(f1, f2)
    alpha1, alpha2 = float(alpha1), float(alpha2)
    if f1.depth == 0 and f2.depth == 0:
        return affine_net(
            alpha1 * f1.out_a0 + alpha2 * f2.out_a0,
            alpha1 * f1.out_a + alpha2 * f2.out_a,
            f1.domain,
        )
    if f1.depth == 0 or f2.depth == 0:
        deep, a_deep = (f1, alpha1) if f1.depth > 0 else (f2, alpha2)
        flat, a_flat = (f2, alpha2) if f1.depth > 0 else (f1, alpha1)
        return SkipNet(
            input_dim=deep.input_dim,
            first_w=deep.first_w,
            first_b=deep.first_b,
            hidden_wx=deep.hidden_wx,
            hidden_wy=deep.hidden_wy,
            hidden_b=deep.hidden_b,
            out_a0=a_deep * deep.out_a0 + a_flat * flat.out_a0,
            out_a=a_deep * deep.out_a + a_flat * flat.out_a,
            out_beta=a_deep * deep.out_beta,
            domain=deep.domain,
            shifts=deep.shifts,
        )
    _require(
        f1.width == f2.width,
        f"widths differ ({f1.width} vs {f2.width}); pad_width the narrower operand",
    )
    width = f1.width
    # f2's first layer becomes an interior layer that still reads only x.
    bridge_wx = f2.first_w
    bridge_wy = np.zeros((width, width))
    bridge_b = f2.first_b
    return SkipNet(
        input_dim=f1.input_dim,
        first_w=f1.first_w,
        first_b=f1.first_b,
        hidden_wx=f1.hidden_wx + (bridge_wx,) + f2.hidden_wx,
        hidden_wy=f1.hidden_wy + (bridge_wy,) + f2.hidden_wy,
        hidden_b=f1.hidden_b + (bridge_b,) + f2.hidden_b,
        out_a0=alpha1 * f1.out_a0 + alpha2 * f2.out_a0,
        out_a=alpha1 * f1.out_a + alpha2 * f2.out_a,
        out_beta=np.vstack([alpha1 * f1.out_beta, alpha2 * f2.out_beta]),
        domain=f1.domain,
        shifts=f1.shifts + f2.shifts,
    )


# ---------------------------------------------------------------------------
# Width padding and input substitution


def pad_width(f: SkipNet, new_width: int) -> SkipNet:
    """Widen every layer to ``new_width`` with structurally dead units.

    Added units have zero weights, zero bias, and zero output coefficient,
    so evaluation is bit-identical. Padding a depth-0 net is a no-op.
    """
    if f.depth == 0:
        return f
    if new_width < f.width:
        raise StructuralError(f"cannot pad width {f.width} down to {new_width}")
    if new_width == f.width:
        return f
    extra = new_width - f.width
    d = f.input_dim

    def grow_rows(a):
        return np.vstack([a, np.zeros((extra, a.shape[1]))])

    def grow_square(a):
        out = np.zeros((new_width, new_width))
        out[: f.width, : f.width] = a
        return out

    def grow_vec(v):
        return np.concatenate([v, np.zeros(extra)])

    return SkipNet(
        input_dim=d,
        first_w=grow_rows(f.first_w),
        first_b=grow_vec(f.first_b),
        hidden_wx=tuple(grow_rows(a) for a in f.hidden_wx),
        hidden_wy=tuple(grow_square(a) for a in f.hidden_wy),
        hidden_b=tuple(grow_vec(v) for v in f.hidden_b),
        out_a0=f.out_a0,
        out_a=f.out_a,
        out_beta=np.hstack([f.out_beta, np.zeros((f.depth, extra))]),
        domain=f.domain,
        shifts=f.shifts,
    )


def substitute_inputs(f: SkipNet, T, offset, new_domain: Box) -> SkipNet:
    """Replace each input ``x_i`` by the affine form ``offset[i] + T[i] . z``.

    ``T`` has one row per old input with ``new_domain.dim`` columns. Every
    weight that read an old input is rewired exactly; the hidden structure
    is untouched.
    """
    T = np.asarray(T, dtype=float).reshape(f.input_dim, new_domain.dim)
    offset = np.asarray(offset, dtype=float).reshape(f.input_dim)
    if f.depth == 0:
        return affine_net(f.out_a0 + float(f.out_a @ offset), f.out_a @ T, new_domain)
    return SkipNet(
        input_dim=new_domain.dim,
        first_w=f.first_w @ T,
        first_b=f.first_b + f.first_w @ offset,
        hidden_wx=tuple(wx @ T for wx in f.hidden_wx),
        hidden_wy=f.hidden_wy,
        hidden_b=tuple(
            b + wx @ offset for wx, b in zip(f.hidden_wx, f.hidden_b)
        ),
        out_a0=f.out_a0 + float(f.out_a @ offset),
        out_a=f.out_a @ T,
        out_beta=f.out_beta,
        domain=new_domain,
        shifts=f.shifts,
    )


# ---------------------------------------------------------------------------
# Composition


def _fold_affine_inner(f2: SkipNet, f1: SkipNet) -> SkipNet:
    """Compose when the inner net is affine: rewire f2's first input."""
    a, a0 = f1.out_a, f1.out_a0
    d = f1.input_dim
    if f2.depth == 0:
        ay = float(f2.out_a[0])
        return affine_net(f2.out_a0 + ay * a0, f2.out_a[1:] + ay * a, f1.domain)
    return SkipNet(
        input_dim=d,
        first_w=f2.first_w[:, 1:] + np.outer(f2.first_w[:, 0], a),
        first_b=f2.first_b + f2.first_w[:, 0] * a0,
        hidden_wx=tuple(wx[:, 1:] + np.outer(wx[:, 0], a) for wx in f2.hidden_wx),
        hidden_wy=f2.hidden_wy,
        hidden_b=tuple(
            b + wx[:, 0] * a0 for wx, b in zip(f2.hidden_wx, f2.hidden_b)
        ),
        out_a0=f2.out_a0 + float(f2.out_a[0]) * a0,
        out_a=f2.out_a[1:] + float(f2.out_a[0]) * a,
        out_beta=f2.out_beta,
        domain=f1.domain,
        shifts=f2.shifts,
    )


def _beta_support_start(f: SkipNet) -> int | None:
    """First (1-based) layer whose output coefficients are not all zero."""
    for l in range(f.depth):
        if np.any(f.out_beta[l] != 0.0):
            return l + 1
    return None


def _find_accumulator_channel(f: SkipNet, start: int) -> int | None:
    """Channel usable for output threading over layers ``start+1 .. depth``.

    The channel must carry no output coefficient on those layers and no
    other unit may read it there, so overwriting it cannot change any
    surviving value. Highest index wins, matching where padding puts
    dead units.
    """
    lo, hi = start + 1, f.depth
    if lo > hi:
        return f.width - 1
    for j in range(f.width - 1, -1, -1):
        if np.any(f.out_beta[lo - 1 : hi, j] != 0.0):
            continue
        ok = True
        for layer in range(lo + 1, hi + 1):
            wy = f.hidden_wy[layer - 2]
            readers = np.flatnonzero(wy[:, j] != 0.0)
            if np.any(readers != j):
                ok = False
                break
        if ok:
            return j
    return None


def compose(f2: SkipNet, f1: SkipNet) -> SkipNet:
    """Net computing ``f2(f1(x), x)``; f2's first input is the inner value.

    The result stacks f1's layers, then f2's, so its depth is the sum of
    the operand depths and its width equals ``f1.width``. Requires
    ``f2.input_dim == f1.input_dim + 1`` and ``f2.width == f1.width - 1``.

    Inside f1's layers, a structurally free channel accumulates a running
    partial of f1's output so the full value becomes readable at f1's last
    layer; from there a shifted carry channel holds it for every f2 stage
    that reads the inner value. If f1 offers no free channel over the
    layers that need threading, ``NoFreeChannelError`` is raised; padding
    f1 one unit wider always makes room.

    A depth-0 operand is folded into the partner directly and waives the
    width precondition.
    """
    _require(
        f2.input_dim == f1.input_dim + 1,
        f"outer net must take {f1.input_dim + 1} inputs, has {f2.input_dim}",
    )
    if f1.depth == 0:
        return _fold_affine_inner(f2, f1)
    if f2.depth == 0:
        ay = float(f2.out_a[0])
        return SkipNet(
            input_dim=f1.input_dim,
            first_w=f1.first_w,
            first_b=f1.first_b,
            hidden_wx=f1.hidden_wx,
            hidden_wy=f1.hidden_wy,
            hidden_b=f1.hidden_b,
            out_a0=f2.out_a0 + ay * f1.out_a0,
            out_a=f2.out_a[1:] + ay * f1.out_a,
            out_beta=ay * f1.out_beta,
            domain=f1.domain,
            shifts=f1.shifts,
        )
    _require(
        f2.width == f1.width - 1,
        f"outer width must be {f1.width - 1} (inner width minus one), has {f2.width}",
    )
    d = f1.input_dim
    W = f1.width
    M = f2.width
    L1, L2 = f1.depth, f2.depth

    start = _beta_support_start(f1)
    acc_layers = range(start + 1, L1 + 1) if start is not None else range(0)
    acc_channel = None
    if len(acc_layers) > 0:
        acc_channel = _find_accumulator_channel(f1, start)
        if acc_channel is None:
            raise NoFreeChannelError(
                "inner net has no structurally free channel to thread its "
                "output; pad_width it one unit wider"
            )

    # Interval analysis drives every positivity shift.
    rep = interval_bounds(f1, f1.domain)
    new_shifts = []
    acc_shift = {}
    plo = phi = 0.0
    if start is not None:
        for l in range(start, L1 + 1):
            blo, bhi = _coeff_range(
                f1.out_beta[l - 1], rep.post_lo[l - 1], rep.post_hi[l - 1]
            )
            plo += blo
            phi += bhi
            if l < L1:
                acc_shift[l + 1] = max(0.0, -plo)
    alo, ahi = _coeff_range(f1.out_a, f1.domain.lo, f1.domain.hi)
    inner_lo = f1.out_a0 + alo + plo
    carry_shift = max(0.0, -inner_lo)

    # Coefficients expressing f1(x) over (last layer of f1, x, constant).
    e_coeffs = np.zeros(W)
    e_const = f1.out_a0
    if start is not None:
        e_coeffs = f1.out_beta[L1 - 1].copy()
        if len(acc_layers) > 0:
            e_coeffs[acc_channel] = 1.0
            e_const = f1.out_a0 - acc_shift[L1]
    e_alpha = f1.out_a.copy()

    hidden_wx = [a.copy() for a in f1.hidden_wx]
    hidden_wy = [a.copy() for a in f1.hidden_wy]
    hidden_b = [a.copy() for a in f1.hidden_b]
    first_w = f1.first_w
    first_b = f1.first_b

    # Thread the running output partial through the free channel.
    for t in acc_layers:
        wx = hidden_wx[t - 2]
        wy = hidden_wy[t - 2]
        b = hidden_b[t - 2]
        wx[acc_channel] = 0.0
        row = f1.out_beta[t - 2].copy()
        if t > start + 1:
            row[acc_channel] += 1.0
            b[acc_channel] = acc_shift[t] - acc_shift[t - 1]
        else:
            b[acc_channel] = acc_shift[t]
        wy[acc_channel] = row
        new_shifts.append(acc_shift[t])

    # Which f2 stages still read the inner value after the boundary.
    readers = [
        t
        for t in range(2, L2 + 1)
        if np.any(f2.hidden_wx[t - 2][:, 0] != 0.0)
    ]
    if float(f2.out_a[0]) != 0.0:
        readers.append(L2 + 1)
    last_reader = max(readers) if readers else 1
    carry_alive = last_reader - 1  # carry units exist on stage layers 1..carry_alive
    if carry_alive > 0:
        new_shifts.append(carry_shift)

    # Boundary layer: f2's first layer plus the carry channel.
    wx_b = np.zeros((W, d))
    wy_b = np.zeros((W, W))
    b_b = np.zeros(W)
    for m in range(M):
        wy_b[m] = f2.first_w[m, 0] * e_coeffs
        wx_b[m] = f2.first_w[m, 1:] + f2.first_w[m, 0] * e_alpha
        b_b[m] = f2.first_b[m] + f2.first_w[m, 0] * e_const
    if carry_alive > 0:
        wy_b[W - 1] = e_coeffs
        wx_b[W - 1] = e_alpha
        b_b[W - 1] = e_const + carry_shift
    hidden_wx.append(wx_b)
    hidden_wy.append(wy_b)
    hidden_b.append(b_b)

    # Remaining f2 stages, rewired to the carry channel.
    for t in range(2, L2 + 1):
        wx2 = f2.hidden_wx[t - 2]
        wy2 = f2.hidden_wy[t - 2]
        b2 = f2.hidden_b[t - 2]
        wx = np.zeros((W, d))
        wy = np.zeros((W, W))
        b = np.zeros(W)
        for m in range(M):
            wy[m, :M] = wy2[m]
            wy[m, W - 1] = wx2[m, 0]
            wx[m] = wx2[m, 1:]
            b[m] = b2[m] - wx2[m, 0] * carry_shift
        if t <= carry_alive:
            wy[W - 1, W - 1] = 1.0
        hidden_wx.append(wx)
        hidden_wy.append(wy)
        hidden_b.append(b)

    out_beta = np.zeros((L1 + L2, W))
    out_beta[L1:, :M] = f2.out_beta
    ay = float(f2.out_a[0])
    if ay != 0.0:
        out_beta[L1 + L2 - 1, W - 1] = ay
    return SkipNet(
        input_dim=d,
        first_w=first_w,
        first_b=first_b,
        hidden_wx=tuple(hidden_wx),
        hidden_wy=tuple(hidden_wy),
        hidden_b=tuple(hidden_b),
        out_a0=f2.out_a0 - ay * carry_shift,
        out_a=f2.out_a[1:].copy(),
        out_beta=out_beta,
        domain=f1.domain,
        shifts=f1.shifts + f2.shifts + tuple(new_shifts),
    )


# ---------------------------------------------------------------------------
# Skip form to plain feedforward form


def skip_to_standard(f: SkipNet) -> StandardNet:
    """Rewrite a skip-form net as a plain feedforward net.

    Every hidden layer of the result has width ``M + d + 1``: the M original
    units, d channels that carry the (shifted) inputs forward, and one
    channel that accumulates the output affine form layer by layer.
    """
    if f.depth < 1:
        raise ConversionError("depth-0 nets have no layers to convert")
    d, M, L = f.input_dim, f.width, f.depth
    rep = interval_bounds(f, f.domain)
    cx = np.maximum(0.0, -f.domain.lo)
    alo, ahi = _coeff_range(f.out_a, f.domain.lo, f.domain.hi)
    acc_shift = [0.0] * (L + 1)
    acc_shift[1] = max(0.0, -(f.out_a0 + alo))
    plo = 0.0
    for l in range(1, L):
        blo, _ = _coeff_range(f.out_beta[l - 1], rep.post_lo[l - 1], rep.post_hi[l - 1])
        plo += blo
        acc_shift[l + 1] = max(0.0, -(f.out_a0 + alo + plo))

    width = M + d + 1
    layer_w, layer_b = [], []
    W1 = np.zeros((width, d))
    b1 = np.zeros(width)
    W1[:M] = f.first_w
    b1[:M] = f.first_b
    for i in range(d):
        W1[M + i, i] = 1.0
        b1[M + i] = cx[i]
    W1[M + d] = f.out_a
    b1[M + d] = f.out_a0 + acc_shift[1]
    layer_w.append(W1)
    layer_b.append(b1)
    for l in range(1, L):
        Wl = np.zeros((width, width))
        bl = np.zeros(width)
        wx, wy, b = f.hidden_wx[l - 1], f.hidden_wy[l - 1], f.hidden_b[l - 1]
        Wl[:M, :M] = wy
        Wl[:M, M : M + d] = wx
        bl[:M] = b - wx @ cx
        for i in range(d):
            Wl[M + i, M + i] = 1.0
        Wl[M + d, :M] = f.out_beta[l - 1]
        Wl[M + d, M + d] = 1.0
        bl[M + d] = acc_shift[l + 1] - acc_shift[l]
        layer_w.append(Wl)
        layer_b.append(bl)
    out_w = np.zeros(width)
    out_w[:M] = f.out_beta[L - 1]
    out_w[M + d] = 1.0
    return StandardNet(
        input_dim=d,
        layer_w=tuple(layer_w),
        layer_b=tuple(layer_b),
        out_w=out_w,
        out_b=-acc_shift[L],
        domain=f.domain,
        shifts=tuple(cx) + tuple(acc_shift[1 : L + 1]),
    )


# ---------------------------------------------------------------------------
# Shallow net re-layering


def wide_to_deep(s: ShallowNet, partition) -> StandardNet:
    """Restack a one-layer ReLU net into ``len(partition)`` hidden layers.

    Layer l hosts ``partition[l]`` of the original units next to d shifted
    input channels and one accumulator channel holding the partial sum of
    all units placed so far, so layer l has ``partition[l] + d + 1`` nodes.
    """
    if s.activation != RELU_ACTIVATION:
        raise ConversionError("re-layering requires ReLU units; run sigmoidal_to_relu first")
    partition = [int(m) for m in partition]
    if any(m < 1 for m in partition):
        raise StructuralError("partition entries must be positive")
    if sum(partition) != s.units:
        raise StructuralError(
            f"partition sums to {sum(partition)}, net has {s.units} units"
        )
    d = s.input_dim
    L = len(partition)
    cx = np.maximum(0.0, -s.domain.lo)
    unit_lo = np.empty(s.units)
    unit_hi = np.empty(s.units)
    for j in range(s.units):
        lo, hi = _coeff_range(s.a[j], s.domain.lo, s.domain.hi)
        unit_lo[j] = max(0.0, lo + s.b[j])
        unit_hi[j] = max(0.0, hi + s.b[j])

    starts = np.concatenate([[0], np.cumsum(partition)])
    acc_shift = [0.0] * (L + 1)
    acc_shift[1] = max(0.0, -s.c0)
    running_lo = s.c0
    for l in range(1, L):
        block = slice(starts[l - 1], starts[l])
        blo, _ = _coeff_range(s.c[block], unit_lo[block], unit_hi[block])
        running_lo += blo
        acc_shift[l + 1] = max(0.0, -running_lo)

    layer_w, layer_b = [], []
    prev_width = d
    prev_m = 0
    for l in range(1, L + 1):
        m_l = partition[l - 1]
        width = d + m_l + 1
        Wl = np.zeros((width, prev_width if l > 1 else d))
        bl = np.zeros(width)
        block = slice(starts[l - 1], starts[l])
        if l == 1:
            for i in range(d):
                Wl[i, i] = 1.0
                bl[i] = cx[i]
            Wl[d : d + m_l] = s.a[block]
            bl[d : d + m_l] = s.b[block]
            bl[d + m_l] = s.c0 + acc_shift[1]
        else:
            for i in range(d):
                Wl[i, i] = 1.0
            Wl[d : d + m_l, :d] = s.a[block]
            bl[d : d + m_l] = s.b[block] - s.a[block] @ cx
            prev_block = slice(starts[l - 2], starts[l - 1])
            Wl[d + m_l, d : d + prev_m] = s.c[prev_block]
            Wl[d + m_l, d + prev_m] = 1.0
            bl[d + m_l] = acc_shift[l] - acc_shift[l - 1]
        layer_w.append(Wl)
        layer_b.append(bl)
        prev_width = width
        prev_m = m_l
    out_w = np.zeros(d + partition[-1] + 1)
    out_w[d : d + partition[-1]] = s.c[starts[L - 1] : starts[L]]
    out_w[d + partition[-1]] = 1.0
    return StandardNet(
        input_dim=d,
        layer_w=tuple(layer_w),
        layer_b=tuple(layer_b),
        out_w=out_w,
        out_b=-acc_shift[L],
        domain=s.domain,
        shifts=tuple(cx) + tuple(acc_shift[1 : L + 1]),
    )


def sigmoidal_to_relu(s: ShallowNet) -> ShallowNet:
    """Expand each bounded-ramp unit into a ReLU pair.

    ``c * ramp(z)`` becomes ``c * ReLU(z) - c * ReLU(z - 1)``, doubling the
    unit count while computing the identical function.
    """
    if s.activation != SIGMOIDAL_ACTIVATION:
        raise StructuralError(
            f"expected activation {SIGMOIDAL_ACTIVATION!r}, got {s.activation!r}"
        )
    n = s.units
    a = np.empty((2 * n, s.input_dim))
    b = np.empty(2 * n)
    c = np.empty(2 * n)
    a[0::2] = s.a
    a[1::2] = s.a
    b[0::2] = s.b
    b[1::2] = s.b - 1.0
    c[0::2] = s.c
    c[1::2] = -s.c
    return ShallowNet(
        input_dim=s.input_dim,
        a=a,
        b=b,
        c=c,
        c0=s.c0,
        activation=RELU_ACTIVATION,
        domain=s.domain,
    )


# ---------------------------------------------------------------------------
# Parameter counting


def count_params(width: int, depth: int, input_dim: int) -> int:
    """Parameter count of the standard form, one constant channel per layer.

    Counts ``(d+1)(M+d+1)`` for the first layer, ``(M+d+2)^2`` per deeper
    layer (each of the M+d+1 units plus a constant channel is charged
    M+d+2 numbers), and ``M+d+2`` for the output map. This overcounts the
    materialized arrays by ``(M+d+2)(depth-1)``; ``count_params_standard``
    returns the exact array census.
    """
    if width < 1 or depth < 1 or input_dim < 1:
        raise ParameterError("count_params requires positive width, depth, input_dim")
    m = width + input_dim
    return (input_dim + 1) * (m + 1) + (m + 2) * (m + 2) * (depth - 1) + (m + 2)


def count_params_standard(net: StandardNet) -> int:
    """Number of stored weights and biases in a plain feedforward net."""
    total = 0
    for W, b in zip(net.layer_w, net.layer_b):
        total += W.size + b.size
    return total + net.out_w.size + 1
