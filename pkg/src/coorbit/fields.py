"""Weighted L^p_m calculus on group fields.

Norms, involutions, group convolution, U-oscillation and the Young
inequality checks all live here.  Fields are either affine
:class:`~coorbit.groups.GroupField` objects or plane
:class:`~coorbit.voice.TFField` objects; every operation dispatches on
the type.

Group convolution on the affine chart,

    (F * G)(x) = sum_y F(y) G(y^{-1} x) weight(y),

uses the closed form ``y^{-1} x = ((b - b')/a', a/a')``.  The default
implementation reorganizes the double sum into one FFT correlation per
input-scale row (the inner sum over ``b'`` is a discrete correlation on
the uniform b-grid); it evaluates the kernel at exactly the same
interpolated points as the literal double sum, so the two paths agree
to roundoff.  Convolutions are truncated-domain quantities: the outer
chart ring's share of each operand's L1 mass is attached to the result
as a tail report, never hidden.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.fft import fft, ifft, next_fast_len

from .groups import (
    GroupField,
    affine_field_interpolate,
    tf_field_interpolate,
)
from .voice import TFField
from .weights import (
    WeightSpec,
    custom_weight,
    eval_weight_affine,
    eval_weight_tf,
    is_p_control,
    poly_tf,
    power_scale,
)

__all__ = [
    "NeighborhoodSpec",
    "affine_box",
    "tf_box",
    "lpm_norm",
    "field_l2_norm",
    "involute",
    "convolve",
    "tf_convolve",
    "oscillation",
    "young_check",
    "YoungReport",
    "kernel_project",
    "unit_weight",
    "weight_reciprocal",
]

_DIRECT_NODE_LIMIT = 6000  # "auto" switches to the direct sum below this
_DEFAULT_OSC_SAMPLES = 7


@dataclass(frozen=True)
class NeighborhoodSpec:
    """Compact identity neighbourhood used for oscillation and tiling.

    Affine variant: the rectangle ``[-beta/2, beta/2] x [alpha^-1/2,
    alpha^1/2]`` on the positive-scale branch.  TF variant: the centered
    box with side lengths ``beta_x``, ``beta_w``.  ``n_samples`` is the
    per-axis sampling density used to approximate suprema over the set.
    """

    kind: str
    beta: float = 0.0
    alpha: float = 1.0
    beta_x: float = 0.0
    beta_w: float = 0.0
    n_samples: int = _DEFAULT_OSC_SAMPLES

    def __post_init__(self):
        if self.kind == "affine":
            if self.beta <= 0 or self.alpha <= 1:
                raise ValueError("affine neighbourhood needs beta > 0, alpha > 1")
        elif self.kind == "tf":
            if self.beta_x <= 0 or self.beta_w <= 0:
                raise ValueError("tf neighbourhood needs positive box sides")
        else:
            raise ValueError(f"unknown neighbourhood kind {self.kind!r}")
        if self.n_samples < 2:
            raise ValueError("need at least two sample points per axis")

    def haar_mass(self) -> float:
        if self.kind == "affine":
            return self.beta * (math.sqrt(self.alpha) - 1 / math.sqrt(self.alpha))
        return self.beta_x * self.beta_w

    def offsets(self):
        """Sample points of the set, identity included (odd densities)."""
        n = self.n_samples
        if self.kind == "affine":
            delta = np.linspace(-self.beta / 2, self.beta / 2, n)
            tau = np.exp(np.linspace(-math.log(self.alpha) / 2,
                                     math.log(self.alpha) / 2, n))
            d, t = np.meshgrid(delta, tau, indexing="ij")
            return d.ravel(), t.ravel()
        ox = np.linspace(-self.beta_x / 2, self.beta_x / 2, n)
        ow = np.linspace(-self.beta_w / 2, self.beta_w / 2, n)
        dx, dw = np.meshgrid(ox, ow, indexing="ij")
        return dx.ravel(), dw.ravel()

    def scaled(self, factor: float) -> "NeighborhoodSpec":
        """Shrink (factor < 1) toward the identity, geometry preserved."""
        if self.kind == "affine":
            return NeighborhoodSpec(
                "affine",
                beta=self.beta * factor,
                alpha=self.alpha**factor,
                n_samples=self.n_samples,
            )
        return NeighborhoodSpec(
            "tf",
            beta_x=self.beta_x * factor,
            beta_w=self.beta_w * factor,
            n_samples=self.n_samples,
        )

    def to_dict(self) -> dict:
        if self.kind == "affine":
            return {"kind": "affine", "beta": self.beta, "alpha": self.alpha,
                    "n_samples": self.n_samples}
        return {"kind": "tf", "beta_x": self.beta_x, "beta_w": self.beta_w,
                "n_samples": self.n_samples}

    @staticmethod
    def from_dict(d: dict) -> "NeighborhoodSpec":
        if d["kind"] == "affine":
            return affine_box(d["beta"], d["alpha"], d.get("n_samples", _DEFAULT_OSC_SAMPLES))
        return tf_box(d["beta_x"], d["beta_w"], d.get("n_samples", _DEFAULT_OSC_SAMPLES))


def affine_box(beta: float, alpha: float, n_samples: int = _DEFAULT_OSC_SAMPLES) -> NeighborhoodSpec:
    return NeighborhoodSpec("affine", beta=beta, alpha=alpha, n_samples=n_samples)


def tf_box(beta_x: float, beta_w: float, n_samples: int = _DEFAULT_OSC_SAMPLES) -> NeighborhoodSpec:
    return NeighborhoodSpec("tf", beta_x=beta_x, beta_w=beta_w, n_samples=n_samples)


def unit_weight(kind: str) -> WeightSpec:
    return power_scale(0.0) if kind == "affine" else poly_tf(0.0, 0.0)


def weight_reciprocal(w: WeightSpec) -> WeightSpec:
    """Pointwise reciprocal 1/w as a weight on the same group."""
    if w.family == "power_scale":
        return power_scale(-w.s)
    if w.family == "symmetric_power":
        rho = w.rho
        return custom_weight(
            lambda b, a: 1.0 / (a**rho + a ** (-rho)), "affine"
        )
    if w.family == "poly_tf":
        r, s = w.r, w.s
        return custom_weight(
            lambda x, om: (1.0 + x) ** (-r) * (1.0 + om) ** (-s), "tf"
        )
    ev = w.evaluator
    return custom_weight(lambda *args: 1.0 / ev(*args), w.group)


def _field_kind(F) -> str:
    if isinstance(F, GroupField):
        return F.quad.kind
    if isinstance(F, TFField):
        return "tf"
    raise TypeError(f"not a field: {type(F)!r}")


def _field_parts(F):
    """(values, haar weights, weight evaluation arrays) for either field type."""
    if isinstance(F, GroupField):
        quad = F.quad
        wts = quad.node_weights()
        if quad.kind == "affine":
            b, a = quad.node_points()
            return F.values, wts, ("affine", b, a)
        x, w = quad.node_points()
        return F.values, wts, ("tf", x, w)
    if isinstance(F, TFField):
        wts = np.full(F.values.shape, F.cell)
        x = np.broadcast_to(F.x_grid()[:, None], F.values.shape)
        w = np.broadcast_to(F.w_grid()[None, :], F.values.shape)
        return F.values, wts, ("tf", x, w)
    raise TypeError(f"not a field: {type(F)!r}")


def _weight_at_nodes(m: WeightSpec, coords) -> np.ndarray:
    kind, c1, c2 = coords
    if m.group_kind != kind:
        raise ValueError(f"weight on {m.group_kind!r} applied to a {kind!r} field")
    if kind == "affine":
        return np.asarray(eval_weight_affine(m, c1, c2), dtype=float)
    return np.asarray(eval_weight_tf(m, c1, c2), dtype=float)


def lpm_norm(F, p: float, m: WeightSpec | None = None) -> float:
    """Weighted norm ``||F m||_{L^p}``; the grid max realizes p = inf."""
    vals, wts, coords = _field_parts(F)
    if m is None:
        m = unit_weight(coords[0])
    mw = _weight_at_nodes(m, coords)
    a = np.abs(vals) * mw
    if math.isinf(p):
        return float(np.max(a))
    if p < 1:
        raise ValueError("p must lie in [1, inf]")
    return float(np.sum(a**p * wts) ** (1.0 / p))


def field_l2_norm(F) -> float:
    return lpm_norm(F, 2.0)


def involute(F, kind: str = "nabla"):
    """``F^v(x) = F(x^{-1})`` or ``F^nabla(x) = conj F(x^{-1})`` by interpolation."""
    if kind not in ("v", "vee", "nabla"):
        raise ValueError("kind must be 'vee' or 'nabla'")
    conj = kind == "nabla"
    if isinstance(F, GroupField) and F.quad.kind == "affine":
        b, a = F.quad.node_points()
        vals = affine_field_interpolate(F, -b / a, 1.0 / a)
    elif isinstance(F, GroupField):
        x, w = F.quad.node_points()
        vals = tf_field_interpolate(F, -x, -w)
    else:
        vals = tf_field_interpolate(F.as_group_field(), -F.x_grid()[:, None],
                                    -F.w_grid()[None, :])
    if conj:
        vals = np.conj(vals)
    if isinstance(F, GroupField):
        return GroupField(F.quad, vals)
    return F.with_values(vals)


def _check_same_quadrature(F: GroupField, G: GroupField):
    if F.quad.to_dict() != G.quad.to_dict():
        raise ValueError("convolution needs matching quadratures")


def _edge_l1_fraction(F: GroupField) -> float:
    wts = F.quad.node_weights()
    mass = np.abs(F.values) * wts
    total = float(np.sum(mass))
    if total == 0.0:
        return 0.0
    mask = np.zeros(F.values.shape, dtype=bool)
    mask[:, :1, :] = True
    mask[:, -1:, :] = True
    mask[:, :, :2] = True
    mask[:, :, -2:] = True
    return float(np.sum(mass[mask]) / total)


def _convolve_direct(F: GroupField, G: GroupField) -> np.ndarray:
    quad = F.quad
    b_n, a_n = quad.node_points()
    wts = quad.node_weights().ravel()
    fb, fa = b_n.ravel(), a_n.ravel()
    fv = F.values.ravel() * wts
    out = np.empty(quad.n_nodes, dtype=np.complex128)
    for idx in range(quad.n_nodes):
        bx = b_n.flat[idx]
        ax = a_n.flat[idx]
        vals = affine_field_interpolate(G, (bx - fb) / fa, ax / fa)
        out[idx] = np.sum(fv * vals)
    return out.reshape(quad.shape)


def _convolve_fast(F: GroupField, G: GroupField) -> np.ndarray:
    # One FFT correlation per (input sign, input scale, output sign) block.
    # The kernel block is evaluated at the same bilinear interpolation
    # points as the direct sum; zero regions (b-offsets mapping outside
    # the chart, scale ratios outside the u-range) are trimmed exactly.
    # Circular length 2*n_b is alias-free for the retained output window.
    quad = F.quad
    n_b = quad.n_b
    n_u = quad.n_scales
    db = quad.db
    du = quad.du
    u = quad.u_grid()
    scales = np.exp(u)
    L = next_fast_len(2 * n_b)
    out = np.zeros(quad.shape, dtype=np.complex128)
    snap = 1e-9
    sign_pos = {s: i for i, s in enumerate(quad.signs)}
    b_max = quad.b_lo + (n_b - 1) * db

    for si, sgn_in in enumerate(quad.signs):
        F_hat = fft(F.values[si], n=L, axis=-1, workers=-1)
        for j in range(n_u):
            a_in = sgn_in * scales[j]
            w_j = db * du / abs(a_in)
            bound1 = quad.b_lo * a_in / db
            bound2 = b_max * a_in / db
            m_lo = max(int(math.ceil(min(bound1, bound2) - snap)), -(n_b - 1))
            m_hi = min(int(math.floor(max(bound1, bound2) + snap)), n_b - 1)
            if m_lo > m_hi:
                continue
            ms = np.arange(m_lo, m_hi + 1)
            fb = np.clip((ms * db / a_in - quad.b_lo) / db, 0.0, n_b - 1.0)
            ib = np.minimum(fb.astype(int), n_b - 2)
            tb = fb - ib
            for so, sgn_out in enumerate(quad.signs):
                ratio_sign = sgn_out * sgn_in
                if ratio_sign not in sign_pos:
                    continue
                plane = G.values[sign_pos[ratio_sign]]
                fu_all = (u - u[j] - quad.u_lo) / du
                rows = np.flatnonzero(
                    (fu_all >= -snap) & (fu_all <= n_u - 1 + snap)
                )
                if rows.size == 0:
                    continue
                fu = np.clip(fu_all[rows], 0.0, n_u - 1.0)
                iu = np.minimum(fu.astype(int), n_u - 2)
                tu = (fu - iu)[:, None]
                line = (1.0 - tu) * plane[iu] + tu * plane[iu + 1]
                block = (1.0 - tb)[None, :] * line[:, ib] + tb[None, :] * line[:, ib + 1]
                if not np.any(block):
                    continue
                gm = np.zeros((rows.size, L), dtype=np.complex128)
                gm[:, m_lo + n_b - 1 : m_hi + n_b] = block
                conv = ifft(
                    fft(gm, axis=-1, workers=-1) * F_hat[j][None, :],
                    axis=-1,
                    workers=-1,
                )
                out[so, rows] += w_j * conv[:, n_b - 1 : 2 * n_b - 1]
    return out


def convolve(F: GroupField, G: GroupField, method: str = "auto") -> GroupField:
    """Group convolution ``(F * G)(x) = sum_y F(y) G(y^{-1}x) w(y)``.

    ``method="direct"`` runs the literal double sum (the oracle);
    ``"fast"`` runs the per-scale-row FFT correlation, which queries the
    kernel at the identical interpolation points and matches the direct
    sum to roundoff.  ``"auto"`` picks by size.
    """
    if F.quad.kind != "affine" or G.quad.kind != "affine":
        raise ValueError("convolve works on affine fields; use tf_convolve")
    _check_same_quadrature(F, G)
    if method == "auto":
        method = "direct" if F.quad.n_nodes <= _DIRECT_NODE_LIMIT else "fast"
    if method == "direct":
        vals = _convolve_direct(F, G)
    elif method == "fast":
        vals = _convolve_fast(F, G)
    else:
        raise ValueError(f"unknown method {method!r}")
    meta = {
        "truncation": {
            "left_factor_edge_l1_fraction": _edge_l1_fraction(F),
            "right_factor_edge_l1_fraction": _edge_l1_fraction(G),
        }
    }
    return GroupField(F.quad, vals, meta)


def tf_convolve(F: TFField, G: TFField) -> TFField:
    """Abelian plane convolution, ``dx*dw``-scaled, grids matching."""
    if not isinstance(F, TFField) or not isinstance(G, TFField):
        raise ValueError("tf_convolve needs two TF fields")
    if not F.same_grid(G):
        raise ValueError("tf_convolve needs matching grids")
    ox = -F.x0 / F.dx
    ow = -F.w0 / F.dw
    if abs(ox - round(ox)) > 1e-6 or abs(ow - round(ow)) > 1e-6:
        raise ValueError("grid origins must be integer multiples of the steps")
    ox, ow = int(round(ox)), int(round(ow))
    from scipy.signal import fftconvolve

    full = fftconvolve(F.values, G.values, mode="full")
    out = np.zeros_like(F.values)
    # clip the needed window of the full convolution against its bounds
    x_sel = np.arange(F.n_x) + ox
    w_sel = np.arange(F.n_w) + ow
    x_ok = (x_sel >= 0) & (x_sel < full.shape[0])
    w_ok = (w_sel >= 0) & (w_sel < full.shape[1])
    out[np.ix_(x_ok, w_ok)] = full[np.ix_(x_sel[x_ok], w_sel[w_ok])]
    return F.with_values(out * F.cell)


def oscillation(G, U: NeighborhoodSpec):
    """Pointwise ``max_u |G(u x) - G(x)|`` over the U sample points.

    The essential supremum is approximated on the finite offset grid of
    ``U``; out-of-chart evaluations read zero, which only inflates the
    oscillation near the chart edge (the safe direction for every
    certificate built on top of it).
    """
    kind = _field_kind(G)
    if U.kind != kind:
        raise ValueError("neighbourhood and field live on different groups")
    if kind == "affine":
        b, a = G.quad.node_points()
        osc = np.zeros(G.values.shape, dtype=float)
        deltas, taus = U.offsets()
        for d, t in zip(deltas, taus):
            vals = affine_field_interpolate(G, d + t * b, t * a)
            np.maximum(osc, np.abs(vals - G.values), out=osc)
        return GroupField(G.quad, osc.astype(np.complex128))
    if isinstance(G, TFField):
        base = G.as_group_field()
    else:
        base = G
    x, w = base.quad.node_points()
    osc = np.zeros(base.values.shape, dtype=float)
    dxs, dws = U.offsets()
    for d, t in zip(dxs, dws):
        vals = tf_field_interpolate(base, x + d, w + t)
        np.maximum(osc, np.abs(vals - base.values), out=osc)
    if isinstance(G, TFField):
        return G.with_values(osc.astype(np.complex128))
    return GroupField(base.quad, osc.astype(np.complex128))


@dataclass(frozen=True)
class YoungReport:
    checks: tuple  # of dicts {name, lhs, rhs, pass}
    slack: float

    @property
    def passed(self) -> bool:
        return all(c["pass"] for c in self.checks)

    def to_dict(self) -> dict:
        return {"slack": self.slack, "pass": self.passed,
                "checks": [dict(c) for c in self.checks]}


def young_check(
    F: GroupField,
    G: GroupField,
    p: float,
    m: WeightSpec,
    w: WeightSpec,
    slack: float = 0.05,
) -> YoungReport:
    """Numerically test the four convolution-module inequalities.

    Checks, with ``q`` conjugate to ``p`` and ``H = G``:

    * algebra:   ||G * F||_{L1_w}      <= ||G||_{L1_w} ||F||_{L1_w}
    * left:      ||G * F||_{Lp_m}      <= ||G||_{L1_w} ||F||_{Lp_m}
    * right:     ||F * G^vee||_{Lp_m}  <= ||F||_{Lp_m} ||G||_{L1_w}
    * duality:   ||F * H^vee||_{Linf_{1/w}} <= ||F||_{Lp_m} ||H||_{Lq_{1/m}}

    The slack absorbs quadrature and interpolation error; violations
    beyond it indicate a defect, not a tolerance issue.
    """
    if not is_p_control(w, m, p):
        raise ValueError("w is not a p-control-weight of m")
    q = math.inf if p == 1 else (1.0 if math.isinf(p) else p / (p - 1.0))
    GF = convolve(G, F)
    G_vee = involute(G, "vee")
    FGv = convolve(F, G_vee)

    norm_G_w = lpm_norm(G, 1.0, w)
    norm_F_w = lpm_norm(F, 1.0, w)
    norm_F_pm = lpm_norm(F, p, m)
    inv_w = weight_reciprocal(w)
    inv_m = weight_reciprocal(m)

    checks = []

    def add(name, lhs, rhs):
        checks.append(
            {"name": name, "lhs": lhs, "rhs": rhs,
             "pass": bool(lhs <= rhs * (1.0 + slack))}
        )

    add("algebra_l1w", lpm_norm(GF, 1.0, w), norm_G_w * norm_F_w)
    add("left_module", lpm_norm(GF, p, m), norm_G_w * norm_F_pm)
    add("right_module", lpm_norm(FGv, p, m), norm_F_pm * norm_G_w)
    add("duality_sup", lpm_norm(FGv, math.inf, inv_w),
        norm_F_pm * lpm_norm(G, q, inv_m))
    return YoungReport(tuple(checks), slack)


def kernel_project(F: GroupField, K: GroupField, method: str = "auto") -> GroupField:
    """Projection onto the transform image: ``P(F) = F * K``."""
    return convolve(F, K, method=method)
