"""Group arithmetic and Haar-measure quadrature for the two working groups.

The toolkit operates on two locally compact groups:

* the affine group ``Aff = R x R*`` with the law
  ``(b1, a1)(b2, a2) = (b1 + a1*b2, a1*a2)``, left Haar measure
  ``db da / a**2`` and modular function ``|a|``;
* the reduced Heisenberg group ``R^d x R^d x S1`` with a phase-twisted
  law.  It is unimodular; all integrals on it reduce to Lebesgue
  integrals over the time-frequency plane, so the quadrature side only
  carries the plane.

A :class:`GroupQuadrature` is a truncated chart of one of these groups
together with per-node Haar weights.  A :class:`GroupField` attaches
complex values to the nodes.  Everything here is immutable after
construction and free of hidden state; reductions run in ascending
node-index order so results are bitwise reproducible.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "AffinePoint",
    "HeisenbergPoint",
    "GroupQuadrature",
    "GroupField",
    "AFFINE_IDENTITY",
    "affine_mul",
    "affine_inv",
    "affine_modular",
    "heis_mul",
    "heis_inv",
    "heis_identity",
    "build_affine_quadrature",
    "build_tf_quadrature",
    "haar_integral",
    "affine_field_interpolate",
    "left_translate_field",
]

_UNIT_MODULUS_TOL = 1e-12
_CHART_SNAP = 1e-9  # relative slack when deciding grid membership


@dataclass(frozen=True)
class AffinePoint:
    """Point ``(b, a)`` of the affine group; ``b`` shifts, ``a`` scales."""

    b: float
    a: float

    def __post_init__(self):
        if self.a == 0:
            raise ValueError("affine scale must be nonzero")


AFFINE_IDENTITY = AffinePoint(0.0, 1.0)


def affine_mul(p: AffinePoint, q: AffinePoint) -> AffinePoint:
    """Group product ``(p.b + p.a*q.b, p.a*q.a)``."""
    return AffinePoint(p.b + p.a * q.b, p.a * q.a)


def affine_inv(p: AffinePoint) -> AffinePoint:
    """Group inverse ``(-b/a, 1/a)``."""
    return AffinePoint(-p.b / p.a, 1.0 / p.a)


def affine_modular(p: AffinePoint) -> float:
    """Modular function ``|a|`` (multiplicative on products)."""
    return abs(p.a)


@dataclass(frozen=True)
class HeisenbergPoint:
    """Point ``(x, omega, tau)`` of the reduced Heisenberg group.

    ``x`` and ``omega`` are real d-vectors (stored as tuples), ``tau``
    is a unit-modulus complex phase.
    """

    x: tuple
    omega: tuple
    tau: complex

    def __post_init__(self):
        object.__setattr__(self, "x", tuple(float(v) for v in np.atleast_1d(self.x)))
        object.__setattr__(
            self, "omega", tuple(float(v) for v in np.atleast_1d(self.omega))
        )
        object.__setattr__(self, "tau", complex(self.tau))
        if len(self.x) != len(self.omega):
            raise ValueError("x and omega must have the same dimension")
        if abs(abs(self.tau) - 1.0) > _UNIT_MODULUS_TOL:
            raise ValueError("tau must have unit modulus")

    @property
    def d(self) -> int:
        return len(self.x)


def heis_identity(d: int = 1) -> HeisenbergPoint:
    return HeisenbergPoint((0.0,) * d, (0.0,) * d, 1.0 + 0.0j)


def heis_mul(p: HeisenbergPoint, q: HeisenbergPoint) -> HeisenbergPoint:
    """Phase-twisted product; the phase picks up ``exp(pi*i*(q.x . p.w - p.x . q.w))``."""
    if p.d != q.d:
        raise ValueError("dimension mismatch in Heisenberg product")
    cross = sum(qx * pw for qx, pw in zip(q.x, p.omega)) - sum(
        px * qw for px, qw in zip(p.x, q.omega)
    )
    tau = p.tau * q.tau * cmath.exp(1j * math.pi * cross)
    x = tuple(a + b for a, b in zip(p.x, q.x))
    w = tuple(a + b for a, b in zip(p.omega, q.omega))
    return HeisenbergPoint(x, w, tau)


def heis_inv(p: HeisenbergPoint) -> HeisenbergPoint:
    """Inverse ``(-x, -omega, conj(tau))``; the cross term vanishes at ``q = -p``."""
    return HeisenbergPoint(
        tuple(-v for v in p.x), tuple(-v for v in p.omega), p.tau.conjugate()
    )


@dataclass(frozen=True)
class GroupQuadrature:
    """Nodes and Haar weights on a truncated chart.

    Affine charts are parameterized by a uniform b-grid on
    ``[b_lo, b_hi)`` (step ``db``), a uniform log-scale grid ``u`` on
    ``[log(a_min), log(a_max)]`` (``n_scales`` nodes, step ``du``) and a
    set of sign branches; the node at ``(b, eps*e^u)`` carries the
    weight ``db*du/|a|`` coming from ``db da/a**2``.

    Time-frequency charts are plain uniform grids on the plane with the
    Lebesgue weight ``dx*dw`` (the phase circle is dropped from all
    integrals; it contributes measure one).

    Node order is documented and fixed: affine values are indexed
    ``[sign, scale, b]`` with signs in listed order, scales by ascending
    ``u`` and b ascending; TF values are indexed ``[x, omega]``.
    """

    kind: str  # "affine" | "tf"
    # affine parameters
    b_lo: float = 0.0
    b_hi: float = 0.0
    n_b: int = 0
    a_min: float = 0.0
    a_max: float = 0.0
    n_scales: int = 0
    signs: tuple = ()
    # tf parameters
    x0: float = 0.0
    dx: float = 0.0
    n_x: int = 0
    w0: float = 0.0
    dw: float = 0.0
    n_w: int = 0

    def __post_init__(self):
        if self.kind not in ("affine", "tf"):
            raise ValueError(f"unknown quadrature kind {self.kind!r}")

    # --- affine chart geometry -------------------------------------------
    @property
    def db(self) -> float:
        return (self.b_hi - self.b_lo) / self.n_b

    @property
    def u_lo(self) -> float:
        return math.log(self.a_min)

    @property
    def u_hi(self) -> float:
        return math.log(self.a_max)

    @property
    def du(self) -> float:
        if self.n_scales < 2:
            raise ValueError("need at least two scale nodes")
        return (self.u_hi - self.u_lo) / (self.n_scales - 1)

    def b_grid(self) -> np.ndarray:
        return self.b_lo + self.db * np.arange(self.n_b)

    def u_grid(self) -> np.ndarray:
        return np.linspace(self.u_lo, self.u_hi, self.n_scales)

    def scale_grid(self) -> np.ndarray:
        return np.exp(self.u_grid())

    # --- tf chart geometry ------------------------------------------------
    def x_grid(self) -> np.ndarray:
        return self.x0 + self.dx * np.arange(self.n_x)

    def w_grid(self) -> np.ndarray:
        return self.w0 + self.dw * np.arange(self.n_w)

    # --- shared surface ----------------------------------------------------
    @property
    def shape(self) -> tuple:
        if self.kind == "affine":
            return (len(self.signs), self.n_scales, self.n_b)
        return (self.n_x, self.n_w)

    @property
    def n_nodes(self) -> int:
        return int(np.prod(self.shape))

    def node_weights(self) -> np.ndarray:
        """Per-node Haar weight, in node order."""
        if self.kind == "affine":
            w_scale = self.db * self.du / np.exp(self.u_grid())
            return np.broadcast_to(
                w_scale[None, :, None], self.shape
            ).copy()
        return np.full(self.shape, self.dx * self.dw)

    def node_points(self) -> tuple:
        """Chart coordinates of all nodes, broadcast to ``shape``.

        Affine: ``(b, a)`` arrays; TF: ``(x, w)`` arrays.
        """
        if self.kind == "affine":
            sgn = np.asarray(self.signs, dtype=float)[:, None, None]
            a = sgn * np.exp(self.u_grid())[None, :, None]
            b = np.broadcast_to(self.b_grid()[None, None, :], self.shape)
            return np.broadcast_to(b, self.shape), np.broadcast_to(a, self.shape)
        x = np.broadcast_to(self.x_grid()[:, None], self.shape)
        w = np.broadcast_to(self.w_grid()[None, :], self.shape)
        return x, w

    def to_dict(self) -> dict:
        if self.kind == "affine":
            return {
                "group": "affine",
                "b_lo": self.b_lo,
                "b_hi": self.b_hi,
                "n_b": self.n_b,
                "a_min": self.a_min,
                "a_max": self.a_max,
                "n_scales": self.n_scales,
                "signs": [int(s) for s in self.signs],
            }
        return {
            "group": "tf",
            "x0": self.x0,
            "dx": self.dx,
            "n_x": self.n_x,
            "w0": self.w0,
            "dw": self.dw,
            "n_w": self.n_w,
        }

    @staticmethod
    def from_dict(d: dict) -> "GroupQuadrature":
        if d.get("group") == "affine":
            return build_affine_quadrature(
                d["b_lo"], d["b_hi"], d["n_b"], d["a_min"], d["a_max"],
                d["n_scales"], tuple(d["signs"]),
            )
        if d.get("group") == "tf":
            return build_tf_quadrature(
                d["x0"], d["dx"], d["n_x"], d["w0"], d["dw"], d["n_w"]
            )
        raise ValueError("unknown quadrature serialization")


def build_affine_quadrature(
    b_lo: float,
    b_hi: float,
    n_b: int,
    a_min: float,
    a_max: float,
    n_scales: int,
    signs=(1, -1),
) -> GroupQuadrature:
    """Truncated affine chart with weights ``db*du/|a|``.

    The b-grid is uniform on ``[b_lo, b_hi)``; the scale grid is
    log-uniform with ``n_scales`` nodes on ``[a_min, a_max]``, replicated
    on each requested sign branch.
    """
    if not (0 < a_min < a_max):
        raise ValueError("need 0 < a_min < a_max")
    if n_b < 2 or n_scales < 2:
        raise ValueError("need n_b >= 2 and n_scales >= 2")
    if b_hi <= b_lo:
        raise ValueError("need b_hi > b_lo")
    signs = tuple(int(s) for s in signs)
    if not signs or any(s not in (1, -1) for s in signs):
        raise ValueError("signs must be a nonempty subset of {+1, -1}")
    if len(set(signs)) != len(signs):
        raise ValueError("duplicate sign branch")
    return GroupQuadrature(
        kind="affine",
        b_lo=float(b_lo),
        b_hi=float(b_hi),
        n_b=int(n_b),
        a_min=float(a_min),
        a_max=float(a_max),
        n_scales=int(n_scales),
        signs=signs,
    )


def build_tf_quadrature(
    x0: float, dx: float, n_x: int, w0: float, dw: float, n_w: int
) -> GroupQuadrature:
    """Uniform chart of the time-frequency plane, weight ``dx*dw``."""
    if dx <= 0 or dw <= 0 or n_x < 2 or n_w < 2:
        raise ValueError("invalid TF grid")
    return GroupQuadrature(
        kind="tf", x0=float(x0), dx=float(dx), n_x=int(n_x),
        w0=float(w0), dw=float(dw), n_w=int(n_w),
    )


@dataclass(frozen=True)
class GroupField:
    """Complex values of a function on the group, attached to a quadrature."""

    quad: GroupQuadrature
    values: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=np.complex128)
        if vals.shape != self.quad.shape:
            raise ValueError(
                f"values shape {vals.shape} does not match quadrature {self.quad.shape}"
            )
        object.__setattr__(self, "values", vals)

    def with_values(self, values, **meta) -> "GroupField":
        merged = dict(self.meta)
        merged.update(meta)
        return GroupField(self.quad, values, merged)

    def to_dict(self) -> dict:
        flat = self.values.ravel()
        return {
            "quadrature": self.quad.to_dict(),
            "re": flat.real.tolist(),
            "im": flat.imag.tolist(),
        }

    @staticmethod
    def from_dict(d: dict) -> "GroupField":
        quad = GroupQuadrature.from_dict(d["quadrature"])
        vals = np.asarray(d["re"], dtype=float) + 1j * np.asarray(d["im"], dtype=float)
        return GroupField(quad, vals.reshape(quad.shape))


def haar_integral(F: GroupField) -> complex:
    """Quadrature sum ``sum(value * weight)`` in ascending node order."""
    return complex(np.sum(F.values * F.quad.node_weights()))


def affine_field_interpolate(F: GroupField, b_q, a_q, with_mask: bool = False):
    """Evaluate an affine field at arbitrary chart points.

    Bilinear interpolation in ``(b, u)`` on the matching sign branch;
    points outside the chart read as zero.  Returns the values, plus the
    in-chart mask when ``with_mask`` is set.
    """
    quad = F.quad
    if quad.kind != "affine":
        raise ValueError("affine interpolation on a non-affine field")
    b_q = np.asarray(b_q, dtype=float)
    a_q = np.asarray(a_q, dtype=float)
    out = np.zeros(np.broadcast(b_q, a_q).shape, dtype=np.complex128)
    b_q, a_q = np.broadcast_arrays(b_q, a_q)

    inside_total = np.zeros(out.shape, dtype=bool)
    db, du = quad.db, quad.du
    n_b, n_u = quad.n_b, quad.n_scales
    for s_idx, sgn in enumerate(quad.signs):
        sel = (np.sign(a_q) == sgn) & (a_q != 0)
        if not np.any(sel):
            continue
        u = np.log(np.abs(a_q[sel]))
        fb = (b_q[sel] - quad.b_lo) / db
        fu = (u - quad.u_lo) / du
        ok = (
            (fb >= -_CHART_SNAP)
            & (fb <= n_b - 1 + _CHART_SNAP)
            & (fu >= -_CHART_SNAP)
            & (fu <= n_u - 1 + _CHART_SNAP)
        )
        if not np.any(ok):
            continue
        fb = np.clip(fb[ok], 0.0, n_b - 1.0)
        fu = np.clip(fu[ok], 0.0, n_u - 1.0)
        ib = np.minimum(fb.astype(int), n_b - 2)
        iu = np.minimum(fu.astype(int), n_u - 2)
        tb = fb - ib
        tu = fu - iu
        plane = F.values[s_idx]
        v00 = plane[iu, ib]
        v01 = plane[iu, ib + 1]
        v10 = plane[iu + 1, ib]
        v11 = plane[iu + 1, ib + 1]
        vals = (
            (1 - tu) * ((1 - tb) * v00 + tb * v01)
            + tu * ((1 - tb) * v10 + tb * v11)
        )
        idx = np.flatnonzero(sel)
        out.flat[idx[ok]] = vals
        mask = np.zeros(out.shape, dtype=bool)
        mask.flat[idx[ok]] = True
        inside_total |= mask
    if with_mask:
        return out, inside_total
    return out


def tf_field_interpolate(F: GroupField, x_q, w_q, with_mask: bool = False):
    """Bilinear interpolation on a TF-plane field; zero outside the chart."""
    quad = F.quad
    if quad.kind != "tf":
        raise ValueError("tf interpolation on a non-tf field")
    x_q = np.asarray(x_q, dtype=float)
    w_q = np.asarray(w_q, dtype=float)
    x_q, w_q = np.broadcast_arrays(x_q, w_q)
    fx = (x_q - quad.x0) / quad.dx
    fw = (w_q - quad.w0) / quad.dw
    ok = (
        (fx >= -_CHART_SNAP)
        & (fx <= quad.n_x - 1 + _CHART_SNAP)
        & (fw >= -_CHART_SNAP)
        & (fw <= quad.n_w - 1 + _CHART_SNAP)
    )
    out = np.zeros(x_q.shape, dtype=np.complex128)
    if np.any(ok):
        fxo = np.clip(fx[ok], 0.0, quad.n_x - 1.0)
        fwo = np.clip(fw[ok], 0.0, quad.n_w - 1.0)
        ix = np.minimum(fxo.astype(int), quad.n_x - 2)
        iw = np.minimum(fwo.astype(int), quad.n_w - 2)
        tx = fxo - ix
        tw = fwo - iw
        v = F.values
        vals = (
            (1 - tx) * ((1 - tw) * v[ix, iw] + tw * v[ix, iw + 1])
            + tx * ((1 - tw) * v[ix + 1, iw] + tw * v[ix + 1, iw + 1])
        )
        out[ok] = vals
    if with_mask:
        return out, ok
    return out


def left_translate_field(F: GroupField, y) -> GroupField:
    """Left translation ``(L_y F)(x) = F(y^{-1} x)`` by chart interpolation.

    Out-of-chart pullback points read as zero; the fraction of nodes
    whose pullback stayed in-chart is recorded in ``meta["coverage"]``.
    """
    quad = F.quad
    if quad.kind == "affine":
        if not isinstance(y, AffinePoint):
            raise ValueError("affine field needs an AffinePoint translation")
        b, a = quad.node_points()
        b_pull = (b - y.b) / y.a
        a_pull = a / y.a
        vals, mask = affine_field_interpolate(F, b_pull, a_pull, with_mask=True)
    else:
        if not isinstance(y, (tuple, list, np.ndarray)):
            raise ValueError("tf field needs an (x, w) translation")
        yx, yw = float(y[0]), float(y[1])
        x, w = quad.node_points()
        vals, mask = tf_field_interpolate(F, x - yx, w - yw, with_mask=True)
    coverage = float(np.mean(mask))
    return GroupField(quad, vals, {"coverage": coverage})
