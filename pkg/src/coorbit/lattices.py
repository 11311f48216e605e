"""Point lattices, well-spreadness verification, and tile partitions.

The affine lattice with parameters ``alpha > 1``, ``beta > 0`` is the
family ``(eps * alpha^j * beta * k, eps * alpha^j)`` over integer
``(j, k)`` windows and sign branches; it tiles the group exactly by the
rectangles ``x_i U`` with ``U = [-beta/2, beta/2] x [alpha^-1/2,
alpha^1/2]``.  TF lattices are scaled integer lattices ``c A Z^2`` of
the plane (separable or general invertible generator).

Membership of a chart point in a tile ``x_i U`` reduces to closed-form
index conditions, so density checks, cover counts, indicator partitions
of unity and tile sums are all evaluated exactly (no sampling of U),
with a small absolute slack so points on shared tile boundaries count
for every adjacent tile.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .fields import NeighborhoodSpec, lpm_norm, unit_weight
from .groups import (
    GroupField,
    GroupQuadrature,
    affine_field_interpolate,
    build_affine_quadrature,
    tf_field_interpolate,
)
from .voice import TFField
from .weights import WeightSpec, eval_weight_affine, eval_weight_tf

__all__ = [
    "AffineLattice",
    "TFLattice",
    "SampledSequence",
    "BUPU",
    "lattice_points",
    "is_U_dense",
    "DensityReport",
    "is_relatively_separated",
    "sample_field",
    "seq_lpm_norm",
    "norm_equivalence_check",
    "NormEquivalenceReport",
    "build_bupu",
    "bupu_synthesize",
    "cover_counts",
    "cover_sum",
    "covering_quadrature",
]

_TIE_EPS = 1e-9  # index-space slack so shared tile boundaries count both sides


@dataclass(frozen=True)
class AffineLattice:
    """``(eps alpha^j beta k, eps alpha^j)`` over a finite index window."""

    alpha: float
    beta: float
    j_min: int
    j_max: int
    k_min: int
    k_max: int
    signs: tuple = (1, -1)

    def __post_init__(self):
        if self.alpha <= 1 or self.beta <= 0:
            raise ValueError("need alpha > 1 and beta > 0")
        if self.j_min > self.j_max or self.k_min > self.k_max:
            raise ValueError("empty index window")
        signs = tuple(int(s) for s in self.signs)
        if not signs or any(s not in (1, -1) for s in signs):
            raise ValueError("signs must be a nonempty subset of {+1, -1}")
        object.__setattr__(self, "signs", signs)

    @property
    def n_j(self) -> int:
        return self.j_max - self.j_min + 1

    @property
    def n_k(self) -> int:
        return self.k_max - self.k_min + 1

    @property
    def n_points(self) -> int:
        return len(self.signs) * self.n_j * self.n_k

    def point(self, j: int, k: int, eps: int):
        a = eps * self.alpha**j
        return (a * self.beta * k, a)

    def flat_index(self, j, k, eps_idx):
        """Position in the canonical enumeration (sign-major, j, k)."""
        return (np.asarray(eps_idx) * self.n_j + (np.asarray(j) - self.j_min)) * self.n_k + (
            np.asarray(k) - self.k_min
        )

    def index_tags(self) -> list:
        return [
            (j, k, eps)
            for eps in self.signs
            for j in range(self.j_min, self.j_max + 1)
            for k in range(self.k_min, self.k_max + 1)
        ]

    def point_arrays(self):
        eps = np.repeat(np.asarray(self.signs, dtype=float), self.n_j * self.n_k)
        j = np.tile(np.repeat(np.arange(self.j_min, self.j_max + 1), self.n_k),
                    len(self.signs))
        k = np.tile(np.arange(self.k_min, self.k_max + 1), len(self.signs) * self.n_j)
        a = eps * self.alpha**j.astype(float)
        b = a * self.beta * k.astype(float)
        return b, a

    def to_dict(self) -> dict:
        return {
            "type": "affine",
            "alpha": self.alpha,
            "beta": self.beta,
            "j": [self.j_min, self.j_max],
            "k": [self.k_min, self.k_max],
            "signs": [int(s) for s in self.signs],
        }

    @staticmethod
    def from_dict(d: dict) -> "AffineLattice":
        return AffineLattice(
            d["alpha"], d["beta"], d["j"][0], d["j"][1], d["k"][0], d["k"][1],
            tuple(d.get("signs", (1, -1))),
        )

    def matching_neighbourhood(self, n_samples: int = 7) -> NeighborhoodSpec:
        return NeighborhoodSpec("affine", beta=self.beta, alpha=self.alpha,
                                n_samples=n_samples)


@dataclass(frozen=True)
class TFLattice:
    """Scaled plane lattice ``c A Z^2``; separable when A is diagonal."""

    generator: np.ndarray  # 2x2, invertible
    scale: float = 1.0
    n1_min: int = 0
    n1_max: int = 0
    n2_min: int = 0
    n2_max: int = 0

    def __post_init__(self):
        gen = np.asarray(self.generator, dtype=float).reshape(2, 2)
        if abs(np.linalg.det(gen)) < 1e-12:
            raise ValueError("lattice generator must be invertible")
        if self.scale <= 0:
            raise ValueError("lattice scale must be positive")
        if self.n1_min > self.n1_max or self.n2_min > self.n2_max:
            raise ValueError("empty index window")
        object.__setattr__(self, "generator", gen)

    @staticmethod
    def separable(a_x: float, b_w: float, n1, n2) -> "TFLattice":
        if a_x <= 0 or b_w <= 0:
            raise ValueError("separable steps must be positive")
        return TFLattice(np.diag([a_x, b_w]), 1.0, n1[0], n1[1], n2[0], n2[1])

    @property
    def n_points(self) -> int:
        return (self.n1_max - self.n1_min + 1) * (self.n2_max - self.n2_min + 1)

    def index_tags(self) -> list:
        return [
            (n1, n2)
            for n1 in range(self.n1_min, self.n1_max + 1)
            for n2 in range(self.n2_min, self.n2_max + 1)
        ]

    def point_arrays(self):
        n1 = np.repeat(np.arange(self.n1_min, self.n1_max + 1),
                       self.n2_max - self.n2_min + 1)
        n2 = np.tile(np.arange(self.n2_min, self.n2_max + 1),
                     self.n1_max - self.n1_min + 1)
        pts = self.scale * (self.generator @ np.vstack([n1, n2]))
        return pts[0], pts[1]

    def flat_index(self, n1, n2):
        width = self.n2_max - self.n2_min + 1
        return (np.asarray(n1) - self.n1_min) * width + (np.asarray(n2) - self.n2_min)

    def to_dict(self) -> dict:
        return {
            "type": "tf",
            "generator": self.generator.tolist(),
            "scale": self.scale,
            "n1": [self.n1_min, self.n1_max],
            "n2": [self.n2_min, self.n2_max],
        }

    @staticmethod
    def from_dict(d: dict) -> "TFLattice":
        return TFLattice(np.asarray(d["generator"]), d["scale"],
                         d["n1"][0], d["n1"][1], d["n2"][0], d["n2"][1])


def lattice_points(lat):
    """Exact lattice points with their index tags."""
    return lat.index_tags(), lat.point_arrays()


# ---------------------------------------------------------------------------
# tile membership machinery
# ---------------------------------------------------------------------------

def _affine_cover(lat: AffineLattice, U: NeighborhoodSpec, b, a, coeffs=None):
    """Cover counts (and optional coefficient sums) at arbitrary points.

    A point ``(b, a)`` lies in the tile ``x_{j,k,eps} U`` iff the sign
    matches, ``alpha^{-j} |a|`` lies in ``[alpha_U^{-1/2}, alpha_U^{1/2}]``
    and ``|eps alpha^{-j} b - beta k| <= beta_U / 2``; both conditions
    are solved for integer (j, k) directly.
    """
    if U.kind != "affine":
        raise ValueError("affine lattice needs an affine neighbourhood")
    b = np.asarray(b, dtype=float).ravel()
    a = np.asarray(a, dtype=float).ravel()
    counts = np.zeros(b.size, dtype=np.int64)
    sums = np.zeros(b.size, dtype=np.complex128) if coeffs is not None else None
    ln_alpha = math.log(lat.alpha)
    half_u = math.log(U.alpha) / (2 * ln_alpha)
    half_b = U.beta / (2 * lat.beta)

    sign_index = {s: i for i, s in enumerate(lat.signs)}
    for sgn, s_idx in sign_index.items():
        sel = np.flatnonzero((np.sign(a) == sgn) & (a != 0))
        if sel.size == 0:
            continue
        t = np.log(np.abs(a[sel])) / ln_alpha
        j_lo = np.ceil(t - half_u - _TIE_EPS).astype(np.int64)
        j_hi = np.floor(t + half_u + _TIE_EPS).astype(np.int64)
        max_span_j = int(np.max(j_hi - j_lo, initial=-1)) + 1
        for dj in range(max_span_j):
            j = j_lo + dj
            ok_j = (j <= j_hi) & (j >= lat.j_min) & (j <= lat.j_max)
            if not np.any(ok_j):
                continue
            idx_j = sel[ok_j]
            jj = j[ok_j]
            y = sgn * b[idx_j] * lat.alpha ** (-jj.astype(float)) / lat.beta
            k_lo = np.ceil(y - half_b - _TIE_EPS).astype(np.int64)
            k_hi = np.floor(y + half_b + _TIE_EPS).astype(np.int64)
            max_span_k = int(np.max(k_hi - k_lo, initial=-1)) + 1
            for dk in range(max_span_k):
                k = k_lo + dk
                ok_k = (k <= k_hi) & (k >= lat.k_min) & (k <= lat.k_max)
                if not np.any(ok_k):
                    continue
                hit = idx_j[ok_k]
                counts[hit] += 1
                if sums is not None:
                    flat = lat.flat_index(jj[ok_k], k[ok_k], s_idx)
                    sums[hit] += np.asarray(coeffs)[flat]
    return counts, sums


def _tf_cover(lat: TFLattice, U: NeighborhoodSpec, x, w, coeffs=None):
    if U.kind != "tf":
        raise ValueError("tf lattice needs a tf neighbourhood")
    x = np.asarray(x, dtype=float).ravel()
    w = np.asarray(w, dtype=float).ravel()
    counts = np.zeros(x.size, dtype=np.int64)
    sums = np.zeros(x.size, dtype=np.complex128) if coeffs is not None else None
    gen_inv = np.linalg.inv(lat.scale * lat.generator)
    # integer coordinates of candidate lattice points around each query
    base = gen_inv @ np.vstack([x, w])
    # radius in index space needed to cover the box U
    corners = np.array(
        [[sx * U.beta_x / 2, sw * U.beta_w / 2] for sx in (-1, 1) for sw in (-1, 1)]
    ).T
    reach = np.max(np.abs(gen_inv @ corners), axis=1)
    r1, r2 = int(math.ceil(reach[0] + _TIE_EPS)), int(math.ceil(reach[1] + _TIE_EPS))
    gen = lat.scale * lat.generator
    for d1 in range(-r1, r1 + 1):
        for d2 in range(-r2, r2 + 1):
            n1 = np.round(base[0]).astype(np.int64) + d1
            n2 = np.round(base[1]).astype(np.int64) + d2
            ok = (
                (n1 >= lat.n1_min) & (n1 <= lat.n1_max)
                & (n2 >= lat.n2_min) & (n2 <= lat.n2_max)
            )
            if not np.any(ok):
                continue
            px = gen[0, 0] * n1 + gen[0, 1] * n2
            pw = gen[1, 0] * n1 + gen[1, 1] * n2
            inside = (
                ok
                & (np.abs(x - px) <= U.beta_x / 2 + _TIE_EPS)
                & (np.abs(w - pw) <= U.beta_w / 2 + _TIE_EPS)
            )
            if not np.any(inside):
                continue
            counts[inside] += 1
            if sums is not None:
                flat = lat.flat_index(n1[inside], n2[inside])
                sums[inside] += np.asarray(coeffs)[flat]
    return counts, sums


def cover_counts(lat, U: NeighborhoodSpec, c1, c2):
    """Number of lattice tiles ``x_i U`` containing each query point."""
    if isinstance(lat, AffineLattice):
        return _affine_cover(lat, U, c1, c2)[0]
    return _tf_cover(lat, U, c1, c2)[0]


def cover_sum(lat, U: NeighborhoodSpec, c1, c2, coeffs):
    """``sum_i coeffs_i * chi_{x_i U}`` (and counts) at the query points."""
    if isinstance(lat, AffineLattice):
        counts, sums = _affine_cover(lat, U, c1, c2, coeffs)
    else:
        counts, sums = _tf_cover(lat, U, c1, c2, coeffs)
    return counts, sums


@dataclass(frozen=True)
class DensityReport:
    covered: bool
    witness: tuple | None = None
    n_probe: int = 0

    def __bool__(self):
        return self.covered


def is_U_dense(lat, U: NeighborhoodSpec, probe) -> DensityReport:
    """Check that the tiles ``x_i U`` cover every probe point.

    ``probe`` is a pair of coordinate arrays.  Returns the first
    uncovered point (lowest index) as a witness on failure.
    """
    c1 = np.asarray(probe[0], dtype=float).ravel()
    c2 = np.asarray(probe[1], dtype=float).ravel()
    counts = cover_counts(lat, U, c1, c2)
    bad = np.flatnonzero(counts == 0)
    if bad.size:
        i = int(bad[0])
        return DensityReport(False, (float(c1[i]), float(c2[i])), c1.size)
    return DensityReport(True, None, c1.size)


def is_relatively_separated(lat, K: NeighborhoodSpec):
    """Max number of overlapping translates ``x_i K``; finite windows always pass.

    Affine overlap is exact: ``x_i K`` meets ``x_j K`` iff the relative
    point ``x_j^{-1} x_i = (btil, atil)`` has a positive scale ratio with
    ``atil`` in ``[1/alpha_K, alpha_K]`` and ``|btil| <= (1 + atil)
    beta_K / 2``; the TF condition is the difference box.
    """
    b, a = lat.point_arrays()
    n = b.size
    max_count = 0
    chunk = max(1, int(2e7) // max(n, 1))
    if isinstance(lat, AffineLattice):
        if K.kind != "affine":
            raise ValueError("affine lattice needs an affine neighbourhood")
        for lo in range(0, n, chunk):
            hi = min(n, lo + chunk)
            atil = a[lo:hi, None] / a[None, :]
            btil = (b[lo:hi, None] - b[None, :]) / a[None, :]
            ok = (
                (atil > 0)
                & (atil >= 1.0 / K.alpha - _TIE_EPS)
                & (atil <= K.alpha + _TIE_EPS)
                & (np.abs(btil) <= (1.0 + atil) * K.beta / 2 + _TIE_EPS)
            )
            max_count = max(max_count, int(np.max(np.sum(ok, axis=1))))
    else:
        if K.kind != "tf":
            raise ValueError("tf lattice needs a tf neighbourhood")
        for lo in range(0, n, chunk):
            hi = min(n, lo + chunk)
            ok = (np.abs(b[lo:hi, None] - b[None, :]) <= K.beta_x + _TIE_EPS) & (
                np.abs(a[lo:hi, None] - a[None, :]) <= K.beta_w + _TIE_EPS
            )
            max_count = max(max_count, int(np.max(np.sum(ok, axis=1))))
    return True, max_count


@dataclass(frozen=True)
class SampledSequence:
    """Field samples at the lattice points, in canonical enumeration order."""

    lattice: object
    values: np.ndarray
    in_chart: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "values", np.asarray(self.values, dtype=np.complex128))
        object.__setattr__(self, "in_chart", np.asarray(self.in_chart, dtype=bool))

    @property
    def coverage(self) -> float:
        return float(np.mean(self.in_chart))

    def to_dict(self) -> dict:
        return {
            "lattice": self.lattice.to_dict(),
            "re": self.values.real.tolist(),
            "im": self.values.imag.tolist(),
            "in_chart": self.in_chart.astype(int).tolist(),
        }


def sample_field(F, lat) -> SampledSequence:
    """Interpolated field values at the lattice points (out-of-chart flagged)."""
    b, a = lat.point_arrays()
    if isinstance(lat, AffineLattice):
        if not isinstance(F, GroupField) or F.quad.kind != "affine":
            raise ValueError("affine lattice samples an affine field")
        vals, mask = affine_field_interpolate(F, b, a, with_mask=True)
    else:
        base = F.as_group_field() if isinstance(F, TFField) else F
        vals, mask = tf_field_interpolate(base, b, a, with_mask=True)
    return SampledSequence(lat, vals, mask, {"coverage": float(np.mean(mask))})


def _seq_weights(m: WeightSpec | None, lat) -> np.ndarray:
    b, a = lat.point_arrays()
    if m is None:
        return np.ones(b.size)
    if isinstance(lat, AffineLattice):
        return np.asarray(eval_weight_affine(m, b, a), dtype=float)
    return np.asarray(eval_weight_tf(m, b, a), dtype=float)


def seq_lpm_norm(c, p: float, m: WeightSpec | None, lat) -> float:
    """Discrete norm ``(sum |c_i|^p m(x_i)^p)^(1/p)`` (max at p = inf)."""
    vals = c.values if isinstance(c, SampledSequence) else np.asarray(c)
    if vals.size != lat.n_points:
        raise ValueError("sequence length does not match the lattice")
    mw = _seq_weights(m, lat)
    a = np.abs(vals) * mw
    if math.isinf(p):
        return float(np.max(a))
    if p < 1:
        raise ValueError("p must lie in [1, inf]")
    return float(np.sum(a**p) ** (1.0 / p))


def covering_quadrature(
    lat, U: NeighborhoodSpec, cells_per_tile: int = 6, max_nodes: int = 2_000_000
) -> GroupQuadrature:
    """Affine chart that contains every tile of the (finite) lattice."""
    if not isinstance(lat, AffineLattice):
        raise ValueError("covering charts are built for affine lattices")
    b, a = lat.point_arrays()
    half_b = np.abs(a) * U.beta / 2
    b_lo = float(np.min(b - half_b))
    b_hi = float(np.max(b + half_b))
    a_abs = np.abs(a)
    a_min = float(np.min(a_abs) / math.sqrt(U.alpha))
    a_max = float(np.max(a_abs) * math.sqrt(U.alpha))
    smallest_tile = float(np.min(a_abs)) * U.beta
    n_b = int(min(max_nodes, math.ceil((b_hi - b_lo) / smallest_tile * cells_per_tile)))
    n_scales = int(
        math.ceil((math.log(a_max) - math.log(a_min)) / math.log(U.alpha) * cells_per_tile)
    ) + 1
    signs = tuple(lat.signs)
    while n_b * n_scales * len(signs) > max_nodes:
        n_b = max(2, n_b // 2)
        if n_b == 2:
            break
    return build_affine_quadrature(b_lo, b_hi, max(n_b, 2), a_min, a_max,
                                   max(n_scales, 2), signs)


@dataclass(frozen=True)
class NormEquivalenceReport:
    ratio: float
    window: tuple
    passed: bool
    haar_mass: float
    max_overlap: int
    heuristic_window: bool = False

    def to_dict(self) -> dict:
        return {
            "ratio": self.ratio,
            "window": list(self.window),
            "pass": self.passed,
            "haar_mass": self.haar_mass,
            "max_overlap": self.max_overlap,
            "heuristic_window": self.heuristic_window,
        }


def _moderation_bound(m: WeightSpec, U: NeighborhoodSpec):
    """sup over U of the right-moderating factor for the known families."""
    heuristic = False
    if m.family == "power_scale":
        bound = U.alpha ** (abs(m.s) / 2)
    elif m.family == "poly_tf":
        bound = (1 + U.beta_x / 2) ** m.r * (1 + U.beta_w / 2) ** m.s
    elif m.family == "symmetric_power":
        bound = U.alpha ** (m.rho / 2)  # w_rho(xu) <= w_rho(x) w_rho(u) on the tile
    else:
        # probe over the offset sample; flagged as heuristic
        heuristic = True
        offs = U.offsets()
        if U.kind == "affine":
            vals = eval_weight_affine(m, offs[0], offs[1])
        else:
            vals = eval_weight_tf(m, offs[0], offs[1])
        bound = float(np.max(vals))
    return float(bound), heuristic


def norm_equivalence_check(
    c,
    p: float,
    m: WeightSpec | None,
    lat,
    U: NeighborhoodSpec,
    quad: GroupQuadrature | None = None,
) -> NormEquivalenceReport:
    """Compare ``||sum |c_i| chi_{x_i U}||_{L^p_m}`` with ``||c||_{l^p_m}``.

    The admissible window comes from the tile-wise moderation bounds of
    the weight family, the Haar mass of U and the measured maximal tile
    overlap; a zero sequence passes by convention.
    """
    m_eval = m if m is not None else unit_weight(
        "affine" if isinstance(lat, AffineLattice) else "tf"
    )
    vals = c.values if isinstance(c, SampledSequence) else np.asarray(c)
    seq_norm = seq_lpm_norm(vals, p, m_eval, lat)
    if quad is None:
        quad = covering_quadrature(lat, U)
    pts = quad.node_points()
    counts, sums = cover_sum(lat, U, pts[0], pts[1], np.abs(vals))
    field = GroupField(quad, sums.reshape(quad.shape))
    fld_norm = lpm_norm(field, p, m_eval)
    n_max = int(np.max(counts)) if counts.size else 0

    if seq_norm == 0.0:
        return NormEquivalenceReport(
            1.0, (0.0, math.inf), True, U.haar_mass(), n_max
        )

    bound, heuristic = _moderation_bound(m_eval, U)
    mass = U.haar_mass()
    inv_q = 0.0 if p == 1 else (1.0 if math.isinf(p) else 1.0 - 1.0 / p)
    if math.isinf(p):
        lo = 1.0 / bound
        hi = max(n_max, 1) * bound
    else:
        lo = mass ** (1.0 / p) / bound
        hi = mass ** (1.0 / p) * max(n_max, 1) ** inv_q * bound
    ratio = fld_norm / seq_norm
    passed = bool(lo * (1 - 0.02) <= ratio <= hi * (1 + 0.02))
    return NormEquivalenceReport(ratio, (lo, hi), passed, mass, n_max, heuristic)


@dataclass(frozen=True)
class BUPU:
    """Indicator partition of unity ``phi_i = chi_{x_i U} / sum_j chi_{x_j U}``.

    Evaluation is lazy: cover counts realize the normalization exactly,
    so ``0 <= phi_i <= 1``, ``supp phi_i`` is the tile, and the partition
    sums to one at every covered point (points on shared boundaries are
    split evenly among the covering tiles).
    """

    lattice: object
    U: NeighborhoodSpec
    quad: GroupQuadrature
    counts: np.ndarray
    meta: dict = field(default_factory=dict)

    def partition_sum(self, c1, c2, coeffs=None):
        """``sum_i coeffs_i phi_i`` at arbitrary points (ones by default)."""
        if coeffs is None:
            coeffs = np.ones(self.lattice.n_points)
        counts, sums = cover_sum(self.lattice, self.U, c1, c2, coeffs)
        out = np.zeros(counts.size, dtype=np.complex128)
        hit = counts > 0
        out[hit] = sums[hit] / counts[hit]
        return out


def default_density_probe(quad: GroupQuadrature, lat, U: NeighborhoodSpec):
    """Chart nodes restricted to the region the finite window can cover.

    Edge-of-window nodes are excluded: scales within one lattice level of
    the window ends and shifts within one tile of the k-range ends do not
    enter the verdict.
    """
    pts = quad.node_points()
    c1 = np.asarray(pts[0], dtype=float).ravel()
    c2 = np.asarray(pts[1], dtype=float).ravel()
    if isinstance(lat, AffineLattice):
        a_lo = lat.alpha**lat.j_min * math.sqrt(lat.alpha)
        a_hi = lat.alpha**lat.j_max / math.sqrt(lat.alpha)
        ok = (np.abs(c2) >= a_lo) & (np.abs(c2) <= a_hi)
        ln_alpha = math.log(lat.alpha)
        j_near = np.round(np.log(np.abs(c2)) / ln_alpha).astype(int)
        y = np.sign(c2) * c1 / (lat.alpha ** j_near.astype(float) * lat.beta)
        ok &= (y >= lat.k_min + 0.5) & (y <= lat.k_max - 0.5)
        sign_ok = np.isin(np.sign(c2), np.asarray(lat.signs, dtype=float))
        ok &= sign_ok
    else:
        x_pts, w_pts = lat.point_arrays()
        ok = (
            (c1 >= np.min(x_pts) + U.beta_x / 2)
            & (c1 <= np.max(x_pts) - U.beta_x / 2)
            & (c2 >= np.min(w_pts) + U.beta_w / 2)
            & (c2 <= np.max(w_pts) - U.beta_w / 2)
        )
    return c1[ok], c2[ok]


def build_bupu(lat, U: NeighborhoodSpec, quad: GroupQuadrature) -> BUPU:
    """Tile partition of unity over the chart; fails loudly if not dense."""
    probe = default_density_probe(quad, lat, U)
    report = is_U_dense(lat, U, probe)
    if not report.covered:
        raise ValueError(
            f"lattice is not U-dense on the working region; witness {report.witness}"
        )
    pts = quad.node_points()
    counts = cover_counts(lat, U, pts[0], pts[1]).reshape(quad.shape)
    return BUPU(lat, U, quad, counts, {"probe_size": report.n_probe})


def bupu_synthesize(c, bupu: BUPU) -> GroupField:
    """Field ``sum_i c_i phi_i`` on the partition's chart."""
    vals = c.values if isinstance(c, SampledSequence) else np.asarray(c)
    if vals.size != bupu.lattice.n_points:
        raise ValueError("coefficient length does not match the lattice")
    pts = bupu.quad.node_points()
    counts, sums = cover_sum(bupu.lattice, bupu.U, pts[0], pts[1], vals)
    counts = counts.reshape(bupu.quad.shape)
    sums = sums.reshape(bupu.quad.shape)
    out = np.zeros(bupu.quad.shape, dtype=np.complex128)
    hit = counts > 0
    out[hit] = sums[hit] / counts[hit]
    uncovered = float(np.mean(~hit))
    return GroupField(bupu.quad, out, {"uncovered_fraction": uncovered})
