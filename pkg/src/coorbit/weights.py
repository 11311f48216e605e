"""Weight families on the affine group and the time-frequency plane.

Three closed-form families cover the toolkit's needs:

* ``power_scale(s)``:     ``|a|^(-s)`` on the affine group (multiplicative);
* ``symmetric_power(rho)``: ``|a|^rho + |a|^(-rho)``, submultiplicative;
* ``poly_tf(r, s)``:      ``(1+|x|)^r (1+|w|)^s`` on the plane, its own
  control weight.

``is_p_control`` evaluates the closed-form control-weight criteria for
these families; the two probes are falsifiers for the defining
inequalities on a bounded chart box (they can refute, never prove).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .groups import AffinePoint, HeisenbergPoint

__all__ = [
    "WeightSpec",
    "power_scale",
    "symmetric_power",
    "poly_tf",
    "custom_weight",
    "eval_weight",
    "eval_weight_affine",
    "eval_weight_tf",
    "is_p_control",
    "submultiplicativity_probe",
    "moderateness_probe",
    "ProbeReport",
]

_PROBE_B_BOX = 10.0
_PROBE_U_BOX = 3.0
_PROBE_TF_BOX = 10.0
_PROBE_TOL = 1e-12


@dataclass(frozen=True)
class WeightSpec:
    """One member of the known weight families (or a custom evaluator)."""

    family: str  # power_scale | symmetric_power | poly_tf | custom
    s: float = 0.0
    rho: float = 0.0
    r: float = 0.0
    evaluator: Optional[Callable] = None
    group: str = ""  # set for custom; implied otherwise

    def __post_init__(self):
        if self.family == "symmetric_power" and self.rho < 0:
            raise ValueError("rho must be >= 0")
        if self.family == "poly_tf" and (self.r < 0 or self.s < 0):
            raise ValueError("poly_tf exponents must be >= 0")
        if self.family == "custom" and (
            self.evaluator is None or self.group not in ("affine", "tf")
        ):
            raise ValueError("custom weight needs an evaluator and a group tag")

    @property
    def group_kind(self) -> str:
        if self.family in ("power_scale", "symmetric_power"):
            return "affine"
        if self.family == "poly_tf":
            return "tf"
        return self.group

    def to_dict(self) -> dict:
        if self.family == "power_scale":
            return {"family": "power_scale", "s": self.s}
        if self.family == "symmetric_power":
            return {"family": "symmetric_power", "rho": self.rho}
        if self.family == "poly_tf":
            return {"family": "poly_tf", "r": self.r, "s": self.s}
        raise ValueError("custom weights do not serialize")

    @staticmethod
    def from_dict(d: dict) -> "WeightSpec":
        fam = d["family"]
        if fam == "power_scale":
            return power_scale(d["s"])
        if fam == "symmetric_power":
            return symmetric_power(d["rho"])
        if fam == "poly_tf":
            return poly_tf(d["r"], d["s"])
        raise ValueError(f"unknown weight family {fam!r}")


def power_scale(s: float) -> WeightSpec:
    return WeightSpec(family="power_scale", s=float(s))


def symmetric_power(rho: float) -> WeightSpec:
    return WeightSpec(family="symmetric_power", rho=float(rho))


def poly_tf(r: float, s: float) -> WeightSpec:
    return WeightSpec(family="poly_tf", r=float(r), s=float(s))


def custom_weight(evaluator: Callable, group: str) -> WeightSpec:
    return WeightSpec(family="custom", evaluator=evaluator, group=group)


def eval_weight_affine(w: WeightSpec, b, a):
    """Vectorized evaluation on affine chart coordinates."""
    if w.group_kind != "affine":
        raise ValueError("weight is not defined on the affine group")
    a = np.abs(np.asarray(a, dtype=float))
    if w.family == "power_scale":
        return a ** (-w.s)
    if w.family == "symmetric_power":
        return a**w.rho + a ** (-w.rho)
    return w.evaluator(np.asarray(b, dtype=float), a)


def eval_weight_tf(w: WeightSpec, x, omega):
    """Vectorized evaluation on the time-frequency plane.

    ``x`` and ``omega`` may be scalars, 1-d vectors (a single point in
    dimension d) or arrays of scalar coordinates; ``|.|`` is the
    euclidean length in the vector case.
    """
    if w.group_kind != "tf":
        raise ValueError("weight is not defined on the TF plane")
    x = np.abs(np.asarray(x, dtype=float))
    omega = np.abs(np.asarray(omega, dtype=float))
    if w.family == "poly_tf":
        return (1.0 + x) ** w.r * (1.0 + omega) ** w.s
    return w.evaluator(x, omega)


def eval_weight(w: WeightSpec, point):
    """Evaluate at a single group point (affine, Heisenberg or TF tuple)."""
    if isinstance(point, AffinePoint):
        return float(eval_weight_affine(w, point.b, point.a))
    if isinstance(point, HeisenbergPoint):
        x = math.hypot(*point.x) if point.d > 1 else abs(point.x[0])
        om = math.hypot(*point.omega) if point.d > 1 else abs(point.omega[0])
        return float(eval_weight_tf(w, x, om))
    if isinstance(point, (tuple, list)) and len(point) == 2:
        return float(eval_weight_tf(w, point[0], point[1]))
    raise ValueError(f"cannot evaluate weight at {point!r}")


def is_p_control(w: WeightSpec, m: WeightSpec, p: float) -> bool:
    """Closed-form p-control-weight test for the known families.

    Affine: ``symmetric_power(rho)`` controls ``power_scale(s)`` exactly
    when ``rho >= |s| + max(1/p, 1/q)`` (``1/inf = 0``).  TF plane:
    ``poly_tf(r, s)`` controls ``poly_tf(r0, s0)`` when ``r >= r0`` and
    ``s >= s0``; the exponent p plays no role on unimodular groups.
    """
    if w.family == "custom" or m.family == "custom":
        raise ValueError("no closed form for custom weights; use the probes")
    if w.group_kind != m.group_kind:
        raise ValueError("weights live on different groups")
    if not (1 <= p):
        raise ValueError("p must lie in [1, inf]")
    inv_p = 0.0 if math.isinf(p) else 1.0 / p
    inv_q = 1.0 - inv_p
    if w.group_kind == "affine":
        if w.family != "symmetric_power" or m.family != "power_scale":
            raise ValueError(
                "affine control test expects symmetric_power vs power_scale"
            )
        return w.rho >= abs(m.s) + max(inv_p, inv_q)
    return w.r >= m.r and w.s >= m.s


@dataclass(frozen=True)
class ProbeReport:
    max_ratio: float
    passed: bool
    worst: tuple = ()
    detail: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "max_ratio": self.max_ratio,
            "pass": self.passed,
            "detail": dict(self.detail),
        }


def _sample_points(group: str, samples: int, rng: np.random.Generator):
    if group == "affine":
        b = rng.uniform(-_PROBE_B_BOX, _PROBE_B_BOX, samples)
        u = rng.uniform(-_PROBE_U_BOX, _PROBE_U_BOX, samples)
        sgn = rng.choice([-1.0, 1.0], samples)
        return b, sgn * np.exp(u)
    x = rng.uniform(-_PROBE_TF_BOX, _PROBE_TF_BOX, samples)
    om = rng.uniform(-_PROBE_TF_BOX, _PROBE_TF_BOX, samples)
    return x, om


def submultiplicativity_probe(
    w: WeightSpec, samples: int = 2000, seed: int = 0
) -> ProbeReport:
    """Search for violations of ``w(xy) <= w(x) w(y)`` on a chart box."""
    if samples < 1:
        raise ValueError("samples must be >= 1")
    rng = np.random.default_rng(seed)
    group = w.group_kind
    p1 = _sample_points(group, samples, rng)
    p2 = _sample_points(group, samples, rng)
    if group == "affine":
        b1, a1 = p1
        b2, a2 = p2
        bp, ap = b1 + a1 * b2, a1 * a2
        ratio = eval_weight_affine(w, bp, ap) / (
            eval_weight_affine(w, b1, a1) * eval_weight_affine(w, b2, a2)
        )
    else:
        x1, w1 = p1
        x2, w2 = p2
        ratio = eval_weight_tf(w, x1 + x2, w1 + w2) / (
            eval_weight_tf(w, x1, w1) * eval_weight_tf(w, x2, w2)
        )
    k = int(np.argmax(ratio))
    worst = ((p1[0][k], p1[1][k]), (p2[0][k], p2[1][k]))
    mx = float(ratio[k])
    return ProbeReport(mx, mx <= 1.0 + _PROBE_TOL, worst)


def moderateness_probe(
    m: WeightSpec, w: WeightSpec, samples: int = 2000, seed: int = 0
) -> ProbeReport:
    """Search for violations of ``m(xy) <= w(x)m(y)`` and ``m(xy) <= m(x)w(y)``."""
    if samples < 1:
        raise ValueError("samples must be >= 1")
    if m.group_kind != w.group_kind:
        raise ValueError("weights live on different groups")
    rng = np.random.default_rng(seed)
    group = m.group_kind
    p1 = _sample_points(group, samples, rng)
    p2 = _sample_points(group, samples, rng)
    if group == "affine":
        b1, a1 = p1
        b2, a2 = p2
        bp, ap = b1 + a1 * b2, a1 * a2
        m_prod = eval_weight_affine(m, bp, ap)
        left = m_prod / (eval_weight_affine(w, b1, a1) * eval_weight_affine(m, b2, a2))
        right = m_prod / (eval_weight_affine(m, b1, a1) * eval_weight_affine(w, b2, a2))
    else:
        x1, w1 = p1
        x2, w2 = p2
        m_prod = eval_weight_tf(m, x1 + x2, w1 + w2)
        left = m_prod / (eval_weight_tf(w, x1, w1) * eval_weight_tf(m, x2, w2))
        right = m_prod / (eval_weight_tf(m, x1, w1) * eval_weight_tf(w, x2, w2))
    mx_left = float(np.max(left))
    mx_right = float(np.max(right))
    mx = max(mx_left, mx_right)
    return ProbeReport(
        mx,
        mx <= 1.0 + _PROBE_TOL,
        detail={"max_left": mx_left, "max_right": mx_right},
    )
