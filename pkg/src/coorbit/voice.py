"""The two concrete voice transforms: wavelet transform and STFT.

The wavelet transform of ``f`` against ``psi`` is computed per scale in
the Fourier domain,

    W(b, a) = |a|^(1/2) * IFFT[ fhat * conj(psihat(a .)) ](b),

which is the exact spectral form of ``<f, T_b D_a psi>`` and keeps the
covariance in ``b`` exact up to DFT periodization.  Scale samples of
``psihat`` come from linear interpolation on the window's spectrum.

The STFT ``V(x, w) = dt * sum_t f(t) conj(g(t-x)) exp(-2 pi i t w)`` is
evaluated directly on a rectangular time-frequency grid (one windowed
matrix product; no interpolation in ``w``).

Admissibility, inversion, reproducing kernels and the explicit wavelet
Duflo-Moore multiplier ``psihat / sqrt|w|`` round out the module.
Heisenberg phases never enter any field or norm; they are applied only
by :func:`schrodinger_atom` for group-law level tests.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .groups import GroupField, GroupQuadrature, build_tf_quadrature
from .signals import (
    SampledSignal,
    Spectrum,
    fourier,
    inverse_fourier,
    l2_norm,
    modulate,
    translate,
    dilate,
)

__all__ = [
    "TFField",
    "NotAdmissible",
    "NotAdmissibleError",
    "cwt",
    "icwt",
    "stft",
    "istft",
    "admissibility_constant",
    "normalize_admissible",
    "reproducing_kernel",
    "duflo_moore_wavelet",
    "wavelet_rep",
    "gabor_atom",
    "schrodinger_atom",
]

_DC_TOLERANCE = 1e-6
_EDGE_DECAY_WARN = 1e-8


@dataclass(frozen=True)
class NotAdmissible:
    """Typed outcome: the admissibility integral diverges (nonzero DC)."""

    dc_magnitude: float
    peak_magnitude: float

    def __bool__(self):  # truthiness would invite silent misuse
        raise TypeError("NotAdmissible outcome must be handled explicitly")


class NotAdmissibleError(ValueError):
    pass


@dataclass(frozen=True)
class TFField:
    """Complex values ``V(x, w)`` on a uniform time-frequency grid (x-major)."""

    x0: float
    dx: float
    n_x: int
    w0: float
    dw: float
    n_w: int
    values: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=np.complex128)
        if vals.shape != (self.n_x, self.n_w):
            raise ValueError("TF values must have shape (n_x, n_w)")
        object.__setattr__(self, "values", vals)

    def x_grid(self) -> np.ndarray:
        return self.x0 + self.dx * np.arange(self.n_x)

    def w_grid(self) -> np.ndarray:
        return self.w0 + self.dw * np.arange(self.n_w)

    @property
    def cell(self) -> float:
        return self.dx * self.dw

    def same_grid(self, other: "TFField") -> bool:
        return (
            self.n_x == other.n_x
            and self.n_w == other.n_w
            and abs(self.x0 - other.x0) < 1e-12 * max(1, abs(self.x0))
            and abs(self.w0 - other.w0) < 1e-12 * max(1, abs(self.w0))
            and abs(self.dx - other.dx) < 1e-12 * self.dx
            and abs(self.dw - other.dw) < 1e-12 * self.dw
        )

    def with_values(self, values, **meta) -> "TFField":
        merged = dict(self.meta)
        merged.update(meta)
        return TFField(
            self.x0, self.dx, self.n_x, self.w0, self.dw, self.n_w, values, merged
        )

    def as_quadrature(self) -> GroupQuadrature:
        return build_tf_quadrature(self.x0, self.dx, self.n_x, self.w0, self.dw, self.n_w)

    def as_group_field(self) -> GroupField:
        return GroupField(self.as_quadrature(), self.values)

    def to_dict(self) -> dict:
        flat = self.values.ravel()
        return {
            "grid": {
                "x0": self.x0, "dx": self.dx, "n_x": self.n_x,
                "w0": self.w0, "dw": self.dw, "n_w": self.n_w,
            },
            "re": flat.real.tolist(),
            "im": flat.imag.tolist(),
        }

    @staticmethod
    def from_dict(d: dict) -> "TFField":
        g = d["grid"]
        vals = np.asarray(d["re"], dtype=float) + 1j * np.asarray(d["im"], dtype=float)
        return TFField(
            g["x0"], g["dx"], g["n_x"], g["w0"], g["dw"], g["n_w"],
            vals.reshape(g["n_x"], g["n_w"]),
        )


def _check_edge_decay(f: SampledSignal, meta: dict, name: str):
    peak = float(np.max(np.abs(f.values)))
    if peak == 0.0:
        return
    edge = float(max(abs(f.values[0]), abs(f.values[-1])))
    if edge > _EDGE_DECAY_WARN * peak:
        meta.setdefault("warnings", []).append(
            f"{name} does not decay to {_EDGE_DECAY_WARN:g} of peak at the grid "
            "edges; FFT periodization may alias"
        )


def admissibility_constant(psi: SampledSignal):
    """``C = (sum_{w != 0} |psihat|^2 / |w| * dw)^(1/2)`` or :class:`NotAdmissible`.

    A DC component beyond ``1e-6`` of the spectral peak forces the
    defining integral to diverge, so such windows are rejected as a
    typed outcome rather than a numeric value.
    """
    spec = fourier(psi)
    mag = np.abs(spec.values)
    peak = float(np.max(mag))
    dc = float(mag[spec.dc_index()])
    if peak == 0.0 or dc > _DC_TOLERANCE * peak:
        return NotAdmissible(dc_magnitude=dc, peak_magnitude=peak)
    w = spec.grid()
    mask = w != 0.0
    c2 = float(np.sum(mag[mask] ** 2 / np.abs(w[mask])) * spec.dw)
    return math.sqrt(c2)


def normalize_admissible(psi: SampledSignal) -> SampledSignal:
    """Rescale so the admissibility constant equals one."""
    c = admissibility_constant(psi)
    if isinstance(c, NotAdmissible):
        raise NotAdmissibleError(
            f"cannot normalize: DC magnitude {c.dc_magnitude:g} "
            f"(peak {c.peak_magnitude:g})"
        )
    if c == 0.0:
        raise NotAdmissibleError("cannot normalize a zero window")
    return psi.with_values(psi.values / c)


def wavelet_rep(f: SampledSignal, b: float, a: float) -> SampledSignal:
    """Unitary wavelet action ``T_b D_a f``: dilate, then shift."""
    return translate(dilate(f, a), b)


def cwt(f: SampledSignal, psi: SampledSignal, quad: GroupQuadrature) -> GroupField:
    """Wavelet transform of ``f`` against ``psi`` on an affine chart."""
    if quad.kind != "affine":
        raise ValueError("cwt needs an affine quadrature")
    if not f.same_grid(psi):
        raise ValueError("f and psi must share grid parameters")
    meta: dict = {}
    _check_edge_decay(f, meta, "signal")
    _check_edge_decay(psi, meta, "analyzing window")

    fhat = fourier(f)
    psihat = fourier(psi)
    w = fhat.grid()
    n = f.n

    b_grid = quad.b_grid()
    resample = not (
        quad.n_b == n
        and abs(quad.b_lo - f.t0) < 1e-9 * max(1.0, abs(f.t0))
        and abs(quad.db - f.dt) < 1e-12 * f.dt
    )

    out = np.empty(quad.shape, dtype=np.complex128)
    scales = quad.scale_grid()
    t = f.grid()
    for s_idx, sgn in enumerate(quad.signs):
        a_vals = sgn * scales
        rows = np.empty((quad.n_scales, n), dtype=np.complex128)
        for j, a in enumerate(a_vals):
            psi_a = psihat.interpolate(a * w)
            rows[j] = math.sqrt(abs(a)) * fhat.values * np.conj(psi_a)
        # batched inverse transform back to the b axis
        phased = rows * np.exp(2j * np.pi * f.t0 * w)[None, :]
        rows_b = np.fft.ifft(np.fft.ifftshift(phased, axes=-1), axis=-1) / f.dt
        if resample:
            for j in range(quad.n_scales):
                re = np.interp(b_grid, t, rows_b[j].real, left=0.0, right=0.0)
                im = np.interp(b_grid, t, rows_b[j].imag, left=0.0, right=0.0)
                out[s_idx, j] = re + 1j * im
        else:
            out[s_idx] = rows_b
    return GroupField(quad, out, meta)


def icwt(W: GroupField, psi: SampledSignal, c_psi: float | None = None) -> SampledSignal:
    """Inverse wavelet transform, scale-by-scale in the spectral domain.

    Accumulates ``C^-2 |a|^(1/2) F_b[W(., a)](w) psihat(a w) du/|a|``
    over all scale nodes and sign branches, then inverts one spectrum.
    """
    quad = W.quad
    if quad.kind != "affine":
        raise ValueError("icwt needs an affine field")
    if quad.n_b != psi.n or abs(quad.db - psi.dt) > 1e-12 * psi.dt or abs(
        quad.b_lo - psi.t0
    ) > 1e-9 * max(1.0, abs(psi.t0)):
        raise ValueError("quadrature b-grid must match the window grid")
    if c_psi is None:
        c = admissibility_constant(psi)
        if isinstance(c, NotAdmissible):
            raise NotAdmissibleError("icwt needs an admissible window")
        c_psi = c
    if c_psi <= 0:
        raise NotAdmissibleError("admissibility constant must be positive")

    psihat = fourier(psi)
    n = psi.n
    dw = 1.0 / (n * quad.db)
    w = (np.arange(n) - n // 2) * dw
    du = quad.du
    scales = quad.scale_grid()

    acc = np.zeros(n, dtype=np.complex128)
    for s_idx, sgn in enumerate(quad.signs):
        rows = W.values[s_idx]
        # forward transform of every b-row at once
        spec_rows = quad.db * np.exp(-2j * np.pi * quad.b_lo * w)[None, :] * (
            np.fft.fftshift(np.fft.fft(rows, axis=-1), axes=-1)
        )
        for j, s in enumerate(scales):
            a = sgn * s
            psi_a = psihat.interpolate(a * w)
            acc += math.sqrt(abs(a)) * spec_rows[j] * psi_a * (du / abs(a))
    acc /= c_psi**2
    return inverse_fourier(Spectrum(w[0], dw, acc, t_origin=quad.b_lo))


def _shift_matrix(g: SampledSignal, x_grid: np.ndarray) -> np.ndarray:
    """Rows ``g(t - x)`` for each x; exact rolls on grid-aligned shifts."""
    n = g.n
    out = np.zeros((x_grid.size, n), dtype=np.complex128)
    t = g.grid()
    for i, x in enumerate(x_grid):
        steps = x / g.dt
        k = round(steps)
        if abs(steps - k) < 1e-9:
            if 0 <= k:
                if k < n:
                    out[i, k:] = g.values[: n - k]
            else:
                if -k < n:
                    out[i, :k] = g.values[-k:]
        else:
            re = np.interp(t - x, t, g.values.real, left=0.0, right=0.0)
            im = np.interp(t - x, t, g.values.imag, left=0.0, right=0.0)
            out[i] = re + 1j * im
    return out


def _tf_grids(x_grid, w_grid):
    def expand(spec):
        origin, step, count = spec
        return origin + step * np.arange(int(count)), float(origin), float(step), int(count)

    xs, x0, dx, n_x = expand(x_grid)
    ws, w0, dw, n_w = expand(w_grid)
    return xs, ws, (x0, dx, n_x), (w0, dw, n_w)


def stft(f: SampledSignal, g: SampledSignal, x_grid, w_grid) -> TFField:
    """Short-time Fourier transform on a rectangular (x, w) grid.

    ``x_grid`` and ``w_grid`` are ``(origin, step, count)`` triples.  The
    window must live on the signal's grid; shifts aligned to the grid
    are exact, others interpolate linearly.
    """
    if not f.same_grid(g):
        raise ValueError("window must share the signal grid")
    xs, ws, xspec, wspec = _tf_grids(x_grid, w_grid)
    H = np.conj(_shift_matrix(g, xs)) * f.values[None, :]
    E = np.exp(-2j * np.pi * np.outer(f.grid(), ws)) * f.dt
    V = H @ E
    return TFField(xspec[0], xspec[1], xspec[2], wspec[0], wspec[1], wspec[2], V)


def istft(V: TFField, g: SampledSignal) -> SampledSignal:
    """Adjoint-based synthesis ``|g|^-2 sum V(x,w) M_w T_x g dx dw``."""
    gnorm2 = l2_norm(g) ** 2
    if gnorm2 == 0.0:
        raise ValueError("zero window")
    t = g.grid()
    E = np.exp(2j * np.pi * np.outer(V.w_grid(), t))
    P = V.values @ E  # (n_x, n_t): per-shift modulated sums
    G = _shift_matrix(g, V.x_grid())
    vals = np.sum(P * G, axis=0) * V.cell / gnorm2
    return SampledSignal(g.t0, g.dt, vals)


def reproducing_kernel(psi: SampledSignal, quad: GroupQuadrature):
    """Self-transform kernel: ``cwt(psi, psi)`` or ``V_gg`` on a TF chart."""
    if quad.kind == "affine":
        c = admissibility_constant(psi)
        if isinstance(c, NotAdmissible):
            raise NotAdmissibleError(
                f"kernel needs an admissible window (DC {c.dc_magnitude:g})"
            )
        K = cwt(psi, psi, quad)
        return K.with_values(K.values, c_psi=float(c))
    return stft(
        psi, psi,
        (quad.x0, quad.dx, quad.n_x),
        (quad.w0, quad.dw, quad.n_w),
    )


def duflo_moore_wavelet(psi: SampledSignal) -> SampledSignal:
    """Spectral multiplier ``psihat / sqrt(|w|)`` (zero bin dropped)."""
    spec = fourier(psi)
    mag = np.abs(spec.values)
    peak = float(np.max(mag))
    dc = float(mag[spec.dc_index()])
    if peak == 0.0 or dc > _DC_TOLERANCE * peak:
        raise NotAdmissibleError(
            f"Duflo-Moore multiplier undefined: DC magnitude {dc:g} (peak {peak:g})"
        )
    w = spec.grid()
    vals = spec.values.copy()
    mask = w != 0.0
    vals[mask] = vals[mask] / np.sqrt(np.abs(w[mask]))
    vals[~mask] = 0.0
    out = inverse_fourier(Spectrum(spec.w0, spec.dw, vals, spec.t_origin))
    return psi.with_values(out.values)


def gabor_atom(g: SampledSignal, x: float, omega: float) -> SampledSignal:
    """Phase-free time-frequency shift ``M_w T_x g``."""
    return modulate(translate(g, x), omega)


def schrodinger_atom(
    g: SampledSignal, x: float, omega: float, tau: complex = 1.0
) -> SampledSignal:
    """Full Heisenberg action ``tau exp(-pi i w x) M_w T_x g``.

    Only the modulus of coefficients against these atoms matters for
    any norm in the toolkit; this exists to verify exactly that.
    """
    atom = gabor_atom(g, x, omega)
    phase = tau * np.exp(-1j * np.pi * omega * x)
    return atom.with_values(phase * atom.values)
