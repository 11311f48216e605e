"""Batch command-line front end.

Every subcommand reads a JSON config (``--config`` plus ``--key value``
overrides), runs one library pipeline, and writes JSON artifacts into
``--out-dir``.  The CLI adds no computation of its own; every number in
an output file is reproducible by the corresponding library call.

Exit codes: 0 success/pass, 2 I/O or config errors, 3 certification
failure (including non-admissible windows), 4 numerical divergence.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from .fields import NeighborhoodSpec, lpm_norm, unit_weight
from .frames import (
    DesignSearchError,
    ReconstructionDivergence,
    atom_certificate,
    design_lattice,
    frame_bounds_empirical,
    neumann_reconstruct,
    stft_window_sufficient,
    wavelet_atom_sufficient,
)
from .groups import GroupField, GroupQuadrature
from .lattices import AffineLattice, TFLattice, build_bupu, sample_field
from .signals import SampledSignal, moments, vanishing_moment_count
from .voice import NotAdmissible, NotAdmissibleError, admissibility_constant, cwt, stft
from .weights import WeightSpec

FORMAT_VERSION = "coorbit/1"

_EXIT_OK = 0
_EXIT_IO = 2
_EXIT_CERT = 3
_EXIT_DIVERGED = 4


class ConfigError(ValueError):
    pass


def _canon(obj):
    if isinstance(obj, dict):
        return {k: _canon(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_canon(v) for v in obj]
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, float) and math.isinf(obj):
        return "inf" if obj > 0 else "-inf"
    return obj


def _write_json(path: Path, obj) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as fh:
        json.dump(_canon(obj), fh, sort_keys=True, indent=1)
        fh.write("\n")


def _read_json(path) -> dict:
    with open(path) as fh:
        return json.load(fh)


def _load_signal(path) -> SampledSignal:
    return SampledSignal.from_dict(_read_json(path))


_ALLOWED_KEYS = {
    "cwt": {"signal", "atom", "quadrature", "weight", "out"},
    "stft": {"signal", "window", "x_grid", "w_grid", "weight", "out"},
    "admissibility": {"atom", "out"},
    "moments": {"signal", "k_max", "tol", "out"},
    "certify-atom": {"atom", "kind", "quadrature", "weight", "neighbourhood",
                     "rho", "r", "s", "tol", "out"},
    "design-lattice": {"atom", "quadrature", "weight", "schedule", "out"},
    "frame-bounds": {"window", "lattice", "quadrature", "p", "weight",
                     "ensemble", "band", "out"},
    "reconstruct": {"atom", "quadrature", "weight", "neighbourhood", "lattice",
                    "field", "tol", "max_iter", "out"},
}
_COMMON_KEYS = {"version", "command", "seed"}


def _validate_config(cfg: dict, command: str) -> dict:
    if cfg.get("version") != FORMAT_VERSION:
        raise ConfigError(
            f"config version {cfg.get('version')!r} does not match {FORMAT_VERSION!r}"
        )
    allowed = _ALLOWED_KEYS[command] | _COMMON_KEYS
    unknown = set(cfg) - allowed
    if unknown:
        raise ConfigError(f"unknown config keys for {command}: {sorted(unknown)}")
    return cfg


def _weight_from(cfg: dict, kind: str) -> WeightSpec:
    if "weight" in cfg and cfg["weight"] is not None:
        return WeightSpec.from_dict(cfg["weight"])
    return unit_weight(kind)


def _field_stats(field, weight) -> dict:
    return {
        "l1": lpm_norm(field, 1.0, weight),
        "l2": lpm_norm(field, 2.0, weight),
        "linf": lpm_norm(field, math.inf, weight),
    }


def cmd_cwt(cfg: dict, out_dir: Path) -> int:
    f = _load_signal(cfg["signal"])
    psi = _load_signal(cfg["atom"])
    quad = GroupQuadrature.from_dict(cfg["quadrature"])
    W = cwt(f, psi, quad)
    weight = _weight_from(cfg, "affine")
    stem = cfg.get("out", "cwt")
    _write_json(out_dir / f"{stem}.field.json", W.to_dict())
    _write_json(out_dir / f"{stem}.stats.json", _field_stats(W, weight))
    return _EXIT_OK


def cmd_stft(cfg: dict, out_dir: Path) -> int:
    f = _load_signal(cfg["signal"])
    g = _load_signal(cfg["window"])
    xg = cfg["x_grid"]
    wg = cfg["w_grid"]
    V = stft(f, g, (xg["origin"], xg["step"], xg["count"]),
             (wg["origin"], wg["step"], wg["count"]))
    weight = _weight_from(cfg, "tf")
    stem = cfg.get("out", "stft")
    _write_json(out_dir / f"{stem}.field.json", V.to_dict())
    _write_json(out_dir / f"{stem}.stats.json", _field_stats(V, weight))
    return _EXIT_OK


def cmd_admissibility(cfg: dict, out_dir: Path) -> int:
    psi = _load_signal(cfg["atom"])
    c = admissibility_constant(psi)
    stem = cfg.get("out", "admissibility")
    if isinstance(c, NotAdmissible):
        _write_json(out_dir / f"{stem}.json", {
            "admissible": False,
            "dc_magnitude": c.dc_magnitude,
            "peak_magnitude": c.peak_magnitude,
        })
    else:
        _write_json(out_dir / f"{stem}.json", {"admissible": True, "constant": c})
    return _EXIT_OK


def cmd_moments(cfg: dict, out_dir: Path) -> int:
    psi = _load_signal(cfg["signal"])
    k_max = int(cfg.get("k_max", 4))
    tol = float(cfg.get("tol", 1e-6))
    rep = moments(psi, k_max)
    out = rep.to_dict()
    out["vanishing_moment_count"] = vanishing_moment_count(psi, tol)
    _write_json(out_dir / f"{cfg.get('out', 'moments')}.json", out)
    return _EXIT_OK


def cmd_certify_atom(cfg: dict, out_dir: Path) -> int:
    psi = _load_signal(cfg["atom"])
    kind = cfg.get("kind", "wavelet")
    stem = cfg.get("out", "certificate")
    out: dict = {"kind": kind}
    passed = True
    if kind == "wavelet":
        if "rho" in cfg:
            suff = wavelet_atom_sufficient(psi, float(cfg["rho"]),
                                           float(cfg.get("tol", 1e-6)))
            out["sufficiency"] = suff.to_dict()
            passed = passed and suff.passed
        if "quadrature" in cfg:
            quad = GroupQuadrature.from_dict(cfg["quadrature"])
            weight = _weight_from(cfg, "affine")
            U = NeighborhoodSpec.from_dict(cfg["neighbourhood"])
            try:
                cert = atom_certificate(psi, quad, weight, U)
            except NotAdmissibleError as exc:
                _write_json(out_dir / f"{stem}.json",
                            {"kind": kind, "error": str(exc), "pass": False})
                print(f"not admissible: {exc}", file=sys.stderr)
                return _EXIT_CERT
            out["certificate"] = cert.to_dict()
            passed = passed and cert.passed
    elif kind == "gabor":
        suff = stft_window_sufficient(psi, float(cfg.get("r", 0.0)),
                                      float(cfg.get("s", 0.0)))
        out["sufficiency"] = suff.to_dict()
        passed = suff.passed
    else:
        raise ConfigError(f"unknown certification kind {kind!r}")
    out["pass"] = bool(passed)
    _write_json(out_dir / f"{stem}.json", out)
    return _EXIT_OK if passed else _EXIT_CERT


def cmd_design_lattice(cfg: dict, out_dir: Path) -> int:
    psi = _load_signal(cfg["atom"])
    quad = GroupQuadrature.from_dict(cfg["quadrature"])
    weight = _weight_from(cfg, "affine")
    sched = cfg.get("schedule", {})
    stem = cfg.get("out", "design")
    try:
        result = design_lattice(
            psi, quad, weight,
            alpha0=float(sched.get("alpha0", 2.0)),
            beta0=float(sched.get("beta0", 1.0)),
            gamma=float(sched.get("gamma", 0.7)),
            max_steps=int(sched.get("max_steps", 20)),
        )
    except DesignSearchError as exc:
        _write_json(out_dir / f"{stem}.json", {
            "pass": False, "best_q": exc.best_q, "q_history": list(exc.q_history),
        })
        print(str(exc), file=sys.stderr)
        return _EXIT_CERT
    out = result.to_dict()
    out["pass"] = True
    _write_json(out_dir / f"{stem}.json", out)
    # companion lattice file sized to cover the design chart: scale levels
    # spanning [a_min, a_max], shifts reaching the b-range at every level
    j_span = int(math.ceil(math.log(quad.a_max) / math.log(result.alpha)))
    b_reach = max(abs(quad.b_lo), abs(quad.b_hi))
    k_span = int(math.ceil(b_reach / (result.beta * quad.a_min)))
    lattice = result.lattice((-j_span, j_span), (-k_span, k_span), quad.signs)
    _write_json(out_dir / f"{stem}.lattice.json", lattice.to_dict())
    return _EXIT_OK


def _load_lattice(d: dict):
    if d.get("type") == "affine":
        return AffineLattice.from_dict(d)
    if d.get("type") == "tf":
        return TFLattice.from_dict(d)
    raise ConfigError("unknown lattice type")


def cmd_frame_bounds(cfg: dict, out_dir: Path) -> int:
    g = _load_signal(cfg["window"])
    lat = _load_lattice(cfg["lattice"] if isinstance(cfg["lattice"], dict)
                        else _read_json(cfg["lattice"]))
    quad = GroupQuadrature.from_dict(cfg["quadrature"])
    band = tuple(cfg.get("band", (0.1, 1.0)))
    report = frame_bounds_empirical(
        g, lat, p=float(cfg.get("p", 2.0)),
        m=WeightSpec.from_dict(cfg["weight"]) if cfg.get("weight") else None,
        ensemble=int(cfg.get("ensemble", 20)),
        seed=int(cfg.get("seed", 0)),
        quad=quad, band=band,
    )
    _write_json(out_dir / f"{cfg.get('out', 'bounds')}.json", report.to_dict())
    return _EXIT_OK


def cmd_reconstruct(cfg: dict, out_dir: Path) -> int:
    psi = _load_signal(cfg["atom"])
    quad = GroupQuadrature.from_dict(cfg["quadrature"])
    weight = _weight_from(cfg, "affine")
    U = NeighborhoodSpec.from_dict(cfg["neighbourhood"])
    lat = _load_lattice(cfg["lattice"] if isinstance(cfg["lattice"], dict)
                        else _read_json(cfg["lattice"]))
    truth = GroupField.from_dict(_read_json(cfg["field"]))
    stem = cfg.get("out", "reconstruct")

    try:
        cert = atom_certificate(psi, quad, weight, U)
    except NotAdmissibleError as exc:
        print(f"not admissible: {exc}", file=sys.stderr)
        return _EXIT_CERT
    from .voice import normalize_admissible

    psi_n = normalize_admissible(psi)
    K = cwt(psi_n, psi_n, quad)
    bupu = build_bupu(lat, U, quad)
    samples = sample_field(truth, lat)
    try:
        rec, report = neumann_reconstruct(
            samples, bupu, K,
            tol=float(cfg.get("tol", 1e-3)),
            max_iter=int(cfg.get("max_iter", 100)),
            certificate=cert,
            allow_uncertified=not cert.passed,
            ground_truth=truth,
        )
    except ReconstructionDivergence as exc:
        _write_json(out_dir / f"{stem}.report.json", exc.report.to_dict())
        print(str(exc), file=sys.stderr)
        return _EXIT_DIVERGED
    _write_json(out_dir / f"{stem}.field.json", rec.to_dict())
    out = report.to_dict()
    out["certificate"] = cert.to_dict()
    _write_json(out_dir / f"{stem}.report.json", out)
    return _EXIT_OK


_COMMANDS = {
    "cwt": cmd_cwt,
    "stft": cmd_stft,
    "admissibility": cmd_admissibility,
    "moments": cmd_moments,
    "certify-atom": cmd_certify_atom,
    "design-lattice": cmd_design_lattice,
    "frame-bounds": cmd_frame_bounds,
    "reconstruct": cmd_reconstruct,
}


def _parse_override(value: str):
    try:
        return json.loads(value)
    except json.JSONDecodeError:
        return value


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="coorbit",
        description="transforms, certificates, lattice design and reconstruction",
    )
    parser.add_argument("command", choices=sorted(_COMMANDS))
    parser.add_argument("--config", help="path to a JSON run config")
    parser.add_argument("--seed", type=int, default=None)
    parser.add_argument("--out-dir", default=".")
    parser.add_argument("--set", nargs=2, action="append", metavar=("KEY", "VALUE"),
                        default=[], help="override a top-level config key")
    args = parser.parse_args(argv)

    try:
        cfg = _read_json(args.config) if args.config else {"version": FORMAT_VERSION}
    except (OSError, json.JSONDecodeError) as exc:
        print(f"cannot read config: {exc}", file=sys.stderr)
        return _EXIT_IO

    for key, value in args.set:
        cfg[key] = _parse_override(value)
    if args.seed is not None:
        cfg["seed"] = args.seed
    cfg.setdefault("command", args.command)

    try:
        cfg = _validate_config(cfg, args.command)
        return _COMMANDS[args.command](cfg, Path(args.out_dir))
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return _EXIT_IO
    except FileNotFoundError as exc:
        print(f"missing input: {exc}", file=sys.stderr)
        return _EXIT_IO
    except (OSError, json.JSONDecodeError) as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return _EXIT_IO
    except NotAdmissibleError as exc:
        print(f"not admissible: {exc}", file=sys.stderr)
        return _EXIT_CERT
    except (ValueError, KeyError) as exc:
        print(f"invalid input: {exc}", file=sys.stderr)
        return _EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
