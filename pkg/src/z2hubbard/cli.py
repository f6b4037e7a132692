"""Command-line interface.

Subcommands: ``encode``, ``verify``, ``evolve``, ``convergence``, ``dims``,
``weights``.  Settings are resolved as built-in defaults, then an optional
flat ``key = value`` config file (``--config``), then command-line flags.
Outputs written to files start with ``#`` header lines holding the fully
resolved configuration and a SHA-256 hash of the body.

Exit codes: 0 success, 1 verification failure, 2 invalid input,
3 protocol failure at run time (e.g. impossible post-selection).

The environment variable ``Z2HUBBARD_THREADS`` caps the number of threads
used by the numerical libraries.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import math
import os
import sys
import time

EXIT_OK, EXIT_VERIFY, EXIT_INPUT, EXIT_RUNTIME = 0, 1, 2, 3

DEFAULTS: dict[str, object] = {
    "Lx": 2,
    "Ly": 2,
    "extraRishon": False,
    "t": 0.1,
    "U": 1.0,
    "alphaP": 20.0,
    "alphaB": 20.0,
    "muTilde": 20.0,
    "Ntarget": None,
    "outerSteps": 100,
    "innerSteps": 10,
    "dTau": 0.01,
    "dt": 0.01,
    "tauMax": 20.0,
    "recordEvery": 10,
    "excitation": "spin",
    "site": "0,0",
    "seed": 0,
    "oracleCrossCheck": False,
    "format": "jsonl",
    "output": None,
    "dtList": "0.1,0.05,0.02,0.01",
    "rhoList": "0.5,1.0,1.5",
    "UtList": "0,2,4,8,10",
    "penalties": False,
}

_TYPES = {
    "Lx": int, "Ly": int, "outerSteps": int, "innerSteps": int, "recordEvery": int, "seed": int,
    "Ntarget": int, "t": float, "U": float, "alphaP": float, "alphaB": float, "muTilde": float,
    "dTau": float, "dt": float, "tauMax": float,
}
_BOOLS = {"extraRishon", "oracleCrossCheck", "penalties"}
_NULLABLE = {"Ntarget", "output"}


class InputError(ValueError):
    pass


def _parse_bool(v) -> bool:
    if isinstance(v, bool):
        return v
    s = str(v).strip().lower()
    if s in ("1", "true", "yes", "on"):
        return True
    if s in ("0", "false", "no", "off"):
        return False
    raise InputError(f"not a boolean: {v!r}")


def _coerce(key: str, value):
    if value is None:
        return None
    if key in _NULLABLE and isinstance(value, str) and value.strip().lower() in ("none", ""):
        return None
    if key in _BOOLS:
        return _parse_bool(value)
    if key in _TYPES:
        try:
            out = _TYPES[key](value)
        except (TypeError, ValueError):
            raise InputError(f"invalid value for {key}: {value!r}") from None
        if isinstance(out, float) and not math.isfinite(out):
            raise InputError(f"{key} must be finite")
        return out
    return str(value)


def read_config_file(path: str) -> dict:
    """Parse a flat ``key = value`` file (``#`` starts a comment)."""
    out = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise InputError(f"{path}:{lineno}: expected key = value")
            key, value = (s.strip() for s in line.split("=", 1))
            if key not in DEFAULTS:
                raise InputError(f"{path}:{lineno}: unknown key {key!r}")
            out[key] = value
    return out


def resolve_config(args: argparse.Namespace) -> dict:
    cfg = dict(DEFAULTS)
    if getattr(args, "config", None):
        cfg.update(read_config_file(args.config))
    for key in DEFAULTS:
        v = getattr(args, key, None)
        if v is not None:
            cfg[key] = v
    return {k: _coerce(k, v) for k, v in cfg.items()}


def _floats(text: str) -> list[float]:
    try:
        return [float(x) for x in str(text).split(",") if x.strip()]
    except ValueError:
        raise InputError(f"invalid number list {text!r}") from None


def _apply_thread_cap() -> None:
    cap = os.environ.get("Z2HUBBARD_THREADS")
    if cap:
        for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
            os.environ[var] = cap


# --------------------------------------------------------------------------
# output helpers
# --------------------------------------------------------------------------

def _header(command: str, cfg: dict, body: str) -> str:
    digest = hashlib.sha256(body.encode()).hexdigest()
    return (
        f"# z2hubbard {command}\n"
        f"# config {json.dumps(cfg, sort_keys=True)}\n"
        f"# sha256 {digest}\n"
    )


def _emit(command: str, cfg: dict, body: str, out=None) -> None:
    text = _header(command, cfg, body) + body
    path = cfg.get("output")
    if path:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        (out or sys.stdout).write(text)


def _layout(cfg: dict):
    from .lattice import LatticeSpec, build_layout

    try:
        spec = LatticeSpec(cfg["Lx"], cfg["Ly"])
    except (TypeError, ValueError):
        raise InputError(f"invalid lattice {cfg['Lx']}x{cfg['Ly']}") from None
    return build_layout(spec, extra_rishon=bool(cfg["extraRishon"]))


def _params(cfg: dict, **over):
    from .encoder import ModelParams

    kw = dict(t=cfg["t"], U=cfg["U"], alphaP=cfg["alphaP"], alphaB=cfg["alphaB"],
              muTilde=cfg["muTilde"], Ntarget=cfg["Ntarget"])
    kw.update(over)
    try:
        return ModelParams(**kw)
    except ValueError as e:
        raise InputError(str(e)) from None


def _site(cfg: dict, layout):
    from .lattice import Site

    try:
        jx, jy = (int(v) for v in str(cfg["site"]).split(","))
    except ValueError:
        raise InputError(f"invalid site {cfg['site']!r}; expected jx,jy") from None
    site = Site.at(jx, jy)
    if not layout.has_site(site):
        raise InputError(f"site {jx},{jy} outside the lattice")
    return site


# --------------------------------------------------------------------------
# commands
# --------------------------------------------------------------------------

def cmd_encode(cfg: dict) -> int:
    from .encoder import build_hamiltonian, stabilizers

    layout = _layout(cfg)
    ham = build_hamiltonian(layout, _params(cfg), include_penalties=bool(cfg["penalties"]))
    stabs = stabilizers(layout)
    lines = layout.header_lines()
    lines.append(f"# hamiltonian {len(ham)} terms "
                 f"(onsite {ham.count('onsite')}, hopping {ham.count('hopping')}, "
                 f"plaquette {ham.count('plaquette')}, number {ham.count('number')})")
    lines += [f"{t.coeff!r} {t.string.letters()}" for t in ham]
    lines.append(f"# stabilizers vertex {len(stabs.vertex)} plaquette {len(stabs.plaquette)}")
    lines += [str(s) for s in stabs.all]
    _emit("encode", cfg, "\n".join(lines) + "\n")
    return EXIT_OK


def cmd_dims(cfg: dict) -> int:
    from .lattice import hilbert_dims

    layout = _layout(cfg)
    full, phys = hilbert_dims(layout.spec)
    print(f"{layout.spec}: full {full}, physical {phys}")
    print(f"qubits {layout.n_qubits}")
    return EXIT_OK


def cmd_weights(cfg: dict) -> int:
    from .encoder import weight_report

    report = weight_report(_layout(cfg), _params(cfg))
    for k, v in report.items():
        print(f"{k} {v}")
    return EXIT_OK


def cmd_verify(cfg: dict) -> int:
    import numpy as np

    from .encoder import build_hamiltonian, check_commutation, stabilizers, weight_report
    from .lattice import hilbert_dims
    from .oracle import deformed_ed, fermionic_ed
    from .sector import SectorBasis

    layout = _layout(cfg)
    spec = layout.spec
    failures = []

    full, phys = hilbert_dims(spec)
    basis = SectorBasis(stabilizers(layout).all)
    print(f"dims {spec}: full {full}, physical {phys}, sector basis {basis.dim}")
    if not layout.extra_rishon and (basis.dim != phys or 2 ** layout.n_qubits != full):
        failures.append("dims")

    bad = check_commutation(build_hamiltonian(layout, _params(cfg), include_penalties=True),
                            stabilizers(layout))
    print(f"commutation violations {len(bad)}")
    if bad:
        failures.append("commutation")

    report = weight_report(layout, _params(cfg))
    print("weights " + " ".join(f"{k}={v}" for k, v in report.items()))
    if report["single_species_hopping"] > 6:
        failures.append("weights")

    worst = 0.0
    n_sites = spec.n_sites
    t = cfg["t"] if cfg["t"] != 0 else 1.0
    for rho in _floats(cfg["rhoList"]):
        N = int(round(rho * n_sites))
        for ut in _floats(cfg["UtList"]):
            p = _params(cfg, t=t, U=ut * t, Ntarget=N)
            ef = fermionic_ed(spec, p).groundEnergy
            ed = deformed_ed(layout, p).groundEnergy
            rel = abs(ef - ed) / max(abs(ef), 1e-300)
            worst = max(worst, rel)
            print(f"ed rho={rho} U/t={ut} fermionic={ef!r} deformed={ed!r} rel={rel:.3e}")
    print(f"max relative dE {worst:.3e}")
    if not worst < 1e-10:
        failures.append("ed-equivalence")

    if failures:
        print("FAILED: " + ", ".join(failures), file=sys.stderr)
        return EXIT_VERIFY
    print("all checks passed")
    return EXIT_OK


def _trajectory_body(traj, fmt: str, extra_rows=None) -> str:
    buf = io.StringIO()
    if fmt == "jsonl":
        for k, r in enumerate(traj.records):
            d = r.as_dict()
            if extra_rows is not None:
                d.update(extra_rows[k])
            buf.write(json.dumps(d, sort_keys=True) + "\n")
    elif fmt == "csv":
        recs = traj.records
        ns, nl, nst = len(recs[0].Sz), len(recs[0].rishon), len(recs[0].stabilizers)
        cols = (["tau"] + [f"Sz_{i}" for i in range(ns)] + [f"N_{i}" for i in range(ns)]
                + [f"rishon_{i}" for i in range(nl)] + ["energy"]
                + [f"stab_{i}" for i in range(nst)] + ["norm"])
        extra_keys = sorted(extra_rows[0]) if extra_rows else []
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(cols + extra_keys)
        for k, r in enumerate(recs):
            row = [r.tau, *r.Sz, *r.N, *r.rishon, r.energy, *r.stabilizers, r.norm]
            row += [extra_rows[k][key] for key in extra_keys]
            w.writerow([repr(float(v)) for v in row])
    else:
        raise InputError(f"unknown format {fmt!r}")
    return buf.getvalue()


def cmd_evolve(cfg: dict) -> int:
    import numpy as np

    from .circuit import AdiabaticSchedule
    from .emulator import LARGE_REGISTER, PostSelectionError
    from .encoder import build_hamiltonian, excitation_operator
    from .protocols import (
        SectorSimulation,
        adiabatic_ground_state,
        evolve_and_record,
        first_peak,
        fix_stabilizers,
        inject_excitation,
        prepare_initial_state,
    )

    kind = cfg["excitation"]
    if kind not in ("none", "spin", "charge"):
        raise InputError(f"unknown excitation {kind!r}")
    if kind == "charge":
        cfg["extraRishon"] = True
    layout = _layout(cfg)
    site = _site(cfg, layout)
    if kind != "none":
        excitation_operator(layout, kind, site)  # validates (raises ValueError)
    if not cfg["dt"] > 0 or cfg["recordEvery"] < 1:
        raise InputError("dt must be positive and recordEvery >= 1")
    try:
        schedule = AdiabaticSchedule(cfg["outerSteps"], cfg["innerSteps"], cfg["dTau"])
    except ValueError as e:
        raise InputError(str(e)) from None
    if layout.n_qubits > LARGE_REGISTER:
        print(f"warning: {layout.n_qubits} qubits; dense emulation will be slow", file=sys.stderr)
    params = _params(cfg)
    H = build_hamiltonian(layout, params)
    state = prepare_initial_state(layout, seed=cfg["seed"])
    state, _ = fix_stabilizers(state, layout)
    state = adiabatic_ground_state(state, layout, params, schedule)
    try:
        if kind != "none":
            state = inject_excitation(state, layout, kind, site)
    except PostSelectionError as e:
        print(str(e), file=sys.stderr)
        return EXIT_RUNTIME
    start = state.amps.copy()
    traj = evolve_and_record(state, layout, H, cfg["tauMax"], cfg["dt"], cfg["recordEvery"])

    extra = None
    if cfg["oracleCrossCheck"]:
        sim = SectorSimulation(layout, params)
        coeffs, outside = sim.basis.project(start)
        if outside > 1e-8:
            print(f"state leaves the sector by {outside:.3e}", file=sys.stderr)
            return EXIT_RUNTIME
        from .oracle import sector_projected_evolution

        ref = sector_projected_evolution(sim.basis, sim.H_matrix, coeffs, traj.taus)
        extra = []
        for r, c in zip(traj.records, ref):
            o = sim.record(c, r.tau)
            extra.append({
                "oracle_dSz": float(np.max(np.abs(np.subtract(r.Sz, o.Sz)))),
                "oracle_dN": float(np.max(np.abs(np.subtract(r.N, o.N)))),
            })
    body = _trajectory_body(traj, cfg["format"], extra)
    idx = layout.site_index[site]
    summary = {
        "summary": True,
        "peak_N": first_peak(traj.taus, traj.series("N", idx)),
        "peak_Sz": first_peak(traj.taus, traj.series("Sz", idx)),
        **{f"drift_{k}": v for k, v in traj.conservation_drift().items()},
    }
    body += "# summary " + json.dumps(summary, sort_keys=True) + "\n"
    _emit("evolve", cfg, body)
    return EXIT_OK


def cmd_convergence(cfg: dict) -> int:
    from .protocols import trotter_convergence

    layout = _layout(cfg)
    dts = _floats(cfg["dtList"])
    if not dts or any(d <= 0 for d in dts) or any(a <= b for a, b in zip(dts, dts[1:])):
        raise InputError("dtList must be positive and strictly decreasing")
    res = trotter_convergence(layout, _params(cfg), dts, cfg["tauMax"], seed=cfg["seed"])
    lines = ["dt,error"] + [f"{d!r},{e!r}" for d, e in zip(res.dts, res.errors)]
    lines.append(f"# slope {'absent' if res.slope is None else repr(res.slope)}")
    _emit("convergence", cfg, "\n".join(lines) + "\n")
    return EXIT_OK


COMMANDS = {
    "encode": cmd_encode,
    "verify": cmd_verify,
    "evolve": cmd_evolve,
    "convergence": cmd_convergence,
    "dims": cmd_dims,
    "weights": cmd_weights,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="z2hubbard", description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", help="flat key = value settings file")
        p.add_argument("--Lx", type=str)
        p.add_argument("--Ly", type=str)
        p.add_argument("--extra-rishon", dest="extraRishon", action="store_const", const=True)
        for key in ("t", "U", "alphaP", "alphaB", "muTilde", "Ntarget"):
            p.add_argument(f"--{key}", type=str)
        p.add_argument("--output", "-o")
        p.add_argument("--seed", type=str)
        if name == "encode":
            p.add_argument("--penalties", action="store_const", const=True)
        if name == "verify":
            p.add_argument("--rho-list", dest="rhoList")
            p.add_argument("--Ut-list", dest="UtList")
        if name == "evolve":
            for key in ("outerSteps", "innerSteps", "dTau", "dt", "tauMax", "recordEvery"):
                p.add_argument(f"--{key}", type=str)
            p.add_argument("--excitation", choices=("none", "spin", "charge"))
            p.add_argument("--site", help="jx,jy (default 0,0)")
            p.add_argument("--oracle", dest="oracleCrossCheck", action="store_const", const=True)
            p.add_argument("--format", choices=("jsonl", "csv"))
        if name == "convergence":
            p.add_argument("--dt-list", dest="dtList")
            p.add_argument("--tauMax", type=str)
    return parser


def main(argv: list[str] | None = None) -> int:
    _apply_thread_cap()
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_INPUT if e.code else EXIT_OK
    try:
        cfg = resolve_config(args)
        return COMMANDS[args.command](cfg)
    except (InputError, ValueError, TypeError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INPUT
    except RuntimeError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
