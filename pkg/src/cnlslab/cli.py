"""Command-line surface: ground-state, classify, evolve, sweep, self-test, bench.

Configuration is a flat key-value text file (key = value per line) plus
command-line overrides; all parameters are scalars or short lists.  Output
files are CSV/JSONL with a schema-version header line and floats printed
with 17 significant digits, so identical configs reproduce byte-identical
files.  Randomness exists only in test-corpus generation (--seed);
simulations are deterministic.

Exit codes: 0 success/Completed, 1 failed internal invariant, 2 usage or
admissibility error, 3 BlowupDetected, 4 ConservationFailure.
"""

from __future__ import annotations

import argparse
import concurrent.futures
import csv
import os
import sys
import time
from pathlib import Path
from typing import List, Optional

import numpy as np

SCHEMA_PREFIX = "cnlslab"


def fmt(x) -> str:
    if isinstance(x, float):
        return "%.17g" % x
    return str(x)


def write_csv(path, kind: str, header: List[str], rows: List[list]) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(f"# schema: {SCHEMA_PREFIX}/{kind}/v1\n")
        w = csv.writer(fh)
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(x) for x in row])


def load_config(path) -> dict:
    out = {}
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ValueError(f"config line without '=': {line!r}")
            k, v = line.split("=", 1)
            out[k.strip()] = v.strip()
    return out


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="cnlslab",
        description="Radial laboratory for the combined NLS with inverse-square potential",
    )
    ap.add_argument("--config", help="flat key=value config file; flags override it")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(sp, evolve_flags=False):
        sp.add_argument("--d", type=int, default=None, help="dimension (3, 4 or 5)")
        sp.add_argument("--a", type=float, default=None, help="inverse-square coefficient")
        sp.add_argument("--rmax", type=float, default=None, help="domain radius")
        sp.add_argument("--n", type=int, default=None, help="number of radial cells")
        sp.add_argument("--out", default=".", help="output directory")
        sp.add_argument("--seed", type=int, default=0, help="seed for corpus generation")
        if evolve_flags:
            sp.add_argument("--dt", type=float, default=None)
            sp.add_argument("--tend", type=float, default=None)
            sp.add_argument("--monitors", default="",
                            help="comma list from {virial,modulation}")

    sp = sub.add_parser("ground-state", help="build the ground-state bundle")
    common(sp)

    sp = sub.add_parser("classify", help="classify a named datum")
    common(sp)
    sp.add_argument("--family", default="scaled_ground",
                    help="scaled_ground | gaussian | bump")
    sp.add_argument("--c", type=float, default=1.0, help="amplitude")
    sp.add_argument("--s", type=float, default=1.0, help="scale / concentration")
    sp.add_argument("--field", default=None, help="CSV field file instead of a family")

    sp = sub.add_parser("evolve", help="integrate a named datum in time")
    common(sp, evolve_flags=True)
    sp.add_argument("--family", default="scaled_ground")
    sp.add_argument("--c", type=float, default=1.0)
    sp.add_argument("--s", type=float, default=1.0)
    sp.add_argument("--field", default=None, help="CSV field file instead of a family")
    sp.add_argument("--sponge", action="store_true", help="absorbing outer layer")

    sp = sub.add_parser("sweep", help="batch classify+evolve over parameter grids")
    common(sp, evolve_flags=True)
    sp.add_argument("--family", default="scaled_ground")
    sp.add_argument("--a-grid", default=None, help="comma list of a values")
    sp.add_argument("--c-grid", default=None, help="comma list of amplitudes")
    sp.add_argument("--s-grid", default=None, help="comma list of scales")
    sp.add_argument("--c", type=float, default=1.0)
    sp.add_argument("--s", type=float, default=1.0)
    sp.add_argument("--workers", type=int, default=1)

    sp = sub.add_parser("self-test", help="quick invariant battery")
    common(sp)

    sp = sub.add_parser("bench", help="compare compiled and python step kernels")
    common(sp)
    sp.add_argument("--steps", type=int, default=200)
    return ap


def merged_args(args) -> argparse.Namespace:
    if args.config:
        cfg = load_config(args.config)
        cast = {"d": int, "n": int, "workers": int, "steps": int, "seed": int}
        for k, v in cfg.items():
            attr = k.replace("-", "_")
            if getattr(args, attr, None) in (None, "") or (
                attr in ("c", "s") and getattr(args, attr) == 1.0
            ):
                caster = cast.get(attr, float if attr not in (
                    "family", "monitors", "out", "field") else str)
                setattr(args, attr, caster(v))
    if getattr(args, "d", None) is None:
        args.d = 3
    if getattr(args, "a", None) is None:
        args.a = 0.0
    if getattr(args, "rmax", None) is None:
        args.rmax = 60.0
    if getattr(args, "n", None) is None:
        args.n = 16384
    if getattr(args, "dt", None) is None and hasattr(args, "dt"):
        args.dt = 1e-3
    if getattr(args, "tend", None) is None and hasattr(args, "tend"):
        args.tend = 10.0
    return args


def _setup(args):
    from .grid import make_grid
    from .groundstate import build_bundle
    from .params import make_params

    p = make_params(args.d, args.a)
    grid = make_grid(p, args.rmax, args.n)
    bundle = build_bundle(p, grid)
    return p, grid, bundle


BUNDLE_COLUMNS = ["d", "a", "beta", "sigma", "r_max", "n", "kinetic_sq",
                  "crit_mass", "pohozaev_resid", "closed_form",
                  "closed_form_discrepancy", "cgn", "m_a"]


def cmd_ground_state(args) -> int:
    from .grid import write_field_csv
    from .groundstate import PohozaevError

    try:
        p, grid, bundle = _setup(args)
    except PohozaevError as exc:
        print(f"FAIL Pohozaev identity: {exc}", file=sys.stderr)
        return 1
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    resid = abs(bundle.kinetic_sq - bundle.crit_mass) / bundle.crit_mass
    row = [p.d, p.a, p.beta, p.sigma, grid.r_max, grid.n,
           bundle.kinetic_sq, bundle.crit_mass, resid, bundle.closed_form,
           bundle.closed_form_discrepancy, bundle.cgn, bundle.m_a]
    write_csv(out / "ground_state.csv", "bundle", BUNDLE_COLUMNS, [row])
    write_field_csv(out / "ground_state_field.csv", bundle.w)
    print(f"ground state d={p.d} a={p.a}: kinetic_sq={fmt(bundle.kinetic_sq)} "
          f"m_a={fmt(bundle.m_a)} pohozaev_resid={resid:.2e}")
    return 0


VERDICT_COLUMNS = ["d", "a", "family", "c", "s", "region", "note",
                   "m_a", "kinetic_ground_sq", "energy_margin", "kinetic_margin",
                   "e_a", "e_a_crit", "kinetic_sq", "l_crit", "l_pert", "k_a",
                   "k_a_c", "h_a", "mass"]


def _verdict_row(args, p, verdict, family, c, s) -> list:
    r = verdict.report
    return [p.d, p.a, family, c, s, verdict.region.value, verdict.note,
            verdict.m_a, verdict.kinetic_ground_sq, verdict.energy_margin,
            verdict.kinetic_margin, r.e_a, r.e_a_crit, r.kinetic_sq,
            r.l_crit, r.l_pert, r.k_a, r.k_a_c, r.h_a, r.mass]


def _datum(args, p, grid):
    from . import corpus
    from .grid import read_field_csv

    if getattr(args, "field", None):
        return read_field_csv(args.field, grid)
    return corpus.make_family(args.family, p, grid, c=args.c, s=args.s)


def cmd_classify(args) -> int:
    from .classify import classify
    from .functionals import REPORT_COLUMNS

    p, grid, bundle = _setup(args)
    u = _datum(args, p, grid)
    verdict = classify(u, p, bundle)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_csv(out / "verdict.csv", "verdict", VERDICT_COLUMNS,
              [_verdict_row(args, p, verdict, args.family, args.c, args.s)])
    write_csv(out / "report.csv", "energy-report", REPORT_COLUMNS,
              [verdict.report.row()])
    print(f"verdict: {verdict.region.value}  energy margin {fmt(verdict.energy_margin)} "
          f"kinetic margin {fmt(verdict.kinetic_margin)}"
          + (f"  note: {verdict.note}" if verdict.note else ""))
    return 0


SUMMARY_COLUMNS = ["termination", "t_final", "t_star", "mass_drift",
                   "energy_drift", "kinetic_max", "kinetic_min", "dt_final"]


def cmd_evolve(args) -> int:
    from .evolve import EvolveConfig, run
    from .grid import RadialField, write_field_csv

    p, grid, bundle = _setup(args)
    u = _datum(args, p, grid)
    monitors = {m.strip() for m in args.monitors.split(",") if m.strip()}
    unknown = monitors - {"virial", "modulation"}
    if unknown:
        print(f"unknown monitors: {sorted(unknown)}", file=sys.stderr)
        return 2
    cfg = EvolveConfig(
        dt=args.dt, t_end=args.tend,
        track_virial="virial" in monitors,
        track_modulation="modulation" in monitors,
        sponge=bool(getattr(args, "sponge", False)),
    )
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    rec = run(u, p, cfg, bundle, jsonl_path=out / "trajectory.jsonl")
    row = rec.summary_row()
    write_csv(out / "summary.csv", "evolve-summary", SUMMARY_COLUMNS,
              [[row[k] for k in SUMMARY_COLUMNS]])
    write_field_csv(out / "checkpoint.csv", RadialField(grid, rec.final_values))
    print(f"{rec.termination.kind} at t={fmt(rec.termination.t)}"
          + (f" (t*={fmt(rec.t_star)})" if rec.t_star is not None else ""))
    return rec.termination.exit_code


SWEEP_COLUMNS = VERDICT_COLUMNS + ["termination", "t_star", "mass_drift",
                                   "energy_drift", "error"]


def _sweep_point(task) -> list:
    (d, a, family, c, s, rmax, n, dt, tend, monitors) = task
    from .classify import classify
    from .corpus import make_family
    from .evolve import EvolveConfig, run
    from .grid import make_grid
    from .groundstate import build_bundle
    from .params import make_params

    base = [d, a, family, c, s]
    try:
        p = make_params(d, a)
        grid = make_grid(p, rmax, n)
        bundle = build_bundle(p, grid)
        u = make_family(family, p, grid, c=c, s=s)
        verdict = classify(u, p, bundle)
        row = _verdict_row(None, p, verdict, family, c, s)
        if tend > 0:
            cfg = EvolveConfig(dt=dt, t_end=tend,
                               track_virial="virial" in monitors,
                               track_modulation="modulation" in monitors)
            rec = run(u, p, cfg, bundle)
            srow = rec.summary_row()
            row += [rec.termination.kind,
                    rec.t_star if rec.t_star is not None else "",
                    srow["mass_drift"], srow["energy_drift"], ""]
        else:
            row += ["", "", "", "", ""]
        return row
    except Exception as exc:  # partial failures recorded, sweep continues
        return base + [""] * (len(VERDICT_COLUMNS) - 5) + ["", "", "", "", repr(exc)]


def _parse_grid(text: Optional[str], fallback: float) -> List[float]:
    if not text:
        return [fallback]
    vals = [float(x) for x in text.split(",") if x.strip() != ""]
    return vals


def cmd_sweep(args) -> int:
    from .params import make_params

    a_grid = _parse_grid(args.a_grid, args.a)
    c_grid = _parse_grid(args.c_grid, args.c)
    s_grid = _parse_grid(args.s_grid, args.s)
    if not a_grid or not c_grid or not s_grid:
        print("empty parameter grid", file=sys.stderr)
        return 2
    for a in a_grid:  # admissibility gate before any work
        try:
            make_params(args.d, a)
        except ValueError as exc:
            print(f"inadmissible a={a}: {exc}", file=sys.stderr)
            return 2
    monitors = {m.strip() for m in args.monitors.split(",") if m.strip()}
    tasks = [
        (args.d, a, args.family, c, s, args.rmax, args.n, args.dt, args.tend,
         tuple(sorted(monitors)))
        for a in a_grid for c in c_grid for s in s_grid
    ]
    if args.workers > 1:
        with concurrent.futures.ProcessPoolExecutor(max_workers=args.workers) as pool:
            rows = list(pool.map(_sweep_point, tasks))  # submission order
    else:
        rows = [_sweep_point(t) for t in tasks]
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_csv(out / "sweep.csv", "sweep", SWEEP_COLUMNS, rows)
    n_fail = sum(1 for r in rows if r[-1])
    print(f"sweep: {len(rows)} points, {n_fail} failed rows -> {out / 'sweep.csv'}")
    return 0


def cmd_self_test(args) -> int:
    import math

    from .classify import classify
    from .corpus import make_family
    from .grid import make_grid, sample_profile
    from .groundstate import build_bundle
    from .modulation import fit
    from .params import Regime, admissibility, make_params
    from .profiles import GroundStateProfile, ScaledProfile
    from .stepper import EvolutionOperator
    from .virial import build_weight, virial_sample
    import numpy as _np

    checks = []

    def check(name, ok, detail=""):
        checks.append(ok)
        print(f"{'PASS' if ok else 'FAIL'}  {name}" + (f"  ({detail})" if detail else ""))

    p = make_params(3, -3.0 / 16.0)
    check("beta derivation", abs(p.beta - 0.5) < 1e-14, f"beta={p.beta}")
    check("threshold regime containment",
          (not admissibility(p, Regime.THRESHOLD).ok) and admissibility(p, Regime.SUB_THRESHOLD).ok)

    grid = make_grid(p, 60.0, 4096)
    bundle = build_bundle(p, grid)
    resid = abs(bundle.kinetic_sq - bundle.crit_mass) / bundle.crit_mass
    check("Pohozaev identity", resid < 1e-4, f"resid={resid:.2e}")
    closed = (3.0 / 4.0) ** 1.5 * math.pi**2 / 2.0
    check("critical-mass oracle", abs(bundle.crit_mass - closed) / closed < 1e-4)

    wt = build_weight(10.0, grid)
    W = GroundStateProfile(p)
    s = virial_sample(sample_profile(ScaledProfile(W, amp=complex(math.cos(1), math.sin(1))), grid), p, wt)
    check("orbit annihilation", abs(s.f_r_c) < 1e-3 * bundle.kinetic_sq, f"|F_R^c|={abs(s.f_r_c):.2e}")

    u = make_family("gaussian", p, grid, c=0.5, s=1.0)
    v = classify(u, p, bundle)
    check("small gaussian scatters", v.region.value == "ScatterSub", v.region.value)

    op = EvolutionOperator(grid, p)
    vals = u.values.copy()
    m0 = float(_np.dot(grid.volume_weights, _np.abs(vals) ** 2))
    for _ in range(20):
        vals = op.step_values(vals, 1e-3)
    m1 = float(_np.dot(grid.volume_weights, _np.abs(vals) ** 2))
    check("discrete mass conservation", abs(m1 - m0) / m0 < 1e-12, f"drift={abs(m1-m0)/m0:.1e}")

    orbit = sample_profile(ScaledProfile(W, amp=2.0 ** 0.5 * complex(math.cos(math.pi / 3), math.sin(math.pi / 3)), rate=2.0), grid)
    f = fit(orbit, p, bundle)
    check("exact-orbit modulation fit",
          abs(f.theta - math.pi / 3) < 1e-6 and abs(f.mu - 2.0) < 1e-6,
          f"theta={f.theta:.8f} mu={f.mu:.8f}")

    ok = all(checks)
    print(f"self-test: {sum(checks)}/{len(checks)} passed")
    return 0 if ok else 1


def cmd_bench(args) -> int:
    from . import _stepper_py
    from .grid import make_grid
    from .params import make_params
    from .corpus import make_family
    from .stepper import BACKEND, EvolutionOperator

    p = make_params(args.d, args.a)
    grid = make_grid(p, args.rmax, args.n)
    u = make_family("gaussian", p, grid, c=0.8, s=1.0)
    dt = 1e-3
    op = EvolutionOperator(grid, p)
    py_solver = _stepper_py.CrankNicolsonSolver(op.lower, op.diag, op.upper, dt)

    def time_loop(stepfn):
        v = u.values.copy()
        stepfn(v)  # warm up
        t0 = time.perf_counter()
        v = u.values.copy()
        for _ in range(args.steps):
            v = stepfn(v)
        return (time.perf_counter() - t0) / args.steps, v

    t_py, v_py = time_loop(lambda v: _stepper_py.strang_step(v, py_solver, dt, p.p_crit, p.p_pert))
    rows = [["python", args.n, args.steps, t_py * 1e3, 1.0, 0.0]]
    if BACKEND == "compiled":
        t_c, v_c = time_loop(lambda v: op.step_values(v, dt))
        dev = float(np.max(np.abs(v_c - v_py)))
        rows.insert(0, ["compiled", args.n, args.steps, t_c * 1e3, t_py / t_c, dev])
        print(f"compiled: {t_c*1e3:.3f} ms/step   python: {t_py*1e3:.3f} ms/step   "
              f"speedup {t_py/t_c:.2f}x   max deviation {dev:.2e}")
    else:
        print(f"python: {t_py*1e3:.3f} ms/step  (compiled extension unavailable)")
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_csv(out / "bench.csv", "bench",
              ["backend", "n", "steps", "ms_per_step", "speedup_vs_python", "max_dev"], rows)
    return 0


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        args = merged_args(args)
    except (OSError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    handlers = {
        "ground-state": cmd_ground_state,
        "classify": cmd_classify,
        "evolve": cmd_evolve,
        "sweep": cmd_sweep,
        "self-test": cmd_self_test,
        "bench": cmd_bench,
    }
    try:
        return handlers[args.command](args)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
