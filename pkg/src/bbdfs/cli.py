"""``bbdfs`` command line: averaging reports, simulations, gate checks and sweeps.

Exit codes: 0 success, 1 validation failure (bad config, failed check),
2 runtime failure (capacity exceeded, I/O, numerical trouble).
"""

from __future__ import annotations

import argparse
import csv
import io
import sys
from concurrent.futures import ThreadPoolExecutor
from fractions import Fraction

import numpy as np

from .averaging import DecouplingReport, schedule_average, storage_report
from .config import STATE_LABELS, SWEEP_AXES, ScenarioConfig, apply_sweep_value, load
from .dfs import (GatePlan, code_projector, codes_for, encode_register, gate_check,
                  plan_cnot, plan_logical_x, plan_logical_z)
from .errors import (BBDFSError, ConfigError, DegenerateCouplingError, InvalidOperandError,
                     LayoutError, UnsupportedConfigurationError)
from .evolution import Trajectory, run
from .model import build_total
from .pulses import common_period, generate_schedule

EXIT_OK, EXIT_INVALID, EXIT_RUNTIME = 0, 1, 2
_VALIDATION = (ConfigError, LayoutError, DegenerateCouplingError, InvalidOperandError,
               UnsupportedConfigurationError)
SUMMARY_FIELDS = ("error", "min_fidelity", "final_fidelity", "max_leakage", "min_purity")


def _fmt(v) -> str:
    return f"{float(v):.12g}"


def _emit(text: str, out: str | None):
    if out:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


# --- avg-report -----------------------------------------------------------------

def avg_report(cfg: ScenarioConfig) -> DecouplingReport:
    """Average ``H`` over the configured program.

    Storage mode is checked against the constructive expectation; with
    pulses off nothing should cancel, so the input itself is expected.
    """
    sc = cfg.scenario
    h = build_total(sc)
    if cfg.schedule_mode == "storage":
        return storage_report(sc)
    s = generate_schedule(cfg.schedule_clocks(), 0, sc.n_sites)
    rep = schedule_average(s, h)
    expected = h if cfg.schedule_mode == "none" else None
    return DecouplingReport(rep.input, rep.surviving, rep.cancelled, rep.period, rep.weights, expected)


# --- simulate -------------------------------------------------------------------

def initial_state(cfg: ScenarioConfig) -> np.ndarray:
    sc = cfg.scenario
    if sc.layout.bare:
        return np.array(STATE_LABELS[cfg.initial[0]], dtype=complex)
    labels = list(cfg.initial) + ["0"] * (len(sc.layout.blocks) - len(cfg.initial))
    return encode_register(codes_for(sc), [STATE_LABELS[s] for s in labels], sc.n_system)


def sample_times(cfg: ScenarioConfig) -> list[Fraction]:
    """Whole multiples of ``sample_every`` common periods up to the horizon."""
    units = Fraction(int(np.floor(cfg.horizon / cfg.dt + 1e-9)))
    step = common_period(cfg.schedule_clocks()) * cfg.sample_every
    out, t = [], Fraction(0)
    while t <= units:
        out.append(t)
        t += step
    return out


def simulate(cfg: ScenarioConfig) -> Trajectory:
    sc = cfg.scenario
    times = sample_times(cfg)
    sched = generate_schedule(cfg.schedule_clocks(), times[-1], sc.n_sites)
    psi = initial_state(cfg)
    proj = None if sc.layout.bare else code_projector(codes_for(sc), sc.n_system)
    ref = psi if cfg.reference == "initial" else None
    return run(sched, build_total(sc), psi, times, dt=cfg.dt, n_bath=sc.n_bath,
               reference=ref, projector=proj, bath=cfg.bath_state)


def summarize(tr: Trajectory) -> dict[str, float]:
    return {
        "error": 1.0 - float(np.min(tr.fidelity)),
        "min_fidelity": float(np.min(tr.fidelity)),
        "final_fidelity": float(tr.fidelity[-1]),
        "max_leakage": float(np.max(tr.leakage)),
        "min_purity": float(np.min(tr.purity)),
    }


def summary_line(s: dict[str, float]) -> str:
    return " ".join(f"{k}={_fmt(s[k])}" for k in SUMMARY_FIELDS) + "\n"


# --- gate-check -----------------------------------------------------------------

def build_plan(cfg: ScenarioConfig, kind: str | None = None) -> GatePlan:
    g = cfg.gate
    if g.script and kind is None:
        with open(g.script, encoding="utf-8") as fh:
            return GatePlan.from_script(fh.read())
    kind = kind or g.kind
    sc = cfg.scenario
    if kind == "x":
        return plan_logical_x(sc, g.block, g.angle)
    if kind == "z":
        return plan_logical_z(sc, g.block, g.angle)
    return plan_cnot(sc, g.control, g.target)


def _monomial(u: np.ndarray):
    """Column -> row map when ``u`` permutes basis states up to phases."""
    mags = np.abs(u)
    rows = np.argmax(mags, axis=0)
    if np.allclose(mags[rows, np.arange(u.shape[1])], 1.0, atol=1e-12):
        return rows
    return None


def gate_report(cfg: ScenarioConfig, plan: GatePlan) -> tuple[str, bool]:
    sc = cfg.scenario
    dt = plan.total_time / cfg.gate.divisions if plan.total_time > 0 else cfg.dt
    res = gate_check(sc, plan, dt, bath=cfg.bath_state)
    fmin = cfg.thresholds.get("fidelity", 1 - 1e-4)
    lines = [
        f"gate: {plan.name}",
        f"blocks: {' '.join(str(b) for b in plan.blocks)}",
        f"total time: {_fmt(plan.total_time)}",
        f"dt: {_fmt(dt)}",
        f"fidelity: {_fmt(res.fidelity)}",
        f"infidelity: {_fmt(1 - res.fidelity)}",
        f"leakage: {_fmt(res.leakage)}",
    ]
    ok = res.fidelity >= fmin
    lines.append(f"check fidelity >= {_fmt(fmin)}: {'pass' if ok else 'fail'}")
    perm = _monomial(res.ideal)
    if perm is not None:
        worst = float(np.min(res.populations[perm, np.arange(len(perm))])) if perm.size else 1.0
        truth = worst >= fmin
        lines.append(f"truth table (worst basis population {_fmt(worst)}): {'pass' if truth else 'fail'}")
        ok = ok and truth
    bmin = cfg.thresholds.get("bystander")
    for b, f in sorted(res.bystanders.items()):
        tag = ""
        if bmin is not None:
            tag = " pass" if f >= bmin else " fail"
            ok = ok and f >= bmin
        lines.append(f"bystander block {b}: {_fmt(f)}{tag}")
    lines.append(f"result: {'pass' if ok else 'fail'}")
    return "\n".join(lines) + "\n", ok


# --- sweep ----------------------------------------------------------------------

def parse_axis(spec: str) -> tuple[str, tuple[float, ...]]:
    """``name=v1,v2,...`` -> ``(name, values)``."""
    name, sep, rest = spec.partition("=")
    name = name.strip()
    if not sep or name not in SWEEP_AXES:
        raise ConfigError(f"expected NAME=v1,v2,... with NAME in {', '.join(SWEEP_AXES)}", "--axis")
    try:
        values = tuple(float(v) for v in rest.split(",") if v.strip())
    except ValueError as exc:
        raise ConfigError(f"bad number in {rest!r}", "--axis") from exc
    return name, values


def sweep(cfg: ScenarioConfig, axis: str, values, jobs: int = 1) -> str:
    if not values:
        raise ConfigError("empty sweep grid", "sweep.values")
    points = [apply_sweep_value(cfg, axis, v) for v in values]
    with ThreadPoolExecutor(max_workers=max(1, jobs)) as pool:
        summaries = list(pool.map(lambda c: summarize(simulate(c)), points))
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow([axis, *SUMMARY_FIELDS])
    for v, s in zip(values, summaries):
        w.writerow([_fmt(v), *(_fmt(s[k]) for k in SUMMARY_FIELDS)])
    return buf.getvalue()


# --- entry point ----------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", required=True, help="scenario YAML file")
    common.add_argument("--out", help="output file (default: stdout)")
    common.add_argument("--seed", type=int, help="override the config seed")

    p = argparse.ArgumentParser(prog="bbdfs", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("avg-report", parents=[common], help="first-order average Hamiltonian report")
    sim = sub.add_parser("simulate", parents=[common], help="trajectory CSV of a storage run")
    sim.add_argument("--summary", action="store_true", help="also print summary metrics to stderr")
    gc = sub.add_parser("gate-check", parents=[common], help="simulate an encoded gate")
    gc.add_argument("--gate", choices=("x", "z", "cnot"), help="override gate.kind")
    gc.add_argument("--emit-plan", metavar="PATH", help="write the gate plan script as JSON")
    sw = sub.add_parser("sweep", parents=[common], help="summary metrics over a parameter grid")
    sw.add_argument("--axis", help="NAME=v1,v2,... (default: the config's sweep section)")
    sw.add_argument("--jobs", type=int, default=1, help="grid points evaluated concurrently")
    return p


def _dispatch(args) -> int:
    cfg = load(args.config)
    if args.seed is not None:
        if args.seed < 0:
            raise ConfigError("must be nonnegative", "--seed")
        cfg = cfg.with_seed(args.seed)

    if args.command == "avg-report":
        rep = avg_report(cfg)
        _emit(rep.to_text(), args.out)
        return EXIT_OK if rep.satisfied else EXIT_INVALID

    if args.command == "simulate":
        tr = simulate(cfg)
        _emit(tr.to_csv(), args.out)
        if args.summary:
            sys.stderr.write(summary_line(summarize(tr)))
        return EXIT_OK

    if args.command == "gate-check":
        plan = build_plan(cfg, args.gate)
        if args.emit_plan:
            with open(args.emit_plan, "w", encoding="utf-8") as fh:
                fh.write(plan.to_script())
        text, ok = gate_report(cfg, plan)
        _emit(text, args.out)
        return EXIT_OK if ok else EXIT_INVALID

    axis, values = (parse_axis(args.axis) if args.axis else (cfg.sweep_axis, cfg.sweep_values))
    if axis is None:
        raise ConfigError("no sweep axis given (use --axis or a sweep section)", "sweep.axis")
    _emit(sweep(cfg, axis, values, args.jobs), args.out)
    return EXIT_OK


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _dispatch(args)
    except _VALIDATION as exc:
        print(f"bbdfs: error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (BBDFSError, OSError, np.linalg.LinAlgError) as exc:
        print(f"bbdfs: runtime error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
