"""Command-line entry point ``vortex-holonomy``.

Subcommands read one JSON run configuration (see ``schema/``), apply the
flag overrides, and write CSV/JSON/SVG files. Exit status: 0 on success,
2 for configuration errors, 3 for numerical failures.
"""

from __future__ import annotations

import argparse
import copy
import csv
import io
import json
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from importlib import resources
from pathlib import Path

import jsonschema
import numpy as np

from .core import PlanarState, Strengths, conserved_set, hamiltonian_flat, planar_rhs
from .errors import (
    IntegrationError,
    NotPeriodicError,
    VortexError,
)
from .integrator import IntegratorConfig, find_periodic_orbit, integrate, period_by_quadrature
from .jacobi3 import JBHChart, psi
from .phases import lift, phase_report, mod_2pi
from .reduced3 import ReducedContext
from .survey import orbits_at_energy

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 2, 3
THREADS_ENV = "VORTEX_HOLONOMY_THREADS"

PHASE_COLUMNS = [
    "orbit_id", "energy", "theta_g", "period", "theta_d", "theta_tot",
    "theta_g_mod", "theta_g_area", "theta_d_integral", "period_quadrature",
    "theta_sum_mod", "ap_period", "ap_multiple", "status",
]
PROVENANCE = {
    "theta_g": "line integral of the section pullback",
    "period": "section return of the reduced flow",
    "theta_d": "closed form proportional to the period",
    "theta_tot": "rotation of the unreduced configuration after one period",
    "theta_g_area": "half the enclosed area on the normalized surface",
    "theta_d_integral": "quadrature of the connection on the Hamiltonian field",
    "period_quadrature": "contour continuation of the level set",
    "ap_period": "elliptic closed form for identical vortices",
}


class ConfigError(Exception):
    """Invalid or inconsistent run configuration."""


# configuration --------------------------------------------------------------


def load_schema() -> dict:
    text = resources.files("vortex_holonomy").joinpath("schema/run_config.schema.json").read_text()
    return json.loads(text)


def load_config(path: str, overrides: argparse.Namespace | None = None,
                command: str | None = None) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            cfg = json.load(fh)
    except FileNotFoundError as exc:
        raise ConfigError(f"config file not found: {path}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path} is not valid JSON: {exc}") from exc
    cfg = apply_overrides(cfg, overrides)
    try:
        jsonschema.validate(cfg, load_schema())
    except jsonschema.ValidationError as exc:
        loc = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ConfigError(f"{path}: schema violation at {loc}: {exc.message}") from exc
    n = len(cfg["strengths"])
    # full dynamics (simulate) works for any number of vortices
    expected = {"three": 3, "four": 4}[cfg["problem"]]
    if command != "simulate" and n != expected:
        raise ConfigError(f"problem '{cfg['problem']}' needs exactly {expected} strengths")
    pos = cfg.get("initial", {}).get("positions")
    if pos is not None and len(pos) != n:
        raise ConfigError(f"{len(pos)} positions given for {n} strengths")
    return cfg


def apply_overrides(cfg: dict, ns: argparse.Namespace | None) -> dict:
    cfg = copy.deepcopy(cfg)
    if ns is None:
        return cfg
    if getattr(ns, "mu", None) is not None:
        cfg["mu"] = ns.mu
    if getattr(ns, "energy", None):
        cfg["energies"] = list(ns.energy)
    if getattr(ns, "tol", None) is not None:
        integ = cfg.setdefault("integrator", {})
        integ["rel_tol"] = ns.tol
        integ["abs_tol"] = ns.tol * 1e-2
    if getattr(ns, "out", None) is not None:
        cfg.setdefault("output", {})["dir"] = ns.out
    return cfg


def integrator_config(cfg: dict) -> IntegratorConfig:
    return IntegratorConfig(**cfg.get("integrator", {}))


def worker_count() -> int:
    raw = os.environ.get(THREADS_ENV)
    if raw:
        try:
            return max(1, int(raw))
        except ValueError as exc:
            raise ConfigError(f"{THREADS_ENV} must be an integer, got {raw!r}") from exc
    return os.cpu_count() or 1


def parallel_map(fn, jobs: list) -> list:
    """Ordered map over ``jobs``; uses a process pool when more than one worker is allowed."""
    n = min(worker_count(), len(jobs))
    if n <= 1:
        return [fn(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, jobs))


class Output:
    """Paths and formats of one run's artifacts."""

    def __init__(self, cfg: dict, command: str):
        out = cfg.get("output", {})
        self.dir = Path(out.get("dir", "."))
        prefix = out.get("prefix")
        self.prefix = f"{prefix}_{command}" if prefix else command
        self.formats = set(out.get("formats", ["csv", "json", "svg"]))
        self.timestamp = bool(out.get("svg_timestamp", False))
        self.written: list[Path] = []

    def path(self, suffix: str) -> Path:
        self.dir.mkdir(parents=True, exist_ok=True)
        p = self.dir / f"{self.prefix}{suffix}"
        self.written.append(p)
        return p

    def wants(self, fmt: str) -> bool:
        return fmt in self.formats


def fmt_value(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return str(bool(v)).lower()
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return "%.17g" % float(v)
    if v is None:
        return ""
    return str(v)


def csv_text(rows: list[dict], columns: list[str]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([fmt_value(r.get(c)) for c in columns])
    return buf.getvalue()


def _json_safe(v):
    if isinstance(v, dict):
        return {k: _json_safe(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_json_safe(x) for x in v]
    if isinstance(v, (np.floating, float)):
        f = float(v)
        return f if math.isfinite(f) else None
    if isinstance(v, np.integer):
        return int(v)
    return v


def write_json(path: Path, payload: dict) -> None:
    path.write_text(json.dumps(_json_safe(payload), indent=2, sort_keys=True) + "\n", encoding="utf-8")


# shared setup ---------------------------------------------------------------


def strengths_of(cfg: dict) -> Strengths:
    return Strengths(tuple(cfg["strengths"]))


def initial_state(cfg: dict) -> PlanarState:
    s = strengths_of(cfg)
    init = cfg.get("initial", {})
    if "positions" in init:
        return PlanarState(np.array(init["positions"], dtype=float), s)
    if "reduced" in init:
        if cfg["problem"] != "three":
            raise ConfigError("reduced initial data is only defined for three vortices")
        ctx = reduced_context(cfg)
        r = init["reduced"]
        return lift(ctx, r["I1"], r["phi1"], r.get("phi2", 0.0))
    raise ConfigError("initial.positions or initial.reduced is required")


def reduced_context(cfg: dict) -> ReducedContext:
    if "mu" not in cfg:
        raise ConfigError("mu is required for reduced-space commands")
    return ReducedContext.build(strengths_of(cfg), cfg["mu"], cfg.get("chart", 3))


def context_and_point(cfg: dict):
    """Reduced context and starting point from the initial data."""
    init = cfg.get("initial", {})
    if "reduced" in init:
        ctx = reduced_context(cfg)
        return ctx, (init["reduced"]["I1"], init["reduced"]["phi1"])
    state = initial_state(cfg)
    k = cfg.get("chart", 3)
    red = psi(state, JBHChart.build(state.strengths, k))
    return ReducedContext.build(state.strengths, red.mu, k), (red.I1, red.phi1)


# simulate -------------------------------------------------------------------


def cmd_simulate(cfg: dict) -> int:
    out = Output(cfg, "simulate")
    state = initial_state(cfg)
    sim = cfg.get("simulate", {})
    icfg = integrator_config(cfg)
    T = sim.get("t_end")
    if sim.get("one_period"):
        if cfg["problem"] != "three":
            raise ConfigError("one_period is only available for three vortices")
        ctx, p0 = context_and_point(cfg)
        orb = find_periodic_orbit(ctx.rhs(), np.array(p0), icfg,
                                  embed=lambda y: ctx.embed_xyz(y[0], y[1]), scale=abs(ctx.mu))
        T = orb.period
    if T is None:
        raise ConfigError("simulate.t_end or simulate.one_period is required")
    s = state.strengths
    h_of = hamiltonian_flat(s)
    g = s.array

    def theta0(y):
        return float(np.sum(g * (y[0::2] ** 2 + y[1::2] ** 2)))

    def z0_abs(y):
        return abs(complex(np.sum(g * (y[0::2] + 1j * y[1::2])) / s.gamma_tot))

    try:
        traj = integrate(planar_rhs(s), state.flat, (0.0, T), icfg,
                         invariants={"H": h_of, "Theta0": theta0})
    except IntegrationError as exc:
        print(f"error: integration failed: {exc}; last valid time t={exc.last_t!r}", file=sys.stderr)
        return EXIT_NUMERIC
    n = sim.get("n_samples", 201)
    ts = np.linspace(0.0, T, n)
    ys = traj(ts)
    z0_drift = float(np.max(np.abs([z0_abs(y) - z0_abs(ys[0]) for y in ys])))
    cols = ["t"] + [f"{c}{a + 1}" for a in range(s.n) for c in ("x", "y")]
    rows = [dict(zip(cols, [t, *y])) for t, y in zip(ts, ys)]
    summary = {
        "t_end": T,
        "steps": len(traj.t) - 1,
        "drift_relative": traj.drift,
        "drift_Z0_absolute": z0_drift,
        "flagged": traj.flagged,
        "conserved_initial": {
            "H": conserved_set(state).H,
            "Theta0": conserved_set(state).Theta0,
            "V0": s.virial,
        },
    }
    if out.wants("csv"):
        out.path(".csv").write_text(csv_text(rows, cols), encoding="utf-8")
    if out.wants("json"):
        write_json(out.path("_summary.json"), summary)
    if out.wants("svg"):
        from .plotting import save_svg, vortex_paths

        z = ys[:, 0::2] + 1j * ys[:, 1::2]
        k = sim.get("n_snapshots", 6)
        idx = np.linspace(0, n - 1, k).round().astype(int) if k else []
        save_svg(vortex_paths(ts, z, idx, title=f"vortex tracks, t in [0, {T:.6g}]"),
                 out.path(".svg"), out.timestamp)
    _report(out)
    return EXIT_OK


# phases -------------------------------------------------------------------


def _three_rows_for_energy(job):
    strengths, mu, chart, energy, icfg = job
    ctx = ReducedContext.build(strengths, mu, chart)
    found = orbits_at_energy(ctx, energy, icfg)
    if not found:
        return [({"energy": energy, "status": "no_orbit"}, None)]
    return [(_three_row(ctx, f.orbit, icfg), f.orbit.samples) for f in found]


def _three_row(ctx: ReducedContext, orbit, icfg) -> dict:
    rep = phase_report(orbit, ctx, icfg)
    row = rep.as_row()
    row.update({
        "theta_g_mod": rep.theta_g_mod,
        "theta_g_area": rep.checks["theta_g_area"],
        "theta_d_integral": rep.checks["theta_d_integral"],
        "theta_sum_mod": rep.theta_sum_mod,
        "status": "ok",
    })
    if ctx.compact:
        try:
            row["period_quadrature"] = period_by_quadrature(ctx, orbit.p0[0], orbit.p0[1], orbit.energy)
        except VortexError:
            row["period_quadrature"] = float("nan")
    if ctx.strengths.identical():
        from .elliptic import ap_params_from_state, ap_period, ap_reduced_period_multiple

        try:
            T_I = ap_period(ap_params_from_state(lift(ctx, orbit.p0[0], orbit.p0[1])))
            row["ap_period"] = T_I
            row["ap_multiple"] = ap_reduced_period_multiple(T_I, orbit.period)
        except VortexError:
            row["ap_period"] = float("nan")
    return row


def _four_rows(cfg: dict, icfg: IntegratorConfig):
    from .fourv import (
        geometric_phase4,
        geometric_phase4_surface,
        periodic_orbit4,
        theta2_advance,
        total_phase4,
    )
    from .phases import dynamic_phase_closed_form

    state = initial_state(cfg)
    orb, ctx = periodic_orbit4(state, icfg)
    tg = geometric_phase4(orb, ctx)
    td = dynamic_phase_closed_form(ctx.strengths, ctx.mu, orb.period)
    row = {
        "energy": orb.energy,
        "theta_g": tg,
        "period": orb.period,
        "theta_d": td,
        "theta_tot": total_phase4(state, orb.period, icfg),
        "theta_g_mod": float(mod_2pi(tg)),
        "theta_g_area": float(mod_2pi(geometric_phase4_surface(orb, ctx))),
        "theta_d_integral": td,
        "theta_sum_mod": float(mod_2pi(tg + td)),
        "status": "ok",
        "theta2_advance": theta2_advance(orb, ctx),
    }
    return [(row, None)], ctx


def cmd_phases(cfg: dict) -> int:
    out = Output(cfg, "phases")
    icfg = integrator_config(cfg)
    s = strengths_of(cfg)
    highlights = []
    ctx = None
    if cfg["problem"] == "four":
        results, _ = _four_rows(cfg, icfg)
    elif cfg.get("energies"):
        ctx = reduced_context(cfg)
        jobs = [(s, cfg["mu"], cfg.get("chart", 3), float(e), icfg) for e in sorted(set(cfg["energies"]))]
        results = [r for batch in parallel_map(_three_rows_for_energy, jobs) for r in batch]
    else:
        ctx, p0 = context_and_point(cfg)
        orb = find_periodic_orbit(ctx.rhs(), np.array(p0), icfg,
                                  embed=lambda y: ctx.embed_xyz(y[0], y[1]),
                                  scale=abs(ctx.mu), energy=ctx.h(*p0))
        results = [(_three_row(ctx, orb, icfg), orb.samples)]
    rows = []
    for n, (row, samples) in enumerate(results, start=1):
        row = {c: row.get(c, float("nan")) for c in PHASE_COLUMNS if c != "orbit_id"} | row
        row["orbit_id"] = n
        rows.append(row)
        if samples is not None:
            highlights.append(samples)
    text = csv_text(rows, PHASE_COLUMNS)
    sys.stdout.write(text)
    if out.wants("csv"):
        out.path(".csv").write_text(text, encoding="utf-8")
    if out.wants("json"):
        write_json(out.path(".json"), {
            "strengths": list(s.gamma),
            "mu": cfg.get("mu"),
            "columns": PHASE_COLUMNS,
            "provenance": PROVENANCE,
            "rows": rows,
        })
    if out.wants("svg") and ctx is not None:
        from .plotting import portrait_chart, save_svg

        labels = [f"#{r['orbit_id']}: E={r['energy']:.6g}" for r in rows if r["status"] == "ok"]
        save_svg(portrait_chart([], highlights, "periodic orbits", labels), out.path(".svg"), out.timestamp)
    _report(out)
    return EXIT_OK


# portrait -------------------------------------------------------------------


def _portrait_line(job):
    strengths, mu, chart, seed, t_end, n_samples, icfg = job
    ctx = ReducedContext.build(strengths, mu, chart)
    p0 = np.array(seed, dtype=float)
    from dataclasses import replace

    try:
        orb = find_periodic_orbit(ctx.rhs(), p0, replace(icfg, t_max=t_end),
                                  embed=lambda y: ctx.embed_xyz(y[0], y[1]), scale=abs(ctx.mu))
        ts = np.linspace(0.0, orb.period, n_samples)
        return ts, orb(ts)
    except (NotPeriodicError, VortexError):
        pass
    try:
        traj = integrate(ctx.rhs(), p0, (0.0, t_end), icfg)
    except IntegrationError as exc:
        if exc.last_t is None or exc.last_t <= 0:
            return None
        t_end = exc.last_t
        traj = integrate(ctx.rhs(), p0, (0.0, 0.999 * t_end), icfg)
    ts = np.linspace(0.0, traj.t_final, n_samples)
    return ts, traj(ts)


def portrait_seeds(ctx: ReducedContext, n_phi: int, n_I: int) -> list[tuple[float, float]]:
    if n_phi == 0 or n_I == 0:
        return []
    lo, hi = ctx.I1_range
    m = abs(ctx.mu)
    if np.isinf(hi):
        hi = lo + 4 * m
    if np.isinf(lo):
        lo = hi - 4 * m
    Is = np.linspace(lo, hi, n_I + 2)[1:-1]
    phis = np.linspace(-np.pi / 4, 3 * np.pi / 4, n_phi, endpoint=False)
    return [(float(i), float(p)) for i in Is for p in phis]


def cmd_portrait(cfg: dict) -> int:
    if cfg["problem"] != "three":
        raise ConfigError("portrait is available for three vortices")
    out = Output(cfg, "portrait")
    ctx = reduced_context(cfg)
    icfg = integrator_config(cfg)
    pc = cfg.get("portrait", {})
    seeds = portrait_seeds(ctx, pc.get("n_phi", 8), pc.get("n_I", 8))
    t_end = pc.get("t_end", 5.0)
    n_samples = pc.get("n_samples", 400)
    jobs = [(ctx.strengths, ctx.mu, ctx.chart.last_vortex, sd, t_end, n_samples, icfg) for sd in seeds]
    lines = [r for r in parallel_map(_portrait_line, jobs) if r is not None]
    rows = []
    for lid, (ts, ys) in enumerate(lines, start=1):
        rows.extend({"line_id": lid, "t": t, "I1": y[0], "phi1": y[1]} for t, y in zip(ts, ys))
    cols = ["line_id", "t", "I1", "phi1"]
    if out.wants("csv"):
        out.path(".csv").write_text(csv_text(rows, cols), encoding="utf-8")
    if out.wants("json"):
        write_json(out.path(".json"), {"mu": ctx.mu, "surface": ctx.surface,
                                       "n_lines": len(lines), "seeds": seeds})
    if out.wants("svg"):
        from .plotting import portrait_chart, portrait_surface, save_svg

        title = f"{ctx.surface}, mu = {ctx.mu:.6g}"
        if pc.get("view", "chart") == "surface":
            fig = portrait_surface([ctx.embed_xyz(ys[:, 0], ys[:, 1]) for _, ys in lines],
                                   ctx.surface, ctx.mu, title)
        else:
            fig = portrait_chart([ys for _, ys in lines], title=title)
        save_svg(fig, out.path(".svg"), out.timestamp)
    _report(out)
    return EXIT_OK


# ap-period --------------------------------------------------------------------


def cmd_ap_period(cfg: dict) -> int:
    from .elliptic import (
        ap_params_from_state,
        ap_period,
        ap_reduced_period_multiple,
        ap_solution,
        shape_variable,
    )

    if cfg["problem"] != "three":
        raise ConfigError("ap-period needs three identical vortices")
    if not strengths_of(cfg).identical():
        raise ConfigError("ap-period needs identical strengths")
    out = Output(cfg, "ap-period")
    icfg = integrator_config(cfg)
    state = initial_state(cfg)
    params = ap_params_from_state(state)
    T_I = ap_period(params)
    ctx, p0 = context_and_point(cfg)
    orb = find_periodic_orbit(ctx.rhs(), np.array(p0), icfg,
                              embed=lambda y: ctx.embed_xyz(y[0], y[1]), scale=abs(ctx.mu))
    n = ap_reduced_period_multiple(T_I, orb.period)
    row = {
        "lambda2": params.lambda2,
        "branch": params.branch,
        "root_0": params.roots[0],
        "root_1": params.roots[1],
        "root_2": params.roots[2],
        "kappa": params.kappa,
        "omega": params.omega,
        "modulus": params.modulus,
        "ap_period": T_I,
        "orbit_period": orb.period,
        "multiple": n,
    }
    cols = list(row)
    text = csv_text([row], cols)
    sys.stdout.write(text)
    if out.wants("csv"):
        out.path(".csv").write_text(text, encoding="utf-8")
    if out.wants("json"):
        write_json(out.path(".json"), row)
    if out.wants("svg"):
        from .plotting import plt, save_svg

        traj = integrate(planar_rhs(state.strengths), state.flat, (0.0, orb.period), icfg)
        ts = np.linspace(0.0, orb.period, 801)
        shape = np.array([shape_variable(PlanarState.from_flat(y, state.strengths)) for y in traj(ts)])
        t_peak = ts[np.argmax(shape)]
        fig, ax = plt.subplots(figsize=(6.4, 3.6))
        ax.plot(ts, shape, lw=1.2, label="integrated")
        ax.plot(ts, ap_solution(params, (ts - t_peak) * params.tau_rate), "--", lw=1.0, label="elliptic form")
        ax.set_xlabel("t")
        ax.set_ylabel("squared normalized area")
        ax.legend(fontsize=7)
        fig.tight_layout()
        save_svg(fig, out.path(".svg"), out.timestamp)
    _report(out)
    return EXIT_OK


def _report(out: Output) -> None:
    for p in out.written:
        print(f"wrote {p}", file=sys.stderr)


COMMANDS = {
    "simulate": cmd_simulate,
    "phases": cmd_phases,
    "portrait": cmd_portrait,
    "ap-period": cmd_ap_period,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="vortex-holonomy",
        description="Reduced dynamics and reconstruction phases of point-vortex systems.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("config", help="JSON run configuration")
        p.add_argument("--mu", type=float, help="override the momentum value")
        p.add_argument("--energy", type=float, action="append",
                       help="energy target (repeatable; replaces the configured list)")
        p.add_argument("--tol", type=float, help="relative tolerance (absolute = tol/100)")
        p.add_argument("--out", help="output directory")
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = load_config(args.config, args, args.command)
        return COMMANDS[args.command](cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except IntegrationError as exc:
        print(f"numerical error: {exc}; last valid time t={exc.last_t!r}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValueError as exc:
        # invalid inputs: degenerate, unsupported, or outside the reduced domain
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except VortexError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
