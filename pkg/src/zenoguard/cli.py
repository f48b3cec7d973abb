"""``zenoguard`` command line: run, sweep, analyze, codespace, validate.

Exit codes: 0 ok, 2 configuration error, 3 numerical failure.
"""
from __future__ import annotations

import argparse
import csv
import io
import itertools
import json
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import analytics, config
from .circuits import codespace, efficiency
from .errors import ConfigError, NumericalFailure, ZenoguardError
from .noise import MAX_DIM, DissipationSpec, SpectralDensity, system_layout
from .zeno import loglog_slope

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 2, 3
THREADS_ENV = "ZENOGUARD_THREADS"
CSV_METRICS = ("one_minus_fidelity", "total_out_prob", "delta_discrete", "p_tot_pred")


def fmt(x) -> str:
    """12 significant digits, locale independent."""
    if isinstance(x, (bool, np.bool_)):
        return str(bool(x)).lower()
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    x = float(x)
    if math.isnan(x):
        return "nan"
    return format(x, ".12g")


def cell_seed(root: int, index: int) -> int:
    """Seed of sweep cell ``index``: a spawned child of ``SeedSequence(root)``."""
    ss = np.random.SeedSequence(root, spawn_key=(index,))
    return int(ss.generate_state(1, dtype=np.uint64)[0] >> np.uint64(1))


def simulate(cfg: config.ExperimentConfig) -> dict:
    setup = cfg.setup()
    rep = setup.run()
    cp, cm = cfg.initial
    z = cfg.zeno
    dd = analytics.delta_discrete_breakdown(setup.bath, cp, cm, z.t_total)
    budget = analytics.error_budget(dd.delta, z.gamma, z.n_tests, dd.bound)
    return {"report": rep, "delta_discrete": dd, "budget": budget, "bath": setup.bath}


def evaluate_cell(task):
    """Worker entry point; returns metrics or an error record, never raises."""
    raw, base_dir, assignments, index = task
    try:
        cfg = config.from_dict(raw, base_dir=base_dir)
        values = dict(assignments)
        values.setdefault("zeno.seed", cell_seed(cfg.zeno.seed, index))
        cfg = cfg.with_values(values)
        out = simulate(cfg)
        rep, budget = out["report"], out["budget"]
        return {
            "one_minus_fidelity": 1.0 - rep.final_fidelity,
            "total_out_prob": rep.total_out_probability,
            "delta_discrete": out["delta_discrete"].delta,
            "p_tot_pred": budget.p_tot,
        }
    except Exception as exc:  # a failed cell must not sink the sweep
        return {"error": f"{type(exc).__name__}: {exc}"}


def worker_count() -> int:
    raw = os.environ.get(THREADS_ENV, "0").strip() or "0"
    try:
        n = int(raw)
    except ValueError:
        raise ConfigError(f"{THREADS_ENV} must be an integer, got {raw!r}") from None
    if n < 0:
        raise ConfigError(f"{THREADS_ENV} must be >= 0")
    return n if n > 0 else (os.cpu_count() or 1)


def run_cells(tasks: list, workers: int) -> list:
    if workers <= 1 or len(tasks) <= 1:
        return [evaluate_cell(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=min(workers, len(tasks))) as pool:
        return list(pool.map(evaluate_cell, tasks))


def sweep_table(cfg: config.ExperimentConfig, workers: int):
    axes = cfg.axes
    grids = [sorted(set(vals), key=_sort_key) for _, vals in axes]
    combos = list(itertools.product(*grids))
    tasks = []
    for i, combo in enumerate(combos):
        assign = tuple((path, val) for (path, _), val in zip(axes, combo))
        tasks.append((cfg.raw, cfg.base_dir, assign, i))
    return combos, run_cells(tasks, workers)


def _sort_key(v):
    return (0, float(v), "") if isinstance(v, (int, float)) and not isinstance(v, bool) else (1, 0.0, str(v))


def cmd_sweep(args) -> int:
    cfg = config.load(args.config)
    if not cfg.axes:
        raise ConfigError("sweep needs at least one sweep axis", line=config.find_line(Path(args.config).read_text(), "sweep"))
    combos, results = sweep_table(cfg, worker_count())
    names = [path.split(".")[-1] for path, _ in cfg.axes]

    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(names + list(CSV_METRICS))
    failures = []
    for i, (combo, res) in enumerate(zip(combos, results)):
        if "error" in res:
            failures.append({"cell": i, "values": dict(zip(names, combo)), "error": res["error"]})
            writer.writerow([fmt(v) for v in combo] + ["nan"] * len(CSV_METRICS))
        else:
            writer.writerow([fmt(v) for v in combo] + [fmt(res[m]) for m in CSV_METRICS])
    text = buf.getvalue()

    target = args.out or cfg.output_csv
    if target:
        path = Path(target)
        if not path.is_absolute() and cfg.base_dir is not None and not args.out:
            path = cfg.base_dir / path
        path.write_text(text)
        diag_path = path.with_name(path.name + ".diagnostics.json")
    else:
        sys.stdout.write(text)
        diag_path = Path("sweep.diagnostics.json")
    if failures:
        diag_path.write_text(json.dumps({"failed_cells": failures}, indent=2) + "\n")
        print(f"{len(failures)} cell(s) failed; see {diag_path}", file=sys.stderr)

    _report_slopes(cfg, names, combos, results)
    return EXIT_OK


def _report_slopes(cfg, names, combos, results):
    if "n_tests" not in names:
        return
    k = names.index("n_tests")
    groups: dict[tuple, list] = {}
    for combo, res in zip(combos, results):
        if "error" in res:
            continue
        other = tuple(v for j, v in enumerate(combo) if j != k)
        groups.setdefault(other, []).append((combo[k], res["one_minus_fidelity"]))
    for other, pts in groups.items():
        pts = [(n, e) for n, e in pts if e > 1e-13]
        label = ", ".join(f"{n}={v}" for n, v in zip([nm for j, nm in enumerate(names) if j != k], other))
        prefix = f"[{label}] " if label else ""
        if len(pts) < 2:
            print(f"{prefix}slope: no-decay", file=sys.stderr)
        else:
            print(f"{prefix}slope log(1-F) vs log N: {fmt(loglog_slope(*zip(*pts)))}", file=sys.stderr)


def cmd_run(args) -> int:
    cfg = config.load(args.config)
    out = simulate(cfg)
    rep, dd, budget, bath = out["report"], out["delta_discrete"], out["budget"], out["bath"]
    cp, cm = cfg.initial
    z = cfg.zeno
    try:
        dc = analytics.delta_breakdown(cfg.spec, cp, cm, z.t_total)
        d_cont = dc.delta
    except NumericalFailure:
        d_cont = math.nan
    n = z.n_tests
    lines = [
        ("final_fidelity", f"{rep.final_fidelity:.6f}"),
        ("total_out_probability", fmt(rep.total_out_probability)),
        ("estimated_p_tot", fmt(rep.estimated_p_tot)),
        ("mean_leak_x_N2", fmt(rep.mean_leak * n * n)),
        ("delta_discrete", fmt(dd.delta)),
        ("delta_continuum", fmt(d_cont)),
        ("bound_discrete", fmt(dd.bound)),
        ("p_err_per_step_pred", fmt(budget.p_err_per_step)),
        ("p_tot_pred", fmt(budget.p_tot)),
        ("n_opt", fmt(budget.n_opt) if budget.gamma > 0 else "unbounded"),
        ("working_condition_ok", fmt(budget.working_condition_ok)),
        ("policy", rep.policy),
        ("n_tests", str(n)),
        ("bath_registers", str(len(bath.modes))),
    ]
    width = max(len(k) for k, _ in lines)
    for k, v in lines:
        print(f"{k:<{width}}  {v}")

    target = args.json or cfg.output_json
    if target:
        path = Path(target)
        if not path.is_absolute() and cfg.base_dir is not None and not args.json:
            path = cfg.base_dir / path
        doc = {
            "report": rep.to_dict(),
            "delta_discrete": dd.delta,
            "delta_continuum": None if math.isnan(d_cont) else d_cont,
            "budget": budget.to_dict(),
        }
        path.write_text(json.dumps(doc, indent=2) + "\n")
    return EXIT_OK


def cmd_validate(args) -> int:
    cfg = config.load(args.config)
    bath = cfg.bath()
    dim = system_layout(2, bath).total
    if 2 * dim > MAX_DIM:
        raise ConfigError(f"dimension with ancilla {2 * dim} exceeds the engine limit {MAX_DIM}")
    print(f"ok: {len(bath.modes)} bath registers, dimension {dim} ({2 * dim} with ancilla)")
    return EXIT_OK


def _floats(text: str, n: int | None = None) -> list[float]:
    try:
        vals = [float(x) for x in text.split(",")]
    except ValueError:
        raise ConfigError(f"cannot parse {text!r} as a comma-separated list of numbers") from None
    if n is not None and len(vals) != n:
        raise ConfigError(f"expected {n} comma-separated numbers, got {text!r}")
    return vals


def cmd_analyze(args) -> int:
    gamma = args.gamma
    if gamma < 0:
        raise ConfigError("--gamma must be >= 0")
    cp = config.parse_complex(args.c_plus, "--c-plus")
    cm = config.parse_complex(args.c_minus, "--c-minus")
    nrm = math.sqrt(abs(cp) ** 2 + abs(cm) ** 2)
    if nrm == 0:
        raise ConfigError("amplitudes are both zero")
    cp, cm = cp / nrm, cm / nrm

    doc: dict = {}
    if args.delta is not None:
        if args.delta < 0:
            raise ConfigError("--delta must be >= 0")
        delta, bound = args.delta, math.inf
        doc["source"] = "given"
    else:
        lam = _floats(args.lam, 3)
        norm = math.sqrt(sum(x * x for x in lam))
        if norm == 0:
            raise ConfigError("--lambda must not be the zero vector")
        if args.spectral == "flat":
            sd = SpectralDensity.flat(args.g0, args.omega_max)
        elif args.spectral == "ohmic":
            sd = SpectralDensity.ohmic(args.alpha, args.omega_c)
        else:
            if not args.table:
                raise ConfigError("--spectral table needs --table PATH")
            sd = SpectralDensity.from_table(args.table)
        scales = tuple(config.parse_complex(s, "--scales") for s in args.scales.split(","))
        spec = DissipationSpec(
            tuple(x / norm for x in lam),
            omega0=args.omega0,
            temperature=args.temperature,
            spectral=sd,
            sharing=config.parse_sharing(args.sharing),
            coupling_scales=scales,
        )
        br = analytics.delta_breakdown(spec, cp, cm, args.t0, ir_floor=args.ir_floor)
        delta, bound = br.delta, br.bound
        doc.update(source="continuum", diagonal_term=br.diagonal, cross_term=br.cross)
    budget = analytics.error_budget(delta, gamma, args.n, bound)
    doc.update(budget.to_dict())
    print(json.dumps(doc, indent=2, sort_keys=True))
    return EXIT_OK


def cmd_codespace(args) -> int:
    two_l = args.two_l
    if two_l < 2 or two_l > 12 or two_l % 2:
        raise ConfigError(f"2L must be even and between 2 and 12, got {two_l}")
    L = two_l // 2
    code = codespace(two_l)
    exact, asym = efficiency(L)
    ov = analytics.qubit_overhead(L)
    rows = [
        ("qubits", str(two_l)),
        ("dimension", str(code.dimension)),
        ("efficiency_exact", fmt(exact)),
        ("efficiency_asymptotic", fmt(asym)),
        ("overhead_abstract_formula", fmt(ov.abstract_formula)),
        ("overhead_inverted_even", str(ov.inverted_eq12)),
        ("overhead_inverted_continuous", fmt(ov.inverted_continuous)),
    ]
    width = max(len(k) for k, _ in rows)
    for k, v in rows:
        print(f"{k:<{width}}  {v}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="zenoguard", description="Two-qubit Zeno error-prevention simulator")
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="run the protocol once")
    r.add_argument("config")
    r.add_argument("--json", help="write the full report as JSON")
    r.set_defaults(func=cmd_run)

    s = sub.add_parser("sweep", help="run a parameter sweep and emit CSV")
    s.add_argument("config")
    s.add_argument("--out", help="CSV output path (default: config output.csv or stdout)")
    s.set_defaults(func=cmd_sweep)

    a = sub.add_parser("analyze", help="closed-form error budget")
    a.add_argument("--lambda", dest="lam", default="1,0,0")
    a.add_argument("--omega0", type=float, default=1.0)
    a.add_argument("--temperature", type=float, default=0.0)
    a.add_argument("--spectral", choices=("flat", "ohmic", "table"), default="flat")
    a.add_argument("--g0", type=float, default=0.1)
    a.add_argument("--omega-max", type=float, default=2.0)
    a.add_argument("--alpha", type=float, default=0.01)
    a.add_argument("--omega-c", type=float, default=1.0)
    a.add_argument("--table", help="two-column omega |g|^2 table")
    a.add_argument("--sharing", default="independent", help="independent, collective or partial:F")
    a.add_argument("--scales", default="1,1", help="per-qubit coupling scales")
    a.add_argument("--c-plus", default="1")
    a.add_argument("--c-minus", default="0")
    a.add_argument("--t0", type=float, default=1.0)
    a.add_argument("--gamma", type=float, default=0.0)
    a.add_argument("--n", type=int, default=1, help="number of tests for p_tot")
    a.add_argument("--delta", type=float, help="use this delta instead of integrating")
    a.add_argument("--ir-floor", type=float, default=analytics.IR_FLOOR)
    a.set_defaults(func=cmd_analyze)

    c = sub.add_parser("codespace", help="balanced-weight code statistics")
    c.add_argument("two_l", type=int)
    c.set_defaults(func=cmd_codespace)

    v = sub.add_parser("validate", help="parse a config and check dimensions")
    v.add_argument("config")
    v.set_defaults(func=cmd_validate)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalFailure as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ZenoguardError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
