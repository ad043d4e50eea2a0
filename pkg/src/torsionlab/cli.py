"""Command-line front end.

    torsionlab distance  --n 3 --samples 1000
    torsionlab exclusion --n 2 --N 10 --trials 1000 --seed 7
    torsionlab heat      --circle L=6.2831853 --alpha 0.5 --K 200 --t 0.1 1 10
    torsionlab zeta      --circle L=6.2831853 --alpha 0.25 --s 2 -0.5
    torsionlab torsion   --circle L=6.2831853 --alpha 0.25
    torsionlab dance     --n 3 --lam 4 --C1 1 --C2 0.5 --C3 1 --C4 2 --Cn 1.5 --levels 10 100 1000

Exit status: 0 when every check passes, 1 when a check fails, 2 on bad input.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from datetime import datetime, timezone
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import congruence as cg
from . import dance, linalg, selftest, spectra, torsion, zeta
from .errors import Infeasible, InputError, TorsionLabError

COMMANDS = ("distance", "exclusion", "heat", "zeta", "torsion", "dance")
TIMESTAMP_KEY = "generated_at"


# -- parsing helpers ------------------------------------------------------------------

def _keyvals(text: str) -> dict:
    out = {}
    for item in text.split(","):
        if "=" not in item:
            raise InputError(f"expected key=value, got {item!r}")
        k, v = item.split("=", 1)
        try:
            out[k.strip()] = float(v)
        except ValueError as exc:
            raise InputError(f"{k} is not a number: {v!r}") from exc
    return out


def _load_json(path) -> dict:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc
    if not text.strip():
        raise InputError(f"{path} is empty")
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"{path} is not valid JSON: {exc}") from exc


def _spectrum_from_args(args) -> spectra.Spectrum:
    if getattr(args, "spectrum", None):
        return spectra.Spectrum.from_json(_load_json(args.spectrum))
    if getattr(args, "circle", None):
        L = _keyvals(args.circle).get("L")
        if L is None:
            raise InputError("--circle needs L=<length>")
        return spectra.circle_spectrum(L, args.alpha, args.K)
    if getattr(args, "torus", None):
        lengths = [float(x) for x in args.torus.split(",")]
        alphas = [float(x) for x in args.alphas.split(",")] if args.alphas else [0.0] * len(lengths)
        return spectra.torus_form_spectrum(lengths, alphas, args.p, args.K)
    raise InputError("give --circle, --torus or --spectrum")


def _clean(obj):
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        return x if math.isfinite(x) else str(x)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, complex):
        return {"re": obj.real, "im": obj.imag}
    if isinstance(obj, Fraction):
        return str(obj)
    return obj


# -- commands -------------------------------------------------------------------------
# each returns (report dict, csv header, csv rows); a report whose "passed" is
# False turns into exit status 1

def cmd_distance(args):
    rng = np.random.default_rng(args.seed)
    rows = []
    worst_op = worst_frob = math.inf
    for _ in range(args.samples):
        g = linalg.random_unit_det(args.n, rng, scale=args.scale)
        c = linalg.check_distance_lemma(g)
        worst_op = min(worst_op, c.margin_op)
        worst_frob = min(worst_frob, c.margin_frob)
        rows.append((c.r, c.log_opnorm, c.log_frobnorm))
    tol = args.tol if args.tol is not None else 1e-9
    report = {
        "n": args.n, "samples": args.samples,
        "min_margin_op": worst_op, "min_margin_frob": worst_frob,
        "passed": worst_op >= -tol and worst_frob >= -tol,
    }
    return report, ("r", "log_opnorm", "log_frobnorm"), rows


def cmd_exclusion(args):
    rng = np.random.default_rng(args.seed)
    if args.gamma:
        gamma = cg.gamma_from_rows(json.loads(args.gamma))
    else:
        gamma = cg.random_congruent(args.n, args.N, rng, unit_det=True, non_unipotent=True)
    cert = cg.valuation_certificate(gamma, args.N)
    rep = cg.verify_exclusion(gamma, args.N, trials=args.trials, seed=args.seed)
    bound = cg.exclusion_radius(gamma.n, args.N)
    report = {
        "n": gamma.n, "N": args.N, "gamma": gamma.to_strings(),
        "radius": bound.radius, "c_n": bound.c_n, "C_n": bound.C_n, "N_0": bound.N_0,
        "min_distance": rep.min_distance, "trials": rep.trials,
        "certificate": cert.to_json(),
        "passed": bool(rep.passed and cert.passed),
    }
    rows = [(i, d) for i, d in enumerate(rep.distances)]
    return report, ("trial", "distance"), rows


def _t_grid(args):
    if args.t:
        return [float(t) for t in args.t]
    return list(np.geomspace(args.tmin, args.tmax, args.points))


def cmd_heat(args):
    spec = _spectrum_from_args(args)
    ts = _t_grid(args)
    rows, checks = [], []
    circle = spec.cutoff["kind"] == "circle"
    worst = 0.0
    for t in ts:
        hv = spectra.heat_trace(spec, t)
        row = [t, hv.value, hv.tail_bound]
        if circle:
            part = spec.parts[0]
            p = spectra.heat_trace_poisson_circle(part.lengths[0], part.alphas[0], t)
            row.append(p)
            if hv.reliable:
                worst = max(worst, abs(hv.value - p) / p)
        rows.append(tuple(row))
    tol = args.tol if args.tol is not None else 1e-10
    report = {"spectrum": spec.cutoff, "kernel_dim": spec.kernel_dim, "gap": spec.gap, "points": len(ts)}
    if circle:
        report["poisson_max_rel_diff"] = worst
        checks.append(worst <= tol)
    if spec.kernel_dim == 0 and spec.gap is not None:
        env = spectra.decay_envelope_check(spec, [t for t in ts if t >= 1] or [1.0])
        report["envelope_min_margin"] = env.min_margin
        checks.append(env.passed)
    report["passed"] = all(checks)
    header = ("t", "value", "tail_bound") + (("poisson",) if circle else ())
    return report, header, rows


def cmd_zeta(args):
    spec = _spectrum_from_args(args)
    tol = args.tol if args.tol is not None else 1e-8
    rows, values, ok = [], {}, True
    for s in args.s:
        v = zeta.zeta_from_spectrum(spec, s)
        row = [s, v, None]
        if s > spec.dim / 2 + 1:
            d = zeta.dirichlet_sum(spec, s)
            if d.tail_bound <= 1e-10:
                row[2] = d.value.real
                ok &= abs(v - d.value.real) <= tol * max(1.0, abs(v))
        values[str(s)] = v
        rows.append(tuple(row))
    report = {"spectrum": spec.cutoff, "values": values}
    if spec.kernel_dim == 0 or spec.is_model:
        zp = zeta.zeta_prime_zero(spec)
        zl = zeta.zeta_prime_zero_laurent(spec)
        report.update(zeta_prime_zero=zp, zeta_prime_zero_laurent=zl, determinant=math.exp(-zp))
        ok &= abs(zp - zl) <= 1e-6
    report["passed"] = bool(ok)
    return report, ("s", "mellin", "direct"), rows


def cmd_torsion(args):
    if args.input:
        inp = torsion.TorsionInput.from_json(_load_json(args.input))
    elif args.circle:
        L = _keyvals(args.circle).get("L")
        if L is None:
            raise InputError("--circle needs L=<length>")
        inp = torsion.circle_input(L, args.alpha, args.K, args.kernel_removed)
    elif args.torus:
        lengths = [float(x) for x in args.torus.split(",")]
        alphas = [float(x) for x in args.alphas.split(",")] if args.alphas else [0.0] * len(lengths)
        inp = torsion.torus_input(lengths, alphas, args.K, args.kernel_removed)
    else:
        raise InputError("give --circle, --torus or --input")
    res = torsion.analytic_torsion(inp, cross_check=True)
    tol = args.tol if args.tol is not None else 1e-6
    report = res.to_json()
    report["copies"] = args.copies
    report["logT_copies"] = cg.gl_sl_torsion_scale(args.copies, res.logT) if args.copies > 1 else res.logT
    report["passed"] = all(abs(v) <= tol for v in res.laurent_check.values())
    rows = [(p, v) for p, v in sorted(res.per_degree_zeta_prime.items())]
    return report, ("degree", "zeta_prime_zero"), rows


def cmd_dance(args):
    if args.budget:
        obj = _load_json(args.budget)
        levels = obj.pop("levels", None)
        a = obj.pop("a", args.a)
        b = dance.ErrorBudget.from_json(obj)
    else:
        missing = [k for k in ("n", "lam", "C1", "C2", "C3", "C4", "Cn") if getattr(args, k) is None]
        if missing:
            raise InputError(f"missing budget values: {', '.join(missing)}")
        b = dance.ErrorBudget(args.n, args.C1, args.C2, args.C3, args.C4, args.Cn,
                              lam=args.lam, epsilon=args.epsilon, variant=args.variant)
        levels, a = None, args.a
    if b.lam is None:
        raise InputError("the budget needs lambda")
    levels = levels or args.levels
    beta_max, lam_min = dance.required_lambda(b.n, b, args.delta)
    report = {"budget": b.to_json(), "beta_max": beta_max, "lambda_min": lam_min}
    try:
        table = dance.budget_table(b.n, b, b.lam, levels, a=a)
    except Infeasible as exc:
        report.update(feasible=False, beta=exc.beta, report=exc.report.to_json(), passed=False)
        return report, dance.BudgetTable.COLUMNS, []
    grid = dance.grid_beta(b)
    report.update(feasible=True, beta=table.beta, grid_beta=grid, report=table.report.to_json(), N1=table.N1)
    report["passed"] = abs(table.beta - grid) <= 1e-3 or table.beta > dance.GRID_MAX
    rows = [tuple(getattr(r, c) for c in dance.BudgetTable.COLUMNS) for r in table.rows]
    return report, dance.BudgetTable.COLUMNS, rows


HANDLERS = {
    "distance": cmd_distance,
    "exclusion": cmd_exclusion,
    "heat": cmd_heat,
    "zeta": cmd_zeta,
    "torsion": cmd_torsion,
    "dance": cmd_dance,
}


# -- parser ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="seed for every randomized trial")
    common.add_argument("--tol", type=float, default=None, help="override the command's check tolerance")
    common.add_argument("--out", default=None, help="write the report here instead of stdout")
    common.add_argument("--format", choices=("json", "csv"), default="json",
                        help="json report, or csv plot data (report then goes to <out>.json)")
    common.add_argument("--selftest", action="store_true", help="run the command's invariant suite")

    model = argparse.ArgumentParser(add_help=False)
    model.add_argument("--circle", help="twisted circle, e.g. L=6.2831853")
    model.add_argument("--torus", help="comma-separated torus side lengths")
    model.add_argument("--alphas", help="comma-separated torus twists")
    model.add_argument("--alpha", type=float, default=0.0, help="circle twist in [0, 1)")
    model.add_argument("--p", type=int, default=0, help="form degree for --torus")
    model.add_argument("--K", type=int, default=20, help="mode cutoff |k| <= K")

    parser = argparse.ArgumentParser(prog="torsionlab", description="Analytic torsion toolkit.")
    parser.add_argument("--config", help="JSON file with 'command' and flag values")
    sub = parser.add_subparsers(dest="command")

    p = sub.add_parser("distance", parents=[common], help="distance lemma on random matrices")
    p.add_argument("--n", type=int, default=3)
    p.add_argument("--samples", type=int, default=1000)
    p.add_argument("--scale", type=float, default=1.0)

    p = sub.add_parser("exclusion", parents=[common], help="exclusion radius for a congruence element")
    p.add_argument("--n", type=int, default=2)
    p.add_argument("--N", type=int, default=10)
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--gamma", help="integer rows as JSON, e.g. [[1,10],[10,101]]")

    p = sub.add_parser("heat", parents=[common, model], help="heat traces and oracles")
    p.add_argument("--spectrum", help="spectrum JSON file")
    p.add_argument("--t", type=float, nargs="+")
    p.add_argument("--tmin", type=float, default=1e-2)
    p.add_argument("--tmax", type=float, default=10.0)
    p.add_argument("--points", type=int, default=25)

    p = sub.add_parser("zeta", parents=[common, model], help="spectral zeta values and zeta'(0)")
    p.add_argument("--spectrum", help="spectrum JSON file")
    p.add_argument("--s", type=float, nargs="+", default=[2.0])

    p = sub.add_parser("torsion", parents=[common, model], help="analytic torsion")
    p.add_argument("--input", help="torsion input JSON file")
    p.add_argument("--kernel-removed", action="store_true", help="allow zero modes (they are dropped)")
    p.add_argument("--copies", type=int, default=1, help="report phi(copies) * logT as well")

    p = sub.add_parser("dance", parents=[common], help="error-budget optimizer")
    p.add_argument("--budget", help="budget JSON file")
    p.add_argument("--n", type=int)
    p.add_argument("--lam", type=float)
    for c in ("C1", "C2", "C3", "C4", "Cn"):
        p.add_argument(f"--{c}", type=float)
    p.add_argument("--epsilon", type=float, default=0.01)
    p.add_argument("--variant", choices=dance.VARIANTS, default="derived")
    p.add_argument("--delta", type=float, default=0.05)
    p.add_argument("--a", type=float, default=0.0)
    p.add_argument("--levels", type=float, nargs="+", default=[10, 100, 1000, 10**4, 10**6])
    return parser


def _config_argv(path) -> list:
    cfg = _load_json(path)
    if not isinstance(cfg, dict) or not cfg:
        raise InputError("config is empty")
    cfg = dict(cfg)
    command = cfg.pop("command", None)
    if command not in COMMANDS:
        raise InputError(f"config needs 'command' in {COMMANDS}")
    argv = [command]
    for key, value in cfg.items():
        flag = "--" + key.replace("_", "-") if key in ("kernel_removed",) else "--" + key
        if isinstance(value, bool):
            if value:
                argv.append(flag)
        elif isinstance(value, list):
            argv += [flag] + [str(v) for v in value]
        elif isinstance(value, (dict,)):
            argv += [flag, json.dumps(value)]
        else:
            argv += [flag, str(value)]
    return argv


def _emit(args, report, header, rows):
    report = dict(_clean(report))
    report["command"] = args.command
    report["seed"] = args.seed
    report[TIMESTAMP_KEY] = datetime.now(timezone.utc).isoformat()
    text = json.dumps(report, sort_keys=True, indent=2) + "\n"
    if args.format == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow(["" if v is None else repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in r])
        if args.out:
            Path(args.out).write_text(buf.getvalue())
            Path(args.out).with_suffix(".json").write_text(text)
        else:
            sys.stdout.write(buf.getvalue())
    elif args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.config:
            args = parser.parse_args(_config_argv(args.config) + [a for a in argv if a != "--config" and a != args.config])
        if not args.command:
            raise InputError("no command given")
    except SystemExit as exc:
        return 2 if exc.code else 0
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    try:
        if args.selftest:
            results = selftest.run(args.command, args.seed)
            report = {"selftest": results, "passed": all(r["passed"] for r in results)}
            header, rows = ("check", "passed"), [(r["check"], r["passed"]) for r in results]
        else:
            report, header, rows = HANDLERS[args.command](args)
    except (InputError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except TorsionLabError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    _emit(args, report, header, rows)
    return 0 if report.get("passed", True) else 1


if __name__ == "__main__":
    sys.exit(main())
