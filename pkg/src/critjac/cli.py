"""Command-line front end.

Usage:
    critjac classify 2 1
    critjac expand --format json
    critjac kelley --grid 9 --out kelley.csv
    critjac spectrum --lo 2.5 --hi 7 --K 4000
    critjac solve --lam 1 --n-max 10000
    critjac defaults > run.cfg

Every table subcommand writes data rows (CSV with one header, or JSON
{config, rows, verdicts}). In CSV mode verdicts go to <out>.verdicts.csv,
or to stderr when writing to stdout. Exit codes: 0 success, 1 validation
error, 2 failed verdict, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from dataclasses import dataclass, field
from typing import Any, Callable, Sequence

import numpy as np

from .config import FORMATS, SOLVE_KINDS, RunConfig
from .errors import AdmissibilityError, NumericalError, ParameterError
from .expansions import SLOPE_GRID, F_expansion, G_expansion, beta_expansion, loglog_slope
from .family import phase_classify
from .kelley import backward_limit, envelopes, growing_riccati, verify_trapping
from .poincare import poincare_F, poincare_G
from .recurrence import first_kind_polynomials, recurrence_backward, recurrence_forward, recurrence_residual
from .riccati import beta, beta_range
from .spectrum import (
    construction_index,
    growth_fit,
    predicted_decay_slope,
    proportionality,
    shooting_eigenvalues,
    spacing_report,
    truncate_eigenvalues,
)

EXIT_OK, EXIT_VALIDATION, EXIT_VERDICT, EXIT_NUMERICAL = 0, 1, 2, 3

EXPAND_HEADER = (
    "lambda", "n", "F_exact", "F_exp", "F_res", "G_exact", "G_exp", "G_res", "beta_exact", "beta_exp", "beta_res",
)
VERDICT_HEADER = ("check", "lambda", "value", "threshold", "pass")


@dataclass
class Table:
    header: tuple[str, ...]
    rows: list[dict] = field(default_factory=list)
    verdicts: list[dict] = field(default_factory=list)

    def verdict(self, check: str, value: float, threshold: float, ok: bool, lam: float | None = None):
        self.verdicts.append({"check": check, "lambda": lam, "value": value, "threshold": threshold, "pass": bool(ok)})

    @property
    def passed(self) -> bool:
        return all(v["pass"] for v in self.verdicts)


# ---------------------------------------------------------------- formatting
def _cell(v: Any) -> str:
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return "%.17g" % float(v)
    return str(v)


def _json_value(v: Any) -> Any:
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (int, np.integer)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        v = float(v)
        return v if math.isfinite(v) else None
    return v


def write_csv(stream, header: Sequence[str], rows: Sequence[dict]) -> None:
    w = csv.writer(stream, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([_cell(r.get(h)) for h in header])


def emit(table: Table, cfg: RunConfig, stdout=None, stderr=None) -> None:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    if cfg.format == "json":
        doc = {
            "config": {k: _json_value(v) for k, v in cfg.as_dict().items()},
            "rows": [{h: _json_value(r.get(h)) for h in table.header} for r in table.rows],
            "verdicts": [{h: _json_value(v.get(h)) for h in VERDICT_HEADER} for v in table.verdicts],
        }
        text = json.dumps(doc, indent=1, allow_nan=False) + "\n"
        if cfg.out:
            with open(cfg.out, "w") as fh:
                fh.write(text)
        else:
            stdout.write(text)
        return
    if cfg.out:
        with open(cfg.out, "w", newline="") as fh:
            write_csv(fh, table.header, table.rows)
        if table.verdicts:
            with open(cfg.out + ".verdicts.csv", "w", newline="") as fh:
                write_csv(fh, VERDICT_HEADER, table.verdicts)
    else:
        write_csv(stdout, table.header, table.rows)
        if table.verdicts:
            write_csv(stderr, VERDICT_HEADER, table.verdicts)


# ---------------------------------------------------------------- subcommands
def cmd_classify(c1: float, c2: float) -> Table:
    region = phase_classify(c1, c2)
    t = Table(("c1", "c2", "region", "discriminant"))
    t.rows.append({"c1": float(c1), "c2": float(c2), "region": region.tag.value, "discriminant": region.discriminant})
    return t


def cmd_expand(cfg: RunConfig) -> Table:
    fam = cfg.family()
    fam.require_critical("expand")
    Fe, Ge, Be = F_expansion(fam), G_expansion(fam), beta_expansion(fam)
    n = SLOPE_GRID
    limit = -(1 + fam.alpha) + 0.1
    t = Table(EXPAND_HEADER)
    for lam in cfg.window().grid(cfg.grid):
        lam = float(lam)
        cols = {}
        for name, exact, exp in (
            ("F", poincare_F(fam, lam, n), Fe(lam, n)),
            ("G", poincare_G(fam, lam, n), Ge(lam, n)),
            ("beta", beta(fam, lam, n), Be(lam, n)),
        ):
            cols[name] = (exact, exp, exact - exp)
            slope = loglog_slope(n, exact - exp)
            t.verdict(f"{name}_residual_slope", slope, limit, slope <= limit, lam)
        for k in range(n.size):
            row = {"lambda": lam, "n": int(n[k])}
            for name, (ex, ap, res) in cols.items():
                row[f"{name}_exact"], row[f"{name}_exp"], row[f"{name}_res"] = float(ex[k]), float(ap[k]), float(res[k])
            t.rows.append(row)
    return t


KELLEY_HEADER = (
    "lambda", "branch", "valid_from", "binding", "uniform_N", "n_hi", "trapped", "max_violation",
    "first_violation", "certificate", "monotone_drop", "s_final", "max_offset_n",
)


def _max_offset(fam, sol) -> float:
    """max |X_n -+ sqrt(-beta_n)| * n over the solution."""
    b = beta_range(fam, sol.lam, sol.start_index, sol.stop_index)
    sign = 1.0 if sol.branch == "plus" else -1.0
    n = sol.indices
    return float(np.max(np.abs(sol.values - sign * np.sqrt(-b)) * n))


def cmd_kelley(cfg: RunConfig) -> Table:
    fam = cfg.family()
    fam.require_critical("kelley")
    bounds = cfg.bounds()
    lams = [float(l) for l in cfg.window().grid(cfg.grid)]
    t = Table(KELLEY_HEADER)
    for branch in ("plus", "minus"):
        env = envelopes(fam, lams, bounds, branch)
        N = env.valid_from if cfg.N is None else cfg.N
        n_hi = max(2 * N, cfg.n_max)
        t.verdict(f"valid_from_uniform_{branch}", env.valid_from, cfg.valid_from_max,
                  env.valid_from < cfg.valid_from_max)
        A, B = bounds.offsets(branch)
        sharp = max(A, B) + 0.05
        for scan in env.scans:
            lam = scan.lam
            if branch == "plus":
                sol = growing_riccati(fam, lam, bounds, N, n_hi)
                cert, drop, s_final = None, None, None
            else:
                sol = backward_limit(fam, lam, bounds, N, n_hi, s_cap=cfg.s_cap)
                cert, drop, s_final = sol.certificate, sol.info["monotone_drop"], sol.info["s_list"][-1]
            rep = verify_trapping(env, sol, N, n_hi)
            off = _max_offset(fam, sol)
            t.rows.append({
                "lambda": lam, "branch": branch, "valid_from": scan.valid_from, "binding": scan.binding,
                "uniform_N": N, "n_hi": n_hi, "trapped": rep.trapped, "max_violation": rep.max_violation,
                "first_violation": rep.first_violation, "certificate": cert, "monotone_drop": drop,
                "s_final": s_final, "max_offset_n": off,
            })
            t.verdict(f"trapped_{branch}", rep.max_violation, 0.0, rep.trapped, lam)
            if branch == "minus":
                t.verdict("backward_limit_monotone", drop, 1e-12, drop <= 1e-12, lam)
            t.verdict(f"offset_n_{branch}", off, sharp, off <= sharp, lam)
    return t


SPECTRUM_HEADER = (
    "index", "lambda_sturm", "lambda_sturm_2K", "lambda_shoot", "delta_methods", "delta_K",
    "recurrence_residual", "initial_residual", "decay_slope", "predicted_slope", "slope_ratio", "C", "C_spread",
)


def _pairs(a: np.ndarray, b: np.ndarray, tol: float = 1e-6) -> list[tuple[float | None, float | None]]:
    """Match two ascending lists; entries further than ``tol`` from any partner stay unpaired."""
    out, i, j = [], 0, 0
    while i < a.size or j < b.size:
        if i < a.size and j < b.size and abs(a[i] - b[j]) <= tol:
            out.append((float(a[i]), float(b[j])))
            i, j = i + 1, j + 1
        elif j >= b.size or (i < a.size and a[i] < b[j]):
            out.append((float(a[i]), None))
            i += 1
        else:
            out.append((None, float(b[j])))
            j += 1
    return out


def cmd_spectrum(cfg: RunConfig) -> Table:
    fam = cfg.family()
    fam.require_critical("spectrum")
    win, bounds = cfg.window(), cfg.bounds()
    spacing = spacing_report(fam, win, [cfg.K, 2 * cfg.K])
    ev_K, ev_2K = spacing[0].eigenvalues, spacing[1].eigenvalues
    N = construction_index(fam, win, bounds) if cfg.N is None else cfg.N
    fit_hi = min(100_000, cfg.n_max)
    pairs = shooting_eigenvalues(fam, win, N, bounds, cfg.step, cfg.n_max)
    shoot = np.array([p.lambda0 for p in pairs])
    t = Table(SPECTRUM_HEADER)
    by_lam = {p.lambda0: p for p in pairs}
    k_pairs = dict(_pairs(ev_K, ev_2K))
    for i, (ls, lh) in enumerate(_pairs(ev_K, shoot), 1):
        row = {"index": i, "lambda_sturm": ls, "lambda_shoot": lh}
        if ls is not None:
            l2 = k_pairs.get(ls)
            row["lambda_sturm_2K"] = l2
            row["delta_K"] = abs(l2 - ls) if l2 is not None else None
        if ls is not None and lh is not None:
            row["delta_methods"] = abs(lh - ls)
        if lh is not None:
            est = by_lam[lh]
            row.update(recurrence_residual=est.recurrence_residual, initial_residual=est.initial_residual,
                       predicted_slope=est.predicted_slope)
            if fit_hi > 1000:
                fit = growth_fit(est.eigvec, fam, lh, 1000, fit_hi)
                row.update(decay_slope=fit.fitted, slope_ratio=fit.ratio)
            prop = proportionality(fam, lh, est.eigvec)
            row.update(C=prop.C, C_spread=prop.spread)
        t.rows.append(row)

    t.verdict("count_methods", abs(ev_K.size - shoot.size), 0, ev_K.size == shoot.size)
    t.verdict("count_K_doubling", abs(ev_K.size - ev_2K.size), 0, ev_K.size == ev_2K.size)
    t.verdict("bracket_audit", int(not all(r.audit_ok for r in spacing)), 0, all(r.audit_ok for r in spacing))
    if ev_K.size >= 2 and ev_2K.size >= 2:
        rel = abs(spacing[1].min_gap / spacing[0].min_gap - 1)
        t.verdict("min_gap_K_doubling", rel, 0.01, rel <= 0.01)
    rows = t.rows

    def worst(key):
        vals = [r[key] for r in rows if r.get(key) is not None]
        return max(vals) if vals else 0.0

    t.verdict("max_delta_methods", worst("delta_methods"), 1e-9, worst("delta_methods") <= 1e-9)
    t.verdict("max_delta_K", worst("delta_K"), 1e-8, worst("delta_K") <= 1e-8)
    res = max(worst("recurrence_residual"), worst("initial_residual"))
    t.verdict("eigvec_residual", res, 1e-10, res <= 1e-10)
    for r in rows:
        if r.get("slope_ratio") is not None:
            dev = abs(r["slope_ratio"] - 1)
            t.verdict("decay_slope_ratio", r["slope_ratio"], 0.15, dev <= 0.15, r["lambda_shoot"])
    t.verdict("C_spread", worst("C_spread"), 1e-6, worst("C_spread") < 1e-6)
    cs = [abs(r["C"]) for r in rows if r.get("C") is not None]
    if cs:
        t.verdict("C_min_abs", min(cs), 0.0, min(cs) > 0)
    return t


SOLVE_HEADER = ("n", "sign", "logmag")


def cmd_solve(cfg: RunConfig) -> Table:
    fam = cfg.family()
    lam = cfg.lam
    if cfg.kind == "first-kind":
        f = first_kind_polynomials(fam, lam, cfg.n_max)
    elif cfg.kind == "forward":
        f = recurrence_forward(fam, lam, cfg.f1, cfg.f2, cfg.n_max)
    else:
        f = recurrence_backward(fam, lam, (cfg.f1, cfg.f2), cfg.n_max - 1, 1)
    t = Table(SOLVE_HEADER)
    sign, logmag = f.sign, f.logmag
    for n, s, L in zip(f.indices.tolist(), sign.tolist(), logmag.tolist()):
        t.rows.append({"n": n, "sign": int(s), "logmag": L})
    r = recurrence_residual(fam, lam, f)
    worst = float(r.max()) if r.size else 0.0
    t.verdict("recurrence_residual", worst, 1e-10, worst <= 1e-10, lam)
    if cfg.kind == "first-kind" and fam.is_critical and cfg.n_max >= 10_000 and lam > 0:
        pred = abs(predicted_decay_slope(fam, lam)) * 10_000 ** (1 - fam.alpha / 2)
        ratio = float(logmag[10_000 - f.start_index]) / pred
        t.verdict("growth_ratio_n1e4", ratio, 0.15, abs(ratio - 1) <= 0.15, lam)
    return t


# ---------------------------------------------------------------- argument parsing
class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ParameterError(message)


def _common() -> argparse.ArgumentParser:
    p = _Parser(add_help=False)
    g = p.add_argument_group("run configuration")
    g.add_argument("--config", metavar="PATH", help="flat key = value file; flags override it")
    g.add_argument("--c1", type=float)
    g.add_argument("--c2", type=float)
    g.add_argument("--alpha", type=float)
    g.add_argument("--lo", type=float)
    g.add_argument("--hi", type=float)
    g.add_argument("--grid", type=int, help="lambda grid points over [lo, hi]")
    g.add_argument("--K", type=int, help="finite section size (2K is the stability check)")
    g.add_argument("--s-cap", dest="s_cap", type=int, help="cap on the backward-limit depth")
    g.add_argument("--n-max", dest="n_max", type=int)
    g.add_argument("--N", type=int, help="override the construction index")
    g.add_argument("--A-plus", dest="A_plus", type=float)
    g.add_argument("--A-minus", dest="A_minus", type=float)
    g.add_argument("--B-minus", dest="B_minus", type=float)
    g.add_argument("--B-plus", dest="B_plus", type=float)
    g.add_argument("--step", type=float, help="shooting scan step")
    g.add_argument("--valid-from-max", dest="valid_from_max", type=int)
    g.add_argument("--lam", type=float, help="spectral parameter for solve")
    g.add_argument("--kind", choices=SOLVE_KINDS)
    g.add_argument("--f1", type=float, help="first seed value (solve)")
    g.add_argument("--f2", type=float, help="second seed value (solve)")
    g.add_argument("--format", choices=FORMATS)
    g.add_argument("--out", metavar="PATH")
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = _Parser(prog="critjac", description="Critical-boundary Jacobi matrices: asymptotics and spectrum.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    c = sub.add_parser("classify", parents=[common], help="locate (c1, c2) in the phase plane")
    c.add_argument("pos_c1", nargs="?", type=float, metavar="C1")
    c.add_argument("pos_c2", nargs="?", type=float, metavar="C2")
    sub.add_parser("expand", parents=[common], help="exact versus truncated F, G, beta")
    sub.add_parser("kelley", parents=[common], help="envelopes, trapping and backward-limit certificates")
    sub.add_parser("spectrum", parents=[common], help="eigenvalues in the window by two methods")
    sub.add_parser("solve", parents=[common], help="dump a recurrence solution as (n, sign, logmag)")
    sub.add_parser("defaults", parents=[common], help="print the effective configuration")
    return parser


_CONFIG_KEYS = (
    "c1", "c2", "alpha", "lo", "hi", "grid", "K", "s_cap", "n_max", "N", "A_plus", "A_minus", "B_minus",
    "B_plus", "step", "valid_from_max", "lam", "kind", "f1", "f2", "format", "out",
)


def load_config(args: argparse.Namespace) -> RunConfig:
    cfg = RunConfig.from_file(args.config) if args.config else RunConfig()
    return cfg.merged({k: getattr(args, k) for k in _CONFIG_KEYS}).validate()


COMMANDS: dict[str, Callable[[RunConfig], Table]] = {
    "expand": cmd_expand,
    "kelley": cmd_kelley,
    "spectrum": cmd_spectrum,
    "solve": cmd_solve,
}


def main(argv: Sequence[str] | None = None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    try:
        args = build_parser().parse_args(argv)
        if args.command == "classify":
            if args.pos_c1 is not None:
                args.c1 = args.pos_c1
            if args.pos_c2 is not None:
                args.c2 = args.pos_c2
            cfg = RunConfig.from_file(args.config) if args.config else RunConfig()
            cfg = cfg.merged({k: getattr(args, k) for k in _CONFIG_KEYS})
            if cfg.format not in FORMATS:
                raise ParameterError(f"format must be one of {FORMATS}")
            table = cmd_classify(cfg.c1, cfg.c2)
        else:
            cfg = load_config(args)
            if args.command == "defaults":
                text = cfg.to_text()
                if cfg.out:
                    with open(cfg.out, "w") as fh:
                        fh.write(text)
                else:
                    stdout.write(text)
                return EXIT_OK
            table = COMMANDS[args.command](cfg)
        emit(table, cfg, stdout, stderr)
    except (ParameterError, AdmissibilityError) as exc:
        print(f"error: {exc}", file=stderr)
        return EXIT_VALIDATION
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=stderr)
        return EXIT_NUMERICAL
    except OSError as exc:
        print(f"error: {exc}", file=stderr)
        return EXIT_VALIDATION
    return EXIT_OK if table.passed else EXIT_VERDICT


def main_entry() -> None:  # pragma: no cover
    sys.exit(main())


if __name__ == "__main__":  # pragma: no cover
    main_entry()
