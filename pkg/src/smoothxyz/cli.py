"""Command-line front end.

Exit codes: 0 ok, 1 failed hard check, 2 usage error, 3 budget exceeded.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from dataclasses import dataclass, field, fields, is_dataclass

import numpy as np

from . import __version__
from .smoothset import DEFAULT_BUDGET, BudgetExceeded

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_BUDGET = 0, 1, 2, 3
COMMANDS = ("psi", "saddle", "singular", "weights", "dirichlet", "circle", "count", "report")


class UsageError(ValueError):
    pass


@dataclass
class RunConfig:
    command: str
    params: dict = field(default_factory=dict)
    output: str | None = None
    format: str = "json"
    seed: int = 0
    threads: int = 1
    budget: int = DEFAULT_BUDGET
    cache_dir: str | None = None
    bare_ok: bool = False  # plain number output allowed when no format was requested

    def validate(self) -> None:
        if self.command not in COMMANDS:
            raise UsageError(f"unknown command {self.command!r}")
        if self.format not in ("json", "csv"):
            raise UsageError("format must be json or csv")
        if self.threads < 1 or self.budget < 1:
            raise UsageError("threads and budget must be positive")
        for k, v in self.params.items():
            if isinstance(v, float) and not math.isfinite(v):
                raise UsageError(f"--{k} must be finite")


# ----------------------------------------------------------------------------
# serialization


def _clean(v):
    """Round floats to 15 significant digits and make values JSON-friendly."""
    if is_dataclass(v) and not isinstance(v, type):
        return {f.name: _clean(getattr(v, f.name)) for f in fields(v)}
    if isinstance(v, dict):
        return {str(k): _clean(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_clean(x) for x in v]
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (int, np.integer)):
        return int(v)
    if isinstance(v, (complex, np.complexfloating)):
        return {"re": _clean(float(v.real)), "im": _clean(float(v.imag))}
    if isinstance(v, (float, np.floating)):
        v = float(v)
        if not math.isfinite(v):
            return None
        return float(f"{v:.15g}")
    return v


def _fmt(v) -> str:
    if isinstance(v, (float, np.floating)):
        return f"{float(v):.15g}"
    return str(v)


def render_json(payload: dict, cfg: RunConfig) -> str:
    doc = {"tool": "smoothxyz", "version": __version__, "command": cfg.command,
           "params": cfg.params, "seed": cfg.seed, "result": payload}
    return json.dumps(_clean(doc), sort_keys=True, indent=2) + "\n"


def render_csv(header: list[str], rows: list) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([_fmt(x) for x in r])
    return buf.getvalue()


# ----------------------------------------------------------------------------
# handlers: each returns (json payload, csv (header, rows) or None, bare text or None, ok)


def _weight(p):
    from .weightfn import make_plateau
    return make_plateau(p["eps"])


def _do_psi(p, cfg):
    from .saddlepoint import psi_ht_estimate, psi_perron_truncated
    from .smoothset import psi_exact
    x, y = p["x"], p["y"]
    exact = psi_exact(x, y, budget=cfg.budget)
    out = {"psi_exact": exact}
    if p.get("estimates"):
        out["psi_ht_estimate"] = psi_ht_estimate(x, y)
        out["psi_perron_truncated"] = psi_perron_truncated(x, y)
    rows = [[k, v] for k, v in out.items()]
    return out, (["quantity", "value"], rows), str(exact), True


def _do_saddle(p, cfg):
    from .saddlepoint import solve_saddle
    d = solve_saddle(p["x"], p["y"]).to_dict()
    return d, (["quantity", "value"], [[k, v] for k, v in d.items()]), None, True


def _do_singular(p, cfg):
    from .singular import DomainError, s_f, s_f_star, s_infinity_closed
    c, y = p["c"], p["y"]
    try:
        a = s_f(c, y, p.get("cutoff"))
        b = s_f_star(c, y, p.get("cutoff"))
    except DomainError as e:
        raise UsageError(str(e)) from e
    out = {"s_f": a.to_dict(), "s_f_star": b.to_dict(), "s_infinity_sharp": s_infinity_closed(c)}
    rows = [["s_f", a.value, a.tail_bound], ["s_f_star", b.value, b.tail_bound],
            ["s_infinity_sharp", out["s_infinity_sharp"], 0.0]]
    return out, (["quantity", "value", "tail_bound"], rows), None, True


def _do_weights(p, cfg):
    from .weightfn import (incomplete_gamma_identity, phi_transform, phi_transform_line,
                           plancherel_check)
    phi = _weight(p)
    c, lam = p["c"], p["lam"]
    pl = plancherel_check(phi, c, lam)
    ts = np.linspace(0.0, p["tmax"], int(p["points"]))
    vals = phi_transform_line(phi, c, ts, lam)
    out = {"plancherel": pl, "transform_at_c": phi_transform(phi, c, lam)}
    ok = pl.gap < 1e-4
    if lam < 0:
        gi = incomplete_gamma_identity(c, lam)
        out["incomplete_gamma"] = {"gap": gi.gap, "kummer_gap": gi.kummer_gap}
        ok = ok and gi.gap < 1e-8 and gi.kummer_gap < 1e-8
    out["passed"] = ok
    rows = [[t, v.real, v.imag, abs(v)] for t, v in zip(ts, vals)]
    return out, (["t", "re", "im", "abs"], rows), None, ok


def _do_dirichlet(p, cfg):
    from .dirichlet import (characters_mod, gauss_norm_identity, gauss_sum,
                            induced_gauss_check, orthogonality_defects)
    q = p["q"]
    chars = characters_mod(q)
    rows, worst = [], 0.0
    for chi in chars:
        tau = gauss_sum(chi).tau
        ind = induced_gauss_check(chi).gap
        if chi.is_primitive:
            worst = max(worst, abs(abs(tau) - math.sqrt(q)))
        worst = max(worst, ind)
        rows.append([chi.index, chi.conductor, chi.parity, int(chi.is_primitive), tau.real, tau.imag])
    row_dev, col_dev = orthogonality_defects(q)
    norm = max(abs(gauss_norm_identity(q, d) - 1) for d in range(1, q + 1) if q % d == 0)
    ok = max(row_dev, col_dev, norm, worst) < 1e-9
    out = {"q": q, "characters": len(chars), "orthogonality": [row_dev, col_dev],
           "gauss_norm_defect": norm, "gauss_defect": worst, "passed": ok}
    hdr = ["index", "conductor", "parity", "primitive", "tau_re", "tau_im"]
    return out, (hdr, rows), None, ok


def _do_circle(p, cfg):
    from .circle import circle_identity_discrete, minor_arc_profile, modulus_for
    from .solutions import weighted_count
    phi = _weight(p)
    x, y = p["x"], p["y"]
    M = p.get("modulus") or modulus_for(x, phi)
    ident = circle_identity_discrete(x, y, phi, M, budget=cfg.budget)
    brute = weighted_count(x, y, phi, budget=cfg.budget)
    rel = abs(ident - brute) / max(abs(brute), 1e-300)
    ok = rel < 1e-6
    out = {"modulus": M, "identity": ident, "weighted_count": brute, "relative_gap": rel,
           "passed": ok}
    rows = []
    if p.get("samples") and x >= 16:
        prof = minor_arc_profile(x, y, phi, p["delta"], int(p["samples"]), cfg.seed)
        out["minor_arc"] = {"peak": prof.peak, "sup": prof.sup, "envelope": x**0.8}
        rows = prof.rows
    return out, (["alpha", "abs_E", "x_pow_0.75", "x_pow_0.80"], rows), None, ok


def _do_count(p, cfg):
    from .solutions import pair_counts, weighted_count, weighted_primitive_count
    if p.get("weighted"):
        phi = _weight(p)
        x = p["x"] or p["H"]
        f = weighted_primitive_count if p["primitive"] else weighted_count
        val = f(x, p["y"], phi, ordered=not p["unordered"], budget=cfg.budget)
        out = {"weighted_count": val, "primitive": p["primitive"],
               "ordering": "unordered" if p["unordered"] else "ordered"}
        return out, (["quantity", "value"], [["weighted_count", val]]), _fmt(val), True
    H = int(p["H"])
    y = p["y"]
    if y is None:
        y = math.log(H) ** p["kappa"]
    pc = pair_counts(H, y, p["primitive"], budget=cfg.budget)
    val = pc.unordered if p["unordered"] else pc.ordered
    out = {"H": H, "y": y, "primitive": p["primitive"], "ordered": pc.ordered,
           "unordered": pc.unordered, "diagonal": pc.diagonal}
    rows = [["ordered", pc.ordered], ["unordered", pc.unordered], ["diagonal", pc.diagonal]]
    return out, (["quantity", "value"], rows), str(val), True


def _do_report(p, cfg):
    from .solutions import main_term_report, sieve_identity_check
    phi = _weight(p)
    rep = main_term_report(p["x"], p["y"], phi, budget=cfg.budget)
    out = {"report": rep.to_dict()}
    ok = 0 <= rep.ratio_primitive <= 1
    if p.get("sieve"):
        sc = sieve_identity_check(p["x"], p["y"], phi, budget=cfg.budget)
        out["sieve"] = sc
        ok = ok and sc.passed
    out["passed"] = ok
    d = rep.to_dict()
    return out, (["quantity", "value"], [[k, v] for k, v in d.items()]), None, ok


HANDLERS = {"psi": _do_psi, "saddle": _do_saddle, "singular": _do_singular,
            "weights": _do_weights, "dirichlet": _do_dirichlet, "circle": _do_circle,
            "count": _do_count, "report": _do_report}


def run(cfg: RunConfig, stdout=None) -> int:
    """Validate, dispatch, write outputs; returns the exit status."""
    stdout = stdout or sys.stdout
    try:
        cfg.validate()
    except UsageError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    if cfg.cache_dir:
        os.environ["SMOOTHXYZ_CACHE"] = cfg.cache_dir
    try:
        payload, table, bare, ok = HANDLERS[cfg.command](cfg.params, cfg)
    except BudgetExceeded as e:
        print(f"budget exceeded: {e}", file=sys.stderr)
        return EXIT_BUDGET
    except (UsageError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    if cfg.format == "csv":
        text = render_csv(*table) if table else ""
    elif bare is not None and cfg.bare_ok and not cfg.output:
        text = bare + "\n"
    else:
        text = render_json(payload, cfg)
    if cfg.output:
        with open(cfg.output, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        stdout.write(text)
    return EXIT_OK if ok else EXIT_FAIL


# ----------------------------------------------------------------------------
# argument parsing


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _positive_int(s: str) -> int:
    v = int(float(s))
    if v < 1 or v != float(s):
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {s}")
    return v


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--output", help="write to this path instead of stdout")
    common.add_argument("--format", choices=("json", "csv"), default=None)
    common.add_argument("--report", choices=("json", "csv"), default=None,
                        help="force a full report in this format")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--threads", type=_positive_int, default=1)
    common.add_argument("--budget", type=_positive_int, default=DEFAULT_BUDGET)
    common.add_argument("--cache-dir", default=None)

    ap = _Parser(prog="smoothxyz", description="Smooth solutions of X + Y = Z: experiments.")
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("psi", parents=[common], help="count y-smooth integers up to x")
    s.add_argument("--x", type=float, required=True)
    s.add_argument("--y", type=float, required=True)
    s.add_argument("--estimates", action="store_true", help="add saddle-point estimates")

    s = sub.add_parser("saddle", parents=[common], help="saddle point c(x, y)")
    s.add_argument("--x", type=float, required=True)
    s.add_argument("--y", type=float, required=True)

    s = sub.add_parser("singular", parents=[common], help="singular series values")
    s.add_argument("--c", type=float, required=True)
    s.add_argument("--y", type=float, required=True)
    s.add_argument("--cutoff", type=_positive_int, default=None)

    s = sub.add_parser("weights", parents=[common], help="weight transform checks")
    s.add_argument("--eps", type=float, default=0.05)
    s.add_argument("--c", type=float, default=0.875)
    s.add_argument("--lam", type=float, default=0.0)
    s.add_argument("--tmax", type=float, default=50.0)
    s.add_argument("--points", type=_positive_int, default=101)

    s = sub.add_parser("dirichlet", parents=[common], help="character table and Gauss sums")
    s.add_argument("--q", type=_positive_int, required=True)

    s = sub.add_parser("circle", parents=[common], help="discrete circle identity")
    s.add_argument("--x", type=float, required=True)
    s.add_argument("--y", type=float, required=True)
    s.add_argument("--eps", type=float, default=0.05)
    s.add_argument("--modulus", type=_positive_int, default=None)
    s.add_argument("--delta", type=float, default=0.1)
    s.add_argument("--samples", type=int, default=0)

    s = sub.add_parser("count", parents=[common], help="count smooth solutions")
    s.add_argument("--H", type=float, required=True)
    g = s.add_mutually_exclusive_group(required=True)
    g.add_argument("--y", type=float)
    g.add_argument("--kappa", type=float)
    s.add_argument("--primitive", action="store_true")
    s.add_argument("--unordered", action="store_true")
    s.add_argument("--weighted", action="store_true")
    s.add_argument("--x", type=float, default=None, help="scale for weighted counts (default H)")
    s.add_argument("--eps", type=float, default=0.05)

    s = sub.add_parser("report", parents=[common], help="counts against main terms")
    s.add_argument("--x", type=float, required=True)
    s.add_argument("--y", type=float, required=True)
    s.add_argument("--eps", type=float, default=0.05)
    s.add_argument("--sieve", action="store_true")
    return ap


_PLUMBING = ("command", "output", "format", "seed", "threads", "budget", "cache_dir")


def config_from_args(argv=None) -> RunConfig:
    ns = build_parser().parse_args(argv)
    d = vars(ns)
    params = {k: v for k, v in d.items() if k not in _PLUMBING}
    if params.get("report") == "csv" and ns.format is None:
        fmt = "csv"
    else:
        fmt = ns.format or "json"
    bare_ok = ns.format is None and ns.report is None
    return RunConfig(ns.command, params, ns.output, fmt, ns.seed, ns.threads, ns.budget,
                     ns.cache_dir, bare_ok)


def main(argv=None) -> int:
    try:
        cfg = config_from_args(argv)
    except SystemExit as e:
        code = e.code if isinstance(e.code, int) else EXIT_USAGE
        return code
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())
