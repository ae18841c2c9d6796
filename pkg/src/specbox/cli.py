"""Command-line front end: ``specbox <subcommand> [options]``.

Numbers are written as decimal strings everywhere (tables, CSV, JSON) so
no output is ever rounded through a binary double.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import os
import sys
from dataclasses import dataclass
from typing import Optional

from . import oracle
from .basis import BasisSpec, Family, Parity
from .eigensolve import ConvergenceError, eig_sym, estimate_significant_digits
from .matelem import hamiltonian_matrix
from .optimizer import NoCandidateError, find_optimal_L, scan_energy
from .potential import Potential, reduce
from .precision import PrecisionCtx, make_context, to_decimal_string
from .wavefn import (
    DEFAULT_POINTS,
    l2_difference,
    reference_samples,
    sample,
    sho_ground_state,
)

log = logging.getLogger("specbox")

EXIT_CONFIG = 2
EXIT_NUMERIC = 3
DEFAULT_DIGITS = 40
DEFAULT_LEVELS = 6


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    potential: Potential
    bc: str  # periodic | dirichlet | both
    parity: str  # even | odd | both
    n_basis: list
    half_width: Optional[str]
    optimize: bool
    digits: int
    levels: int
    fmt: str
    output: Optional[str]
    out_digits: int

    @property
    def n(self) -> int:
        return self.n_basis[0]

    def families(self) -> list:
        return [Family.PERIODIC, Family.DIRICHLET] if self.bc == "both" else [Family(self.bc)]

    def parities(self) -> list:
        return [Parity.EVEN, Parity.ODD] if self.parity == "both" else [Parity(self.parity)]


# ---------------------------------------------------------------------------
# output helpers


class Report:
    """Rows of string cells rendered as an aligned table, CSV or JSON."""

    def __init__(self, columns, title: str = "", meta: Optional[dict] = None):
        self.columns = list(columns)
        self.rows: list = []
        self.title = title
        self.meta = meta or {}

    def add(self, *cells) -> None:
        self.rows.append(["" if c is None else str(c) for c in cells])

    def render(self, fmt: str) -> str:
        if fmt == "csv":
            buf = io.StringIO()
            w = csv.writer(buf, lineterminator="\n")
            w.writerow(self.columns)
            w.writerows(self.rows)
            return buf.getvalue()
        if fmt == "json":
            doc = dict(self.meta)
            doc["rows"] = [dict(zip(self.columns, r)) for r in self.rows]
            return json.dumps(doc, indent=2) + "\n"
        widths = [len(c) for c in self.columns]
        for r in self.rows:
            widths = [max(w, len(c)) for w, c in zip(widths, r)]
        lines = []
        if self.title:
            lines.append(self.title)
        for k, v in self.meta.items():
            lines.append(f"{k}: {v}")
        lines.append("  ".join(c.rjust(w) for c, w in zip(self.columns, widths)))
        lines.append("  ".join("-" * w for w in widths))
        for r in self.rows:
            lines.append("  ".join(c.rjust(w) for c, w in zip(r, widths)))
        return "\n".join(lines) + "\n"


def emit(reports, cfg: RunConfig) -> None:
    if cfg.fmt == "json" and len(reports) > 1:
        text = json.dumps([json.loads(r.render("json")) for r in reports], indent=2) + "\n"
    else:
        text = "".join(r.render(cfg.fmt) for r in reports)
    if cfg.output:
        with open(cfg.output, "w", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def fmt_num(x, digits: int) -> str:
    return to_decimal_string(x, digits)


# ---------------------------------------------------------------------------
# shared orchestration


def block_spectrum(p: Potential, family: Family, parity: Parity, n: int, L, ctx,
                   vectors: bool = False):
    spec = BasisSpec(family, parity, n, L)
    try:
        return spec, eig_sym(hamiltonian_matrix(p, spec, ctx), ctx, want_vectors=vectors)
    except ConvergenceError as exc:
        raise ConvergenceError(
            f"{family.value}/{parity.value} block: {exc}", exc.off_norm, exc.sweeps
        ) from exc


def resolve_half_width(cfg: RunConfig, family: Family, n: int, ctx) -> tuple:
    """(L, optimum result or None); the optimum comes from the even ground state."""
    if cfg.optimize:
        res = find_optimal_L(cfg.potential, family, Parity.EVEN, n, ctx)
        return res.L, res
    return ctx.mpf(cfg.half_width), None


def merged_levels(p, family, parities, n, L, ctx):
    """Eigenvalues of the requested parity blocks merged ascending, tagged by parity."""
    tagged = []
    for par in parities:
        _, res = block_spectrum(p, family, par, n, L, ctx)
        tagged += [(e, "+" if par is Parity.EVEN else "-") for e in res.eigenvalues]
    tagged.sort(key=lambda t: t[0])
    return tagged


# ---------------------------------------------------------------------------
# subcommands


def cmd_spectrum(cfg: RunConfig, args) -> list:
    ctx = make_context(cfg.digits)
    reports = []
    for family in cfg.families():
        L, opt = resolve_half_width(cfg, family, cfg.n, ctx)
        levels = merged_levels(cfg.potential, family, cfg.parities(), cfg.n, L, ctx)
        if cfg.levels > len(levels):
            raise ConfigError(f"--levels {cfg.levels} exceeds the {len(levels)} available")
        ref = None
        if not args.no_sd:
            n_ref = args.n_ref or cfg.n + 10
            ref = merged_levels(cfg.potential, family, cfg.parities(), n_ref, L, ctx)
        meta = {
            "potential": str(cfg.potential),
            "bc": family.value,
            "parity": cfg.parity,
            "n_basis": cfg.n,
            "half_width": fmt_num(L, cfg.digits),
            "optimized": cfg.optimize,
            "digits": cfg.digits,
        }
        if ref is not None:
            meta["sd_reference_n_basis"] = args.n_ref or cfg.n + 10
        rep = Report(["n", "parity", "E_n", "SD"], f"spectrum ({family.value})", meta)
        for i in range(cfg.levels):
            e, tag = levels[i]
            sd = estimate_significant_digits(e, ref[i][0]) if ref is not None else None
            rep.add(i, tag, fmt_num(e, cfg.out_digits), sd)
        reports.append(rep)
        if args.dump_matrix:
            _dump(cfg, family, L, ctx, args.dump_matrix)
    return reports


def _dump(cfg: RunConfig, family, L, ctx, path) -> None:
    parities = cfg.parities()
    for par in parities:
        target = path if len(parities) == 1 else f"{path}.{par.value}"
        spec = BasisSpec(family, par, cfg.n, L)
        hamiltonian_matrix(cfg.potential, spec, ctx).dump(target, ctx.decimal_digits)


def cmd_dump_matrix(cfg: RunConfig, args) -> list:
    ctx = make_context(cfg.digits)
    if len(cfg.families()) != 1:
        raise ConfigError("dump-matrix needs a single --bc")
    family = cfg.families()[0]
    L, _ = resolve_half_width(cfg, family, cfg.n, ctx)
    _dump(cfg, family, L, ctx, args.path)
    rep = Report(["file", "order"], "dump-matrix")
    for par in cfg.parities():
        target = args.path if len(cfg.parities()) == 1 else f"{args.path}.{par.value}"
        rep.add(target, BasisSpec(family, par, cfg.n, L).size)
    return [rep]


def cmd_scan(cfg: RunConfig, args) -> list:
    ctx = make_context(cfg.digits)
    if args.l_min is None or args.l_max is None:
        raise ConfigError("scan needs --l-min and --l-max")
    both = len(cfg.families()) > 1
    rep = Report((["bc"] if both else []) + ["L", "E", "dE/dL", "d2E/dL2"], "scan",
                 {"potential": str(cfg.potential), "n_basis": cfg.n, "level": args.level,
                  "parity": cfg.parities()[0].value})
    for family in cfg.families():
        res = scan_energy(cfg.potential, family, cfg.parities()[0], cfg.n, args.level,
                          (ctx.mpf(args.l_min), ctx.mpf(args.l_max)), args.points, ctx)
        for i, (L, E) in enumerate(zip(res.L_grid, res.energies)):
            interior = 0 < i < len(res.L_grid) - 1
            d1 = fmt_num(res.d1[i - 1], cfg.out_digits) if interior else ""
            d2 = fmt_num(res.d2[i - 1], cfg.out_digits) if interior else ""
            row = [fmt_num(L, cfg.out_digits), fmt_num(E, cfg.out_digits), d1, d2]
            rep.add(*(([family.value] if both else []) + row))
    return [rep]


def cmd_optimize_l(cfg: RunConfig, args) -> list:
    ctx = make_context(cfg.digits)
    summary = Report(["bc", "N", "L_opt", "E(L_opt)", "L_c", "evaluations"], "optimize-l",
                     {"potential": str(cfg.potential), "level": args.level,
                      "parity": cfg.parities()[0].value})
    reports = [summary]
    L_range = (args.l_min, args.l_max) if args.l_min is not None else None
    if (args.l_min is None) != (args.l_max is None):
        raise ConfigError("give both --l-min and --l-max or neither")
    for family in cfg.families():
        for n in cfg.n_basis:
            res = find_optimal_L(cfg.potential, family, cfg.parities()[0], n, ctx,
                                 level=args.level, L_range=L_range, points=args.points)
            lc = res.scan.turning_point
            summary.add(family.value, n, fmt_num(res.L, 7 + len(str(int(res.L)))),
                        fmt_num(res.energy, cfg.out_digits),
                        fmt_num(lc, 8) if lc is not None else "", res.evaluations)
            if args.candidates:
                cand = Report(["L", "kind", "|dE/dL|", "chosen"],
                              f"candidates ({family.value}, N={n})")
                for c in res.scan.candidates:
                    chosen = "*" if abs(c.L - res.L) <= 2 * (res.scan.L_grid[1] - res.scan.L_grid[0]) else ""
                    cand.add(fmt_num(c.L, 8), c.kind, fmt_num(c.abs_d1, 4), chosen)
                reports.append(cand)
    return reports if cfg.fmt == "table" else reports[:1]


def cmd_wavefunction(cfg: RunConfig, args) -> list:
    ctx = make_context(cfg.digits)
    if len(cfg.families()) != 1 or cfg.parity == "both":
        raise ConfigError("wavefunction needs a single --bc and --parity")
    family, parity = cfg.families()[0], cfg.parities()[0]
    L, _ = resolve_half_width(cfg, family, cfg.n, ctx)
    spec, res = block_spectrum(cfg.potential, family, parity, cfg.n, L, ctx, vectors=True)
    if args.level >= spec.size:
        raise ConfigError("--level outside the block")
    w = sample(res.eigenvectors[args.level], spec, ctx, args.level, args.points)
    cols = ["x", "psi"]
    extra = None
    if args.reference == "sho":
        ref = reference_samples(sho_ground_state, w, ctx)
        curve, total = l2_difference(w, ref, ctx)
        cols += ["psi_ref", "delta_sq"]
        extra = (ref, curve, total)
    meta = {"bc": family.value, "parity": parity.value, "n_basis": cfg.n,
            "half_width": fmt_num(L, cfg.digits), "level": args.level,
            "energy": fmt_num(res.eigenvalues[args.level], cfg.out_digits),
            "sign_convention": w.sign_convention}
    if extra:
        meta["integrated_delta_sq"] = fmt_num(extra[2], cfg.out_digits)
    rep = Report(cols, "wavefunction", meta)
    for i, (x, v) in enumerate(zip(w.x_grid, w.values)):
        row = [fmt_num(x, cfg.out_digits), fmt_num(v, cfg.out_digits)]
        if extra:
            row += [fmt_num(extra[0].values[i], cfg.out_digits),
                    fmt_num(extra[1][i], cfg.out_digits)]
        rep.add(*row)
    return [rep]


def cmd_compare_bc(cfg: RunConfig, args) -> list:
    ctx = make_context(cfg.digits)
    rows = {}
    for family in (Family.PERIODIC, Family.DIRICHLET):
        res = find_optimal_L(cfg.potential, family, Parity.EVEN, cfg.n, ctx, level=args.level)
        rows[family] = res
    if args.reference is not None:
        ref = ctx.mpf(args.reference)
        ref_label = "given"
    else:
        n_ref = args.n_ref or cfg.n + 10
        ref = find_optimal_L(cfg.potential, Family.PERIODIC, Parity.EVEN, n_ref, ctx,
                             level=args.level).energy
        ref_label = f"periodic N={n_ref}"
    rep = Report(["bc", "N", "L_opt", "E", "SD"], "compare-bc",
                 {"potential": str(cfg.potential), "level": args.level,
                  "reference": f"{fmt_num(ref, cfg.out_digits)} ({ref_label})"})
    sd = {}
    for family, res in rows.items():
        sd[family] = estimate_significant_digits(res.energy, ref)
        rep.add(family.value, cfg.n, fmt_num(res.L, 7 + len(str(int(res.L)))),
                fmt_num(res.energy, cfg.out_digits), sd[family])
    rep.meta["dirichlet_digit_deficit"] = sd[Family.PERIODIC] - sd[Family.DIRICHLET]
    return [rep]


def cmd_scale(cfg: RunConfig, args) -> list:
    ctx = make_context(cfg.digits)
    k = cfg.potential.coefficient(2)
    lam = cfg.potential.coefficient(4)
    if cfg.potential.degree != 4 or len(cfg.potential.coeffs) != 2:
        raise ConfigError("scale applies to the quartic -k x^2 + lambda x^4 only")
    sm = reduce(-k, lam, ctx)
    rep = Report(["quantity", "value"], "scale")
    d = cfg.out_digits
    rep.add("k", fmt_num(sm.k, d))
    rep.add("lambda", fmt_num(sm.lam, d))
    rep.add("beta", fmt_num(sm.beta, d))
    rep.add("energy_factor", fmt_num(sm.energy_factor, d))
    rep.add("length_factor", fmt_num(sm.length_factor, d))
    return [rep]


def cmd_verify(cfg: RunConfig, args) -> list:
    ctx = make_context(cfg.digits)
    if cfg.half_width is None:
        raise ConfigError("verify needs --half-width")
    L = ctx.mpf(cfg.half_width)
    family = cfg.families()[0]
    levels = merged_levels(cfg.potential, family, [Parity.EVEN, Parity.ODD], cfg.n, L, ctx)
    fd = oracle.fd_eigenvalues(cfg.potential, float(L), args.grid_n, min(cfg.levels, 10))
    rep = Report(["n", "E_variational", "E_finite_difference", "abs_diff"], "verify",
                 {"bc": family.value, "n_basis": cfg.n, "half_width": cfg.half_width,
                  "fd_grid_n": args.grid_n})
    for i, e_fd in enumerate(fd):
        e = levels[i][0]
        rep.add(i, fmt_num(e, cfg.out_digits), repr(float(e_fd)), f"{abs(float(e) - e_fd):.3e}")
    mom = Report(["j", "n", "closed_form", "quadrature", "rel_err"], "moment check",
                 {"half_width": cfg.half_width})
    from .matelem import cosine_moment

    for j, n in [(0, 0), (2, 1), (4, 3), (8, 7), (12, 25)]:
        exact = cosine_moment(j, n, L, ctx)
        q, _ = oracle.quadrature_moment(j, n, float(L))
        rel = abs(float(exact) - q) / max(abs(float(exact)), 1e-300)
        mom.add(j, n, fmt_num(exact, 20), repr(q), f"{rel:.2e}")
    return [rep, mom]


COMMANDS = {
    "spectrum": cmd_spectrum,
    "scan": cmd_scan,
    "optimize-l": cmd_optimize_l,
    "wavefunction": cmd_wavefunction,
    "compare-bc": cmd_compare_bc,
    "scale": cmd_scale,
    "verify": cmd_verify,
    "dump-matrix": cmd_dump_matrix,
}


# ---------------------------------------------------------------------------
# argument parsing


def _default_digits() -> int:
    env = os.environ.get("SPECBOX_DIGITS")
    if env is None:
        return DEFAULT_DIGITS
    try:
        return int(env)
    except ValueError:
        raise ConfigError(f"SPECBOX_DIGITS={env!r} is not an integer") from None


def _common(sp: argparse.ArgumentParser, bc_default="periodic", allow_both_bc=True,
            n_list=False) -> None:
    g = sp.add_argument_group("problem")
    g.add_argument("--k", help="quartic: V = -k x^2 + lambda x^4")
    g.add_argument("--lambda", dest="lam", help="quartic coupling")
    g.add_argument("--coeffs", help='general even polynomial, e.g. "2:-1,4:0.01"')
    b = sp.add_argument_group("basis")
    choices = ["periodic", "dirichlet"] + (["both"] if allow_both_bc else [])
    b.add_argument("--bc", choices=choices, default=bc_default)
    b.add_argument("--parity", choices=["even", "odd", "both"], default="both")
    b.add_argument("--n-basis", required=True,
                   help="oscillatory functions per parity block"
                   + (" (comma list allowed)" if n_list else ""))
    b.add_argument("--half-width", help="domain half-width L")
    b.add_argument("--optimize", action="store_true", help="choose L by the inflection/minimum rule")
    o = sp.add_argument_group("output")
    o.add_argument("--digits", type=int, default=None, help="working decimal digits (default 40)")
    o.add_argument("--levels", type=int, default=None,
                   help=f"eigenvalues to report (default {DEFAULT_LEVELS}, capped by the basis size)")
    o.add_argument("--format", dest="fmt", choices=["table", "csv", "json"], default="table")
    o.add_argument("--output", help="write to this file instead of stdout")
    o.add_argument("--out-digits", type=int, default=None,
                   help="significant digits printed (default 17 for csv, --digits otherwise)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="specbox",
        description="Trigonometric-basis Rayleigh-Ritz eigenvalues for even polynomial potentials.",
    )
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("spectrum", help="lowest eigenvalues with SD estimates")
    _common(sp)
    sp.add_argument("--n-ref", type=int, help="reference N for SD (default N+10)")
    sp.add_argument("--no-sd", action="store_true", help="skip the reference solve")
    sp.add_argument("--dump-matrix", metavar="PATH", help="also write the Hamiltonian matrix")

    sp = sub.add_parser("scan", help="E(L) curve with finite-difference derivatives")
    _common(sp)
    sp.add_argument("--level", type=int, default=0)
    sp.add_argument("--l-min")
    sp.add_argument("--l-max")
    sp.add_argument("--points", type=int, default=60)

    sp = sub.add_parser("optimize-l", help="locate the optimal half-width")
    _common(sp, n_list=True)
    sp.add_argument("--level", type=int, default=0)
    sp.add_argument("--l-min", help="override the scan lower bound")
    sp.add_argument("--l-max", help="override the scan upper bound")
    sp.add_argument("--points", type=int, default=60)
    sp.add_argument("--candidates", action="store_true", help="print the candidate table")

    sp = sub.add_parser("wavefunction", help="sample an eigenfunction on [-L, L]")
    _common(sp, allow_both_bc=False)
    sp.add_argument("--level", type=int, default=0)
    sp.add_argument("--points", type=int, default=DEFAULT_POINTS)
    sp.add_argument("--reference", choices=["none", "sho"], default="none")

    sp = sub.add_parser("compare-bc", help="periodic vs Dirichlet at their optimal L")
    _common(sp)
    sp.add_argument("--level", type=int, default=0)
    sp.add_argument("--reference", help="reference energy for SD (default: periodic N+10)")
    sp.add_argument("--n-ref", type=int)

    sp = sub.add_parser("scale", help="reduced coupling and scale factors")
    sp.add_argument("--k", required=True)
    sp.add_argument("--lambda", dest="lam", required=True)
    sp.add_argument("--digits", type=int, default=None)
    sp.add_argument("--out-digits", type=int, default=None)
    sp.add_argument("--format", dest="fmt", choices=["table", "csv", "json"], default="table")
    sp.add_argument("--output")

    sp = sub.add_parser("verify", help="cross-check against the independent oracles")
    _common(sp, allow_both_bc=False)
    sp.add_argument("--grid-n", type=int, default=2001)

    sp = sub.add_parser("dump-matrix", help="write the Hamiltonian matrix to a text file")
    _common(sp, allow_both_bc=False)
    sp.add_argument("path")
    return parser


def make_config(args) -> RunConfig:
    if args.command == "scale":
        pot = Potential.quartic(args.k, args.lam)
        digits = args.digits or _default_digits()
        return RunConfig(pot, "periodic", "both", [1], None, False, digits, 1, args.fmt,
                         args.output, args.out_digits or (17 if args.fmt == "csv" else digits))
    if args.coeffs and (args.k or args.lam):
        raise ConfigError("use either --coeffs or --k/--lambda")
    if args.coeffs:
        pot = Potential.parse(args.coeffs)
    elif args.k is not None and args.lam is not None:
        pot = Potential.quartic(args.k, args.lam)
    else:
        raise ConfigError("specify the potential with --k and --lambda, or --coeffs")
    try:
        n_basis = [int(v) for v in str(args.n_basis).split(",") if v.strip()]
    except ValueError:
        raise ConfigError(f"bad --n-basis {args.n_basis!r}") from None
    if not n_basis or min(n_basis) < 1:
        raise ConfigError("--n-basis must be positive")
    if len(n_basis) > 1 and args.command != "optimize-l":
        raise ConfigError("a list of --n-basis values is only accepted by optimize-l")
    needs_L = args.command in {"spectrum", "wavefunction", "dump-matrix", "verify"}
    if args.command == "compare-bc":
        if args.half_width is not None:
            raise ConfigError("compare-bc always optimizes L")
    elif args.command == "optimize-l":
        if args.half_width is not None:
            raise ConfigError("optimize-l computes L; drop --half-width")
    elif args.command == "scan":
        pass
    elif needs_L and (args.half_width is None) == (not args.optimize):
        raise ConfigError("give exactly one of --half-width and --optimize")
    if args.command == "verify" and args.optimize:
        raise ConfigError("verify needs an explicit --half-width")
    if args.command in {"scan", "optimize-l", "wavefunction"} and args.parity == "both":
        args.parity = "even"
    digits = args.digits or _default_digits()
    if args.levels is not None and args.levels < 1:
        raise ConfigError("--levels must be >= 1")
    if args.half_width is not None and not ctx_positive(args.half_width):
        raise ConfigError("--half-width must be a positive number")
    parities = [Parity.EVEN, Parity.ODD] if args.parity == "both" else [Parity(args.parity)]
    families = [Family.PERIODIC, Family.DIRICHLET] if args.bc == "both" else [Family(args.bc)]
    available = min(BasisSpec(f, par, n_basis[0], 1).size
                    for f in families for par in parities) * len(parities)
    levels = args.levels if args.levels is not None else min(DEFAULT_LEVELS, available)
    if args.command in {"spectrum", "verify"} and levels > available:
        raise ConfigError(f"--levels {levels} exceeds the {available} basis functions")
    out_digits = args.out_digits or (17 if args.fmt == "csv" else digits)
    return RunConfig(pot, args.bc, args.parity, n_basis, args.half_width, args.optimize,
                     digits, levels, args.fmt, args.output, out_digits)


def ctx_positive(text: str) -> bool:
    try:
        return float(text) > 0
    except ValueError:
        return False


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = make_config(args)
        if cfg.digits < 15:
            raise ConfigError("--digits must be >= 15")
        reports = COMMANDS[args.command](cfg, args)
        emit(reports, cfg)
    except (ConfigError, ValueError) as exc:
        print(f"specbox: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ConvergenceError, NoCandidateError) as exc:
        print(f"specbox: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    return 0


if __name__ == "__main__":
    sys.exit(main())
