"""Choice of the domain half-width L from the shape of E_level(L).

Periodic bases: E(L) climbs from 0 at L = 0 onto a semi-flat plateau; the
optimum is the inflection point (d2E/dL2 = 0) on that plateau, found as the
flattest curvature sign change beyond the classical turning point.
Dirichlet bases: E(L) has a genuine minimum, located by golden section.

Every length in the procedure is proportional to an intrinsic length of the
potential, so the result transforms exactly under x -> k**(1/4) x.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import gmpy2
from gmpy2 import mpfr

from .basis import BasisSpec, Family, Parity
from .eigensolve import ConvergenceError, eig_sym
from .matelem import hamiltonian_matrix
from .potential import Potential, evaluate, outer_turning_point, stationary_points
from .precision import PrecisionCtx

log = logging.getLogger(__name__)

DEFAULT_POINTS = 60
DEFAULT_LOW_FACTOR = "1.05"
DEFAULT_HIGH_FACTOR = 4
DEFAULT_XTOL = "1e-6"


class NoCandidateError(RuntimeError):
    """The scan interval holds no inflection point / minimum."""

    def __init__(self, message: str, interval):
        super().__init__(message)
        self.interval = interval


@dataclass
class Candidate:
    L: mpfr
    kind: str  # "inflection" or "minimum"
    abs_d1: mpfr
    grid_index: int  # left grid point of the bracketing pair


@dataclass
class ScanResult:
    L_grid: list
    energies: list
    d1: list  # central differences at L_grid[1:-1]
    d2: list
    candidates: list = field(default_factory=list)
    chosen: Optional[mpfr] = None
    energy_at_chosen: Optional[mpfr] = None
    method: str = ""
    turning_point: Optional[mpfr] = None

    @property
    def interior(self) -> list:
        return self.L_grid[1:-1]


def level_energy(
    p: Potential, spec: BasisSpec, level: int, ctx: PrecisionCtx
) -> mpfr:
    """E_level of the block described by ``spec``."""
    if level >= spec.size:
        raise ValueError(f"level {level} needs a block larger than {spec.size}")
    try:
        return eig_sym(hamiltonian_matrix(p, spec, ctx), ctx).eigenvalues[level]
    except ConvergenceError as exc:
        raise ConvergenceError(
            f"{exc} at L = {float(spec.half_width):.10g}", exc.off_norm, exc.sweeps
        ) from exc


def _grid(lo, hi, points: int, ctx: PrecisionCtx) -> list:
    with ctx.local():
        lo, hi = mpfr(lo), mpfr(hi)
        step = (hi - lo) / (points - 1)
        return [lo + i * step for i in range(points - 1)] + [hi]


def scan_energy(
    p: Potential,
    family,
    parity,
    n_basis: int,
    level: int,
    L_range: Sequence,
    points: int,
    ctx: PrecisionCtx,
    energy_fn: Optional[Callable] = None,
) -> ScanResult:
    """E_level(L) on a uniform grid with central-difference d1 and d2."""
    lo, hi = (ctx.mpf(v) for v in L_range)
    if not lo > 0 or not hi > lo:
        raise ValueError("need 0 < L_min < L_max")
    if points < 5:
        raise ValueError("points must be >= 5")
    proto = BasisSpec(family, parity, n_basis, ctx.mpf(hi))
    if level >= proto.size:
        raise ValueError(f"level {level} >= block size {proto.size}")
    grid = _grid(lo, hi, points, ctx)
    energy_fn = energy_fn or (lambda L: level_energy(p, proto.with_half_width(L), level, ctx))
    energies = [energy_fn(L) for L in grid]
    with ctx.local():
        step = grid[1] - grid[0]
        d1 = [(energies[i + 1] - energies[i - 1]) / (2 * step) for i in range(1, points - 1)]
        d2 = [
            (energies[i + 1] - 2 * energies[i] + energies[i - 1]) / (step * step)
            for i in range(1, points - 1)
        ]
    return ScanResult(grid, energies, d1, d2)


def harmonic_estimate(p: Potential, level: int, ctx: PrecisionCtx) -> mpfr:
    """Harmonic approximation V_min + (2 level + 1) sqrt(V''(x_min) / 2).

    Only used to seed the coarse solve; it scales exactly like the energy.
    """
    with ctx.local():
        best = None
        for x in stationary_points(p, ctx):
            v = evaluate(p, x, ctx)
            if best is None or v < best[0]:
                best = (v, x)
        vmin, xmin = best
        curv = sum(
            (e * (e - 1) * ctx.mpf(c) * xmin ** (e - 2) for e, c in p.coeffs), mpfr(0)
        )
        if curv <= 0:
            # flat bottom (pure x^2j, j > 1); fall back to the quartic-like scale
            curv = mpfr(2)
        return vmin + (2 * level + 1) * gmpy2.sqrt(curv / 2)


def default_scan_range(
    p: Potential, spec: BasisSpec, level: int, ctx: PrecisionCtx
) -> tuple[mpfr, mpfr, mpfr]:
    """(L_c, lower, upper) for the default scan [1.05 L_c, 4 L_c].

    L_c is the outer turning point at a coarse estimate of E_level obtained
    from one solve at 4x the turning point of the harmonic estimate.
    """
    with ctx.local():
        seed = outer_turning_point(p, harmonic_estimate(p, level, ctx), ctx)
        coarse = level_energy(p, spec.with_half_width(DEFAULT_HIGH_FACTOR * seed), level, ctx)
        L_c = outer_turning_point(p, coarse, ctx)
        return L_c, mpfr(DEFAULT_LOW_FACTOR) * L_c, DEFAULT_HIGH_FACTOR * L_c


def curvature(energy_fn: Callable, L, ctx: PrecisionCtx) -> tuple[mpfr, mpfr]:
    """Five-point central (dE/dL, d2E/dL2) with step deriv_h * L."""
    with ctx.local():
        L = mpfr(L)
        h = ctx.deriv_h * L
        em2, em1, e0, ep1, ep2 = (energy_fn(L + k * h) for k in (-2, -1, 0, 1, 2))
        d1 = (em2 - 8 * em1 + 8 * ep1 - ep2) / (12 * h)
        d2 = (-em2 + 16 * em1 - 30 * e0 + 16 * ep1 - ep2) / (12 * h * h)
        return d1, d2


@dataclass
class OptimumResult:
    L: mpfr
    energy: mpfr
    scan: ScanResult
    bracket: tuple
    evaluations: int


def find_optimal_L(
    p: Potential,
    family,
    parity,
    n_basis: int,
    ctx: PrecisionCtx,
    level: int = 0,
    L_range: Optional[Sequence] = None,
    points: int = DEFAULT_POINTS,
    xtol=DEFAULT_XTOL,
) -> OptimumResult:
    """Locate L_opt for one parity block.

    ``xtol`` is relative: refinement stops when the bracket is narrower than
    ``xtol * L``.
    """
    proto = BasisSpec(family, parity, n_basis, ctx.mpf(1))
    cache: dict = {}

    def energy(L):
        key = L.as_integer_ratio()
        if key not in cache:
            cache[key] = level_energy(p, proto.with_half_width(L), level, ctx)
        return cache[key]

    L_c = None
    if L_range is None:
        L_c, lo, hi = default_scan_range(p, proto, level, ctx)
    else:
        lo, hi = (ctx.mpf(v) for v in L_range)
    scan = scan_energy(p, family, parity, n_basis, level, (lo, hi), points, ctx, energy)
    scan.turning_point = L_c
    with ctx.local():
        xtol = ctx.mpf(xtol)
        if proto.family is Family.PERIODIC:
            res = _refine_inflection(scan, energy, xtol, ctx)
        else:
            res = _refine_minimum(scan, energy, xtol, ctx)
    res.evaluations = len(cache)
    return res


def inflection_candidates(scan: ScanResult) -> list[Candidate]:
    """Curvature sign changes from concave to convex (local minima of the slope).

    The opposite crossing on the rising flank at small L is not a plateau and
    is never a candidate.
    """
    out = []
    d1, d2 = scan.d1, scan.d2
    for i in range(len(d2) - 1):
        if d2[i] <= 0 < d2[i + 1]:
            # interpolate the crossing linearly between interior points i and i+1
            La, Lb = scan.L_grid[i + 1], scan.L_grid[i + 2]
            w = d2[i] / (d2[i] - d2[i + 1]) if d2[i] != d2[i + 1] else mpfr(0.5)
            L = La + w * (Lb - La)
            slope = d1[i] + w * (d1[i + 1] - d1[i])
            out.append(Candidate(L, "inflection", abs(slope), i + 1))
    return out


def _refine_inflection(scan: ScanResult, energy, xtol, ctx) -> OptimumResult:
    cands = inflection_candidates(scan)
    scan.candidates = cands
    interval = (scan.L_grid[0], scan.L_grid[-1])
    if not cands:
        raise NoCandidateError(
            f"no curvature sign change in L = [{float(interval[0]):.6g}, "
            f"{float(interval[1]):.6g}]; widen the scan",
            interval,
        )
    best = min(cands, key=lambda c: c.abs_d1)

    def d2(L):
        return curvature(energy, L, ctx)[1]

    grid = scan.L_grid
    i = best.grid_index
    a, b = grid[i], grid[i + 1]
    fa, fb = d2(a), d2(b)
    widen = 1
    while (fa < 0) == (fb < 0) and fa != 0 and fb != 0:
        # fine-stencil curvature disagrees with the coarse grid; widen symmetrically
        if widen > 2 or i - widen < 0 or i + 1 + widen >= len(grid):
            raise NoCandidateError(
                f"curvature sign change near L = {float(best.L):.6g} not confirmed "
                "by the refinement stencil",
                interval,
            )
        a, b = grid[i - widen], grid[i + 1 + widen]
        fa, fb = d2(a), d2(b)
        widen += 1
    a, b, fa, fb = _bracket_root(d2, a, b, fa, fb, xtol)
    # final point: false-position estimate inside the last bracket
    L_opt = (a + b) / 2 if fa == fb else a - fa * (b - a) / (fb - fa)
    if not a <= L_opt <= b:
        L_opt = (a + b) / 2
    scan.chosen = L_opt
    scan.energy_at_chosen = energy(L_opt)
    scan.method = "inflection"
    return OptimumResult(L_opt, scan.energy_at_chosen, scan, (a, b), 0)


def _bracket_root(f, a, b, fa, fb, xtol):
    """Brent's method on a sign change of f in [a, b].

    Returns a bracket (lo, hi, f(lo), f(hi)) with hi - lo <= xtol * |midpoint|,
    or a degenerate bracket at an exact zero.  Inverse quadratic / secant
    steps are accepted only while they shrink the bracket fast enough;
    otherwise Brent falls back to bisection, so the width bound is reached.
    """
    if fa == 0:
        return a, a, fa, fa
    if fb == 0:
        return b, b, fb, fb
    c, fc = a, fa
    d = e = b - a
    while True:
        if (fb < 0) == (fc < 0):
            c, fc = a, fa
            d = e = b - a
        if abs(fc) < abs(fb):
            a, b, c = b, c, b
            fa, fb, fc = fb, fc, fb
        tol = xtol * abs(b) / 4
        m = (c - b) / 2
        if abs(m) <= tol or fb == 0:
            lo, hi = (b, c) if b < c else (c, b)
            flo, fhi = (fb, fc) if b < c else (fc, fb)
            if fb == 0:
                return b, b, fb, fb
            return lo, hi, flo, fhi
        if abs(e) >= tol and abs(fa) > abs(fb):
            s = fb / fa
            if a == c:
                p = 2 * m * s
                q = 1 - s
            else:
                q = fa / fc
                r = fb / fc
                p = s * (2 * m * q * (q - r) - (b - a) * (r - 1))
                q = (q - 1) * (r - 1) * (s - 1)
            if p > 0:
                q = -q
            else:
                p = -p
            if 2 * p < min(3 * m * q - abs(tol * q), abs(e * q)):
                e, d = d, p / q
            else:
                d = e = m
        else:
            d = e = m
        a, fa = b, fb
        if abs(d) > tol:
            b = b + d
        else:
            b = b + (tol if m > 0 else -tol)
        fb = f(b)


def _refine_minimum(scan: ScanResult, energy, xtol, ctx) -> OptimumResult:
    E = scan.energies
    interval = (scan.L_grid[0], scan.L_grid[-1])
    mins = [
        i for i in range(1, len(E) - 1) if E[i] <= E[i - 1] and E[i] <= E[i + 1]
    ]
    scan.candidates = [
        Candidate(scan.L_grid[i], "minimum", abs(scan.d1[i - 1]), i) for i in mins
    ]
    if not mins:
        raise NoCandidateError(
            f"E(L) has no interior minimum in L = [{float(interval[0]):.6g}, "
            f"{float(interval[1]):.6g}]; widen the scan",
            interval,
        )
    i = min(mins, key=lambda j: E[j])
    a, b = scan.L_grid[i - 1], scan.L_grid[i + 1]
    invphi = (gmpy2.sqrt(mpfr(5)) - 1) / 2
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = energy(c), energy(d)
    while b - a > xtol * abs((a + b) / 2):
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = energy(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = energy(d)
    L_opt = (a + b) / 2
    scan.chosen = L_opt
    scan.energy_at_chosen = energy(L_opt)
    scan.method = "minimum"
    return OptimumResult(L_opt, scan.energy_at_chosen, scan, (a, b), 0)
