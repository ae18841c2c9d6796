"""Independent, deliberately low-tech cross-checks.

Nothing on the production path imports this module.  The quadrature and
finite-difference routines here share no code with the closed-form
assembly or the Jacobi solver they are used to check.
"""
from __future__ import annotations

import math
import sys
from dataclasses import dataclass, replace
from typing import Callable, Optional

import mpmath
import numpy as np
from scipy.linalg import eigh_tridiagonal

from .potential import Potential


NOISE_ULPS = 64  # rounding floor of adaptive_simpson, in ulps of max|f| per unit length


class QuadratureError(RuntimeError):
    """Adaptive recursion hit max_depth; carries the best estimate so far."""

    def __init__(self, message: str, estimate, error):
        super().__init__(message)
        self.estimate = estimate
        self.error = error


@dataclass(frozen=True)
class QuadratureConfig:
    abs_tol: float = 1e-30
    rel_tol: float = 1e-13
    max_depth: int = 50
    digits: Optional[int] = None  # None: plain floats; otherwise mpmath at this many digits

    def __post_init__(self):
        if not (self.abs_tol > 0 and self.rel_tol > 0):
            raise ValueError("tolerances must be positive")
        if not 1 <= self.max_depth <= 60:
            raise ValueError("max_depth must lie in 1..60")


def adaptive_simpson(f: Callable, a, b, cfg: QuadratureConfig, panels: int = 1):
    """Integrate f over [a, b]; returns (estimate, error estimate).

    A piece is also accepted when its Simpson difference is at the level of
    rounding noise (NOISE_ULPS ulps of max|f| times its width), so a
    tolerance below working precision cannot force recursion to max_depth.

    The interval is first cut into ``panels`` equal pieces so that an
    oscillatory integrand cannot fool the first Simpson comparison.  Each
    accepted piece contributes the Richardson-corrected value
    S2 + (S2 - S1)/15.
    """
    width = (b - a) / panels
    # tolerance target is relative to the integral of |f| on a coarse grid
    scale = 0
    fmax = 0
    pieces = []
    for i in range(panels):
        lo = a + i * width
        hi = b if i == panels - 1 else a + (i + 1) * width
        mid = (lo + hi) / 2
        flo, fmid, fhi = f(lo), f(mid), f(hi)
        whole = (hi - lo) * (flo + 4 * fmid + fhi) / 6
        scale += (hi - lo) * (abs(flo) + 4 * abs(fmid) + abs(fhi)) / 6
        fmax = max(fmax, abs(flo), abs(fmid), abs(fhi))
        pieces.append((lo, hi, flo, fmid, fhi, whole))
    tol = max(cfg.abs_tol, cfg.rel_tol * scale)
    eps = sys.float_info.epsilon if cfg.digits is None else mpmath.mpf(10) ** -cfg.digits
    # rounding floor per unit length: near its zeros f is only known to
    # about eps * max|f| times the condition number of the trig argument
    floor = NOISE_ULPS * eps * fmax

    total = 0
    err_total = 0
    exhausted = False
    stack = [(lo, hi, flo, fmid, fhi, whole, tol / panels, 0)
             for lo, hi, flo, fmid, fhi, whole in pieces]
    while stack:
        lo, hi, flo, fmid, fhi, whole, tol_i, depth = stack.pop()
        mid = (lo + hi) / 2
        lm, rm = (lo + mid) / 2, (mid + hi) / 2
        flm, frm = f(lm), f(rm)
        left = (mid - lo) * (flo + 4 * flm + fmid) / 6
        right = (hi - mid) * (fmid + 4 * frm + fhi) / 6
        delta = left + right - whole
        noise = floor * (hi - lo)
        if abs(delta) <= max(15 * tol_i, noise) or depth >= cfg.max_depth:
            if depth >= cfg.max_depth and abs(delta) > max(15 * tol_i, noise):
                exhausted = True
            total += left + right + delta / 15
            err_total += abs(delta) / 15
        else:
            stack.append((lo, mid, flo, flm, fmid, left, tol_i / 2, depth + 1))
            stack.append((mid, hi, fmid, frm, fhi, right, tol_i / 2, depth + 1))
    if exhausted:
        raise QuadratureError("adaptive Simpson reached max_depth", total, err_total)
    return total, err_total


def quadrature_moment(j: int, n: int, L, cfg: QuadratureConfig = QuadratureConfig()):
    """Numerical integral of x**j cos(n pi x / L) over [-L, L] with an error estimate.

    Oscillation makes the integral much smaller than the integral of |f|, so
    the tolerance is tightened (up to 6 decades) until the error estimate is
    within ``rel_tol`` of the result itself.
    """
    if j < 0 or n < 0:
        raise ValueError("j and n must be non-negative")
    panels = max(8, 4 * (n + 1))
    if cfg.digits is None:
        L = float(L)
        k = n * math.pi / L
        f = lambda x: x**j * math.cos(k * x)  # noqa: E731
        return _tightened(f, -L, L, cfg, panels)
    with mpmath.workdps(cfg.digits):
        L = mpmath.mpf(str(L)) if not isinstance(L, (int, mpmath.mpf)) else mpmath.mpf(L)
        k = n * mpmath.pi / L
        return _tightened(lambda x: x**j * mpmath.cos(k * x), -L, L, cfg, panels)


def _tightened(f, a, b, cfg: QuadratureConfig, panels: int):
    est, err = adaptive_simpson(f, a, b, cfg, panels)
    floor = 1e-16 if cfg.digits is None else 10.0 ** (2 - cfg.digits)
    for _ in range(6):
        if err <= cfg.rel_tol * abs(est) or err <= cfg.abs_tol or cfg.rel_tol / 10 < floor:
            break
        cfg = replace(cfg, rel_tol=cfg.rel_tol / 10)
        est, err = adaptive_simpson(f, a, b, cfg, panels)
    return est, err


def gauss_legendre_rule(a, b, panels: int, digits: int, degree: int = 5):
    """Composite Gauss-Legendre nodes/weights on [a, b] as mpmath numbers.

    Each panel carries 3 * 2**(degree-1) nodes from mpmath's tabulation.
    """
    with mpmath.workdps(digits + 10):
        rule = mpmath.calculus.quadrature.GaussLegendre(mpmath.mp)
        base = rule.calc_nodes(degree, mpmath.mp.prec)
        a, b = mpmath.mpf(a), mpmath.mpf(b)
        h = (b - a) / panels
        nodes = []
        for i in range(panels):
            lo = a + i * h
            for x, w in base:
                nodes.append((lo + (x + 1) * h / 2, w * h / 2))
        return nodes


def fd_eigenvalues(p: Potential, L, grid_n: int = 2001, count: int = 3) -> np.ndarray:
    """Lowest ``count`` eigenvalues of -d2/dx2 + V on [-L, L] with psi(+-L) = 0.

    Three-point differences on ``grid_n`` points (endpoints included), then
    one Richardson step against the grid with 2*grid_n - 1 points:
    E = (4 E(h/2) - E(h)) / 3.  Double precision throughout.
    """
    if grid_n < 201 or grid_n % 2 == 0:
        raise ValueError("grid_n must be odd and >= 201")
    if not 1 <= count <= 10:
        raise ValueError("count must be in 1..10")
    L = float(L)
    coarse = _fd_levels(p, L, grid_n, count)
    fine = _fd_levels(p, L, 2 * grid_n - 1, count)
    return (4 * fine - coarse) / 3


def _fd_levels(p: Potential, L: float, points: int, count: int) -> np.ndarray:
    x = np.linspace(-L, L, points)[1:-1]
    h = 2 * L / (points - 1)
    v = np.zeros_like(x)
    for e, c in p.coeffs:
        v += float(c) * x**e
    diag = 2 / h**2 + v
    off = np.full(len(x) - 1, -1 / h**2)
    return eigh_tridiagonal(diag, off, eigvals_only=True, select="i",
                            select_range=(0, count - 1))
