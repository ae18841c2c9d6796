"""Eigenfunctions rebuilt from basis coefficients, sampled on uniform grids."""
from __future__ import annotations

from dataclasses import dataclass

import gmpy2
from gmpy2 import mpfr

from .basis import BasisSpec, Parity, basis_value, wave_number, weight
from .precision import PrecisionCtx

DEFAULT_POINTS = 2001


@dataclass
class WavefunctionSamples:
    x_grid: list
    values: list
    level: int
    spec: BasisSpec
    sign_convention: str  # "psi(0)>0", "psi'(0)>0" or "none"


def reconstruct(coeffs, spec: BasisSpec, x, ctx: PrecisionCtx) -> mpfr:
    """Psi(x) = sum_m A_m phi_m(x)."""
    if len(coeffs) != spec.size:
        raise ValueError(f"{len(coeffs)} coefficients for a block of size {spec.size}")
    with ctx.local():
        return sum(
            (a * basis_value(spec, m, x, ctx) for a, m in zip(coeffs, spec.indices)),
            mpfr(0),
        )


def slope_at_origin(coeffs, spec: BasisSpec, ctx: PrecisionCtx) -> mpfr:
    """Psi'(0); nonzero only for odd blocks."""
    if spec.parity is Parity.EVEN:
        return mpfr(0)
    with ctx.local():
        root = gmpy2.sqrt(mpfr(spec.half_width))
        return sum(
            (a * weight(spec, m, ctx) * wave_number(spec, m, ctx) / root
             for a, m in zip(coeffs, spec.indices)),
            mpfr(0),
        )


def normalize_sign(coeffs, spec: BasisSpec, ctx: PrecisionCtx):
    """Flip the overall sign so Psi(0) > 0 (even) or Psi'(0) > 0 (odd)."""
    if spec.parity is Parity.EVEN:
        ref = reconstruct(coeffs, spec, 0, ctx)
        label = "psi(0)>0"
    else:
        ref = slope_at_origin(coeffs, spec, ctx)
        label = "psi'(0)>0"
    if ref < 0:
        with ctx.local():
            coeffs = [-a for a in coeffs]
    return list(coeffs), label


def uniform_grid(L, points: int, ctx: PrecisionCtx) -> list:
    if points < 2:
        raise ValueError("need at least 2 grid points")
    with ctx.local():
        L = mpfr(L)
        step = 2 * L / (points - 1)
        half = [-L + i * step for i in range((points + 1) // 2)]
        if points % 2:
            half[-1] = mpfr(0)
        # exact mirror image so x and -x are both grid points
        return half + [-x for x in reversed(half[: points // 2])]


def sample(coeffs, spec: BasisSpec, ctx: PrecisionCtx, level: int = 0,
           points: int = DEFAULT_POINTS, x_grid=None) -> WavefunctionSamples:
    """Sign-normalized samples of the eigenfunction on [-L, L]."""
    coeffs, label = normalize_sign(coeffs, spec, ctx)
    grid = x_grid if x_grid is not None else uniform_grid(spec.half_width, points, ctx)
    values = [reconstruct(coeffs, spec, x, ctx) for x in grid]
    return WavefunctionSamples(grid, values, level, spec, label)


def sho_ground_state(x, ctx: PrecisionCtx) -> mpfr:
    """pi**(-1/4) exp(-x**2 / 2), ground state of -d2/dx2 + x**2 (E = 1)."""
    with ctx.local():
        x = mpfr(x)
        return gmpy2.exp(-x * x / 2) / gmpy2.root(ctx.pi, 4)


def reference_samples(fn, like: WavefunctionSamples, ctx: PrecisionCtx) -> WavefunctionSamples:
    return WavefunctionSamples(
        list(like.x_grid), [fn(x, ctx) for x in like.x_grid], like.level, like.spec, "reference"
    )


def trapezoid(xs, ys, ctx: PrecisionCtx) -> mpfr:
    with ctx.local():
        return sum(
            ((xs[i + 1] - xs[i]) * (ys[i] + ys[i + 1]) / 2 for i in range(len(xs) - 1)),
            mpfr(0),
        )


def norm_squared(w: WavefunctionSamples, ctx: PrecisionCtx) -> mpfr:
    with ctx.local():
        return trapezoid(w.x_grid, [v * v for v in w.values], ctx)


def l2_difference(a: WavefunctionSamples, b: WavefunctionSamples,
                  ctx: PrecisionCtx) -> tuple[list, mpfr]:
    """Pointwise |a - b|**2 and its trapezoid integral."""
    if len(a.x_grid) != len(b.x_grid) or any(x != y for x, y in zip(a.x_grid, b.x_grid)):
        raise ValueError("wavefunctions sampled on different grids")
    with ctx.local():
        curve = [(u - v) ** 2 for u, v in zip(a.values, b.values)]
        return curve, trapezoid(a.x_grid, curve, ctx)
