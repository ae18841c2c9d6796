"""Closed-form Hamiltonian matrices in the trigonometric bases.

Every potential matrix element reduces, by product-to-sum, to the cosine
moments

    T(j, n, L) = integral_{-L}^{L} x**j cos(n pi x / L) dx,

which obey an exact two-term recurrence in j.  No quadrature is used on
the production path.
"""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np
from gmpy2 import mpfr

from .basis import BasisSpec, Family, Parity, kinetic_eigenvalue, weight
from .potential import Potential
from .precision import PrecisionCtx, to_decimal_string


@dataclass
class SymMatrix:
    """Dense symmetric matrix of ``mpfr`` entries (object ndarray).

    Both triangles are stored; builders write each value once and mirror
    it, so ``entries[i, j] is entries[j, i]``.
    """

    entries: np.ndarray

    @property
    def order(self) -> int:
        return self.entries.shape[0]

    def is_symmetric(self) -> bool:
        a = self.entries
        n = self.order
        return all(a[i, j] == a[j, i] for i in range(n) for j in range(i + 1, n))

    def to_float(self) -> np.ndarray:
        return np.vectorize(float, otypes=[float])(self.entries)

    def dump(self, path, digits: int) -> None:
        """Write ``N`` then the upper triangle, row-major, one value per line."""
        n = self.order
        lines = [str(n)]
        for i in range(n):
            for j in range(i, n):
                lines.append(to_decimal_string(self.entries[i, j], digits))
        Path(path).write_text("\n".join(lines) + "\n", newline="\n")


def load_matrix(path, ctx: PrecisionCtx) -> SymMatrix:
    lines = Path(path).read_text().split()
    n = int(lines[0])
    vals = iter(lines[1:])
    a = np.empty((n, n), dtype=object)
    for i in range(n):
        for j in range(i, n):
            a[i, j] = a[j, i] = ctx.mpf(next(vals))
    return SymMatrix(a)


def cosine_moment(j: int, n: int, L, ctx: PrecisionCtx) -> mpfr:
    """T(j, n, L) for even j >= 0 and n >= 0."""
    if j < 0 or j % 2:
        raise ValueError(f"cosine_moment needs an even j >= 0, got {j}")
    if n < 0:
        raise ValueError("n must be >= 0")
    with ctx.local():
        return _moment_column(j, n, mpfr(L), ctx)[j // 2]


def _moment_column(jmax: int, n: int, L: mpfr, ctx: PrecisionCtx) -> list[mpfr]:
    """[T(0, n), T(2, n), ..., T(jmax, n)]; caller holds ``ctx.local()``."""
    out = []
    if n == 0:
        p = L  # L**(j+1)
        for j in range(0, jmax + 1, 2):
            out.append(2 * p / (j + 1))
            p *= L * L
        return out
    a2 = (n * ctx.pi / L) ** 2
    sign = -1 if n % 2 else 1
    prev = mpfr(0)
    out.append(prev)
    p = 1 / L  # L**(j-1) at j = 0
    for j in range(2, jmax + 1, 2):
        p *= L * L
        prev = (2 * j * sign * p - j * (j - 1) * prev) / a2
        out.append(prev)
    return out


def potential_moments(p: Potential, nmax: int, L, ctx: PrecisionCtx) -> list[mpfr]:
    """P(n) = sum_j c_j T(j, n, L) for n = 0 .. nmax.

    This is the moment table of one assembly; each entry of the potential
    matrix is a signed sum of two of its values.
    """
    coeffs = p.mp_coeffs(ctx)
    jmax = p.degree
    with ctx.local():
        L = mpfr(L)
        table = []
        for n in range(nmax + 1):
            col = _moment_column(jmax, n, L, ctx)
            table.append(sum((c * col[e // 2] for e, c in coeffs), mpfr(0)))
        return table


def potential_matrix(p: Potential, spec: BasisSpec, ctx: PrecisionCtx) -> SymMatrix:
    """C[m, m'] = integral of phi_m V phi_m' over [-L, L]."""
    idx = list(spec.indices)
    size = len(idx)
    shift = 1 if spec.half_shifted else 0
    minus = spec.parity is Parity.ODD
    nmax = 2 * idx[-1] + shift
    P = potential_moments(p, nmax, spec.half_width, ctx)
    w = [weight(spec, m, ctx) for m in idx]
    a = np.empty((size, size), dtype=object)
    with ctx.local():
        half_inv_L = 1 / (2 * mpfr(spec.half_width))
        for r, m in enumerate(idx):
            for c in range(r, size):
                mp = idx[c]
                s = P[m + mp + shift]
                val = P[mp - m] - s if minus else P[mp - m] + s
                val = val * half_inv_L
                if spec.family is Family.PERIODIC and not minus and (m == 0 or mp == 0):
                    val = val * w[r] * w[c]
                a[r, c] = a[c, r] = val
    return SymMatrix(a)


def hamiltonian_matrix(p: Potential, spec: BasisSpec, ctx: PrecisionCtx) -> SymMatrix:
    """D = diag(kinetic) + C; its eigenpairs approximate those of -d2/dx2 + V."""
    mat = potential_matrix(p, spec, ctx)
    a = mat.entries
    with ctx.local():
        for r, m in enumerate(spec.indices):
            a[r, r] = a[r, r] + kinetic_eigenvalue(spec, m, ctx)
    return mat
