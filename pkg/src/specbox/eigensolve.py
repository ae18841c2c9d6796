"""Cyclic Jacobi diagonalization of dense symmetric matrices at working precision."""
from __future__ import annotations

from dataclasses import dataclass
from decimal import Decimal
from typing import Optional

import gmpy2
import numpy as np
from gmpy2 import mpfr

from .matelem import SymMatrix
from .precision import PrecisionCtx

DEFAULT_MAX_SWEEPS = 100


class ConvergenceError(RuntimeError):
    """Jacobi sweeps exhausted before the off-diagonal norm met the tolerance."""

    def __init__(self, message: str, off_norm: float, sweeps: int):
        super().__init__(message)
        self.off_norm = off_norm
        self.sweeps = sweeps


@dataclass
class SpectrumResult:
    eigenvalues: list
    eigenvectors: Optional[list]  # unit coefficient vectors, one per eigenvalue
    residuals: Optional[list]  # max |D v - E v| per pair
    sweeps_used: int

    def __len__(self) -> int:
        return len(self.eigenvalues)


def _frobenius(a: np.ndarray) -> mpfr:
    return gmpy2.sqrt(sum((x * x for x in a.flat), mpfr(0)))


def _off_norm(a: np.ndarray) -> mpfr:
    n = a.shape[0]
    s = mpfr(0)
    for i in range(n):
        row = a[i]
        for j in range(i + 1, n):
            s += row[j] * row[j]
    return gmpy2.sqrt(2 * s)


def eig_sym(
    D: SymMatrix,
    ctx: PrecisionCtx,
    want_vectors: bool = False,
    max_sweeps: int = DEFAULT_MAX_SWEEPS,
) -> SpectrumResult:
    """All eigenvalues (ascending) and optionally eigenvectors of ``D``.

    Rotations whose off-diagonal element is already below
    ``eig_tol * min(1, ||D||_F) / n`` are skipped; iteration stops once
    the off-diagonal Frobenius norm is at most ``eig_tol * min(1, ||D||_F)``.
    The absolute cap keeps every residual within ``eig_tol * (1 + |E|)``
    even when ``||D||_F`` is large; it costs about one extra sweep.
    """
    n = D.order
    with ctx.local():
        a = np.array(D.entries, dtype=object, copy=True)
        for i in range(n):
            for j in range(n):
                a[i, j] = mpfr(a[i, j])
        norm = _frobenius(a)
        target = ctx.eig_tol * min(norm, mpfr(1))
        skip = target / n
        # row i of vt is the i-th column of the accumulated rotation
        vt = None
        if want_vectors:
            vt = np.empty((n, n), dtype=object)
            vt[:] = mpfr(0)
            for i in range(n):
                vt[i, i] = mpfr(1)
        sweeps = 0
        off = _off_norm(a)
        while off > target:
            if sweeps >= max_sweeps:
                raise ConvergenceError(
                    f"Jacobi did not converge in {max_sweeps} sweeps "
                    f"(off-diagonal norm {float(off):.3e}, target {float(target):.3e})",
                    float(off),
                    sweeps,
                )
            for p in range(n - 1):
                for q in range(p + 1, n):
                    apq = a[p, q]
                    if abs(apq) <= skip:
                        continue
                    _rotate(a, vt, p, q, apq)
            sweeps += 1
            off = _off_norm(a)

        evals = [a[i, i] for i in range(n)]
        order = sorted(range(n), key=lambda i: evals[i])
        eigenvalues = [evals[i] for i in order]
        eigenvectors = residuals = None
        if want_vectors:
            eigenvectors = []
            for i in order:
                v = vt[i].copy()
                nrm = gmpy2.sqrt(sum((x * x for x in v), mpfr(0)))
                eigenvectors.append(v / nrm)
            residuals = [
                _residual(D.entries, v, e) for v, e in zip(eigenvectors, eigenvalues)
            ]
    return SpectrumResult(eigenvalues, eigenvectors, residuals, sweeps)


def _rotate(a: np.ndarray, vt, p: int, q: int, apq) -> None:
    app, aqq = a[p, p], a[q, q]
    theta = (aqq - app) / (2 * apq)
    t = 1 / (abs(theta) + gmpy2.sqrt(theta * theta + 1))
    if theta < 0:
        t = -t
    c = 1 / gmpy2.sqrt(t * t + 1)
    s = t * c
    rp = a[p].copy()
    rq = a[q].copy()
    newp = c * rp - s * rq
    newq = s * rp + c * rq
    newp[p] = app - t * apq
    newq[q] = aqq + t * apq
    newp[q] = newq[p] = mpfr(0)
    a[p] = newp
    a[q] = newq
    a[:, p] = newp
    a[:, q] = newq
    if vt is not None:
        vp = vt[p].copy()
        vq = vt[q].copy()
        vt[p] = c * vp - s * vq
        vt[q] = s * vp + c * vq


def _residual(entries: np.ndarray, v: np.ndarray, e) -> mpfr:
    dv = entries.dot(v)
    return max(abs(x) for x in (dv - e * v))


def _decimal_digits(x) -> tuple[int, str, int]:
    """(sign, significant digit string, decimal exponent of the first digit)."""
    if isinstance(x, type(mpfr(0))):
        if x == 0:
            return 0, "0", 0
        mant, exp, _ = x.digits(10)
        sign = -1 if mant.startswith("-") else 1
        return sign, mant.lstrip("-").rstrip("0") or "0", exp - 1
    d = Decimal(repr(x) if isinstance(x, float) else str(x))
    if d == 0:
        return 0, "0", 0
    sign = -1 if d < 0 else 1
    t = abs(d).normalize().as_tuple()
    digits = "".join(map(str, t.digits))
    return sign, digits, len(digits) - 1 + t.exponent


def estimate_significant_digits(value, reference) -> int:
    """Number of leading significant decimal digits shared by two values.

    Values are compared as decimal digit strings: strings and floats by their
    literal/shortest form, ``mpfr`` by all of its digits.  Opposite signs or
    different decimal exponents give 0; identical values give the length of
    the longer digit string.
    """
    sa, da, ea = _decimal_digits(value)
    sb, db, eb = _decimal_digits(reference)
    if sa != sb or ea != eb or sa == 0:
        return 0
    width = max(len(da), len(db))
    da, db = da.ljust(width, "0"), db.ljust(width, "0")
    count = 0
    for x, y in zip(da, db):
        if x != y:
            break
        count += 1
    return count
