"""Trigonometric basis families on [-L, L].

Four families, all orthonormal on [-L, L]:

==============  ===========================  ==========
family/parity   phi_m(x)                     m
==============  ===========================  ==========
periodic/even   g_m cos(m pi x / L) / sqrt(L)   0 .. N
periodic/odd    sin(m pi x / L) / sqrt(L)       1 .. N
dirichlet/even  cos((m + 1/2) pi x / L) / sqrt(L)  0 .. N-1
dirichlet/odd   sin(m pi x / L) / sqrt(L)       1 .. N
==============  ===========================  ==========

with g_0 = 2**-1/2 and g_m = 1 otherwise.  N counts the oscillatory
functions of a block, so the periodic even block carries the constant
function on top of its N cosines.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass

import gmpy2
from gmpy2 import mpfr

from .precision import PrecisionCtx


class Family(enum.Enum):
    PERIODIC = "periodic"
    DIRICHLET = "dirichlet"


class Parity(enum.Enum):
    EVEN = "even"
    ODD = "odd"


@dataclass(frozen=True)
class BasisSpec:
    family: Family
    parity: Parity
    n_basis: int
    half_width: mpfr

    def __post_init__(self):
        if not isinstance(self.family, Family):
            object.__setattr__(self, "family", Family(self.family))
        if not isinstance(self.parity, Parity):
            object.__setattr__(self, "parity", Parity(self.parity))
        if self.n_basis < 1:
            raise ValueError("n_basis must be >= 1")
        if not float(self.half_width) > 0:
            raise ValueError("half_width must be positive")

    @property
    def indices(self) -> range:
        if self.family is Family.PERIODIC and self.parity is Parity.EVEN:
            return range(0, self.n_basis + 1)
        if self.parity is Parity.EVEN:
            return range(0, self.n_basis)
        return range(1, self.n_basis + 1)

    @property
    def size(self) -> int:
        """Matrix order of the block (number of basis functions)."""
        return len(self.indices)

    def with_half_width(self, half_width) -> "BasisSpec":
        return BasisSpec(self.family, self.parity, self.n_basis, half_width)

    @property
    def half_shifted(self) -> bool:
        """True for the dirichlet/even family, whose wave numbers are (m + 1/2) pi / L."""
        return self.family is Family.DIRICHLET and self.parity is Parity.EVEN


def _check_index(spec: BasisSpec, m: int) -> None:
    if m not in spec.indices:
        r = spec.indices
        raise IndexError(
            f"index {m} outside {r.start}..{r.stop - 1} for "
            f"{spec.family.value}/{spec.parity.value} with N={spec.n_basis}"
        )


def wave_number(spec: BasisSpec, m: int, ctx: PrecisionCtx) -> mpfr:
    with ctx.local():
        if spec.half_shifted:
            return (2 * m + 1) * ctx.pi / (2 * mpfr(spec.half_width))
        return m * ctx.pi / mpfr(spec.half_width)


def weight(spec: BasisSpec, m: int, ctx: PrecisionCtx) -> mpfr:
    """Normalization factor g_m (only the periodic constant function is special)."""
    with ctx.local():
        if spec.family is Family.PERIODIC and spec.parity is Parity.EVEN and m == 0:
            return 1 / gmpy2.sqrt(mpfr(2))
        return mpfr(1)


def basis_value(spec: BasisSpec, m: int, x, ctx: PrecisionCtx) -> mpfr:
    _check_index(spec, m)
    with ctx.local():
        L = mpfr(spec.half_width)
        x = mpfr(x)
        if abs(x) > L * (1 + ctx.eig_tol):
            raise ValueError("x outside [-L, L]")
        arg = wave_number(spec, m, ctx) * x
        trig = gmpy2.cos(arg) if spec.parity is Parity.EVEN else gmpy2.sin(arg)
        if abs(x) == L and (spec.half_shifted or spec.parity is Parity.ODD):
            # cos((m + 1/2) pi) and sin(m pi) are exactly zero
            trig = mpfr(0)
        return weight(spec, m, ctx) * trig / gmpy2.sqrt(L)


def kinetic_eigenvalue(spec: BasisSpec, m: int, ctx: PrecisionCtx) -> mpfr:
    """-d^2/dx^2 acting on phi_m gives (wave number)^2 phi_m."""
    _check_index(spec, m)
    with ctx.local():
        k = wave_number(spec, m, ctx)
        return k * k
