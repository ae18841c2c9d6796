"""Even polynomial potentials, well geometry and the quartic scaling map."""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Union

import gmpy2
import numpy as np
from gmpy2 import mpfr

from .precision import PrecisionCtx

Coefficient = Union[int, str, Fraction]


def _exact(value) -> Fraction:
    """Parse a coefficient into an exact rational.

    Decimal strings keep their literal value (``"0.01"`` is exactly 1/100).
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, float):
        # go through repr so 0.01 means 1/100, not the binary double
        return Fraction(repr(value))
    return Fraction(str(value).strip())


@dataclass(frozen=True)
class Potential:
    """V(x) = sum_j c_2j x**(2j) with exact rational coefficients.

    ``coeffs`` is a tuple of ``(exponent, coefficient)`` pairs sorted by
    exponent.  Exponents are even and >= 2; the leading coefficient is
    positive so the spectrum is bounded below.
    """

    coeffs: tuple[tuple[int, Fraction], ...]

    def __post_init__(self):
        if not self.coeffs:
            raise ValueError("potential needs at least one term")
        exps = [e for e, _ in self.coeffs]
        if exps != sorted(set(exps)):
            raise ValueError("exponents must be distinct and sorted")
        for e, _ in self.coeffs:
            if e < 2 or e % 2:
                raise ValueError(
                    f"exponent {e} not allowed: only even exponents >= 2 "
                    "(the method assumes V(x) = V(-x) and no constant term)"
                )
        if self.coeffs[-1][1] <= 0:
            raise ValueError("leading coefficient must be positive")

    @classmethod
    def from_coeffs(cls, coeffs: Mapping[int, Coefficient]) -> "Potential":
        items = {int(e): _exact(c) for e, c in coeffs.items()}
        items = {e: c for e, c in items.items() if c != 0}
        return cls(tuple(sorted(items.items())))

    @classmethod
    def quartic(cls, k: Coefficient, lam: Coefficient) -> "Potential":
        """The double well ``-k x^2 + lam x^4`` (k < 0 gives a single well)."""
        return cls.from_coeffs({2: -_exact(k), 4: lam})

    @classmethod
    def parse(cls, text: str) -> "Potential":
        """Parse ``"2:-1,4:0.01"`` style exponent:coefficient lists."""
        out: dict[int, Fraction] = {}
        for part in text.split(","):
            part = part.strip()
            if not part:
                continue
            try:
                e, c = part.split(":")
                out[int(e)] = out.get(int(e), Fraction(0)) + _exact(c)
            except ValueError as exc:
                raise ValueError(f"bad coefficient term {part!r}") from exc
        return cls.from_coeffs(out)

    @property
    def degree(self) -> int:
        return self.coeffs[-1][0]

    def coefficient(self, exponent: int) -> Fraction:
        return dict(self.coeffs).get(exponent, Fraction(0))

    def mp_coeffs(self, ctx: PrecisionCtx) -> list[tuple[int, mpfr]]:
        return [(e, ctx.mpf(c)) for e, c in self.coeffs]

    def __str__(self) -> str:
        return " + ".join(f"({c})*x^{e}" for e, c in self.coeffs)


def evaluate(p: Potential, x, ctx: PrecisionCtx) -> mpfr:
    """V(x) by Horner's rule in x**2, so V(x) == V(-x) bit for bit."""
    with ctx.local():
        x2 = mpfr(x) * mpfr(x)
        acc = mpfr(0)
        for e in range(p.degree, 0, -2):
            acc = acc * x2 + ctx.mpf(p.coefficient(e))
        return acc * x2


def derivative(p: Potential, x, ctx: PrecisionCtx) -> mpfr:
    with ctx.local():
        x = mpfr(x)
        return sum((e * ctx.mpf(c) * x ** (e - 1) for e, c in p.coeffs), mpfr(0))


def stationary_points(p: Potential, ctx: PrecisionCtx) -> list[mpfr]:
    """Non-negative x with V'(x) = 0, ascending; always includes 0.

    V'(x)/x is a polynomial in y = x**2.  Its positive roots are located in
    double precision and polished by Newton steps at working precision.
    """
    # r(y) = sum_j e c_e y**(e/2 - 1)
    deg = p.degree // 2 - 1
    poly = np.zeros(deg + 1)
    for e, c in p.coeffs:
        poly[deg - (e // 2 - 1)] = e * float(c)
    roots = np.roots(poly) if deg > 0 else np.array([])
    ys = sorted(
        r.real for r in roots if abs(r.imag) <= 1e-9 * max(1.0, abs(r)) and r.real > 0
    )
    out = [mpfr(0, ctx.bits)]
    with ctx.local():
        for y0 in ys:
            x = gmpy2.sqrt(mpfr(y0))
            for _ in range(200):
                d = derivative(p, x, ctx)
                d2 = sum(
                    (e * (e - 1) * ctx.mpf(c) * x ** (e - 2) for e, c in p.coeffs),
                    mpfr(0),
                )
                if d2 == 0:
                    break
                step = d / d2
                x -= step
                if abs(step) <= abs(x) * ctx.eig_tol * mpfr(10) ** -4:
                    break
            out.append(x)
    return out


def minimum_value(p: Potential, ctx: PrecisionCtx) -> mpfr:
    """Global minimum of V (attained at a stationary point)."""
    return min(evaluate(p, s, ctx) for s in stationary_points(p, ctx))


def outer_turning_point(p: Potential, energy, ctx: PrecisionCtx) -> mpfr:
    """Largest x >= 0 with V(x) = energy, by bisection at working precision.

    The search walks the monotone pieces between stationary points from the
    right; beyond the rightmost stationary point V increases, and the right
    end B is doubled until V(B) > energy.
    """
    with ctx.local():
        energy = mpfr(energy)
        stat = stationary_points(p, ctx)
        vals = [evaluate(p, s, ctx) for s in stat]
        vmin = min(vals)
        scale = max(mpfr(1), abs(energy))
        tol = ctx.tolerance() * scale
        if energy < vmin - tol:
            raise ValueError(
                f"energy {float(energy):.6g} lies below the potential minimum "
                f"{float(vmin):.6g}"
            )
        right = max(mpfr(1), 2 * stat[-1])
        while evaluate(p, right, ctx) <= energy:
            right *= 2
        knots = stat + [right]
        fvals = [v - energy for v in vals] + [evaluate(p, right, ctx) - energy]
        for i in range(len(knots) - 1, 0, -1):
            a, b = knots[i - 1], knots[i]
            fa, fb = fvals[i - 1], fvals[i]
            if abs(fa) <= tol and fb > 0:
                # energy sits at a stationary value; the piece to the right is a root only
                # if nothing lies further right, which is guaranteed by the walk order
                return a
            if (fa < 0) != (fb < 0) or fa == 0:
                return _bisect_root(p, energy, a, b, ctx)
        # energy equals the minimum within tolerance
        return stat[int(np.argmin([float(v) for v in vals]))]


def _bisect_root(p: Potential, energy, a, b, ctx: PrecisionCtx) -> mpfr:
    fa = evaluate(p, a, ctx) - energy
    if fa == 0:
        return a
    for _ in range(ctx.bits + 64):
        m = (a + b) / 2
        if m == a or m == b:
            break
        fm = evaluate(p, m, ctx) - energy
        if fm == 0:
            return m
        if (fm < 0) == (fa < 0):
            a, fa = m, fm
        else:
            b = m
    return (a + b) / 2


@dataclass(frozen=True)
class ScalingMap:
    """Map from H(k, lam) = -d^2/dx^2 - k x^2 + lam x^4 to the reduced H(1, beta).

    E(k, lam) = energy_factor * E(1, beta) and
    L_opt(k, lam) = length_factor * L_opt(1, beta).
    """

    k: mpfr
    lam: mpfr
    beta: mpfr
    energy_factor: mpfr
    length_factor: mpfr

    def _local(self):
        # arithmetic at the precision the map was built with
        return gmpy2.context(gmpy2.get_context(), precision=self.beta.precision)

    def energy_to_original(self, reduced_energy) -> mpfr:
        with self._local():
            return self.energy_factor * reduced_energy

    def length_to_original(self, reduced_length) -> mpfr:
        with self._local():
            return self.length_factor * reduced_length

    def length_to_reduced(self, length) -> mpfr:
        with self._local():
            return length / self.length_factor


def reduce(k, lam, ctx: PrecisionCtx) -> ScalingMap:
    """Scaling map for x -> k**(1/4) x.  Requires k > 0 and lam > 0."""
    k_exact, lam_exact = _exact(k), _exact(lam)
    if k_exact <= 0 or lam_exact <= 0:
        raise ValueError("scaling requires k > 0 and lambda > 0")
    with ctx.local():
        kk = ctx.mpf(k_exact)
        ll = ctx.mpf(lam_exact)
        root = gmpy2.sqrt(kk)
        return ScalingMap(
            k=kk,
            lam=ll,
            beta=ll / (kk * root),
            energy_factor=root,
            length_factor=1 / gmpy2.sqrt(root),
        )


def reduced_potential(scaling: ScalingMap) -> Potential:
    """The k = 1 potential ``-x^2 + beta x^4``.

    beta is kept exact when it is rational (k a perfect square).
    """
    return Potential.quartic(1, _mpfr_to_fraction(scaling.beta))


def _mpfr_to_fraction(x: mpfr) -> Fraction:
    q = x.as_integer_ratio()
    f = Fraction(*q)
    # snap to a short rational when the binary value is that rational rounded
    snapped = f.limit_denominator(10**12)
    if abs(snapped - f) <= abs(f) * Fraction(1, 2 ** (x.precision - 4)):
        return snapped
    return f
