"""Acceptance gate: one test per criterion, each printing PASS/FAIL in the summary.

Every test stores its verdict in ``ACCEPTANCE`` before asserting, so the
terminal summary lists all criteria even when some fail.  The 120-digit
N = 100 spectra are computed once per module.
"""
import itertools
import random
from decimal import Decimal

import mpmath
import numpy as np
import pytest
from gmpy2 import mpfr

from conftest import ACCEPTANCE
from specbox.basis import BasisSpec, basis_value
from specbox.cli import main as cli_main
from specbox.eigensolve import eig_sym, estimate_significant_digits
from specbox.matelem import cosine_moment, hamiltonian_matrix
from specbox.optimizer import find_optimal_L, level_energy
from specbox.oracle import QuadratureConfig, fd_eigenvalues, gauss_legendre_rule, quadrature_moment
from specbox.potential import Potential, reduce
from specbox.precision import make_context, to_decimal_string

# Published N = 100 spectra (k = 1) at the published half-widths.
PUBLISHED = {
    "0.01": ("16.70762", [
        "-23.5959513947022931175742924292",
        "-23.5959513947022931173974337194",
        "-20.8298063940006898721661249287",
        "-20.8298063940006897803867088013",
        "-18.1299111662859753878276848315",
        "-18.1299111662859531975740043181",
    ]),
    "0.03": ("13.60979", [
        "-6.95073188927955191828148104931",
        "-6.95072754950196756189760500468",
        "-4.32728413386759375726086836212",
        "-4.32667786658379381203893295176",
        "-1.98615994840071249926930230256",
        "-1.95646376927817057309963393657",
    ]),
    "0.1": ("11.07433", [
        "-1.26549283721398510854595401983",
        "-1.15305913107745006809098709688",
        "0.509488545436203212948452569004",
        "1.54354603976759862420138901373",
        "3.10513379668314777728015050384",
        "4.83611381900421025918208666909",
    ]),
}

N_REF = 100


def record(cid: str, ok: bool, detail: str) -> None:
    ACCEPTANCE[cid] = (bool(ok), detail)


def significant_digits(literal: str) -> int:
    return len(Decimal(literal).as_tuple().digits)


def spectrum(p, family, n, L, ctx, count=6):
    levels = []
    for parity in ("even", "odd"):
        spec = BasisSpec(family, parity, n, ctx.mpf(L))
        levels += eig_sym(hamiltonian_matrix(p, spec, ctx), ctx).eigenvalues
    return sorted(levels)[:count]


@pytest.fixture(scope="module")
def ctx120():
    return make_context(120)


@pytest.fixture(scope="module")
def reference_spectra(ctx120):
    return {
        lam: spectrum(Potential.quartic(1, lam), "periodic", N_REF, L, ctx120)
        for lam, (L, _) in PUBLISHED.items()
    }


def _table_check(lam, reference_spectra):
    _, printed = PUBLISHED[lam]
    mismatches = []
    for n, (e, lit) in enumerate(zip(reference_spectra[lam], printed)):
        got = to_decimal_string(e, significant_digits(lit))
        if got != lit:
            mismatches.append(f"n={n}: {got} != {lit}")
    return mismatches


def test_c1_reference_spectrum_lambda_001(reference_spectra):
    bad = _table_check("0.01", reference_spectra)
    record("C1", not bad, "lambda=0.01 six levels, all printed digits" + (f"; {bad}" if bad else ""))
    assert not bad


@pytest.mark.parametrize("lam, cid", [("0.03", "C2.a"), ("0.1", "C2.b")])
def test_c2_reference_spectra_lambda_003_01(reference_spectra, lam, cid):
    bad = _table_check(lam, reference_spectra)
    record(cid, not bad, f"lambda={lam} six levels, all printed digits" + (f"; {bad}" if bad else ""))
    assert not bad


def test_c3_tunneling_splittings(reference_spectra):
    e = reference_spectra["0.03"]
    printed = [mpfr(v, 200) for v in PUBLISHED["0.03"][1]]
    nominal = [4.3e-6, 6.1e-4, 3.0e-2]
    cross = [4.3398e-6, 6.0627e-4, 2.9696e-2]
    parts, ok = [], True
    for i, (a, b) in enumerate(zip(nominal, cross)):
        split = float(e[2 * i + 1] - e[2 * i])
        from_table = float(printed[2 * i + 1] - printed[2 * i])
        good = abs(split / a - 1) <= 0.03 and abs(split / b - 1) <= 0.03 \
            and abs(split / from_table - 1) <= 0.03
        ok &= good
        parts.append(f"{split:.5e}")
    record("C3", ok, "lambda=0.03 splittings " + ", ".join(parts) + " (3% of 4.3e-6, 6.1e-4, 3.0e-2)")
    assert ok


def test_c4_near_degeneracy(reference_spectra, ctx120):
    e = reference_spectra["0.01"]
    with ctx120.local():
        split = e[1] - e[0]
        printed = [ctx120.mpf(v) for v in PUBLISHED["0.01"][1][:2]]
        from_table = printed[1] - printed[0]
    got, want = to_decimal_string(split, 8), to_decimal_string(from_table, 8)
    ok = got == want and want.startswith("1.7685")
    record("C4", ok, f"lambda=0.01 E1-E0 = {got} (printed difference {want})")
    assert ok


@pytest.mark.slow
@pytest.mark.parametrize("lam, cid", [("0.01", "C5.a"), ("0.03", "C5.b"), ("0.1", "C5.c")])
def test_c5_optimal_half_width(lam, cid, ctx120):
    target = float(PUBLISHED[lam][0])
    res = find_optimal_L(Potential.quartic(1, lam), "periodic", "even", N_REF, ctx120)
    L = float(res.L)
    ok = abs(L - target) <= 1e-3
    record(cid, ok, f"lambda={lam} N=100 L_opt={L:.6f} (target {target}, tol 1e-3)")
    assert ok


def test_c6_basis_count(reference_spectra):
    ctx = make_context(60)
    p = Potential.quartic(1, "0.01")
    ref = reference_spectra["0.01"][0]
    sd = {}
    for family in ("periodic", "dirichlet"):
        res = find_optimal_L(p, family, "even", 45, ctx)
        sd[family] = estimate_significant_digits(res.energy, ref)
    ok = sd["periodic"] >= 30 and sd["dirichlet"] < sd["periodic"]
    record("C6", ok, f"lambda=0.01 N=45 digits vs N=100: periodic {sd['periodic']}, "
                     f"dirichlet {sd['dirichlet']}")
    assert ok


def test_c7_harmonic_oscillator():
    ctx = make_context(30)
    sho = Potential.from_coeffs({2: 1})
    levels = spectrum(sho, "periodic", 20, 8, ctx, count=5)
    worst = max(abs(float(e) - (2 * n + 1)) for n, e in enumerate(levels))
    per1 = float(find_optimal_L(sho, "periodic", "even", 1, ctx).energy)
    dir1 = float(find_optimal_L(sho, "dirichlet", "even", 1, ctx).energy)
    dir2 = float(find_optimal_L(sho, "dirichlet", "even", 2, ctx).energy)
    ok = (worst < 1e-10 and abs(per1 - 1.008) <= 1e-3 and abs(dir1 - 1.136) <= 1e-3
          and abs(dir2 - 1.006) <= 1e-3)
    record("C7", ok, f"N=20 L=8 max|E_n-(2n+1)|={worst:.1e}; optimized N=1 periodic {per1:.4f}, "
                     f"dirichlet N=1 {dir1:.4f}, N=2 {dir2:.4f}")
    assert ok


def test_c8_inflection_protocol():
    ctx = make_context(30)
    p = Potential.quartic(1, 1)
    res = find_optimal_L(p, "periodic", "even", 8, ctx)
    L, E = float(res.L), float(res.energy)
    # the negative shallow minimum sits at small L; the scan window may clip
    # its right flank, but the chosen point must lie well past the lowest scanned energy
    low = min(zip(res.scan.energies, res.scan.L_grid))
    e_small = float(level_energy(p, BasisSpec("periodic", "even", 8, "0.9"), 0, ctx))
    ok = (abs(L - 3.5) <= 0.3 and abs(E - 0.66) <= 0.02 and E > 0 and e_small < 0
          and float(low[0]) < E and float(low[1]) < L)
    record("C8", ok, f"k=1 lambda=1 N=8: L_opt={L:.4f}, E={E:.4f}; E(L=0.9)={e_small:.4f} not selected")
    assert ok


def test_c9_scaling_law():
    ctx = make_context(120)
    sm = reduce(4, "0.08", ctx)
    with ctx.local():
        L_red = ctx.mpf("16.70762")
        L = sm.length_to_original(L_red)
    e_big = spectrum(Potential.quartic(4, "0.08"), "periodic", N_REF, L, ctx, count=1)[0]
    e_red = spectrum(Potential.quartic(1, "0.01"), "periodic", N_REF, L_red, ctx, count=1)[0]
    digits_e = estimate_significant_digits(to_decimal_string(e_big, 40),
                                           to_decimal_string(sm.energy_to_original(e_red), 40))

    ctx60 = make_context(60)
    a = find_optimal_L(Potential.quartic(1, "0.01"), "periodic", "even", 40, ctx60)
    b = find_optimal_L(Potential.quartic(4, "0.08"), "periodic", "even", 40, ctx60)
    sm60 = reduce(4, "0.08", ctx60)
    digits_L = estimate_significant_digits(to_decimal_string(b.L, 30),
                                           to_decimal_string(sm60.length_to_original(a.L), 30))
    ok = digits_e >= 20 and digits_L >= 20
    record("C9", ok, f"E(4,0.08) vs 2E(1,0.01): {digits_e} digits; "
                     f"L_opt(4,0.08) vs 4^(-1/4) L_opt(1,0.01) at N=40: {digits_L} digits")
    assert ok


# --- C10: property suites ---------------------------------------------------


def test_c10_moments_vs_quadrature():
    rng = random.Random(20240611)
    cases = [(2 * rng.randint(0, 6), rng.randint(0, 50), rng.choice(["0.7", "1", "3.3", "8", "16.7"]))
             for _ in range(200)]
    ctx = make_context(40)
    worst_gl = mpmath.mpf(0)
    rules = {}
    with mpmath.workdps(45):
        for j, n, L in cases:
            if L not in rules:
                rules[L] = gauss_legendre_rule(-mpmath.mpf(L), mpmath.mpf(L), 64, 45)
            k = n * mpmath.pi / mpmath.mpf(L)
            q = mpmath.fsum(w * x**j * mpmath.cos(k * x) for x, w in rules[L])
            exact = mpmath.mpf(to_decimal_string(cosine_moment(j, n, L, ctx), 40))
            err = abs(exact - q) / abs(exact) if exact else abs(q)
            worst_gl = max(worst_gl, err)
    # adaptive Simpson at extended precision on a few of the same cases
    worst_simpson = 0.0
    cfg = QuadratureConfig(abs_tol=1e-40, rel_tol=1e-13, digits=20)
    for j, n, L in [(12, 50, "16.7"), (2, 37, "3.3"), (8, 5, "0.7"), (4, 1, "1")]:
        q, _ = quadrature_moment(j, n, L, cfg)
        exact = cosine_moment(j, n, L, ctx)
        worst_simpson = max(worst_simpson, float(abs(mpmath.mpf(to_decimal_string(exact, 30)) - q)
                                                 / abs(mpmath.mpf(to_decimal_string(exact, 30)))))
    ok = worst_gl < 1e-12 and worst_simpson < 1e-12
    record("C10.a", ok, f"moment recurrence vs quadrature, 200 random (j<=12, n<=50): max rel err "
                        f"{float(worst_gl):.1e} (Gauss-Legendre), {worst_simpson:.1e} (adaptive Simpson)")
    assert ok


def test_c10_gram_orthonormality():
    ctx = make_context(40)
    worst = mpfr(0)
    for family, parity in itertools.product(("periodic", "dirichlet"), ("even", "odd")):
        L = 5
        spec = BasisSpec(family, parity, 16, L)
        rule = gauss_legendre_rule(-L, L, 24, 45)
        with ctx.local():
            xs = [ctx.mpf(mpmath.nstr(x, 50)) for x, _ in rule]
            ws = [ctx.mpf(mpmath.nstr(w, 50)) for _, w in rule]
        vals = {m: [basis_value(spec, m, x, ctx) for x in xs] for m in spec.indices}
        with ctx.local():
            for a, b in itertools.combinations_with_replacement(spec.indices, 2):
                g = sum((w * u * v for w, u, v in zip(ws, vals[a], vals[b])), mpfr(0))
                worst = max(worst, abs(g - (1 if a == b else 0)))
    ok = worst < mpfr("1e-30")
    record("C10.b", ok, f"Gram matrix, 4 families, m<=16, 40 digits: max deviation {float(worst):.1e}")
    assert ok


def test_c10_eigen_residuals():
    ctx = make_context(40)
    worst = 0.0
    for lam, L in (("0.01", 16), ("0.1", 9), ("1", 4)):
        for parity in ("even", "odd"):
            spec = BasisSpec("periodic", parity, 30, L)
            res = eig_sym(hamiltonian_matrix(Potential.quartic(1, lam), spec, ctx), ctx, want_vectors=True)
            for e, r in zip(res.eigenvalues, res.residuals):
                worst = max(worst, float(r / (ctx.eig_tol * (1 + abs(e)))))
    ok = worst <= 1
    record("C10.c", ok, f"eigen-residuals / (eig_tol (1+|E|)) max {worst:.2e}")
    assert ok


def test_c10_fd_oracle_agreement():
    rng = random.Random(7)
    ctx = make_context(30)
    worst = 0.0
    for _ in range(8):
        k = rng.choice([-1, 1]) * rng.randint(1, 20) / 10
        lam = rng.randint(1, 50) / 100
        L = rng.choice([3, 4, 5])
        p = Potential.from_coeffs({2: -k, 4: lam})
        fd = fd_eigenvalues(p, L, grid_n=1001, count=4)
        var = spectrum(p, "dirichlet", 30, L, ctx, count=4)
        worst = max(worst, max(abs(float(a) - b) for a, b in zip(var, fd)))
    ok = worst < 1e-4
    record("C10.d", ok, f"finite differences vs variational (Dirichlet box), 8 random problems: "
                        f"max |dE| {worst:.1e}")
    assert ok


def test_c10_cli_determinism(tmp_path, capsys):
    argv = ["spectrum", "--k", "1", "--lambda", "0.1", "--n-basis", "20", "--half-width", "8",
            "--format", "json", "--digits", "40"]
    blobs = []
    for i in range(2):
        path = tmp_path / f"run{i}.json"
        code = cli_main(argv + ["--output", str(path)])
        blobs.append((code, path.read_bytes()))
    capsys.readouterr()
    ok = blobs[0][0] == 0 and blobs[0] == blobs[1]
    record("C10.e", ok, "CLI spectrum output bit-identical across runs")
    assert ok
