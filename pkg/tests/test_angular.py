import math
import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from longrange.angular import (Surd, SurdSum, cg_stretched, cg_value, clebsch_gordan, ninej_value,
                               parse_halfint, sixj_value, triangle_ok, wigner_6j, wigner_9j)


def proj(t):
    return range(-t, t + 1, 2)


def test_known_values():
    assert str(clebsch_gordan(2, 0, 2, 0, 0, 0)) == "-1/sqrt(3)"
    assert str(clebsch_gordan(2, 0, 2, 0, 4, 0)) == "sqrt(2/3)"
    assert clebsch_gordan(1, 1, 1, -1, 0, 0) == Surd(1, Fraction(1, 2))
    assert wigner_6j(2, 2, 4, 2, 2, 4).as_fraction() == Fraction(1, 30)
    assert wigner_9j(2, 2, 4, 2, 2, 4, 4, 4, 0).as_fraction() == Fraction(1, 150)


def test_parse_halfint():
    assert parse_halfint("3/2") == 3
    assert parse_halfint(2) == 4
    with pytest.raises(ValueError):
        parse_halfint("1/3")


def test_projection_parity_rejected():
    with pytest.raises(ValueError):
        clebsch_gordan(1, 0, 1, 1, 2, 1)


@pytest.mark.parametrize("tj1,tj2", [(a, b) for a in range(7) for b in range(7)])
def test_cg_orthogonality_exact(tj1, tj2):
    # sum over m1 m2 of C^{JM} C^{J'M'} = delta, in exact arithmetic
    js = range(abs(tj1 - tj2), tj1 + tj2 + 1, 2)
    for tJ in js:
        for tJp in js:
            for tM in proj(min(tJ, tJp)):
                total = SurdSum()
                for tm1 in proj(tj1):
                    tm2 = tM - tm1
                    if abs(tm2) > tj2 or (tj2 - tm2) % 2:
                        continue
                    total = total + SurdSum.of(clebsch_gordan(tj1, tm1, tj2, tm2, tJ, tM)
                                               * clebsch_gordan(tj1, tm1, tj2, tm2, tJp, tM))
                assert total == SurdSum.of(1 if tJ == tJp else 0)


@pytest.mark.parametrize("tla,tlb", [(2, 2), (2, 4), (4, 6), (6, 6)])
def test_stretched_closed_form(tla, tlb):
    for tma in proj(tla):
        for tmb in proj(tlb):
            assert cg_stretched(tla, tma, tlb, tmb) == clebsch_gordan(tla, tma, tlb, tmb, tla + tlb, tma + tmb)


def test_6j_from_cg_contraction():
    # recoupling overlap of three spins, built from four CG coefficients
    a, b, c, d, f = 2, 2, 4, 2, 4
    w = 0.0
    for tm1 in proj(a):
        for tm2 in proj(b):
            for tm3 in proj(d):
                m12 = tm1 + tm2
                M = m12 + tm3
                if abs(m12) > c or abs(M) > 2:
                    continue
                m23 = tm2 + tm3
                if abs(m23) > f:
                    continue
                if M != 2:
                    continue
                w += (cg_value(a, tm1, b, tm2, c, m12) * cg_value(c, m12, d, tm3, 2, M)
                      * cg_value(b, tm2, d, tm3, f, m23) * cg_value(a, tm1, f, m23, 2, M))
    # <(ab)c,d;J|a,(bd)f;J> = (-1)^{a+b+d+J} sqrt((2c+1)(2f+1)) {a b c; d J f}
    J = 2
    expected = (-1) ** ((a + b + d + J) // 2) * math.sqrt((c + 1) * (f + 1)) * sixj_value(a, b, c, d, J, f)
    assert w == pytest.approx(expected, abs=1e-14)


def test_6j_triad_violation_is_zero():
    assert not wigner_6j(2, 2, 2, 2, 2, 8)


def test_9j_zero_argument_reduces_to_6j():
    for a, b, c, d in [(2, 2, 4, 2), (2, 4, 2, 4), (4, 4, 2, 2)]:
        e = c
        for f in range(abs(a - d), a + d + 1, 2):
            # {a b e; c d e; f f 0}
            nine = float(wigner_9j(a, b, e, c, d, e, f, f, 0))
            six = sixj_value(a, b, e, d, c, f)
            expected = (-1) ** ((b + c + e + f) // 2) * six / math.sqrt((e + 1) * (f + 1))
            assert nine == pytest.approx(expected, abs=1e-14)


def test_9j_symmetries():
    args = (2, 2, 4, 2, 4, 2, 4, 2, 2)
    v = float(wigner_9j(*args))
    a = args
    transposed = (a[0], a[3], a[6], a[1], a[4], a[7], a[2], a[5], a[8])
    assert float(wigner_9j(*transposed)) == pytest.approx(v, abs=1e-15)
    # odd permutation of rows multiplies by (-1)^sum
    swapped = a[3:6] + a[0:3] + a[6:9]
    assert float(wigner_9j(*swapped)) == pytest.approx((-1) ** (sum(a) // 2) * v, abs=1e-15)


# --- random identities, shared with the acceptance suite -------------------------------------

def identity_two_cg(rnd: random.Random) -> float | None:
    f, a, b = (rnd.randint(0, 6) for _ in range(3))
    d = rnd.choice(range(abs(f - a), f + a + 1, 2))
    e = rnd.choice(range(abs(d - b), d + b + 1, 2))
    phi, al, be = rnd.choice(proj(f)), rnd.choice(proj(a)), rnd.choice(proj(b))
    de, ep = phi + al, phi + al + be
    if abs(de) > d or abs(ep) > e:
        return None
    lhs = cg_value(f, phi, a, al, d, de) * cg_value(d, de, b, be, e, ep)
    rhs = sum((-1) ** ((c + e + f) // 2) * math.sqrt((c + 1) * (d + 1))
              * cg_value(b, be, a, al, c, be + al) * cg_value(f, phi, c, be + al, e, ep)
              * sixj_value(a, b, c, e, f, d)
              for c in range(abs(a - b), a + b + 1, 2) if abs(be + al) <= c)
    return abs(lhs - rhs)


def identity_three_cg(rnd: random.Random) -> float | None:
    L, S, l, Lp = (rnd.randint(0, 6) for _ in range(4))
    if (L + l + Lp) % 2 or not triangle_ok(L, l, Lp):
        return None
    J = rnd.choice(range(abs(L - S), L + S + 1, 2))
    Jp = rnd.choice(range(abs(Lp - S), Lp + S + 1, 2))
    M, m = rnd.choice(proj(J)), rnd.choice(proj(l))
    Mp = M + m
    if abs(Mp) > Jp:
        return None
    lhs = sum(cg_value(L, mL, S, M - mL, J, M) * cg_value(Lp, mL + m, S, M - mL, Jp, Mp)
              * cg_value(L, mL, l, m, Lp, mL + m)
              for mL in proj(L) if abs(M - mL) <= S and abs(mL + m) <= Lp)
    rhs = ((-1) ** ((l + J + S + Lp) // 2) * math.sqrt((J + 1) * (Lp + 1))
           * sixj_value(L, S, J, Jp, l, Lp) * cg_value(J, M, l, m, Jp, Mp))
    return abs(lhs - rhs)


def identity_four_cg(rnd: random.Random) -> float | None:
    b, c, e, f = (2 * rnd.randint(0, 2) for _ in range(4))
    a = rnd.choice(range(abs(b - c), b + c + 1, 2))
    d = rnd.choice(range(abs(e - f), e + f + 1, 2))
    g = rnd.choice(range(abs(e - b), e + b + 1, 2))
    j = rnd.choice(range(abs(f - c), f + c + 1, 2))
    al, de = rnd.choice(proj(a)), rnd.choice(proj(d))
    eta = rnd.choice(proj(g))
    mu = al + de - eta
    if abs(mu) > j:
        return None
    lhs = 0.0
    for be in proj(b):
        ga = al - be
        if abs(ga) > c:
            continue
        ep = eta - be
        ph = de - ep
        if abs(ep) > e or abs(ph) > f or ph + ga != mu:
            continue
        lhs += (cg_value(b, be, c, ga, a, al) * cg_value(e, ep, f, ph, d, de)
                * cg_value(e, ep, b, be, g, eta) * cg_value(f, ph, c, ga, j, mu))
    ka = eta + mu
    rhs = sum(cg_value(g, eta, j, mu, k, ka) * cg_value(d, de, a, al, k, ka) * ninej_value(c, b, a, f, e, d, j, g, k)
              for k in range(0, 25, 2) if abs(ka) <= k)
    rhs *= math.sqrt((a + 1) * (d + 1) * (g + 1) * (j + 1))
    return abs(lhs - rhs)


def run_identity(fn, count: int, seed: int) -> float:
    rnd = random.Random(seed)
    worst, done = 0.0, 0
    while done < count:
        err = fn(rnd)
        if err is None:
            continue
        worst = max(worst, err)
        done += 1
    return worst


@pytest.mark.parametrize("fn", [identity_two_cg, identity_three_cg, identity_four_cg])
def test_identities(fn):
    assert run_identity(fn, 200, 7) <= 1e-12


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 6), st.integers(0, 6), st.data())
def test_cg_symmetry_exchange(tj1, tj2, data):
    tJ = data.draw(st.sampled_from(list(range(abs(tj1 - tj2), tj1 + tj2 + 1, 2))))
    tm1 = data.draw(st.sampled_from(list(proj(tj1))))
    tm2 = data.draw(st.sampled_from(list(proj(tj2))))
    if abs(tm1 + tm2) > tJ:
        return
    a = clebsch_gordan(tj1, tm1, tj2, tm2, tJ, tm1 + tm2)
    b = clebsch_gordan(tj2, tm2, tj1, tm1, tJ, tm1 + tm2)
    phase = (-1) ** ((tj1 + tj2 - tJ) // 2)
    assert a == (b if phase == 1 else -b)


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 5), st.integers(0, 5), st.integers(0, 5))
def test_triangle_symmetric(a, b, c):
    assert triangle_ok(a, b, c) == triangle_ok(b, c, a) == triangle_ok(c, a, b)


@settings(max_examples=100, deadline=None)
@given(st.fractions(min_value=-5, max_value=5, max_denominator=7), st.integers(1, 50))
def test_surdsum_square_roundtrip(p, r):
    x = SurdSum.of(p) * SurdSum.sqrt_of(r)
    assert (x * x).as_fraction() == p * p * r
    assert float(x) == pytest.approx(float(p) * math.sqrt(r))
