import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.stats import ortho_group

from longrange.numerics import (QuadratureRule, compensated_sum, eig_sym, eig_sym_lowest,
                                fit_power_law, integrate_seminfinite, jacobi_eig)


def residue_identity(a, b, rule):
    value, _ = integrate_seminfinite(lambda u: a * b / ((a * a + u * u) * (b * b + u * u)), rule)
    return 2.0 / math.pi * value


def test_eig_trivial():
    w, v = eig_sym(np.eye(4))
    assert np.allclose(w, 1.0)
    w, _ = eig_sym([[0.0, 2.5], [2.5, 0.0]])
    assert np.allclose(w, [-2.5, 2.5])
    with pytest.raises(ValueError):
        eig_sym([[np.nan]])
    with pytest.raises(ValueError):
        eig_sym(np.zeros((2, 3)))


def char_poly_roots_3x3(m):
    """Trigonometric solution of the cubic characteristic polynomial."""
    q = np.trace(m) / 3.0
    b = m - q * np.eye(3)
    p = math.sqrt(np.sum(b * b) / 6.0)
    r = np.linalg.det(b / p) / 2.0
    phi = math.acos(min(1.0, max(-1.0, r))) / 3.0
    e1 = q + 2 * p * math.cos(phi)
    e3 = q + 2 * p * math.cos(phi + 2 * math.pi / 3)
    return sorted([e1, 3 * q - e1 - e3, e3])


def test_eig_block_diagonal_vs_cubic_oracle(rng):
    m = np.zeros((9, 9))
    expected = []
    for k in range(3):
        a = rng.normal(size=(3, 3))
        a = a + a.T
        m[3 * k:3 * k + 3, 3 * k:3 * k + 3] = a
        expected += char_poly_roots_3x3(a)
    w, v = eig_sym(m)
    assert np.allclose(w, sorted(expected), atol=1e-12)
    norm = np.linalg.norm(m)
    assert np.linalg.norm(m @ v - v * w) <= 1e-12 * norm
    assert np.allclose(v.T @ v, np.eye(9), atol=1e-12)


@settings(max_examples=30, deadline=None)
@given(st.integers(2, 12), st.integers(0, 2**32 - 1))
def test_eig_invariant_under_similarity(n, seed):
    rng = np.random.default_rng(seed)
    a = rng.normal(size=(n, n))
    a = a + a.T
    q = ortho_group.rvs(n, random_state=seed) if n > 1 else np.eye(1)
    w1, _ = eig_sym(a)
    w2, _ = eig_sym(q @ a @ q.T)
    assert np.allclose(w1, w2, atol=1e-12 * max(1.0, np.abs(w1).max()))


@settings(max_examples=20, deadline=None)
@given(st.integers(1, 10), st.integers(0, 2**32 - 1))
def test_jacobi_matches_lapack(n, seed):
    rng = np.random.default_rng(seed)
    a = rng.normal(size=(n, n))
    a = a + a.T
    wj, vj = jacobi_eig(a)
    assert np.allclose(wj, eig_sym(a)[0], atol=1e-12)
    assert np.linalg.norm(a @ vj - vj * wj) <= 1e-12 * max(1.0, np.linalg.norm(a))


def test_lowest_subset(rng):
    a = rng.normal(size=(300, 300))
    a = a + a.T
    w, v = eig_sym_lowest(a, 7)
    full, _ = eig_sym(a)
    assert np.allclose(w, full[:7], atol=1e-10)
    assert np.allclose(a @ v, v * w, atol=1e-9)
    w, _ = eig_sym_lowest(a[:10, :10], 3)
    assert w.shape == (3,)


def test_quadrature_weights_positive():
    rule = QuadratureRule.build(1.0)
    assert rule.count == 50 and np.all(rule.weights > 0)
    with pytest.raises(ValueError):
        QuadratureRule.build(0.0)
    with pytest.raises(ValueError):
        QuadratureRule.for_gaps([0.0])


def test_residue_identity_examples():
    assert residue_identity(1, 1, QuadratureRule.for_gaps([1, 1])) == pytest.approx(0.5, abs=1e-10)
    assert residue_identity(1e-3, 1, QuadratureRule.for_gaps([1e-3, 1])) == pytest.approx(1 / 1.001, abs=1e-8)


def test_residue_identity_log_grid():
    grid = np.geomspace(1e-3, 10.0, 15)
    worst = max(abs(residue_identity(a, b, QuadratureRule.for_gaps([a, b])) - 1 / (a + b)) * (a + b)
                for a in grid for b in grid)
    assert worst <= 1e-8


def test_quadrature_converges_with_nodes():
    errs = [abs(residue_identity(0.01, 3.0, QuadratureRule.for_gaps([0.01, 3.0], n)) - 1 / 3.01)
            for n in (10, 20, 40)]
    assert errs[0] > errs[1] > errs[2]


def test_tail_warning():
    rule = QuadratureRule.build(1.0)
    with pytest.warns(RuntimeWarning):
        integrate_seminfinite(lambda u: 1.0 / (1.0 + u), rule)


def test_power_law_exact():
    r = np.linspace(10, 40, 12)
    assert fit_power_law(r, -3.7 / r**6, 6).coefficient == pytest.approx(-3.7, rel=1e-12)


def test_power_law_with_correction():
    c, c8 = -100.0, -400.0
    r = np.linspace(10 * math.sqrt(abs(c8 / c)), 60 * math.sqrt(abs(c8 / c)), 20)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        fit = fit_power_law(r, c / r**6 + c8 / r**8, 6)
    assert fit.coefficient == pytest.approx(c, rel=1e-2)


def test_power_law_constant_data_warns():
    r = np.linspace(5, 10, 10)
    with pytest.warns(RuntimeWarning):
        fit = fit_power_law(r, np.ones_like(r), 6)
    assert fit.residual > 0.5
    with pytest.raises(ValueError):
        fit_power_law([1.0, 2.0], [1.0, 2.0], 6)


def test_compensated_sum():
    assert compensated_sum([1e16, 1.0, -1e16]) == 1.0
