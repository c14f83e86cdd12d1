import json
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from longrange.spectra import (DataError, LevelKey, RadialFunction, ResonanceError, SpectrumTable,
                               alpha_decompose, alpha_zz, fine_structure_factor, fine_structure_reduced,
                               hydrogenic_reduced, operator_matrix, recompose_alpha_zz, rotor_table,
                               scalar_polarizability, stark_first_order, we_element)

from conftest import random_table


def toy(gap=1.0, red=1.0):
    return SpectrumTable.from_dict({
        "name": "toy",
        "levels": [{"id": "s", "J2": 0, "energy_au": 0.0}, {"id": "p", "J2": 2, "energy_au": gap}],
        "reduced_dipoles": [{"from": "s", "to": "p", "value_au": red}],
    })


def test_loader_roundtrip(tmp_path):
    path = tmp_path / "t.json"
    path.write_text(json.dumps({"name": "x", "levels": [{"id": "a", "J2": 1, "energy_au": 0.0},
                                                        {"id": "b", "J2": 3, "energy_au": 0.2}],
                                "reduced_dipoles": [{"from": "a", "to": "b", "value_au": 0.5}]}))
    t = SpectrumTable.load(path)
    a, b = t.level("a"), t.level("b")
    assert t.reduced_element(b, a, 1) == 0.5
    # reverse element carries (-1)^(J - J')
    assert t.reduced_element(a, b, 1) == -0.5


def test_loader_reports_line(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text('{\n "name": "x",\n "levels": [\n  {"id": "a" "J2": 0}\n ]\n}\n')
    with pytest.raises(DataError, match="line 4"):
        SpectrumTable.load(path)


def test_loader_missing_field():
    with pytest.raises(DataError):
        SpectrumTable.from_dict({"levels": [{"id": "a", "J2": 0}]})


def test_loader_triangle_violation():
    with pytest.raises(DataError, match="triangle"):
        SpectrumTable.from_dict({"levels": [{"id": "a", "J2": 0, "energy_au": 0}, {"id": "b", "J2": 4, "energy_au": 1}],
                                 "reduced_dipoles": [{"from": "a", "to": "b", "value_au": 1.0}]})


def test_we_element_toy():
    t = toy()
    s, p = t.level("s"), t.level("p")
    # <p,0|Q10|s,0> = C^{10}_{00 10}/sqrt(3) * red
    assert we_element(t, (s, 0), (p, 0), 1, 0) == pytest.approx(1 / math.sqrt(3))
    assert we_element(t, (s, 0), (p, 2), 1, 1) == pytest.approx(1 / math.sqrt(3))
    assert we_element(t, (s, 0), (p, 2), 1, 0) == 0.0


def test_operator_hermiticity(rng):
    # Q_{l,-m} = (-1)^m Q_{lm}^dagger with the reverse-element phase
    for half in (False, True):
        t = random_table(rng, "h", half=half)
        states = t.states()
        for l in (1, 2):
            for m in range(-l, l + 1):
                a = operator_matrix(t, states, l, m)
                b = operator_matrix(t, states, l, -m)
                assert np.allclose(b, (-1) ** m * a.T, atol=1e-13)


def test_hydrogen_1s_2p():
    r = np.linspace(0.0, 60.0, 60001)
    r10 = 2.0 * np.exp(-r)
    r21 = r * np.exp(-r / 2) / (2.0 * math.sqrt(6.0))
    red = hydrogenic_reduced(RadialFunction(r, r21), 1, RadialFunction(r, r10), 0, 1)
    assert red == pytest.approx(128 * math.sqrt(6) / 243, rel=1e-7)


def test_radial_normalisation_enforced():
    r = np.linspace(0, 10, 100)
    with pytest.raises(ValueError):
        RadialFunction(r, np.ones_like(r))


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 3), st.sampled_from([1, 2, 3]), st.integers(0, 3), st.data())
def test_fine_structure_sum_rule(L, tS, Lp, data):
    l = data.draw(st.integers(abs(L - Lp), L + Lp))
    if (L + l + Lp) % 2:
        return
    tL, tLp = 2 * L, 2 * Lp
    tJ = data.draw(st.sampled_from(list(range(abs(tL - tS), tL + tS + 1, 2))))
    total = sum(float(fine_structure_factor(tL, tS, tJ, tLp, tS, tJp, l)) ** 2
                for tJp in range(abs(tLp - tS), tLp + tS + 1, 2))
    assert total == pytest.approx((tJ + 1) / (tL + 1), rel=1e-12)


def test_fine_structure_spin_flip_warns():
    with pytest.warns(RuntimeWarning):
        assert fine_structure_reduced(1.0, 0, 1, 1, 2, 3, 1, 1) == 0.0


def test_toy_polarizability():
    t = toy(gap=0.5, red=2.0)
    s = t.level("s")
    # 2 * gap * |red|^2 / (3 (gap^2 - w^2))
    assert alpha_zz(t, s, 0) == pytest.approx(2 * 4 / (3 * 0.5))
    assert alpha_zz(t, s, 0, 0.2, imaginary=True) == pytest.approx(2 * 0.5 * 4 / (3 * (0.25 + 0.04)))
    assert scalar_polarizability(t, s) == pytest.approx(alpha_zz(t, s, 0))


def test_resonance_raises():
    t = toy()
    with pytest.raises(ResonanceError):
        alpha_zz(t, t.level("s"), 0, 1.0)


@pytest.mark.parametrize("half", [False, True])
@pytest.mark.parametrize("imaginary", [False, True])
def test_alpha_two_paths(rng, half, imaginary):
    for _ in range(10):
        t = random_table(rng, "a", nlev=5, half=half, ranks=(1,))
        for level in t.levels:
            others = [e for k, e in t.levels.items() if k != level and abs(e - t.levels[level]) < 1e-9]
            if others:
                continue
            comps = alpha_decompose(t, level, 0.05, imaginary)
            for m2 in range(-level.J2, level.J2 + 1, 2):
                direct = alpha_zz(t, level, m2, 0.05, imaginary)
                assert recompose_alpha_zz(comps, level.J2, m2) == pytest.approx(direct, abs=1e-12)


def test_scalar_is_m_average(rng):
    t = random_table(rng, "a", nlev=5, ranks=(1,))
    for level in t.levels:
        avg = np.mean([alpha_zz(t, level, m2) for m2 in range(-level.J2, level.J2 + 1, 2)])
        assert scalar_polarizability(t, level) == pytest.approx(avg, abs=1e-12)


def test_rotor_stark_second_order():
    b0, d0, field = 1.0, 1.0, 1e-3
    t = rotor_table(b0, d0, 6)
    keys, v = stark_first_order(t, 0, field)
    h = np.diag([t.energy(k) for k in keys]) + v
    e0 = np.linalg.eigvalsh(h)[0]
    # -alpha E^2 / 2 with alpha = 2 d^2 / (3 * 2 B)
    assert e0 == pytest.approx(-(d0 * field) ** 2 / (6 * b0), rel=1e-5)
    assert alpha_zz(t, t.level("J0"), 0) == pytest.approx(d0**2 / (3 * b0))
