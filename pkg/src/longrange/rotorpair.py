"""Two polar rigid rotors: coupled-rotor Hamiltonians, exact low-order blocks, PEC scans.

Body-fixed (BF) states are |JA MA JB MB> with the quantisation axis along the
intermolecular vector.  Space-fixed (SF) states are fully coupled
|((JA JB) JAB L) J M> with L the partial wave; the electric field points
along the SF z axis.  All quantities are in atomic units.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass, field, replace
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
from numpy.typing import NDArray
from scipy.optimize import linear_sum_assignment

from .angular import (Surd, SurdSum, cg_value, clebsch_gordan, ninej_value, sixj_value,
                      triangle_ok)
from .constants import AMU_IN_ME, CM1_IN_HARTREE, DEBYE_IN_AU, kvcm_to_au
from .multipole import f_coeff, f_coeff_exact
from .numerics import eig_sym, eig_sym_lowest
from .perturb import (CnCoefficient, DegenerateBlock, EffectiveMatrix, extract_cn,
                      first_order_block, second_order_block)
from .spectra import DataError, rotor_reduced_dipole, rotor_reduced_dipole_exact, rotor_table


@dataclass(frozen=True)
class RotorSpecies:
    name: str
    B0: float
    d0: float
    mass: float  # electron masses

    def __post_init__(self):
        if self.B0 <= 0 or self.d0 < 0 or self.mass <= 0:
            raise ValueError("need B0 > 0, d0 >= 0, mass > 0")

    @classmethod
    def from_dict(cls, data: dict) -> "RotorSpecies":
        try:
            if "B0_au" in data:
                b0 = float(data["B0_au"])
            else:
                b0 = float(data["B0_cm1"]) * CM1_IN_HARTREE
            if "d0_au" in data:
                d0 = float(data["d0_au"])
            else:
                d0 = float(data["d0_debye"]) * DEBYE_IN_AU
            mass = float(data["mass_amu"]) * AMU_IN_ME
            return cls(str(data.get("name", "rotor")), b0, d0, mass)
        except KeyError as exc:
            raise DataError(f"rotor file lacks {exc}") from None

    @classmethod
    def load(cls, path: str | Path) -> "RotorSpecies":
        try:
            data = json.loads(Path(path).read_text())
        except json.JSONDecodeError as exc:
            raise DataError(f"{path}: line {exc.lineno}: {exc.msg}") from None
        return cls.from_dict(data)

    def table(self, jmax: int):
        return rotor_table(self.B0, self.d0, jmax, self.name)


def rstar(species: RotorSpecies) -> float:
    """Distance (d0^2 / B0)^(1/3) where dipole coupling matches the rotational spacing."""
    return (species.d0**2 / species.B0) ** (1.0 / 3.0)


def pair_reduced_mass(a: RotorSpecies, b: RotorSpecies) -> float:
    return a.mass * b.mass / (a.mass + b.mass)


def vdw00(a: RotorSpecies, b: RotorSpecies | None = None) -> CnCoefficient:
    """C6 of two ground-state rotors from the J=1 intermediates only."""
    b = a if b is None else b
    value = -(a.d0**2) * b.d0**2 / (3.0 * (a.B0 + b.B0))
    return CnCoefficient(6, value, np.array([1.0]))


# ---------------------------------------------------------------- exact blocks

def _rotor_element_exact(jp: int, mp: int, j: int, m: int, q: int) -> Surd:
    """<J' M'| Q_1q |J M> / d0, exact (plain integers)."""
    if mp != m + q:
        return Surd.zero()
    red = rotor_reduced_dipole_exact(j, jp)
    if not red:
        return Surd.zero()
    return clebsch_gordan(2 * j, 2 * m, 2, 2 * q, 2 * jp, 2 * mp) / Surd(1, 2 * jp + 1) * red


BF11_STATES = [(ma, mb) for ma in (1, 0, -1) for mb in (1, 0, -1)]


def vdw11_matrix_exact() -> list[list[SurdSum]]:
    """9x9 second-order matrix of the (1,1) level in units d0^4/B0 (R^-6 coefficient)."""
    energy = {j: j * (j + 1) for j in (0, 1, 2)}
    mats = [[SurdSum() for _ in BF11_STATES] for _ in BF11_STATES]
    for c, (ma, mb) in enumerate(BF11_STATES):
        for r, (mpa, mpb) in enumerate(BF11_STATES):
            if mpa + mpb != ma + mb:
                continue
            total = SurdSum()
            for ja in (0, 2):
                for jb in (0, 2):
                    gap = energy[ja] + energy[jb] - 2 * energy[1]
                    for mqa in range(-ja, ja + 1):
                        for mqb in range(-jb, jb + 1):
                            right = SurdSum()
                            left = SurdSum()
                            for m in (-1, 0, 1):
                                ea = _rotor_element_exact(ja, mqa, 1, ma, m)
                                eb = _rotor_element_exact(jb, mqb, 1, mb, -m)
                                if ea and eb:
                                    right = right + SurdSum.of(f_coeff_exact(1, 1, m) * ea * eb)
                                ea = _rotor_element_exact(1, mpa, ja, mqa, m)
                                eb = _rotor_element_exact(1, mpb, jb, mqb, -m)
                                if ea and eb:
                                    left = left + SurdSum.of(f_coeff_exact(1, 1, m) * ea * eb)
                            if right.terms and left.terms:
                                total = total + left * right / Fraction(-gap)
            mats[r][c] = total
    return mats


@dataclass(frozen=True)
class ExactEigen:
    mtot: int
    symmetry: str
    value: SurdSum
    vector: dict[tuple[int, int], SurdSum]  # un-normalised coefficients over (MA, MB)


def _eig2_exact(a: SurdSum, b: SurdSum, c: SurdSum) -> list[tuple[SurdSum, tuple[SurdSum, SurdSum]]]:
    """Eigenpairs of [[a, b], [b, c]] with rational a, c and rational b^2."""
    half_diff = (a - c) / 2
    disc = (half_diff * half_diff + b * b).as_fraction()
    root = SurdSum.sqrt_of(disc)
    mean = (a + c) / 2
    out = []
    for lam in (mean - root, mean + root):
        if b.terms:
            vec = (b, lam - a)
        else:
            vec = (SurdSum.of(1), SurdSum()) if lam == a else (SurdSum(), SurdSum.of(1))
        out.append((lam, vec))
    return out


def vdw11_exact() -> list[ExactEigen]:
    """Symmetry-adapted exact eigenpairs of the (1,1) block, units d0^4/B0."""
    w = vdw11_matrix_exact()
    ix = {s: i for i, s in enumerate(BF11_STATES)}

    def el(s1, s2):
        return w[ix[s1]][ix[s2]]

    inv_sqrt2 = SurdSum.sqrt_of(Fraction(1, 2))
    out: list[ExactEigen] = []
    for m in (1, -1):
        s = (m, m)
        out.append(ExactEigen(2 * m, "stretched", el(s, s), {s: SurdSum.of(1)}))
    for m in (1, -1):
        p, q = (m, 0), (0, m)
        for sign, label in ((1, "symmetric"), (-1, "antisymmetric")):
            val = (el(p, p) + el(q, q) + el(p, q) * (2 * sign)) / 2
            out.append(ExactEigen(m, label, val, {p: SurdSum.of(1), q: SurdSum.of(sign)}))
    p, z, q = (1, -1), (0, 0), (-1, 1)
    anti = (el(p, p) + el(q, q) - el(p, q) * 2) / 2
    out.append(ExactEigen(0, "antisymmetric", anti, {p: SurdSum.of(1), q: SurdSum.of(-1)}))
    a = el(z, z)
    b = (el(z, p) + el(z, q)) * inv_sqrt2
    c = (el(p, p) + el(q, q) + el(p, q) * 2) / 2
    for lam, (x, y) in _eig2_exact(a, b, c):
        coef = y * inv_sqrt2
        out.append(ExactEigen(0, "symmetric", lam, {z: x, p: coef, q: coef}))
    return out


def vdw11_block(species: RotorSpecies, jmax: int = 2) -> EffectiveMatrix:
    """Float second-order matrix of the (1,1) level from the general engine."""
    t = species.table(jmax)
    j1 = t.level("J1")
    block = DegenerateBlock.from_pairs(t, t, [(j1, j1)])
    return second_order_block(block, t, t, (1, 1, 1, 1))


def c3_matrix_exact() -> tuple[list[tuple[tuple[int, int], tuple[int, int]]], list[list[Fraction]]]:
    """First-order (1,0)+(0,1) block in units d0^2 (R^-3 coefficient)."""
    states = [((1, m), (0, 0)) for m in (1, 0, -1)] + [((0, 0), (1, m)) for m in (1, 0, -1)]
    n = len(states)
    mat = [[Fraction(0)] * n for _ in range(n)]
    for c, ((ja, ma), (jb, mb)) in enumerate(states):
        for r, ((jpa, mpa), (jpb, mpb)) in enumerate(states):
            total = SurdSum()
            for m in (-1, 0, 1):
                ea = _rotor_element_exact(jpa, mpa, ja, ma, m)
                eb = _rotor_element_exact(jpb, mpb, jb, mb, -m)
                if ea and eb:
                    total = total + SurdSum.of(f_coeff_exact(1, 1, m) * ea * eb)
            mat[r][c] = total.as_fraction()
    return states, mat


@dataclass(frozen=True)
class C3Block:
    values: dict[int, tuple[Fraction, Fraction]]  # |M| -> (lower, upper), units d0^2
    vectors: dict[tuple[int, str], dict]  # (M, 'lower'|'upper') -> coefficients


def c3_block(a: RotorSpecies, b: RotorSpecies | None = None) -> C3Block:
    """Resonant (1,0)+(0,1) eigenvalues; only defined for identical rotors."""
    if b is not None and (b.B0 != a.B0 or b.d0 != a.d0):
        raise ValueError("(1,0) and (0,1) are not degenerate for different rotors")
    states, mat = c3_matrix_exact()
    values, vectors = {}, {}
    for m in (1, 0, -1):
        i = states.index(((1, m), (0, 0)))
        j = states.index(((0, 0), (1, m)))
        off = mat[i][j]
        if mat[i][i] != 0 or mat[j][j] != 0:
            raise AssertionError("unexpected diagonal first-order term")
        lo, hi = sorted((-off, off))
        values[abs(m)] = (lo, hi)
        sign_lo = -1 if off > 0 else 1
        vectors[(m, "lower")] = {states[i]: 1, states[j]: sign_lo}
        vectors[(m, "upper")] = {states[i]: 1, states[j]: -sign_lo}
    return C3Block(values, vectors)


# ---------------------------------------------------------------- BF Hamiltonian

@dataclass(frozen=True)
class BFState:
    JA: int
    MA: int
    JB: int
    MB: int


def bf_basis(m_tot: int, j_max: int, pairs: Iterable[tuple[int, int]] | None = None) -> list[BFState]:
    allowed = set(pairs) if pairs is not None else None
    out = []
    for ja in range(j_max + 1):
        for jb in range(j_max + 1):
            if allowed is not None and (ja, jb) not in allowed:
                continue
            for ma in range(-ja, ja + 1):
                mb = m_tot - ma
                if abs(mb) <= jb:
                    out.append(BFState(ja, ma, jb, mb))
    return out


def _rotor_element(jp: int, mp: int, j: int, m: int, q: int, d0: float) -> float:
    if mp != m + q or abs(jp - j) != 1:
        return 0.0
    return cg_value(2 * j, 2 * m, 2, 2 * q, 2 * jp, 2 * mp) / math.sqrt(2 * jp + 1) * rotor_reduced_dipole(j, jp, d0)


def bf_matrices(a: RotorSpecies, b: RotorSpecies, m_tot: int, j_max: int,
                pairs: Iterable[tuple[int, int]] | None = None) -> tuple[list[BFState], NDArray, NDArray]:
    """(basis, rotational diagonal, R^-3 dipole-dipole coefficient matrix)."""
    if j_max < 1 and pairs is None:
        raise ValueError("j_max must be >= 1")
    basis = bf_basis(m_tot, j_max, pairs)
    n = len(basis)
    h0 = np.diag([a.B0 * s.JA * (s.JA + 1) + b.B0 * s.JB * (s.JB + 1) for s in basis])
    v3 = np.zeros((n, n))
    for c, k in enumerate(basis):
        for r, bra in enumerate(basis):
            total = 0.0
            for m in (-1, 0, 1):
                ea = _rotor_element(bra.JA, bra.MA, k.JA, k.MA, m, a.d0)
                if ea == 0.0:
                    continue
                eb = _rotor_element(bra.JB, bra.MB, k.JB, k.MB, -m, b.d0)
                total += f_coeff(1, 1, m) * ea * eb
            v3[r, c] = total
    return basis, h0, _mirror_lower(v3)


def bf_hamiltonian(a: RotorSpecies, b: RotorSpecies, m_tot: int, j_max: int, r: float,
                   pairs: Iterable[tuple[int, int]] | None = None) -> NDArray:
    if r <= 0:
        raise ValueError("R must be positive")
    _, h0, v3 = bf_matrices(a, b, m_tot, j_max, pairs)
    return h0 + v3 / r**3


def two_channel_bf(species: RotorSpecies, r: float) -> tuple[float, float, float, float]:
    """Eigenvalues of the {(0,0), (1,1)} M_tot = 0 restriction for a like pair."""
    b0 = species.B0
    x = rstar(species) ** 6 / (6.0 * r**6)
    root = math.sqrt(1.0 + x)
    # 1 - sqrt(1+x) written without cancellation
    return -2 * b0 * x / (1 + root), 4 * b0, 4 * b0, 2 * b0 * (1 + root)


def two_channel_sf(species: RotorSpecies, r: float, mu: float | None = None) -> tuple[float, float]:
    """Eigenvalues of the {((00)00)00, ((11)22)00} restriction with centrifugal energy."""
    h = 2 * species.B0 + (0.0 if mu is None else 3.0 / (2.0 * mu * r**2))
    x = 2.0 * species.d0**4 / (3.0 * h * h * r**6)
    root = math.sqrt(1.0 + x)
    return -h * x / (1 + root), h * (1 + root)


def two_channel_analytic(species: RotorSpecies, r: float, frame: str = "BF", mu: float | None = None):
    if frame.upper() == "BF":
        return two_channel_bf(species, r)
    if frame.upper() == "SF":
        return two_channel_sf(species, r, mu)
    raise ValueError("frame must be BF or SF")


def resonant_sf_blocks(species: RotorSpecies, r: float) -> dict[str, NDArray]:
    """The 2x2 matrices V+ and V- over ((10)10)1 and ((10)12)1 symmetric/antisymmetric states."""
    k = species.d0**2 / (3.0 * r**3)
    s2 = math.sqrt(2.0)
    b = 2 * species.B0
    return {
        "+": np.array([[b, s2 * k], [s2 * k, b - k]]),
        "-": np.array([[b, -s2 * k], [-s2 * k, b + k]]),
    }


def centrifugal_ratio(m1: float, m2: float, r: float, re: float, b0: float | None = None
                      ) -> tuple[float, float]:
    """(hbar^2 / (B0 mu R^2), 4 m1 m2 / (m1+m2)^2 (re/R)^2) for a pair of like diatomics.

    m1, m2 are the atomic masses of one diatomic (electron masses), re its bond
    length.  Without ``b0`` the rigid-rotor value 1/(2 mu_mol re^2) is used, and
    the two numbers coincide.
    """
    mu_mol = m1 * m2 / (m1 + m2)
    mu_complex = (m1 + m2) / 2.0
    if b0 is None:
        b0 = 1.0 / (2.0 * mu_mol * re**2)
    exact = 1.0 / (b0 * mu_complex * r**2)
    approx = 4.0 * m1 * m2 / (m1 + m2) ** 2 * (re / r) ** 2
    return exact, approx


# ---------------------------------------------------------------- SF basis

@dataclass(frozen=True, order=True)
class CoupledSFState:
    JA: int
    JB: int
    JAB: int
    L: int
    J: int
    M: int

    def label(self) -> str:
        return f"(({self.JA}{self.JB}){self.JAB}{self.L}){self.J}"


@dataclass(frozen=True, order=True)
class UncoupledSFState:
    JA: int
    MA: int
    JB: int
    MB: int
    L: int
    ML: int


@dataclass(frozen=True)
class Truncation:
    jrot_max: int = 6
    l_max: int = 8
    j_max: int | None = 3
    j_values: tuple[int, ...] | None = None
    l_parity: int | None = None  # 0 even, 1 odd
    pairs: tuple[tuple[int, int], ...] | None = None
    states: tuple[tuple[int, int, int, int, int], ...] | None = None  # explicit (JA,JB,JAB,L,J)


def coupled_basis(m: int, trunc: Truncation) -> list[CoupledSFState]:
    out = []
    if trunc.states is not None:
        return [CoupledSFState(*s, m) for s in trunc.states if abs(m) <= s[4]]
    for ja in range(trunc.jrot_max + 1):
        for jb in range(trunc.jrot_max + 1):
            if trunc.pairs is not None and (ja, jb) not in trunc.pairs:
                continue
            for jab in range(abs(ja - jb), ja + jb + 1):
                for l in range(trunc.l_max + 1):
                    if trunc.l_parity is not None and l % 2 != trunc.l_parity:
                        continue
                    for j in range(abs(jab - l), jab + l + 1):
                        if abs(m) > j:
                            continue
                        if trunc.j_max is not None and j > trunc.j_max:
                            continue
                        if trunc.j_values is not None and j not in trunc.j_values:
                            continue
                        out.append(CoupledSFState(ja, jb, jab, l, j, m))
    return out


def uncoupled_basis(m: int, jrot_max: int, l_max: int) -> list[UncoupledSFState]:
    out = []
    for ja in range(jrot_max + 1):
        for jb in range(jrot_max + 1):
            for l in range(l_max + 1):
                for ma in range(-ja, ja + 1):
                    for mb in range(-jb, jb + 1):
                        ml = m - ma - mb
                        if abs(ml) <= l:
                            out.append(UncoupledSFState(ja, ma, jb, mb, l, ml))
    return out


def couple_basis(jrot_max: int, l_max: int, m: int, j: int | None = None
                 ) -> tuple[list[UncoupledSFState], list[CoupledSFState], NDArray]:
    """Matrix T[u, c] = <uncoupled u | coupled c> from the double CG sum."""
    unc = uncoupled_basis(m, jrot_max, l_max)
    trunc = Truncation(jrot_max, l_max, None, None if j is None else (j,))
    cpl = coupled_basis(m, trunc)
    index = {}
    for i, u in enumerate(unc):
        index.setdefault((u.JA, u.JB, u.L), []).append(i)
    t = np.zeros((len(unc), len(cpl)))
    for c, s in enumerate(cpl):
        for i in index.get((s.JA, s.JB, s.L), []):
            u = unc[i]
            mab = u.MA + u.MB
            if abs(mab) > s.JAB:
                continue
            c1 = cg_value(2 * s.JAB, 2 * mab, 2 * s.L, 2 * u.ML, 2 * s.J, 2 * s.M)
            if c1 == 0.0:
                continue
            c2 = cg_value(2 * u.JA, 2 * u.MA, 2 * u.JB, 2 * u.MB, 2 * s.JAB, 2 * mab)
            t[i, c] = c1 * c2
    return unc, cpl, t


# ---------------------------------------------------------------- SF elements

def sf_dd_element_uncoupled(bra: UncoupledSFState, ket: UncoupledSFState,
                            a: RotorSpecies, b: RotorSpecies, r: float = 1.0) -> float:
    """Dipole-dipole element between uncoupled SF states (partial-wave Gaunt form)."""
    if bra.MA + bra.MB + bra.ML != ket.MA + ket.MB + ket.ML:
        return 0.0
    if abs(bra.JA - ket.JA) != 1 or abs(bra.JB - ket.JB) != 1:
        return 0.0
    l = 2
    c_l = cg_value(2 * ket.L, 0, 2 * l, 0, 2 * bra.L, 0)
    if c_l == 0.0:
        return 0.0
    red_a = rotor_reduced_dipole(ket.JA, bra.JA, a.d0) / math.sqrt(2 * bra.JA + 1)
    red_b = rotor_reduced_dipole(ket.JB, bra.JB, b.d0) / math.sqrt(2 * bra.JB + 1)
    pref = -math.sqrt(math.factorial(4) / (math.factorial(2) * math.factorial(2))) / r**3
    pref *= math.sqrt((2 * ket.L + 1) / (2 * bra.L + 1)) * c_l * red_a * red_b
    total = 0.0
    for ma in (-1, 0, 1):
        for mb in (-1, 0, 1):
            m = ma + mb
            c1 = cg_value(2, 2 * ma, 2, 2 * mb, 4, 2 * m)
            if c1 == 0.0:
                continue
            c2 = cg_value(2 * ket.L, 2 * ket.ML, 4, -2 * m, 2 * bra.L, 2 * bra.ML)
            c3 = cg_value(2 * ket.JA, 2 * ket.MA, 2, 2 * ma, 2 * bra.JA, 2 * bra.MA)
            c4 = cg_value(2 * ket.JB, 2 * ket.MB, 2, 2 * mb, 2 * bra.JB, 2 * bra.MB)
            total += (-1) ** (m % 2) * c1 * c2 * c3 * c4
    return pref * total


def q10_element_uncoupled(bra: UncoupledSFState, ket: UncoupledSFState, species: RotorSpecies,
                          which: str = "A") -> float:
    same_other = ((bra.JB, bra.MB) == (ket.JB, ket.MB)) if which == "A" else ((bra.JA, bra.MA) == (ket.JA, ket.MA))
    if not same_other or (bra.L, bra.ML) != (ket.L, ket.ML):
        return 0.0
    if which == "A":
        return _rotor_element(bra.JA, bra.MA, ket.JA, ket.MA, 0, species.d0)
    return _rotor_element(bra.JB, bra.MB, ket.JB, ket.MB, 0, species.d0)


def sf_dd_element(bra: CoupledSFState, ket: CoupledSFState, a: RotorSpecies, b: RotorSpecies,
                  r: float = 1.0) -> float:
    """Dipole-dipole element in the fully coupled basis (9j/6j contraction)."""
    if bra.J != ket.J or bra.M != ket.M:
        return 0.0
    if abs(bra.JA - ket.JA) != 1 or abs(bra.JB - ket.JB) != 1:
        return 0.0
    c_l = cg_value(2 * ket.L, 0, 4, 0, 2 * bra.L, 0)
    if c_l == 0.0:
        return 0.0
    nine = ninej_value(2 * bra.JA, 2 * bra.JB, 2 * bra.JAB, 2 * ket.JA, 2 * ket.JB, 2 * ket.JAB, 2, 2, 4)
    if nine == 0.0:
        return 0.0
    six = sixj_value(2 * ket.JAB, 2 * ket.L, 2 * ket.J, 2 * bra.L, 2 * bra.JAB, 4)
    if six == 0.0:
        return 0.0
    phase = (-1) ** ((ket.J + ket.JAB + bra.L) % 2)
    red = rotor_reduced_dipole(ket.JA, bra.JA, a.d0) * rotor_reduced_dipole(ket.JB, bra.JB, b.d0)
    return (-math.sqrt(30.0) / r**3 * phase * c_l * nine * six
            * math.sqrt((2 * ket.L + 1) * (2 * ket.JAB + 1) * (2 * bra.JAB + 1)) * red)


def q10_element(bra: CoupledSFState, ket: CoupledSFState, species: RotorSpecies, which: str = "A") -> float:
    """<bra| Q_10 of molecule ``which`` |ket> in the fully coupled basis."""
    if bra.M != ket.M or bra.L != ket.L or abs(bra.J - ket.J) > 1:
        return 0.0
    if which == "A":
        if bra.JB != ket.JB or abs(bra.JA - ket.JA) != 1:
            return 0.0
        j1p, j1, j2 = bra.JA, ket.JA, ket.JB
        six1 = sixj_value(2 * j1, 2 * j2, 2 * ket.JAB, 2 * bra.JAB, 2, 2 * j1p)
        phase1 = j1p + j2 + ket.JAB + bra.JAB
    elif which == "B":
        if bra.JA != ket.JA or abs(bra.JB - ket.JB) != 1:
            return 0.0
        j1p, j1, j2 = bra.JB, ket.JB, ket.JA
        six1 = sixj_value(2 * j1p, 2 * bra.JAB, 2 * j2, 2 * ket.JAB, 2 * j1, 2)
        phase1 = j2 + j1
    else:
        raise ValueError("which must be 'A' or 'B'")
    if six1 == 0.0:
        return 0.0
    six2 = sixj_value(2 * ket.JAB, 2 * ket.L, 2 * ket.J, 2 * bra.J, 2, 2 * bra.JAB)
    if six2 == 0.0:
        return 0.0
    cg = cg_value(2 * ket.J, 2 * ket.M, 2, 0, 2 * bra.J, 2 * bra.M)
    if cg == 0.0:
        return 0.0
    phase = (-1) ** ((phase1 + ket.L + ket.J) % 2)
    red = rotor_reduced_dipole(j1, j1p, species.d0)
    return (phase * six1 * six2 * math.sqrt((2 * ket.JAB + 1) * (2 * bra.JAB + 1) * (2 * ket.J + 1))
            * cg * red)


def stark_element(bra: CoupledSFState, ket: CoupledSFState, a: RotorSpecies, b: RotorSpecies,
                  field: float) -> float:
    """<bra| -E (Q10(A) + Q10(B)) |ket>."""
    return -field * (q10_element(bra, ket, a, "A") + q10_element(bra, ket, b, "B"))


# ---------------------------------------------------------------- SF Hamiltonian

@dataclass
class SFMatrices:
    basis: list[CoupledSFState]
    rotation: NDArray  # diagonal, hartree
    centrifugal: NDArray  # diagonal L(L+1)/2mu, multiplies R^-2
    dipole: NDArray  # R^-3 coefficient
    q10: NDArray  # Q10(A) + Q10(B)

    def hamiltonian(self, r: float, field: float = 0.0, centrifugal: bool = True) -> NDArray:
        h = self.dipole / r**3 - field * self.q10
        h[np.diag_indices_from(h)] += self.rotation + (self.centrifugal / r**2 if centrifugal else 0.0)
        return h


def sf_matrices(a: RotorSpecies, b: RotorSpecies, m: int, trunc: Truncation,
                mu: float | None = None) -> SFMatrices:
    basis = coupled_basis(m, trunc)
    index = {s: i for i, s in enumerate(basis)}
    n = len(basis)
    mu = pair_reduced_mass(a, b) if mu is None else mu
    rot = np.array([a.B0 * s.JA * (s.JA + 1) + b.B0 * s.JB * (s.JB + 1) for s in basis])
    cen = np.array([s.L * (s.L + 1) / (2.0 * mu) for s in basis])
    dip = np.zeros((n, n))
    q10 = np.zeros((n, n))
    for c, k in enumerate(basis):
        for ja in (k.JA - 1, k.JA + 1):
            for jb in (k.JB - 1, k.JB + 1):
                if ja < 0 or jb < 0:
                    continue
                for l in (k.L - 2, k.L, k.L + 2):
                    if l < 0:
                        continue
                    for jab in range(max(abs(ja - jb), k.JAB - 2), min(ja + jb, k.JAB + 2) + 1):
                        r = index.get(CoupledSFState(ja, jb, jab, l, k.J, m))
                        if r is not None:
                            dip[r, c] = sf_dd_element(basis[r], k, a, b)
        for j in (k.J - 1, k.J, k.J + 1):
            for jab in (k.JAB - 1, k.JAB, k.JAB + 1):
                for ja, jb, which, sp in ((k.JA - 1, k.JB, "A", a), (k.JA + 1, k.JB, "A", a),
                                          (k.JA, k.JB - 1, "B", b), (k.JA, k.JB + 1, "B", b)):
                    r = index.get(CoupledSFState(ja, jb, jab, k.L, j, m))
                    if r is not None:
                        q10[r, c] += q10_element(basis[r], k, sp, which)
    return SFMatrices(basis, rot, cen, _mirror_lower(dip), _mirror_lower(q10))


def _mirror_lower(m: NDArray) -> NDArray:
    """Exactly symmetric copy built from the lower triangle."""
    low = np.tril(m)
    return low + np.tril(m, -1).T


def sf_hamiltonian(a: RotorSpecies, b: RotorSpecies, m: int, trunc: Truncation, r: float,
                   field: float = 0.0, mu: float | None = None) -> tuple[list[CoupledSFState], NDArray]:
    mats = sf_matrices(a, b, m, trunc, mu)
    return mats.basis, mats.hamiltonian(r, field)


def isolated_induced_dipole(species: RotorSpecies, field: float, jmax: int = 6) -> float:
    """<Q10> in the lowest M=0 Stark state of one rotor."""
    n = jmax + 1
    h = np.diag([species.B0 * j * (j + 1) for j in range(n)]).astype(float)
    q = np.zeros((n, n))
    for j in range(jmax):
        v = _rotor_element(j + 1, 0, j, 0, 0, species.d0)
        q[j + 1, j] = q[j, j + 1] = v
    w, vec = eig_sym(h - field * q)
    g = vec[:, 0]
    return float(g @ q @ g)


# ---------------------------------------------------------------- scans

@dataclass
class SFSetup:
    a: RotorSpecies
    b: RotorSpecies
    m: int = 0
    trunc: Truncation = field(default_factory=Truncation)
    field: float = 0.0  # atomic units
    centrifugal: bool = True
    mu: float | None = None

    def describe(self) -> dict:
        t = self.trunc
        return {
            "frame": "SF", "species": [self.a.name, self.b.name], "M": self.m,
            "jrot_max": t.jrot_max, "l_max": t.l_max, "j_max": t.j_max,
            "field_au": self.field, "centrifugal": self.centrifugal,
        }


@dataclass
class BFSetup:
    a: RotorSpecies
    b: RotorSpecies
    m: int = 0
    j_max: int = 6
    pairs: tuple[tuple[int, int], ...] | None = None

    def describe(self) -> dict:
        return {"frame": "BF", "species": [self.a.name, self.b.name], "M_tot": self.m, "jrot_max": self.j_max}


@dataclass
class PECResult:
    R: NDArray
    energies: NDArray  # (nR, n_keep) ascending per row
    order: NDArray  # (nR, n_curves): tracked curve -> column of ``energies``
    labels: list[str]
    induced_dipole: NDArray | None = None
    weights: NDArray | None = None
    metadata: dict = field(default_factory=dict)

    def tracked(self) -> NDArray:
        return np.take_along_axis(self.energies, self.order, axis=1)


def _symmetry_blocks(mats_h0: NDArray, couplings: Sequence[NDArray]) -> list[NDArray]:
    """Connected components of the coupling graph (exact block structure)."""
    from scipy.sparse import csr_matrix
    from scipy.sparse.csgraph import connected_components
    adj = np.zeros_like(mats_h0, dtype=bool)
    for c in couplings:
        adj |= c != 0.0
    ncomp, lab = connected_components(csr_matrix(adj), directed=False)
    return [np.where(lab == k)[0] for k in range(ncomp)]


def _diagonalize_blocks(h: NDArray, blocks: list[NDArray], n_keep: int) -> tuple[NDArray, NDArray]:
    vals, vecs = [], []
    n = h.shape[0]
    for idx in blocks:
        w, v = eig_sym_lowest(h[np.ix_(idx, idx)], min(n_keep, len(idx)))
        full = np.zeros((n, len(w)))
        full[idx] = v
        vals.append(w)
        vecs.append(full)
    w = np.concatenate(vals)
    v = np.concatenate(vecs, axis=1)
    order = np.argsort(w, kind="stable")[:n_keep]
    return w[order], v[:, order]


def _track(prev: NDArray, cur: NDArray, n_curves: int) -> NDArray:
    overlap = np.abs(prev[:, :n_curves].T @ cur)
    rows, cols = linear_sum_assignment(-overlap)
    out = np.empty(n_curves, dtype=int)
    out[rows] = cols
    return out


def _scan(basis_labels, blocks, hamiltonian, q10, r_grid, n_curves, want_dipole, metadata) -> PECResult:
    r_grid = np.asarray(r_grid, dtype=float)
    if r_grid.size == 0 or np.any(np.diff(r_grid) <= 0):
        raise ValueError("R grid must be non-empty and strictly increasing")
    n = len(basis_labels)
    n_keep = min(n, max(2 * n_curves, n_curves + 5))
    n_curves = min(n_curves, n)
    energies = np.zeros((r_grid.size, n_keep))
    order = np.zeros((r_grid.size, n_curves), dtype=int)
    dip = np.zeros(r_grid.size) if want_dipole else None
    weights = np.zeros((r_grid.size, n_curves, n))
    prev = None
    # track from large R inward, where states have clean asymptotic character
    for i in range(r_grid.size - 1, -1, -1):
        w, v = _diagonalize_blocks(hamiltonian(r_grid[i]), blocks, n_keep)
        energies[i] = w
        if prev is None:
            order[i] = np.arange(n_curves)
        else:
            order[i] = _track(prev, v, n_curves)
        tracked = v[:, order[i]]
        prev = tracked
        weights[i] = (tracked * tracked).T
        if want_dipole:
            g = v[:, 0]
            dip[i] = float(g @ q10 @ g)
    last = weights[-1]
    labels = [basis_labels[int(np.argmax(last[k]))] for k in range(n_curves)]
    return PECResult(r_grid, energies, order, labels, dip, weights, metadata)


def pec_scan(setup: SFSetup | BFSetup, r_grid: Sequence[float], n_curves: int = 20,
             with_dipole: bool = False) -> PECResult:
    """Adiabatic curves on a grid, tracked by eigenvector overlap."""
    meta = dict(setup.describe())
    warnings_list = []
    if isinstance(setup, BFSetup):
        basis, h0, v3 = bf_matrices(setup.a, setup.b, setup.m, setup.j_max, setup.pairs)
        labels = [f"|{s.JA}{s.MA},{s.JB}{s.MB}>" for s in basis]
        blocks = _symmetry_blocks(h0, [v3])
        q10 = np.zeros_like(h0)

        def ham(r):
            return h0 + v3 / r**3
    else:
        mats = sf_matrices(setup.a, setup.b, setup.m, setup.trunc, setup.mu)
        basis = mats.basis
        labels = [s.label() for s in basis]
        couplings = [mats.dipole] + ([mats.q10] if setup.field else [])
        blocks = _symmetry_blocks(np.diag(mats.rotation), couplings)
        q10 = mats.q10
        t = setup.trunc
        if setup.field and t.j_max is not None and t.j_max < 2 * t.jrot_max:
            warnings_list.append(f"total J truncated at {t.j_max} in a field")

        def ham(r):
            return mats.hamiltonian(r, setup.field, setup.centrifugal)
    meta["basis_size"] = len(labels)
    meta["warnings"] = warnings_list
    return _scan(labels, blocks, ham, q10, r_grid, n_curves, with_dipole, meta)


def induced_dipole_curve(setup: SFSetup, r_grid: Sequence[float], fields_au: Sequence[float]
                         ) -> dict[float, NDArray]:
    """<Q10(A) + Q10(B)> on the lowest adiabatic state for each field."""
    mats = sf_matrices(setup.a, setup.b, setup.m, setup.trunc, setup.mu)
    rot = np.diag(mats.rotation)
    out = {}
    for f in fields_au:
        blocks = _symmetry_blocks(rot, [mats.dipole] + ([mats.q10] if f else []))
        vals = []
        for r in r_grid:
            _, v = _diagonalize_blocks(mats.hamiltonian(r, f, setup.centrifugal), blocks, 1)
            g = v[:, 0]
            vals.append(float(g @ mats.q10 @ g))
        out[f] = np.array(vals)
    return out
