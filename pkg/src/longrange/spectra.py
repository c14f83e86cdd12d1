"""Species data (levels and reduced multipole elements) and Wigner-Eckart machinery.

Convention for reduced elements:
    <b' J' M'| Q_lm |b J M> = C^{J'M'}_{J M l m} / sqrt(2J'+1) * <b'J'||Q_l||bJ>
with the reverse element <bJ||Q_l||b'J'> = (-1)^(J-J') <b'J'||Q_l||bJ>.

Angular momenta J and projections M are doubled integers (``J2``, ``M2``);
tensor ranks l and their components m are plain integers.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .angular import Surd, cg_value, clebsch_gordan, sixj_value, triangle_ok, wigner_6j

RESONANCE_TOL = 1e-6


class ResonanceError(ValueError):
    pass


class DataError(ValueError):
    pass


@dataclass(frozen=True, order=True)
class LevelKey:
    beta: str
    J2: int

    def __str__(self) -> str:
        j = f"{self.J2 // 2}" if self.J2 % 2 == 0 else f"{self.J2}/2"
        return f"{self.beta}(J={j})"


State = tuple[LevelKey, int]  # (level, doubled M)


@dataclass
class SpectrumTable:
    name: str
    levels: dict[LevelKey, float]
    reduced: dict[tuple[LevelKey, LevelKey, int], float] = field(default_factory=dict)

    def __post_init__(self):
        for key, e in self.levels.items():
            if not math.isfinite(e):
                raise DataError(f"non-finite energy for {key}")
        for (to, frm, l), v in self.reduced.items():
            if to not in self.levels or frm not in self.levels:
                raise DataError(f"reduced element references unknown level {to} / {frm}")
            if not triangle_ok(frm.J2, 2 * l, to.J2):
                raise DataError(f"<{to}||Q{l}||{frm}> violates the triangle rule")

    def level(self, beta: str) -> LevelKey:
        for key in self.levels:
            if key.beta == beta:
                return key
        raise KeyError(f"{self.name}: unknown level {beta!r}")

    def energy(self, key: LevelKey) -> float:
        try:
            return self.levels[key]
        except KeyError:
            raise KeyError(f"{self.name}: unknown level {key}") from None

    def reduced_element(self, to: LevelKey, frm: LevelKey, l: int) -> float:
        """<to||Q_l||frm>, generated from the stored partner when needed."""
        if to not in self.levels or frm not in self.levels:
            raise KeyError(f"{self.name}: unknown level {to if to not in self.levels else frm}")
        v = self.reduced.get((to, frm, l))
        if v is not None:
            return v
        v = self.reduced.get((frm, to, l))
        if v is not None:
            return (-1) ** ((to.J2 - frm.J2) // 2) * v
        return 0.0

    def states(self, keys: Iterable[LevelKey] | None = None) -> list[State]:
        keys = sorted(self.levels, key=lambda k: (self.levels[k], k)) if keys is None else list(keys)
        return [(k, m2) for k in keys for m2 in range(-k.J2, k.J2 + 1, 2)]

    @classmethod
    def from_dict(cls, data: dict) -> "SpectrumTable":
        try:
            name = data.get("name", "species")
            keys = {}
            levels = {}
            for rec in data["levels"]:
                key = LevelKey(str(rec["id"]), int(rec["J2"]))
                if key.beta in keys:
                    raise DataError(f"duplicate level id {key.beta!r}")
                keys[key.beta] = key
                levels[key] = float(rec["energy_au"])
            reduced = {}
            for field_name, rank in (("reduced_charges", 0), ("reduced_dipoles", 1), ("reduced_quadrupoles", 2)):
                for rec in data.get(field_name, []):
                    reduced[(keys[rec["to"]], keys[rec["from"]], rank)] = float(rec["value_au"])
            for rec in data.get("reduced_elements", []):
                reduced[(keys[rec["to"]], keys[rec["from"]], int(rec["rank"]))] = float(rec["value_au"])
        except KeyError as exc:
            raise DataError(f"missing or unknown field {exc}") from None
        return cls(name, levels, reduced)

    @classmethod
    def load(cls, path: str | Path) -> "SpectrumTable":
        text = Path(path).read_text()
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise DataError(f"{path}: line {exc.lineno}: {exc.msg}") from None
        return cls.from_dict(data)


def we_element(table: SpectrumTable, frm: State, to: State, l: int, m: int) -> float:
    """<to| Q_lm |frm> from the reduced element."""
    (kf, mf), (kt, mt) = frm, to
    if mt != mf + 2 * m:
        return 0.0
    red = table.reduced_element(kt, kf, l)
    if red == 0.0:
        return 0.0
    return cg_value(kf.J2, mf, 2 * l, 2 * m, kt.J2, mt) / math.sqrt(kt.J2 + 1) * red


def operator_matrix(table: SpectrumTable, states: Sequence[State], l: int, m: int) -> NDArray:
    """Dense matrix O[i, j] = <state_i| Q_lm |state_j>."""
    n = len(states)
    out = np.zeros((n, n))
    for j, sj in enumerate(states):
        for i, si in enumerate(states):
            if si[1] == sj[1] + 2 * m:
                out[i, j] = we_element(table, sj, si, l, m)
    return out


@dataclass(frozen=True)
class RadialFunction:
    grid: NDArray
    values: NDArray

    def __post_init__(self):
        r = np.asarray(self.grid, dtype=float)
        if r.ndim != 1 or np.any(np.diff(r) <= 0):
            raise ValueError("grid must be strictly increasing")
        norm = np.trapezoid(r * r * np.asarray(self.values) ** 2, r)
        if abs(norm - 1.0) > 1e-6:
            raise ValueError(f"radial function not normalised (norm={norm:.9f})")


def hydrogenic_reduced(upper: RadialFunction, L_up: int, lower: RadialFunction, L_low: int, l: int) -> float:
    """<n'L'||Q_l||nL> = sqrt(2L+1) C^{L'0}_{L0 l0} int r^(l+2) R_n'L' R_nL dr (trapezoid)."""
    if upper.grid.shape != lower.grid.shape or not np.array_equal(upper.grid, lower.grid):
        raise ValueError("radial functions must share the same grid")
    c = cg_value(2 * L_low, 0, 2 * l, 0, 2 * L_up, 0)
    if c == 0.0:
        return 0.0
    r = upper.grid
    radial = np.trapezoid(r ** (l + 2) * upper.values * lower.values, r)
    return math.sqrt(2 * L_low + 1) * c * radial


def fine_structure_factor(tL: int, tS: int, tJ: int, tLp: int, tSp: int, tJp: int, l: int) -> Surd:
    """Exact ratio <(L'S)J'||Q_l||(LS)J> / <L'||Q_l||L> (doubled inputs)."""
    if tS != tSp:
        return Surd.zero()
    phase = (tS + tJ + 2 * l + tLp) // 2
    six = wigner_6j(tL, tS, tJ, tJp, 2 * l, tLp)
    return six * ((-1) ** phase) * Surd(1, (tJ + 1) * (tJp + 1))


def fine_structure_reduced(orbital_reduced: float, tL: int, tS: int, tJ: int,
                           tLp: int, tSp: int, tJp: int, l: int) -> float:
    if tS != tSp:
        warnings.warn("spin changes between levels: element set to zero", RuntimeWarning)
        return 0.0
    return float(fine_structure_factor(tL, tS, tJ, tLp, tSp, tJp, l)) * orbital_reduced


def rotor_reduced_dipole(J: int, Jp: int, d0: float) -> float:
    """<J'||Q_1||J> = sqrt(2J+1) C^{J'0}_{J0 10} d0 for a rigid polar rotor."""
    return math.sqrt(2 * J + 1) * cg_value(2 * J, 0, 2, 0, 2 * Jp, 0) * d0


def rotor_reduced_dipole_exact(J: int, Jp: int) -> Surd:
    return Surd(1, 2 * J + 1) * clebsch_gordan(2 * J, 0, 2, 0, 2 * Jp, 0)


def rotor_table(B0: float, d0: float, jmax: int, name: str = "rotor") -> SpectrumTable:
    """Rigid-rotor levels J = 0..jmax with energies B0 J(J+1)."""
    keys = [LevelKey(f"J{j}", 2 * j) for j in range(jmax + 1)]
    levels = {k: B0 * j * (j + 1) for j, k in enumerate(keys)}
    reduced = {(keys[j + 1], keys[j], 1): rotor_reduced_dipole(j, j + 1, d0) for j in range(jmax)}
    return SpectrumTable(name, levels, reduced)


def _denominator(gap: float, omega: float, imaginary: bool, pair: str) -> float:
    if imaginary:
        return gap * gap + omega * omega
    if omega != 0.0 and abs(abs(omega) - abs(gap)) < RESONANCE_TOL:
        raise ResonanceError(f"frequency {omega} resonant with transition {pair} (gap {gap})")
    return gap * gap - omega * omega


def alpha_zz(table: SpectrumTable, level: LevelKey, M2: int, omega: float = 0.0,
             imaginary: bool = False) -> float:
    """Dipole polarizability alpha_zz of |level, M> at real or imaginary frequency."""
    e0 = table.energy(level)
    terms = []
    for other in table.levels:
        if other == level:
            continue
        if abs(M2) > other.J2:
            continue
        up = we_element(table, (level, M2), (other, M2), 1, 0)
        down = we_element(table, (other, M2), (level, M2), 1, 0)
        if up == 0.0 and down == 0.0:
            continue
        gap = table.levels[other] - e0
        den = _denominator(gap, omega, imaginary, f"{level}->{other}")
        if den == 0.0:
            raise ResonanceError(f"degenerate dipole-coupled levels {level} and {other}")
        terms.append(2.0 * gap * up * down / den)
    return math.fsum(terms)


@dataclass(frozen=True)
class PolarizabilityComponent:
    k: int
    value: float


def alpha_decompose(table: SpectrumTable, level: LevelKey, omega: float = 0.0,
                    imaginary: bool = False) -> list[PolarizabilityComponent]:
    """Rank-0 and rank-2 parts alpha_(11)k of the z-polarizability."""
    e0 = table.energy(level)
    tJ = level.J2
    out = []
    for k in (0, 2):
        terms = []
        for other in table.levels:
            if other == level:
                continue
            red_up = table.reduced_element(other, level, 1)
            red_down = table.reduced_element(level, other, 1)
            if red_up == 0.0:
                continue
            gap = table.levels[other] - e0
            den = _denominator(gap, omega, imaginary, f"{level}->{other}")
            six = sixj_value(2, 2, 2 * k, tJ, tJ, other.J2)
            terms.append(2.0 * gap * red_down * red_up / den * six)
        phase = (-1) ** ((tJ + k) % 2)
        value = phase * math.sqrt(2 * k + 1) * math.fsum(terms)
        out.append(PolarizabilityComponent(k, value))
    return out


def recompose_alpha_zz(components: Sequence[PolarizabilityComponent], J2: int, M2: int) -> float:
    total = 0.0
    for comp in components:
        c1 = cg_value(2, 0, 2, 0, 2 * comp.k, 0)
        c2 = cg_value(J2, M2, 2 * comp.k, 0, J2, M2)
        total += c1 * c2 / math.sqrt(J2 + 1) * comp.value
    return total


def scalar_polarizability(table: SpectrumTable, level: LevelKey, omega: float = 0.0,
                          imaginary: bool = False) -> float:
    """M-averaged alpha_zz, i.e. the rank-0 part alone."""
    comps = alpha_decompose(table, level, omega, imaginary)
    return -comps[0].value / math.sqrt(3.0 * (level.J2 + 1))


def stark_first_order(table: SpectrumTable, M2: int, field: float,
                      keys: Sequence[LevelKey] | None = None) -> tuple[list[LevelKey], NDArray]:
    """Stark coupling -E <J'M|Q_10|JM> over the levels that admit projection M."""
    if keys is None:
        keys = sorted(table.levels, key=lambda k: (table.levels[k], k))
    keys = [k for k in keys if abs(M2) <= k.J2]
    n = len(keys)
    mat = np.zeros((n, n))
    for j, kj in enumerate(keys):
        for i, ki in enumerate(keys):
            mat[i, j] = -field * we_element(table, (kj, M2), (ki, M2), 1, 0)
    return keys, mat
