"""Atom-pair applications: van der Waals scales, ground-pair C6, resonant C3."""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .constants import AMU_IN_ME, HARTREE_IN_K
from .numerics import DEFAULT_NODES, QuadratureRule, integrate_seminfinite
from .perturb import (CnCoefficient, DegenerateBlock, extract_cn, first_order_block,
                      second_order_block)
from .spectra import LevelKey, SpectrumTable, scalar_polarizability


@dataclass(frozen=True)
class AtomSpecies:
    name: str
    mass_amu: float
    spectrum: SpectrumTable
    mean_radius: float | None = None

    def __post_init__(self):
        if self.mass_amu <= 0:
            raise ValueError("mass must be positive")

    @classmethod
    def load(cls, path: str | Path, mass_amu: float | None = None) -> "AtomSpecies":
        import json
        data = json.loads(Path(path).read_text())
        table = SpectrumTable.from_dict(data)
        mass = mass_amu if mass_amu is not None else float(data.get("mass_amu", 1.0))
        return cls(table.name, mass, table, data.get("rms_radius_au"))

    @property
    def ground(self) -> LevelKey:
        return min(self.spectrum.levels, key=lambda k: (self.spectrum.levels[k], k))


@dataclass(frozen=True)
class ScaleResult:
    R_vdw: float
    E_vdw: float
    R_LeRoy: float | None = None

    @property
    def E_vdw_mK(self) -> float:
        return self.E_vdw * HARTREE_IN_K * 1e3


def reduced_mass_me(m_a_amu: float, m_b_amu: float) -> float:
    return m_a_amu * m_b_amu / (m_a_amu + m_b_amu) * AMU_IN_ME


def vdw_scales(m_a_amu: float, m_b_amu: float, c6: float) -> ScaleResult:
    """R_vdW = (2 mu |C6|)^(1/4) / 2 and E_vdW = 1 / (2 mu R_vdW^2), atomic units.

    The energy follows the tabulated convention (no extra factor 1/2).
    """
    if c6 == 0:
        raise ValueError("C6 must be non-zero")
    mu = reduced_mass_me(m_a_amu, m_b_amu)
    r = 0.5 * (2.0 * mu * abs(c6)) ** 0.25
    return ScaleResult(r, 1.0 / (2.0 * mu * r * r))


def leroy_radius(r2_a: float, r2_b: float) -> float:
    if r2_a < 0 or r2_b < 0:
        raise ValueError("mean-square radii must be non-negative")
    return 2.0 * (math.sqrt(r2_a) + math.sqrt(r2_b))


def lennard_jones(epsilon: float, r0: float, r: float) -> float:
    """4 eps [(R0/R)^12 - (R0/R)^6] with eps > 0 the well depth."""
    if epsilon < 0:
        raise ValueError("epsilon is the well depth and must be >= 0")
    if r <= 0:
        raise ValueError("R must be positive")
    x = (r0 / r) ** 6
    return 4.0 * epsilon * (x * x - x)


def lennard_jones_minimum(r0: float) -> float:
    return 2.0 ** (1.0 / 6.0) * r0


def c6_ground_pair(spec_a: AtomSpecies, spec_b: AtomSpecies, method: str = "direct",
                   count: int = DEFAULT_NODES) -> CnCoefficient:
    """Isotropic C6 of two S-state atoms in their lowest levels."""
    ga, gb = spec_a.ground, spec_b.ground
    if ga.J2 != 0 or gb.J2 != 0:
        raise ValueError("ground level is not J=0; build a block with perturb.second_order_block instead")
    if method == "direct":
        block = DegenerateBlock.from_pairs(spec_a.spectrum, spec_b.spectrum, [(ga, gb)])
        eff = second_order_block(block, spec_a.spectrum, spec_b.spectrum, (1, 1, 1, 1))
        return extract_cn(eff, 6)[0]
    if method == "quadrature":
        gaps = [e - spec_a.spectrum.energy(ga) for e in spec_a.spectrum.levels.values()]
        gaps += [e - spec_b.spectrum.energy(gb) for e in spec_b.spectrum.levels.values()]
        rule = QuadratureRule.for_gaps([g for g in gaps if g > 0], count)

        def integrand(u):
            return np.array([scalar_polarizability(spec_a.spectrum, ga, x, imaginary=True)
                             * scalar_polarizability(spec_b.spectrum, gb, x, imaginary=True)
                             for x in u])

        value, _ = integrate_seminfinite(integrand, rule)
        return CnCoefficient(6, -3.0 / math.pi * value, np.array([1.0]))
    raise ValueError(f"unknown method {method!r}")


@dataclass(frozen=True)
class ResonantC3:
    sigma: tuple[float, float]
    pi: tuple[float, float]
    eigenvectors: dict[str, np.ndarray]
    coupled: bool = True


def resonant_c3(spec: AtomSpecies, lower: LevelKey, upper: LevelKey) -> ResonantC3:
    """C3 coefficients of the S+P (or lower+upper) pair coupled by excitation exchange."""
    t = spec.spectrum
    block = DegenerateBlock.from_pairs(t, t, [(lower, upper), (upper, lower)])
    eff = first_order_block(block, t, t, lmax_sum=2)
    mat = eff.terms.get(3, np.zeros((block.dimension, block.dimension)))
    if not np.any(mat):
        return ResonantC3((0.0, 0.0), (0.0, 0.0), {}, coupled=False)
    mtot = np.array([s.a[1] + s.b[1] for s in block.states]) // 2
    values: dict[int, list[float]] = {}
    vecs: dict[str, np.ndarray] = {}
    for m in sorted(set(abs(x) for x in mtot)):
        idx = np.where(mtot == m)[0]
        w, v = np.linalg.eigh(mat[np.ix_(idx, idx)])
        nz = np.abs(w) > 1e-14 * np.max(np.abs(w))
        values[m] = [float(x) for x in w[nz]]
        full = np.zeros((block.dimension, int(np.sum(nz))))
        full[idx] = v[:, nz]
        vecs["Sigma" if m == 0 else "Pi"] = full

    def pm(vals):
        return (max(vals), min(vals))

    return ResonantC3(pm(values.get(0, [0.0])), pm(values.get(1, [0.0])), vecs)


def sp_c6_combine(c6_sigma: float, c6_pi: float) -> tuple[float, float]:
    return (c6_sigma + 2.0 * c6_pi) / 3.0, 5.0 * (c6_sigma - c6_pi) / 3.0


def sp_c6_split(c6_000: float, c6_022: float) -> tuple[float, float]:
    """Inverse of :func:`sp_c6_combine`: (Sigma, Pi)."""
    pi = c6_000 - c6_022 / 5.0
    return pi + 3.0 * c6_022 / 5.0, pi
