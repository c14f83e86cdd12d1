"""Classical multipole expansion of the electrostatic energy between two charge clouds.

Spherical moments follow the Racah normalisation
Q_lm = sqrt(4 pi / (2l+1)) * sum_i q_i r_i^l Y_lm(theta_i, phi_i),
so that Q_10 = d_z and Q_20 = Q_zz.  Energies are in hartree (4 pi eps0 = 1).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .angular import Surd, cg_value
from .constants import ALPHA, BOHR_MAGNETON_AU
from .numerics import compensated_sum

Moments = Mapping[tuple[int, int], complex]


@dataclass(frozen=True)
class PointCharge:
    q: float
    position: tuple[float, float, float]


@dataclass(frozen=True)
class ChargeDistribution:
    charges: tuple[PointCharge, ...]
    origin: tuple[float, float, float] = (0.0, 0.0, 0.0)

    @classmethod
    def from_arrays(cls, q: ArrayLike, xyz: ArrayLike, origin=(0.0, 0.0, 0.0)) -> "ChargeDistribution":
        q = np.asarray(q, dtype=float)
        xyz = np.asarray(xyz, dtype=float).reshape(-1, 3)
        if not np.all(np.isfinite(xyz)):
            raise ValueError("charge positions must be finite")
        return cls(tuple(PointCharge(float(a), tuple(map(float, p))) for a, p in zip(q, xyz)),
                   tuple(map(float, origin)))

    def arrays(self) -> tuple[NDArray, NDArray]:
        q = np.array([c.q for c in self.charges], dtype=float)
        xyz = np.array([c.position for c in self.charges], dtype=float).reshape(-1, 3)
        return q, xyz

    @property
    def extent(self) -> float:
        _, xyz = self.arrays()
        if xyz.size == 0:
            return 0.0
        return float(np.max(np.linalg.norm(xyz - np.asarray(self.origin), axis=1)))


@dataclass(frozen=True)
class CartesianMoments:
    charge: float = 0.0
    dipole: tuple[float, float, float] = (0.0, 0.0, 0.0)
    quadrupole: tuple[tuple[float, ...], ...] = field(
        default_factory=lambda: ((0.0,) * 3,) * 3)

    def __post_init__(self):
        qq = np.asarray(self.quadrupole, dtype=float)
        if qq.shape != (3, 3):
            raise ValueError("quadrupole must be 3x3")
        scale = max(np.max(np.abs(qq)), 1.0)
        if abs(np.trace(qq)) > 1e-12 * scale or np.max(np.abs(qq - qq.T)) > 1e-12 * scale:
            raise ValueError("quadrupole must be symmetric and traceless")

    @classmethod
    def of(cls, dist: ChargeDistribution) -> "CartesianMoments":
        q, xyz = dist.arrays()
        rel = xyz - np.asarray(dist.origin)
        r2 = np.sum(rel * rel, axis=1)
        quad = 0.5 * (3.0 * np.einsum("i,ia,ib->ab", q, rel, rel) - np.sum(q * r2) * np.eye(3))
        return cls(float(np.sum(q)), tuple(q @ rel), tuple(map(tuple, quad)))


def f_coeff_exact(la: int, lb: int, m: int) -> Surd:
    """Exact f_{la lb m} = (-1)^lb (la+lb)! / sqrt((la+m)!(la-m)!(lb+m)!(lb-m)!)."""
    if abs(m) > min(la, lb):
        raise ValueError(f"|m|={abs(m)} exceeds min(la, lb)={min(la, lb)}")
    num = math.factorial(la + lb)
    den = (math.factorial(la + m) * math.factorial(la - m)
           * math.factorial(lb + m) * math.factorial(lb - m))
    return Surd.from_product((-1) ** lb * num, Fraction(1, den))


def f_coeff(la: int, lb: int, m: int) -> float:
    return float(f_coeff_exact(la, lb, m))


def _solid_harmonics(rel: NDArray, lmax: int) -> dict[tuple[int, int], NDArray]:
    """Racah-normalised regular solid harmonics r^l C_lm for each row of rel.

    Uses the associated-Legendre recursion written directly in x, y, z so the
    origin and the poles need no special handling.
    """
    x, y, z = rel[:, 0], rel[:, 1], rel[:, 2]
    r2 = x * x + y * y + z * z
    xy = x + 1j * y
    out: dict[tuple[int, int], NDArray] = {}
    for m in range(lmax + 1):
        # r^l P_l^m e^{i m phi}, Condon-Shortley phase included
        pmm = (-1) ** m * math.prod(range(1, 2 * m, 2)) * xy ** m
        prev2, prev = None, pmm
        vals = {m: pmm}
        if m + 1 <= lmax:
            cur = (2 * m + 1) * z * pmm
            vals[m + 1] = cur
            prev2, prev = pmm, cur
            for l in range(m + 2, lmax + 1):
                cur = ((2 * l - 1) * z * prev - (l + m - 1) * r2 * prev2) / (l - m)
                vals[l] = cur
                prev2, prev = prev, cur
        for l, v in vals.items():
            norm = math.sqrt(math.factorial(l - m) / math.factorial(l + m))
            out[(l, m)] = norm * v
            if m:
                out[(l, -m)] = (-1) ** m * np.conj(norm * v)
    return out


def spherical_moments(dist: ChargeDistribution, lmax: int) -> dict[tuple[int, int], complex]:
    """All Q_lm with l <= lmax about dist.origin."""
    if lmax < 0:
        raise ValueError("lmax must be >= 0")
    q, xyz = dist.arrays()
    rel = xyz - np.asarray(dist.origin)
    harm = _solid_harmonics(rel, lmax)
    return {key: complex(np.sum(q * v)) for key, v in sorted(harm.items())}


def cartesian_to_spherical(mom: CartesianMoments) -> dict[tuple[int, int], complex]:
    d = np.asarray(mom.dipole, dtype=float)
    qq = np.asarray(mom.quadrupole, dtype=float)
    s2 = math.sqrt(2.0)
    out = {
        (0, 0): complex(mom.charge),
        (1, 0): complex(d[2]),
        (1, 1): -(d[0] + 1j * d[1]) / s2,
        (1, -1): (d[0] - 1j * d[1]) / s2,
        (2, 0): complex(qq[2, 2]),
        (2, 1): -math.sqrt(2.0 / 3.0) * (qq[0, 2] + 1j * qq[1, 2]),
        (2, -1): math.sqrt(2.0 / 3.0) * (qq[0, 2] - 1j * qq[1, 2]),
        (2, 2): (qq[0, 0] - qq[1, 1] + 2j * qq[0, 1]) / math.sqrt(6.0),
        (2, -2): (qq[0, 0] - qq[1, 1] - 2j * qq[0, 1]) / math.sqrt(6.0),
    }
    return out


def _rank_pairs(lmax_sum: int, lmax_each: int | None):
    for la in range(lmax_sum + 1):
        for lb in range(lmax_sum + 1 - la):
            if lmax_each is not None and (la > lmax_each or lb > lmax_each):
                continue
            yield la, lb


def _need(moments: Moments, keys, who: str) -> None:
    missing = [k for k in keys if k not in moments]
    if missing:
        raise KeyError(f"{who} lacks moments {missing}")


def bf_energy(qa: Moments, qb: Moments, r: float, lmax_sum: int = 4,
              lmax_each: int | None = None,
              terms: Sequence[tuple[int, int]] | None = None) -> float:
    """Body-fixed multipole energy with z along the A->B axis.

    ``lmax_sum`` bounds la + lb; ``lmax_each`` optionally bounds each rank.
    ``terms`` selects explicit (la, lb) pairs instead.
    """
    if r <= 0:
        raise ValueError("R must be positive")
    pairs = list(terms) if terms is not None else list(_rank_pairs(lmax_sum, lmax_each))
    parts = []
    for la, lb in pairs:
        lo = min(la, lb)
        _need(qa, [(la, m) for m in range(-lo, lo + 1)], "A")
        _need(qb, [(lb, m) for m in range(-lo, lo + 1)], "B")
        s = sum(f_coeff(la, lb, m) * qa[(la, m)] * qb[(lb, -m)] for m in range(-lo, lo + 1))
        parts.append(s / r ** (1 + la + lb))
    return float(compensated_sum(p.real for p in parts))


def _racah_c(l: int, theta: float, phi: float) -> dict[int, complex]:
    u = np.array([[math.sin(theta) * math.cos(phi), math.sin(theta) * math.sin(phi), math.cos(theta)]])
    harm = _solid_harmonics(u, l)
    return {m: complex(harm[(l, m)][0]) for m in range(-l, l + 1)}


def sf_energy(qa: Moments, qb: Moments, r: float, theta: float = 0.0, phi: float = 0.0,
              lmax_sum: int = 4, lmax_each: int | None = None) -> float:
    """Space-fixed multipole energy for the A->B vector at angles (theta, phi)."""
    if r <= 0:
        raise ValueError("R must be positive")
    if not 0.0 <= theta <= math.pi:
        raise ValueError("theta must lie in [0, pi]")
    parts = []
    for la, lb in _rank_pairs(lmax_sum, lmax_each):
        _need(qa, [(la, m) for m in range(-la, la + 1)], "A")
        _need(qb, [(lb, m) for m in range(-lb, lb + 1)], "B")
        l = la + lb
        pref = (-1) ** lb * math.sqrt(math.factorial(2 * l) / (math.factorial(2 * la) * math.factorial(2 * lb)))
        c = _racah_c(l, theta, phi)
        s = 0j
        for ma in range(-la, la + 1):
            for mb in range(-lb, lb + 1):
                m = ma + mb
                cg = cg_value(2 * la, 2 * ma, 2 * lb, 2 * mb, 2 * l, 2 * m)
                if cg:
                    s += c[m].conjugate() * cg * qa[(la, ma)] * qb[(lb, mb)]
        parts.append(pref * s / r ** (l + 1))
    return float(compensated_sum(p.real for p in parts))


def direct_coulomb(dist_a: ChargeDistribution, dist_b: ChargeDistribution, rvec: ArrayLike) -> float:
    """Sum of q_i q_j / |R + r_j - r_i| with positions taken relative to each origin."""
    qa, xa = dist_a.arrays()
    qb, xb = dist_b.arrays()
    if qa.size == 0 or qb.size == 0:
        return 0.0
    ra = xa - np.asarray(dist_a.origin)
    rb = xb - np.asarray(dist_b.origin) + np.asarray(rvec, dtype=float)
    diff = rb[None, :, :] - ra[:, None, :]
    dist = np.sqrt(np.sum(diff * diff, axis=2))
    if np.any(dist == 0.0):
        raise ZeroDivisionError("coincident charges")
    return compensated_sum((np.outer(qa, qb) / dist).ravel())


def cartesian_energy_loworder(ma: CartesianMoments, mb: CartesianMoments, r: float,
                              u: ArrayLike = (0.0, 0.0, 1.0)) -> float:
    """Charge-charge, charge-dipole, charge-quadrupole and dipole-dipole terms."""
    u = np.asarray(u, dtype=float)
    if abs(np.linalg.norm(u) - 1.0) > 1e-12:
        raise ValueError("u must be a unit vector")
    da, db = np.asarray(ma.dipole), np.asarray(mb.dipole)
    qa, qb = np.asarray(ma.quadrupole), np.asarray(mb.quadrupole)
    dua, dub = da @ u, db @ u
    quua, quub = u @ qa @ u, u @ qb @ u
    terms = [
        ma.charge * mb.charge / r,
        (dua * mb.charge - ma.charge * dub) / r**2,
        (quua * mb.charge + ma.charge * quub + da @ db - 3.0 * dua * dub) / r**3,
    ]
    return compensated_sum(terms)


def magnetic_dd_energy(ma_muB: ArrayLike, mb_muB: ArrayLike, r: float,
                       u: ArrayLike = (0.0, 0.0, 1.0)) -> float:
    """Magnetic dipole-dipole energy (hartree) for moments given in Bohr magnetons."""
    u = np.asarray(u, dtype=float)
    if abs(np.linalg.norm(u) - 1.0) > 1e-12:
        raise ValueError("u must be a unit vector")
    a = np.asarray(ma_muB, dtype=float) * BOHR_MAGNETON_AU
    b = np.asarray(mb_muB, dtype=float) * BOHR_MAGNETON_AU
    return ALPHA**2 / r**3 * (a @ b - 3.0 * (u @ a) * (u @ b))

