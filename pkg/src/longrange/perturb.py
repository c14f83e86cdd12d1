"""Degenerate perturbation theory for two partners in multipolar interaction.

Matrices are real symmetric in the product basis |a M_A> x |b M_B> built
from each partner's :class:`SpectrumTable`.  Effective operators are stored
as coefficient matrices ``terms[n]`` multiplying R**-n (atomic units).

A rank selection ``(lpA, lA, lpB, lB)`` picks the second-order term in which
the left interaction carries ranks (lpA, lpB) and the right one (lA, lB).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np
from numpy.typing import NDArray

from .angular import cg_value, ninej_value, sixj_value, triangle_ok
from .multipole import f_coeff
from .numerics import DEFAULT_NODES, QuadratureRule, eig_sym
from .spectra import LevelKey, SpectrumTable, State, operator_matrix

SAME_ENERGY_TOL = 1e-12
NEAR_DEGENERATE_TOL = 1e-9

Ranks = tuple[int, int, int, int]


class DegeneracyError(ValueError):
    pass


@dataclass(frozen=True)
class ProductState:
    a: State
    b: State


@dataclass
class DegenerateBlock:
    states: list[ProductState]
    E0: float

    @classmethod
    def from_pairs(cls, table_a: SpectrumTable, table_b: SpectrumTable,
                   pairs: Sequence[tuple[LevelKey, LevelKey]]) -> "DegenerateBlock":
        """Block spanned by all M components of the given level pairs."""
        energies = [table_a.energy(a) + table_b.energy(b) for a, b in pairs]
        if max(energies) - min(energies) > SAME_ENERGY_TOL:
            raise DegeneracyError(f"level pairs are not degenerate: {energies}")
        states = [ProductState((a, ma), (b, mb))
                  for a, b in pairs
                  for ma in range(-a.J2, a.J2 + 1, 2)
                  for mb in range(-b.J2, b.J2 + 1, 2)]
        return cls(states, energies[0])

    @property
    def dimension(self) -> int:
        return len(self.states)

    def level_pairs(self) -> list[tuple[LevelKey, LevelKey]]:
        seen = []
        for s in self.states:
            pair = (s.a[0], s.b[0])
            if pair not in seen:
                seen.append(pair)
        return seen


@dataclass
class EffectiveMatrix:
    block: DegenerateBlock
    terms: dict[int, NDArray] = field(default_factory=dict)
    flags: list[str] = field(default_factory=list)

    def add(self, n: int, mat: NDArray) -> None:
        if n in self.terms:
            self.terms[n] = self.terms[n] + mat
        else:
            self.terms[n] = np.array(mat, dtype=float)

    def matrix(self, r: float) -> NDArray:
        d = self.block.dimension
        out = np.zeros((d, d))
        for n, mat in sorted(self.terms.items()):
            out += mat / r**n
        return out

    def __add__(self, other: "EffectiveMatrix") -> "EffectiveMatrix":
        out = EffectiveMatrix(self.block, {n: m.copy() for n, m in self.terms.items()},
                              self.flags + other.flags)
        for n, m in other.terms.items():
            out.add(n, m)
        return out


@dataclass(frozen=True)
class CnCoefficient:
    n: int
    value: float
    eigenvector: NDArray


class _Partner:
    """All M states of a table plus cached multipole operator matrices."""

    def __init__(self, table: SpectrumTable):
        self.table = table
        self.states: list[State] = table.states()
        self.index = {s: i for i, s in enumerate(self.states)}
        self.energies = np.array([table.energy(k) for k, _ in self.states])
        self._ops: dict[tuple[int, int], NDArray] = {}

    def op(self, l: int, m: int) -> NDArray:
        key = (l, m)
        if key not in self._ops:
            self._ops[key] = operator_matrix(self.table, self.states, l, m)
        return self._ops[key]

    def level_slice(self, key: LevelKey) -> list[int]:
        return [i for i, (k, _) in enumerate(self.states) if k == key]


def _as_rank_list(ranks) -> list[Ranks]:
    if len(ranks) == 4 and all(isinstance(x, int) for x in ranks):
        return [tuple(ranks)]
    return [tuple(r) for r in ranks]


def _interaction(pa: _Partner, pb: _Partner, la: int, lb: int) -> NDArray:
    """Full product-space matrix of sum_m f Q_{la m}(A) Q_{lb,-m}(B) (R = 1)."""
    lo = min(la, lb)
    n = len(pa.states) * len(pb.states)
    out = np.zeros((n, n))
    for m in range(-lo, lo + 1):
        out += f_coeff(la, lb, m) * np.kron(pa.op(la, m), pb.op(lb, -m))
    return out


def _block_indices(block: DegenerateBlock, pa: _Partner, pb: _Partner) -> list[int]:
    nb = len(pb.states)
    return [pa.index[s.a] * nb + pb.index[s.b] for s in block.states]


def first_order_block(block: DegenerateBlock, table_a: SpectrumTable, table_b: SpectrumTable,
                      lmax_sum: int = 4) -> EffectiveMatrix:
    """First-order matrix of the multipolar operator inside the block."""
    pa, pb = _Partner(table_a), _Partner(table_b)
    idx = _block_indices(block, pa, pb)
    eff = EffectiveMatrix(block)
    for a, b in block.level_pairs():
        for l in range(lmax_sum + 1):
            for t, key in ((table_a, a), (table_b, b)):
                if (key, key, l) not in t.reduced and triangle_ok(key.J2, 2 * l, key.J2):
                    eff.flags.append(f"permanent rank-{l} moment of {key} absent: treated as zero")
    for la in range(lmax_sum + 1):
        for lb in range(lmax_sum + 1 - la):
            v = _interaction(pa, pb, la, lb)[np.ix_(idx, idx)]
            if np.any(v):
                eff.add(1 + la + lb, v)
    if not eff.terms:
        eff.add(1, np.zeros((block.dimension, block.dimension)))
    return eff


Selector = Callable[[LevelKey, LevelKey], bool]


def _resolvent(block: DegenerateBlock, pa: _Partner, pb: _Partner, vl: NDArray, vr: NDArray,
               select: Selector | None) -> NDArray:
    """Diagonal of 1/(E_r - E0) over allowed intermediates, zero elsewhere."""
    ea = np.repeat(pa.energies, len(pb.states))
    eb = np.tile(pb.energies, len(pa.states))
    gaps = ea + eb - block.E0
    res = np.zeros_like(gaps)
    nb = len(pb.states)
    for r, gap in enumerate(gaps):
        if abs(gap) <= SAME_ENERGY_TOL:
            continue
        ka = pa.states[r // nb][0]
        kb = pb.states[r % nb][0]
        if select is not None and not select(ka, kb):
            continue
        if abs(gap) < NEAR_DEGENERATE_TOL and (np.any(vr[r]) or np.any(vl[:, r])):
            raise DegeneracyError(f"intermediate {ka}, {kb} nearly degenerate with the block (gap {gap:.3g})")
        res[r] = 1.0 / gap
    return res


def _second_order(block, table_a, table_b, ranks, select: Selector | None) -> EffectiveMatrix:
    pa, pb = _Partner(table_a), _Partner(table_b)
    idx = _block_indices(block, pa, pb)
    eff = EffectiveMatrix(block)
    for lpa, la, lpb, lb in _as_rank_list(ranks):
        vl = _interaction(pa, pb, lpa, lpb)[idx, :]
        vr = _interaction(pa, pb, la, lb)[:, idx]
        res = _resolvent(block, pa, pb, vl, vr, select)
        eff.add(2 + lpa + la + lpb + lb, -vl @ (res[:, None] * vr))
    return eff


def second_order_block(block: DegenerateBlock, table_a: SpectrumTable, table_b: SpectrumTable,
                       ranks=(1, 1, 1, 1)) -> EffectiveMatrix:
    """Direct sum over all intermediate product levels off the block energy."""
    return _second_order(block, table_a, table_b, ranks, None)


def _single_pair(block: DegenerateBlock) -> tuple[LevelKey, LevelKey]:
    pairs = block.level_pairs()
    if len(pairs) != 1:
        raise ValueError("this decomposition needs a block built from one level pair")
    return pairs[0]


def induction_block(block: DegenerateBlock, table_a: SpectrumTable, table_b: SpectrumTable,
                    ranks=(1, 1, 1, 1), polarized: str = "A") -> EffectiveMatrix:
    """Second order restricted to intermediates where only ``polarized`` is excited."""
    a, b = _single_pair(block)
    if polarized == "A":
        select = lambda ka, kb: kb == b and ka != a
    elif polarized == "B":
        select = lambda ka, kb: ka == a and kb != b
    else:
        raise ValueError("polarized must be 'A' or 'B'")
    return _second_order(block, table_a, table_b, ranks, select)


def dispersion_block(block: DegenerateBlock, table_a: SpectrumTable, table_b: SpectrumTable,
                     ranks=(1, 1, 1, 1)) -> EffectiveMatrix:
    """Direct-sum dispersion: both partners leave their block levels."""
    a, b = _single_pair(block)
    return _second_order(block, table_a, table_b, ranks, lambda ka, kb: ka != a and kb != b)


class _Response:
    """Per-intermediate-level transition products for one partner of a single-pair block."""

    def __init__(self, partner: _Partner, level: LevelKey, lp: int, l: int):
        self.blk = partner.level_slice(level)
        e0 = partner.table.energy(level)
        self.gaps: list[float] = []
        self.mats: list[dict[tuple[int, int], NDArray]] = []
        for key in partner.table.levels:
            if key == level:
                continue
            mid = partner.level_slice(key)
            prods = {}
            for mp in range(-lp, lp + 1):
                left = partner.op(lp, mp)[np.ix_(self.blk, mid)]
                if not np.any(left):
                    continue
                for m in range(-l, l + 1):
                    right = partner.op(l, m)[np.ix_(mid, self.blk)]
                    if np.any(right):
                        prods[(mp, m)] = left @ right
            if prods:
                self.gaps.append(partner.table.energy(key) - e0)
                self.mats.append(prods)

    def weighted(self, weights: Sequence[float]) -> dict[tuple[int, int], NDArray]:
        out: dict[tuple[int, int], NDArray] = {}
        for w, prods in zip(weights, self.mats):
            if w == 0.0:
                continue
            for key, mat in prods.items():
                out[key] = out.get(key, 0.0) + w * mat
        return out


def _contract(ra: dict, rb: dict, lpa: int, la: int, lpb: int, lb: int, d: int) -> NDArray:
    """sum_{m',m} f(lpa,lpb,m') f(la,lb,m) X_A[m',m] (x) X_B[-m',-m]."""
    out = np.zeros((d, d))
    for mp in range(-min(lpa, lpb), min(lpa, lpb) + 1):
        for m in range(-min(la, lb), min(la, lb) + 1):
            xa = ra.get((mp, m))
            xb = rb.get((-mp, -m))
            if xa is None or xb is None:
                continue
            out += f_coeff(lpa, lpb, mp) * f_coeff(la, lb, m) * np.kron(xa, xb)
    return out


def _dispersion_parts(block, table_a, table_b, ranks, rule: QuadratureRule | None,
                      allow_downward: bool, count: int) -> EffectiveMatrix:
    a, b = _single_pair(block)
    pa, pb = _Partner(table_a), _Partner(table_b)
    eff = EffectiveMatrix(block)
    d = block.dimension
    for lpa, la, lpb, lb in _as_rank_list(ranks):
        resp_a = _Response(pa, a, lpa, la)
        resp_b = _Response(pb, b, lpb, lb)
        ga, gb = np.array(resp_a.gaps), np.array(resp_b.gaps)
        if not allow_downward and (np.any(ga < 0) or np.any(gb < 0)):
            raise ValueError("negative gap present: use excited_dispersion_correction")
        for x in ga:
            for y in gb:
                if abs(x + y) < NEAR_DEGENERATE_TOL:
                    raise DegeneracyError(f"intermediate pair degenerate with the block (gaps {x:.3g}, {y:.3g})")
        n = 2 + lpa + la + lpb + lb
        if ga.size == 0 or gb.size == 0:
            eff.add(n, np.zeros((d, d)))
            continue
        q = rule or QuadratureRule.for_gaps(np.concatenate([ga, gb]), count)
        acc = np.zeros((d, d))
        for u, w in zip(q.nodes, q.weights):
            alpha_a = resp_a.weighted(2.0 * ga / (ga * ga + u * u))
            alpha_b = resp_b.weighted(2.0 * gb / (gb * gb + u * u))
            acc += w * _contract(alpha_a, alpha_b, lpa, la, lpb, lb, d)
        total = -acc / (2.0 * math.pi)
        if allow_downward:
            up_a, up_b = ga > 0, gb > 0
            # B decays: real-frequency response of A at omega = |gap_B|
            for j, y in enumerate(gb):
                if y >= 0:
                    continue
                alpha_a = resp_a.weighted(np.where(up_a, 2.0 * ga / (ga * ga - y * y), 0.0))
                xb = resp_b.weighted([1.0 if k == j else 0.0 for k in range(len(gb))])
                total -= _contract(alpha_a, xb, lpa, la, lpb, lb, d)
            for i, x in enumerate(ga):
                if x >= 0:
                    continue
                alpha_b = resp_b.weighted(np.where(up_b, 2.0 * gb / (gb * gb - x * x), 0.0))
                xa = resp_a.weighted([1.0 if k == i else 0.0 for k in range(len(ga))])
                total -= _contract(xa, alpha_b, lpa, la, lpb, lb, d)
                # both partners decay
                for j, y in enumerate(gb):
                    if y >= 0:
                        continue
                    xb = resp_b.weighted([1.0 if k == j else 0.0 for k in range(len(gb))])
                    total -= 2.0 / (x + y) * _contract(xa, xb, lpa, la, lpb, lb, d)
        eff.add(n, total)
    return eff


def dispersion_block_quadrature(block: DegenerateBlock, table_a: SpectrumTable, table_b: SpectrumTable,
                                ranks=(1, 1, 1, 1), rule: QuadratureRule | None = None,
                                count: int = DEFAULT_NODES) -> EffectiveMatrix:
    """Dispersion from imaginary-frequency response functions (all gaps positive)."""
    return _dispersion_parts(block, table_a, table_b, ranks, rule, False, count)


def excited_dispersion_correction(block: DegenerateBlock, table_a: SpectrumTable, table_b: SpectrumTable,
                                  ranks=(1, 1, 1, 1), rule: QuadratureRule | None = None,
                                  count: int = DEFAULT_NODES) -> EffectiveMatrix:
    """Dispersion when a partner can decay: quadrature plus real-frequency terms."""
    return _dispersion_parts(block, table_a, table_b, ranks, rule, True, count)


@dataclass
class TensorBreakdown:
    total: EffectiveMatrix
    parts: dict[tuple[int, int, int], NDArray]


def tensor_decomposed_block(block: DegenerateBlock, table_a: SpectrumTable, table_b: SpectrumTable,
                            ranks=(1, 1, 1, 1)) -> TensorBreakdown:
    """Second order recoupled into ranks (kA, kB, k) acting on each partner's level."""
    a, b = _single_pair(block)
    ea, eb = table_a.energy(a), table_b.energy(b)
    ja, jb = a.J2, b.J2
    d = block.dimension
    eff = EffectiveMatrix(block)
    parts: dict[tuple[int, int, int], NDArray] = {}
    for lpa, la, lpb, lb in _as_rank_list(ranks):
        lp, l = lpa + lpb, la + lb
        n = 2 + lp + l
        pref = -(-1) ** ((lpb + lb) + (ja + jb) % 2) * math.sqrt(
            math.factorial(2 * lp + 1) * math.factorial(2 * l + 1)
            / (math.factorial(2 * lpa) * math.factorial(2 * lpb)
               * math.factorial(2 * la) * math.factorial(2 * lb)))
        # sum over intermediate pairs, resolved by (kA, kB)
        inter = []
        for ka in table_a.levels:
            ra = table_a.reduced_element(a, ka, lpa) * table_a.reduced_element(ka, a, la)
            if ra == 0.0:
                continue
            for kb in table_b.levels:
                rb = table_b.reduced_element(b, kb, lpb) * table_b.reduced_element(kb, b, lb)
                if rb == 0.0:
                    continue
                gap = table_a.energy(ka) + table_b.energy(kb) - ea - eb
                if abs(gap) <= SAME_ENERGY_TOL:
                    continue
                if abs(gap) < NEAR_DEGENERATE_TOL:
                    raise DegeneracyError(f"intermediate {ka}, {kb} nearly degenerate with the block")
                inter.append((ka.J2, kb.J2, ra * rb / gap))
        for kA in range(abs(lpa - la), lpa + la + 1):
            for kB in range(abs(lpb - lb), lpb + lb + 1):
                s = math.fsum(v * sixj_value(2 * la, 2 * lpa, 2 * kA, ja, ja, jpa)
                              * sixj_value(2 * lb, 2 * lpb, 2 * kB, jb, jb, jpb)
                              for jpa, jpb, v in inter)
                if s == 0.0:
                    continue
                for k in range(abs(kA - kB), kA + kB + 1):
                    c_k = cg_value(2 * lp, 0, 2 * l, 0, 2 * k, 0)
                    nine = ninej_value(2 * lpa, 2 * la, 2 * kA, 2 * lpb, 2 * lb, 2 * kB, 2 * lp, 2 * l, 2 * k)
                    if c_k == 0.0 or nine == 0.0:
                        continue
                    coef = (pref * (-1) ** (kA + kB) * (2 * kA + 1) * (2 * kB + 1)
                            * c_k * nine * s / math.sqrt((ja + 1) * (jb + 1)))
                    mat = np.zeros((d, d))
                    for q in range(-min(kA, kB), min(kA, kB) + 1):
                        cq = cg_value(2 * kA, 2 * q, 2 * kB, -2 * q, 2 * k, 0)
                        if cq == 0.0:
                            continue
                        for j, sj in enumerate(block.states):
                            for i, si in enumerate(block.states):
                                ca = cg_value(ja, sj.a[1], 2 * kA, 2 * q, ja, si.a[1])
                                cb = cg_value(jb, sj.b[1], 2 * kB, -2 * q, jb, si.b[1])
                                if ca and cb:
                                    mat[i, j] += cq * ca * cb
                    if np.any(mat):
                        key = (kA, kB, k)
                        parts[key] = parts.get(key, 0.0) + coef * mat
                        eff.add(n, coef * mat)
    if not eff.terms:
        for lpa, la, lpb, lb in _as_rank_list(ranks):
            eff.add(2 + lpa + la + lpb + lb, np.zeros((d, d)))
    return TensorBreakdown(eff, parts)


def extract_cn(eff: EffectiveMatrix, n: int) -> list[CnCoefficient]:
    """Eigen-decomposition of the R**-n coefficient matrix, ascending."""
    if n not in eff.terms:
        raise KeyError(f"no R^-{n} term (available: {sorted(eff.terms)})")
    mat = eff.terms[n]
    w, v = eig_sym(0.5 * (mat + mat.T))
    return [CnCoefficient(n, float(w[i]), v[:, i]) for i in range(len(w))]
