"""Finite measures and the moment / free-cumulant recursion.

Discrete probability measures play the role of the rows of a triangular
array; weighted node sets hold the (finite, nonnegative) measure of a free
Levy-Khintchine pair.  The moment-cumulant routines are used only as an
independent check on free convolution powers: free cumulants add under free
convolution, so the ``k``-fold power multiplies them by ``k``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    EmptyMeasure,
    MassNotNormalized,
    NonpositiveMass,
    OrderTooLarge,
)

__all__ = [
    "DiscreteMeasure",
    "WeightedNodeSet",
    "GeneratingPair",
    "make_discrete",
    "make_nodes",
    "parse_nodes",
    "format_nodes",
    "moments",
    "free_cumulants",
    "moments_from_cumulants",
    "MASS_TOL",
    "MAX_ORDER",
]

MASS_TOL = 1e-9
MAX_ORDER = 32


@dataclass(frozen=True)
class DiscreteMeasure:
    """Probability measure with finitely many atoms.

    Build instances with :func:`make_discrete`; the constructor itself does
    not sort or merge.
    """

    positions: tuple[float, ...]
    masses: tuple[float, ...]

    @property
    def atoms(self) -> list[tuple[float, float]]:
        return list(zip(self.positions, self.masses))

    @property
    def size(self) -> int:
        return len(self.positions)

    @property
    def is_point_mass(self) -> bool:
        return len(self.positions) == 1

    def arrays(self) -> tuple[np.ndarray, np.ndarray]:
        return np.asarray(self.positions, float), np.asarray(self.masses, float)

    def mean(self) -> float:
        x, p = self.arrays()
        return float(p @ x)

    def variance(self) -> float:
        x, p = self.arrays()
        m = p @ x
        return float(p @ (x - m) ** 2)

    def scaled(self, factor: float) -> "DiscreteMeasure":
        """Law of ``factor * X``."""
        return make_discrete([(factor * x, p) for x, p in self.atoms])


@dataclass(frozen=True)
class WeightedNodeSet:
    """Finite nonnegative measure ``sum_j w_j delta_{t_j}``.

    The empty node set is legal and stands for the zero measure.
    """

    positions: tuple[float, ...] = ()
    weights: tuple[float, ...] = ()

    @property
    def total_mass(self) -> float:
        return float(sum(self.weights))

    @property
    def is_zero(self) -> bool:
        return not any(w > 0 for w in self.weights)

    @property
    def nodes(self) -> list[tuple[float, float]]:
        return list(zip(self.positions, self.weights))

    def arrays(self) -> tuple[np.ndarray, np.ndarray]:
        return np.asarray(self.positions, float), np.asarray(self.weights, float)

    def scaled(self, factor: float) -> "WeightedNodeSet":
        return WeightedNodeSet(self.positions, tuple(factor * w for w in self.weights))


@dataclass(frozen=True)
class GeneratingPair:
    """Shift ``gamma`` and node measure ``sigma`` of a Levy-Khintchine pair."""

    gamma: float
    sigma: WeightedNodeSet

    def scaled(self, factor: float) -> "GeneratingPair":
        return GeneratingPair(factor * self.gamma, self.sigma.scaled(factor))

    def to_dict(self) -> dict:
        return {"gamma": self.gamma, "sigma": [list(n) for n in self.sigma.nodes]}


def make_discrete(raw_atoms: Iterable[tuple[float, float]]) -> DiscreteMeasure:
    """Canonical discrete measure from ``(position, mass)`` pairs.

    Atoms are sorted and exact duplicates merged.  Total mass must equal 1
    to within ``MASS_TOL``; small deviations are renormalized away, larger
    ones raise :class:`MassNotNormalized`.
    """
    merged: dict[float, float] = {}
    count = 0
    for pos, mass in raw_atoms:
        pos, mass = float(pos), float(mass)
        if not np.isfinite(pos):
            raise ValueError(f"non-finite atom position {pos!r}")
        if not mass > 0:
            raise NonpositiveMass(f"atom at {pos} has mass {mass}")
        merged[pos] = merged.get(pos, 0.0) + mass
        count += 1
    if count == 0:
        raise EmptyMeasure("a discrete measure needs at least one atom")
    total = sum(merged.values())
    if abs(total - 1.0) > MASS_TOL:
        raise MassNotNormalized(f"masses sum to {total!r}")
    positions = tuple(sorted(merged))
    # leave sums that are already 1 to rounding alone so the map is idempotent
    scale = total if abs(total - 1.0) > 4 * np.finfo(float).eps else 1.0
    masses = tuple(merged[x] / scale for x in positions)
    return DiscreteMeasure(positions, masses)


def make_nodes(raw_nodes: Iterable[tuple[float, float]]) -> WeightedNodeSet:
    """Sorted node set; zero-weight nodes are dropped, duplicates merged."""
    merged: dict[float, float] = {}
    for pos, w in raw_nodes:
        pos, w = float(pos), float(w)
        if w < 0 or not np.isfinite(w) or not np.isfinite(pos):
            raise ValueError(f"invalid node {pos}:{w}")
        if w > 0:
            merged[pos] = merged.get(pos, 0.0) + w
    positions = tuple(sorted(merged))
    return WeightedNodeSet(positions, tuple(merged[x] for x in positions))


def parse_nodes(text: str) -> list[tuple[float, float]]:
    """Parse ``"t1:w1,t2:w2,..."``; the empty string yields no nodes."""
    text = text.strip()
    if not text:
        return []
    out = []
    for item in text.split(","):
        pos, sep, weight = item.partition(":")
        if not sep:
            raise ValueError(f"node {item!r} is not of the form t:w")
        out.append((float(pos), float(weight)))
    return out


def format_nodes(nodes: Sequence[tuple[float, float]]) -> str:
    return ",".join(f"{t!r}:{w!r}" for t, w in nodes)


def moments(mu: DiscreteMeasure, order: int) -> np.ndarray:
    """Raw moments ``m_1..m_order`` (index ``j-1`` holds ``m_j``)."""
    if order < 1:
        raise ValueError("order must be positive")
    if order > MAX_ORDER:
        raise OrderTooLarge(f"order {order} exceeds {MAX_ORDER}")
    x, p = mu.arrays()
    powers = x[None, :] ** np.arange(1, order + 1)[:, None]
    return powers @ p


# the recursions cancel heavily once moments grow; extended precision (where
# the platform has it) keeps the round trip near double rounding
_WORK = np.longdouble


def _power_coeffs(m: np.ndarray, upto: int) -> list[np.ndarray]:
    # coefficient arrays of M(x)^s truncated at x^upto, M(x) = 1 + sum m_j x^j
    base = np.zeros(upto + 1, dtype=_WORK)
    base[0] = 1.0
    base[1 : len(m) + 1] = m[:upto]
    powers = [np.eye(1, upto + 1, dtype=_WORK).ravel()]
    for _ in range(upto):
        powers.append(np.convolve(powers[-1], base)[: upto + 1])
    return powers


def free_cumulants(m: Sequence[float]) -> np.ndarray:
    """Free cumulants from moments via the non-crossing recursion.

    ``m_n = sum_{s=1}^n kappa_s [x^{n-s}] M(x)^s`` with ``M = 1 + sum m_j x^j``;
    the ``s = n`` term has coefficient 1, so the system is solved top down.
    """
    m = np.asarray(m, dtype=_WORK)
    n_max = len(m)
    if n_max < 1:
        raise ValueError("need at least one moment")
    powers = _power_coeffs(m, n_max)
    kappa = np.zeros(n_max, dtype=_WORK)
    for n in range(1, n_max + 1):
        acc = sum(kappa[s - 1] * powers[s][n - s] for s in range(1, n))
        kappa[n - 1] = m[n - 1] - acc
    return kappa.astype(float)


def moments_from_cumulants(kappa: Sequence[float]) -> np.ndarray:
    """Inverse of :func:`free_cumulants`.

    The result keeps the extended working precision (``np.longdouble``):
    moments grow fast, and rounding them to doubles alone would cost the
    round trip through :func:`free_cumulants` several digits.
    """
    kappa = np.asarray(kappa, dtype=_WORK)
    n_max = len(kappa)
    if n_max < 1:
        raise ValueError("need at least one cumulant")
    m = np.zeros(n_max, dtype=_WORK)
    for n in range(1, n_max + 1):
        # only m_1..m_{n-1} enter the coefficients below
        powers = _power_coeffs(m[: n - 1], n)
        m[n - 1] = sum(kappa[s - 1] * powers[s][n - s] for s in range(1, n + 1))
    return m
