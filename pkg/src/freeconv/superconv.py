"""Superconvergence experiments on triangular arrays.

A scheme produces rows ``(mu_n, k_n)``; the row sum has law
``mu_n^{boxplus k_n}``, computed exactly by subordination.  :func:`run`
compares its density with the limit law on a grid (outside an optional
open interval ``U`` around the real zero of the limit's ``F``) and records
three diagnostics that must vanish along any convergent array:

``rho_diag``
    ``|F_{rho_n}(i) - F_nu(i)|`` for the subordination law ``rho_n``;
``phi_diag``
    ``|k_n E_{mu_n}(4i) - phi_nu(4i)|``, the booleanized ``phi`` proxy;
``boolean_diag``
    the same gap, with the left side taken from the self-energy of the
    explicitly built Boolean power ``mu_n^{uplus k_n}``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence, Union

import numpy as np

from .convpow import convpow_density_table, make_convpow, omega
from .errors import (
    CutoffTooSmall,
    GridMismatch,
    InvalidExponent,
    MissingExclusion,
    RowUnavailable,
    TargetRequired,
    ZeroJump,
)
from .freeid import (
    AtomReport,
    DensityTable,
    FreeIdLaw,
    atom_report,
    check_grid,
    density_table,
    f_eval,
    make_law,
    phi_eval,
    semicircle,
    compound_poisson_pair,
)
from .measures import DiscreteMeasure, make_discrete
from .transforms import boolean_power, self_energy

__all__ = [
    "FreeCLT",
    "FreePoisson",
    "Custom",
    "Scheme",
    "RowRecord",
    "ConvergenceReport",
    "scheme_row",
    "target_of",
    "lp_distance",
    "sup_distance",
    "tail_bound",
    "run",
    "DIAG_Y",
]

SCHEME_TOL = 1e-12
DIAG_Y = 4.0


@dataclass(frozen=True)
class FreeCLT:
    """Rows ``(base scaled by 1/sqrt(n), n)`` for a centred, unit-variance base."""

    base: DiscreteMeasure

    def __post_init__(self):
        if abs(self.base.mean()) > SCHEME_TOL:
            raise ValueError(f"base mean {self.base.mean()!r} is not 0")
        if abs(self.base.variance() - 1) > SCHEME_TOL:
            raise ValueError(f"base variance {self.base.variance()!r} is not 1")

    def describe(self) -> dict:
        return {"kind": "clt", "base": [list(a) for a in self.base.atoms]}


@dataclass(frozen=True)
class FreePoisson:
    """Rows ``((1 - lam/n) delta_0 + (lam/n) jump, n)``."""

    lam: float
    jump: DiscreteMeasure

    def __post_init__(self):
        if not self.lam > 0:
            raise ValueError("rate must be positive")
        if self.jump.positions == (0.0,):
            raise ZeroJump("jump distribution is the point mass at 0")

    def describe(self) -> dict:
        return {"kind": "poisson", "lambda": self.lam, "jump": [list(a) for a in self.jump.atoms]}


@dataclass(frozen=True)
class Custom:
    """Explicit rows; row ``n`` is ``rows[n - 1]``."""

    rows: tuple[tuple[DiscreteMeasure, int], ...]

    def __post_init__(self):
        ks = [k for _, k in self.rows]
        if any(int(k) != k or k < 1 for k in ks):
            raise ValueError("row sizes must be positive integers")
        if any(b <= a for a, b in zip(ks[:-1], ks[1:])):
            raise ValueError("row sizes must be strictly increasing")

    def describe(self) -> dict:
        return {"kind": "custom", "k": [k for _, k in self.rows]}


Scheme = Union[FreeCLT, FreePoisson, Custom]


def scheme_row(s: Scheme, n: int) -> tuple[DiscreteMeasure, int]:
    """Row ``n`` of the array as ``(mu_n, k_n)``."""
    if int(n) != n or n < 1:
        raise RowUnavailable(f"row index must be a positive integer, got {n!r}")
    n = int(n)
    if isinstance(s, FreeCLT):
        return s.base.scaled(1 / math.sqrt(n)), n
    if isinstance(s, FreePoisson):
        if not n > s.lam:
            raise RowUnavailable(f"row {n} needs n > lambda = {s.lam}")
        q = s.lam / n
        atoms = [(0.0, 1 - q)] + [(x, q * p) for x, p in s.jump.atoms]
        return make_discrete(atoms), n
    if isinstance(s, Custom):
        if n > len(s.rows):
            raise RowUnavailable(f"only {len(s.rows)} rows stored")
        mu, k = s.rows[n - 1]
        return mu, int(k)
    raise TypeError(f"unknown scheme {s!r}")


def target_of(s: Scheme) -> FreeIdLaw:
    """Limit law of a built-in scheme."""
    if isinstance(s, FreeCLT):
        return semicircle()
    if isinstance(s, FreePoisson):
        return make_law(compound_poisson_pair(s.lam, s.jump))
    raise TargetRequired("custom schemes need an explicit target law")


def _same_grid(a: DensityTable, b: DensityTable) -> None:
    if a.grid.shape != b.grid.shape or not np.array_equal(a.grid, b.grid):
        raise GridMismatch("density tables live on different grids")


def _keep(a: DensityTable, b: DensityTable, excluded) -> np.ndarray:
    keep = a.included & b.included
    if excluded is not None:
        keep &= ~((a.grid > excluded[0]) & (a.grid < excluded[1]))
    return keep


def sup_distance(a: DensityTable, b: DensityTable, excluded=None) -> float:
    """Largest ``|s_a - s_b|`` over grid points kept by both tables."""
    _same_grid(a, b)
    keep = _keep(a, b, excluded)
    if not keep.any():
        return 0.0
    return float(np.max(np.abs(a.values[keep] - b.values[keep])))


def lp_distance(a: DensityTable, b: DensityTable, p: float, excluded=None) -> float:
    """Composite-trapezoid ``L^p`` distance over the kept grid segments."""
    if not p > 1:
        raise InvalidExponent(f"p must exceed 1, got {p!r}")
    _same_grid(a, b)
    keep = _keep(a, b, excluded)
    diff = np.where(keep, np.abs(a.values - b.values), 0.0) ** p
    seg = keep[1:] & keep[:-1]
    total = (0.5 * (diff[1:] + diff[:-1]) * np.diff(a.grid))[seg].sum()
    return float(total ** (1 / p))


def tail_bound(p: float, M: float, abs_f_i: float = 0.0) -> float:
    """``2 * int_M^inf (7/(pi t))^p dt``, the off-grid ``L^p`` budget beyond ``|t| = M``.

    Valid once ``M >= 9 |F(i)|``; pass the law's ``|F(i)|`` as ``abs_f_i``.
    """
    if not p > 1:
        raise InvalidExponent(f"p must exceed 1, got {p!r}")
    if not M > 0 or M < 9 * abs_f_i:
        raise CutoffTooSmall(f"cutoff {M!r} is below 9|F(i)| = {9 * abs_f_i!r}")
    if math.isinf(M):
        return 0.0
    return 2 * (7 / math.pi) ** p * M ** (1 - p) / (p - 1)


@dataclass(frozen=True)
class RowRecord:
    n: int
    k: int
    sup_error: float
    lp_errors: dict
    rho_diag: float
    phi_diag: float
    boolean_diag: float

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "k": self.k,
            "sup_error": self.sup_error,
            "lp": {_p_key(p): v for p, v in self.lp_errors.items()},
            "rho_diag": self.rho_diag,
            "phi_diag": self.phi_diag,
            "boolean_diag": self.boolean_diag,
        }


def _p_key(p: float) -> str:
    return f"{p:g}"


def _finite(x):
    return x if math.isfinite(x) else None


@dataclass(frozen=True, eq=False)
class ConvergenceReport:
    scheme: dict
    target: dict
    grid: np.ndarray
    excluded: tuple[float, float] | None
    target_atoms: AtomReport
    rows: list[RowRecord] = field(default_factory=list)

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(r, name) for r in self.rows])

    def to_dict(self) -> dict:
        rep = self.target_atoms
        return {
            "scheme": self.scheme,
            "target": self.target,
            "grid": {"lo": float(self.grid[0]), "hi": float(self.grid[-1]), "n": int(self.grid.size)},
            "excluded": list(self.excluded) if self.excluded is not None else None,
            "target_atom": {"L": _finite(rep.L), "t_nu": rep.t_nu, "mass": rep.atom_mass},
            "rows": [r.to_dict() for r in self.rows],
        }


def _diagnostics(mu: DiscreteMeasure, k: int, cp, target: FreeIdLaw) -> tuple[float, float, float]:
    rho_diag = abs(omega(cp, 1j) - f_eval(target, 1j))
    z = complex(0.0, DIAG_Y)
    phi_nu = phi_eval(target, z)
    phi_diag = abs(k * self_energy(mu, z) - phi_nu)
    boolean_diag = abs(self_energy(boolean_power(mu, k), z) - phi_nu)
    return rho_diag, phi_diag, boolean_diag


def run(
    s: Scheme,
    target: FreeIdLaw | None,
    n_list: Sequence[int],
    grid,
    U=None,
    p_list: Sequence[float] = (2.0,),
) -> ConvergenceReport:
    """Distances between row densities and the limit density, one record per ``n``.

    ``U`` is an open interval ``(lo, hi)`` excluded from every comparison; it
    is required to contain the real zero of ``F_nu`` when the limit has one.
    """
    if target is None:
        target = target_of(s)
    grid = check_grid(grid)
    p_list = [float(p) for p in p_list]
    for p in p_list:
        if not p > 1:
            raise InvalidExponent(f"p must exceed 1, got {p!r}")
    if U is not None:
        U = (float(U[0]), float(U[1]))
        if not U[0] < U[1]:
            raise ValueError("excluded interval must have lo < hi")
    rep = atom_report(target)
    if rep.has_zero and (U is None or not U[0] < rep.t_nu < U[1]):
        raise MissingExclusion(f"the limit has F(t) = 0 at t = {rep.t_nu}; U must contain it")
    ref = density_table(target, grid, U)
    report = ConvergenceReport(s.describe(), target.describe(), grid, U, rep)
    for n in n_list:
        mu, k = scheme_row(s, n)
        if mu.is_point_mass or k < 2:
            raise RowUnavailable(f"row {n} has no density (point mass or k = 1)")
        cp = make_convpow(mu, k)
        table = convpow_density_table(cp, grid, U)
        sup = sup_distance(table, ref, U)
        lp = {p: lp_distance(table, ref, p, U) for p in p_list}
        diags = _diagnostics(mu, k, cp, target)
        report.rows.append(RowRecord(int(n), k, sup, lp, *diags))
    return report
