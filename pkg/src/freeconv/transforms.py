"""Rational transforms of discrete measures.

For a discrete ``mu`` everything is an explicit rational function:
the Cauchy transform ``G``, its reciprocal ``F = 1/G``, the self-energy
``E = z - F`` and the Boolean powers, whose F-transform is ``z - k E``.
The self-energy has simple real poles exactly at the zeros of ``G`` (one
between each pair of neighbouring atoms), which gives its Nevanlinna pair in
closed form.
"""

from __future__ import annotations

from typing import Callable

import numpy as np

from .errors import PoleAtAtom, RootFindingFailure, ZeroCauchyTransform
from .measures import (
    DiscreteMeasure,
    GeneratingPair,
    WeightedNodeSet,
    make_nodes,
)

__all__ = [
    "POLE_TOL",
    "cauchy_g",
    "f_transform",
    "self_energy",
    "nevanlinna_pair",
    "pair_transform",
    "boolean_power",
    "boolean_id_f",
    "cauchy_zeros",
]

POLE_TOL = 1e-13
GAMMA_RESIDUAL_TOL = 1e-10


def _as_complex(z):
    arr = np.asarray(z, dtype=complex)
    return arr, arr.ndim == 0


def _check_boundary(positions: np.ndarray, z: np.ndarray, what: str, exc) -> None:
    on_axis = z.imag <= 0
    if not np.any(on_axis):
        return
    zr = np.atleast_1d(z)[np.atleast_1d(on_axis)].real
    if positions.size == 0:
        return
    dist = np.abs(zr[:, None] - positions[None, :]).min(axis=1)
    hit = dist < POLE_TOL
    if np.any(hit):
        raise exc(f"boundary evaluation at {what} {zr[hit][0]!r}")


def cauchy_g(mu: DiscreteMeasure, z):
    """Cauchy transform ``G(z) = sum_i p_i / (z - x_i)``.

    ``z`` may be a scalar or an array with ``Im z >= 0``; real arguments must
    stay ``POLE_TOL`` away from the atoms.
    """
    zz, scalar = _as_complex(z)
    if np.any(zz.imag < 0):
        raise ValueError("cauchy_g is defined on the closed upper half-plane")
    x, p = mu.arrays()
    _check_boundary(x, zz, "atom", PoleAtAtom)
    g = (p / (zz[..., None] - x)).sum(axis=-1)
    return complex(g) if scalar else g


def f_transform(mu: DiscreteMeasure, z):
    """Reciprocal Cauchy transform ``F = 1/G``."""
    g = cauchy_g(mu, z)
    if np.any(np.asarray(g) == 0):
        raise ZeroCauchyTransform("G vanishes at the requested point")
    return 1.0 / g


def self_energy(mu: DiscreteMeasure, z):
    """``E(z) = z - F(z)``; maps the upper half-plane into ``Im <= 0``."""
    zz, scalar = _as_complex(z)
    e = zz - f_transform(mu, zz)
    return complex(e) if scalar else e


def _bisect_decreasing(f: Callable[[float], float], lo: float, hi: float) -> float:
    # f(lo+) > 0 > f(hi-); runs until the midpoint stops moving
    for _ in range(2000):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi or hi - lo <= 1e-300:
            return mid
        val = f(mid)
        if val == 0:
            return mid
        if val > 0:
            lo = mid
        else:
            hi = mid
    raise RootFindingFailure("bisection did not terminate")


def _bisect_increasing(f: Callable[[float], float], lo: float, hi: float) -> float:
    return _bisect_decreasing(lambda s: -f(s), lo, hi)


def _g_real(x: np.ndarray, p: np.ndarray) -> Callable[[float], float]:
    def g(t: float) -> float:
        return float((p / (t - x)).sum())

    return g


def cauchy_zeros(mu: DiscreteMeasure) -> np.ndarray:
    """The ``m - 1`` real zeros of ``G``, one in each gap between atoms.

    ``G`` falls from ``+inf`` to ``-inf`` across every gap, so each zero is
    bracketed by its two neighbouring atoms.
    """
    x, p = mu.arrays()
    g = _g_real(x, p)
    zeros = []
    for a, b in zip(x[:-1], x[1:]):
        t = _bisect_decreasing(g, a, b)
        if not a < t < b:
            raise RootFindingFailure(f"zero of G escaped the gap ({a}, {b})")
        zeros.append(t)
    return np.asarray(zeros)


def pair_transform(pair: GeneratingPair, z):
    """``gamma + sum_j w_j (1 + t_j z)/(z - t_j)`` (no pole checks)."""
    zz = np.asarray(z, dtype=complex)
    t, w = pair.sigma.arrays()
    if t.size == 0:
        return pair.gamma + 0 * zz
    return pair.gamma + (w * (1 + t * zz[..., None]) / (zz[..., None] - t)).sum(axis=-1)


def nevanlinna_pair(mu: DiscreteMeasure) -> GeneratingPair:
    """Exact Nevanlinna pair ``(gamma, sigma)`` of the self-energy of ``mu``.

    With ``t_j`` the zeros of ``G`` the self-energy is
    ``E(z) = m_1 + sum_j c_j/(z - t_j)``, ``c_j = 1/|G'(t_j)|``, so
    ``sigma = sum_j c_j/(1 + t_j^2) delta_{t_j}``.  ``gamma`` is read off at
    ``z = i``; a non-negligible imaginary residual means the extraction is
    inconsistent and is reported as a root-finding failure.
    """
    if mu.is_point_mass:
        return GeneratingPair(mu.positions[0], WeightedNodeSet())
    x, p = mu.arrays()
    tz = cauchy_zeros(mu)
    gprime = -(p[None, :] / (tz[:, None] - x[None, :]) ** 2).sum(axis=1)
    c = 1.0 / np.abs(gprime)
    sigma = make_nodes(zip(tz, c / (1.0 + tz**2)))
    rest = self_energy(mu, 1j) - pair_transform(GeneratingPair(0.0, sigma), 1j)
    if abs(rest.imag) > GAMMA_RESIDUAL_TOL:
        raise RootFindingFailure(f"gamma residual {rest.imag:.3e} too large")
    return GeneratingPair(float(rest.real), sigma)


def boolean_power(mu: DiscreteMeasure, k: int) -> DiscreteMeasure:
    """``k``-fold Boolean convolution power, ``F_k(z) = z - k E(z)``.

    ``F_k`` is real and increasing between consecutive poles of ``E``, so it
    has exactly one zero per gap plus one on each unbounded side; the atoms
    sit at these zeros with masses ``1/F_k'``.
    """
    if k < 1 or int(k) != k:
        raise ValueError("k must be a positive integer")
    if k == 1:
        return mu
    if mu.is_point_mass:
        return DiscreteMeasure((k * mu.positions[0],), (1.0,))
    pair = nevanlinna_pair(mu)
    mean = mu.mean()
    t, w = pair.sigma.arrays()
    c = w * (1 + t**2)

    def fk(s: float) -> float:
        return s - k * (mean + float((c / (s - t)).sum()))

    def fk_prime(s: float) -> float:
        return 1.0 + k * float((c / (s - t) ** 2).sum())

    lo = t[0] - 1.0
    step = 1.0
    while fk(lo) >= 0:
        step *= 2
        lo = t[0] - step
        if step > 2.0**80:
            raise RootFindingFailure("left bracket for Boolean power not found")
    hi = t[-1] + 1.0
    step = 1.0
    while fk(hi) <= 0:
        step *= 2
        hi = t[-1] + step
        if step > 2.0**80:
            raise RootFindingFailure("right bracket for Boolean power not found")
    edges = [lo, *t, hi]
    atoms = []
    for a, b in zip(edges[:-1], edges[1:]):
        r = _bisect_increasing(fk, a, b)
        atoms.append((r, 1.0 / fk_prime(r)))
    pos = np.array([a for a, _ in atoms])
    mass = np.array([m for _, m in atoms])
    total = mass.sum()
    if abs(total - 1.0) > 1e-10:
        raise RootFindingFailure(f"Boolean power masses sum to {total!r}")
    return DiscreteMeasure(tuple(pos), tuple(mass / total))


def boolean_id_f(pair: GeneratingPair, z):
    """F-transform of the Boolean law with Nevanlinna data ``pair``."""
    zz, scalar = _as_complex(z)
    out = zz - pair_transform(pair, zz)
    return complex(out) if scalar else out
