"""Free convolution powers of discrete measures via subordination.

``F_{mu^{boxplus k}} = F_mu o omega`` with ``omega = F_rho`` for the freely
infinitely divisible ``rho`` whose Voiculescu transform is ``(k-1) E_mu``.
For discrete ``mu`` the pair of ``rho`` is exact (see
:func:`freeconv.transforms.nevanlinna_pair`), so every value below is
accurate to solver tolerance.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateLaw, NoAdmissibleRoot, SubordinationMismatch
from .freeid import (
    DEFAULT_ZERO_RADIUS,
    DensityTable,
    FreeIdLaw,
    _boundary_solve,
    _u_values,
    check_grid,
    density_from_f,
    excluded_mask,
    g_of_x,
    h_eval,
    invert_h,
    make_law,
    support_intervals,
)
from .measures import DiscreteMeasure, GeneratingPair
from .transforms import POLE_TOL, cauchy_g, nevanlinna_pair

__all__ = [
    "ConvPow",
    "rho_pair",
    "make_convpow",
    "omega",
    "f_convpow",
    "convpow_zero",
    "convpow_atom",
    "convpow_density_table",
    "convpow_moments",
    "omega_oracle_smallcase",
]

SUBORDINATION_TOL = 1e-9
ATOM_LADDER = (1e-2, 1e-3, 1e-4)
ATOM_REPORT_MIN = 1e-6


@dataclass(frozen=True, eq=False)
class ConvPow:
    base: DiscreteMeasure
    k: int
    rho: FreeIdLaw


def _check_k(k) -> int:
    if int(k) != k or k < 2:
        raise ValueError(f"k must be an integer >= 2, got {k!r}")
    return int(k)


def rho_pair(mu: DiscreteMeasure, k: int) -> GeneratingPair:
    """Generating pair of the subordination law ``rho``: ``(k-1)`` times that of ``E_mu``."""
    k = _check_k(k)
    if mu.is_point_mass:
        raise DegenerateLaw("the base measure is a point mass")
    return nevanlinna_pair(mu).scaled(k - 1)


def make_convpow(mu: DiscreteMeasure, k: int) -> ConvPow:
    k = _check_k(k)
    return ConvPow(mu, k, make_law(rho_pair(mu, k)))


def omega(cp: ConvPow, w, boundary: bool = False):
    """Subordination function ``omega = F_rho`` at ``w``.

    ``boundary=True`` takes real ``w`` and returns the boundary value.
    """
    ww = np.asarray(w, dtype=complex if not boundary else float)
    flat = np.atleast_1d(ww).ravel()
    if boundary:
        x, u = _boundary_solve(cp.rho, flat)
        out = x + 1j * u
    else:
        out = np.atleast_1d(invert_h(cp.rho, flat))
    return complex(out[0]) if ww.ndim == 0 else out.reshape(ww.shape)


def _compose(cp: ConvPow, om: np.ndarray, w: np.ndarray) -> np.ndarray:
    f = om + (om - w) / (cp.k - 1)
    x, _ = cp.base.arrays()
    near = np.abs(om[:, None] - x[None, :]).min(axis=1) < POLE_TOL
    if near.any():
        raise SubordinationMismatch(f"omega lands on an atom of the base at w={w[near][0]!r}")
    with np.errstate(divide="ignore", invalid="ignore"):
        f_mu = 1.0 / cauchy_g(cp.base, om)
    gap = np.abs(f_mu - f)
    bad = ~(gap < SUBORDINATION_TOL * (1 + np.abs(f)))
    if bad.any():
        raise SubordinationMismatch(
            f"F_mu(omega) and omega + (omega - w)/(k-1) differ by {np.nanmax(gap):.3e}"
        )
    return f


def f_convpow(cp: ConvPow, w, boundary: bool = False):
    """F-transform of ``mu^{boxplus k}``, cross-checked through both subordination forms."""
    ww = np.asarray(w, dtype=complex)
    flat = np.atleast_1d(ww).ravel()
    om = np.atleast_1d(omega(cp, flat.real if boundary else flat, boundary))
    f = _compose(cp, om, flat)
    return complex(f[0]) if ww.ndim == 0 else f.reshape(ww.shape)


def convpow_zero(cp: ConvPow) -> float | None:
    """Real zero of ``F_{mu^{boxplus k}}`` if there is one.

    The zero sits where ``omega`` meets an atom ``a`` of the base, which
    happens iff the boundary curve of ``rho`` touches the axis at ``a``; the
    location is then ``H_rho(a)``.
    """
    for a in cp.base.positions:
        if _u_values(cp.rho, [a])[0] == 0:
            return float(h_eval(cp.rho, complex(a, 0.0)).real)
    return None


def convpow_atom(cp: ConvPow) -> tuple[float, float] | None:
    """Atom of ``mu^{boxplus k}`` as ``(location, mass)`` or ``None``.

    The mass is the limit of ``Re(i y G(t + i y))`` as ``y -> 0``, sampled on
    ``ATOM_LADDER`` and extrapolated.  The remainder is even in ``y`` when
    the atom is isolated, so the extrapolation runs in ``y^2``; the ladder is
    shrunk by the distance to the nearest support edge when that is below 1.

    The mass cannot exceed ``1 - g_rho(a)`` (``a`` the base atom hit by
    ``omega``), so candidates with ``g_rho(a) >= 1 - ATOM_REPORT_MIN`` are
    dropped without sampling; at the threshold itself the density blows up
    like ``|t - t0|^(-1/2)`` and no ladder would resolve the zero mass.
    """
    loc = convpow_zero(cp)
    if loc is None:
        return None
    a = cp.base.positions[int(np.argmin(np.abs(np.asarray(cp.base.positions) * cp.k - loc)))]
    if g_of_x(cp.rho, a) >= 1 - ATOM_REPORT_MIN:
        return None
    edges = np.ravel(support_intervals(cp.rho))
    gap = float(np.min(np.abs(edges - loc)))
    ys = np.asarray(ATOM_LADDER) * min(1.0, gap)
    f = f_convpow(cp, loc + 1j * ys)
    vals = (1j * ys / f).real
    r = (ys[:-1] / ys[1:]) ** 2
    level1 = (r * vals[1:] - vals[:-1]) / (r - 1)
    r2 = r[:-1] * r[1:]
    mass = float(((r2 * level1[1:] - level1[:-1]) / (r2 - 1))[0])
    if mass > ATOM_REPORT_MIN:
        return (loc, mass)
    return None


def convpow_density_table(
    cp: ConvPow, grid, excluded="auto", *, zero_radius: float = DEFAULT_ZERO_RADIUS
) -> DensityTable:
    """Density of ``mu^{boxplus k}`` from boundary values of ``omega``.

    ``excluded="auto"`` drops a ``zero_radius`` neighbourhood of the real
    zero of ``F`` when there is one.
    """
    grid = check_grid(grid)
    zero = convpow_zero(cp)
    if isinstance(excluded, str):
        if excluded != "auto":
            raise ValueError(f"unknown exclusion {excluded!r}")
        excluded = None if zero is None else (zero - zero_radius, zero + zero_radius)
    elif excluded is not None:
        excluded = (float(excluded[0]), float(excluded[1]))
    skip = excluded_mask(grid, excluded)
    values = np.full(grid.shape, np.nan)
    if (~skip).any():
        f = f_convpow(cp, grid[~skip], boundary=True)
        values[~skip] = density_from_f(f)
    return DensityTable(grid, values, excluded, convpow_atom(cp))


def _theta_sum(cp: ConvPow, c: float, r: float, theta: np.ndarray, powers: np.ndarray) -> np.ndarray:
    t = c + r * np.cos(theta)
    s = density_from_f(f_convpow(cp, t, boundary=True))
    return (t[None, :] ** powers[:, None] * (s * r * np.sin(theta))[None, :]).sum(axis=1)


def convpow_moments(
    cp: ConvPow, order: int, n_nodes: int = 64, *, rtol: float = 1e-12, max_nodes: int = 3**10
) -> np.ndarray:
    """Moments ``1..order`` of ``mu^{boxplus k}`` by quadrature plus the atom.

    Each support interval ``[c - r, c + r]`` is mapped to ``t = c + r cos(theta)``.
    At square-root edges, and at the inverse-square-root edges of threshold
    cases, the integrand ``t^j s(t) r sin(theta)`` is then an even, smooth,
    periodic function of ``theta``, for which the midpoint rule converges
    geometrically without touching the edges.  An atom just outside an edge
    leaves a near-pole that slows this down, so the node count is tripled
    (the old midpoints stay midpoints) until two rounds agree to ``rtol``
    relative to the moment scale, or ``max_nodes`` is reached.
    """
    powers = np.arange(1, order + 1)
    out = np.zeros(order)
    for lo, hi in support_intervals(cp.rho):
        c, r = 0.5 * (lo + hi), 0.5 * (hi - lo)
        scale = max(abs(lo), abs(hi), 1.0) ** powers
        n = n_nodes
        acc = _theta_sum(cp, c, r, np.pi * (np.arange(n) + 0.5) / n, powers)
        prev = acc * np.pi / n
        while 3 * n <= max_nodes:
            cells = np.arange(n)
            fresh = np.concatenate([cells + 1 / 6, cells + 5 / 6])
            acc = acc + _theta_sum(cp, c, r, np.pi * fresh / n, powers)
            n *= 3
            cur = acc * np.pi / n
            converged = np.max(np.abs(cur - prev) / scale) <= rtol
            prev = cur
            if converged:
                break
        out += prev
    atom = convpow_atom(cp)
    if atom is not None:
        out += atom[1] * atom[0] ** powers
    return out


# ---------------------------------------------------------------------------
# closed-form oracle for bases with at most three atoms


def _quadratic_roots(b: complex, c: complex) -> list[complex]:
    disc = cmath.sqrt(b * b - 4 * c)
    q = -0.5 * (b + disc if (b.conjugate() * disc).real >= 0 else b - disc)
    if q == 0:
        return [0j, 0j]
    return [q, c / q]


def _cubic_roots(b: complex, c: complex, d: complex) -> list[complex]:
    # Cardano on the depressed cubic y^3 + p y + q, z = y - b/3
    p = c - b * b / 3
    q = 2 * b**3 / 27 - b * c / 3 + d
    s = cmath.sqrt(q * q / 4 + p**3 / 27)
    u3 = -q / 2 + s
    if abs(-q / 2 - s) > abs(u3):
        u3 = -q / 2 - s
    if u3 == 0:
        ys = [0j, 0j, 0j]
    else:
        u = u3 ** (1 / 3)
        rot = cmath.exp(2j * math.pi / 3)
        ys = []
        for j in range(3):
            uj = u * rot**j
            ys.append(uj - p / (3 * uj))
    return [y - b / 3 for y in ys]


def _polish(coeffs: np.ndarray, z: complex) -> complex:
    # two Newton steps on the monic polynomial (coefficients highest first)
    dcoeffs = np.polyder(coeffs)
    for _ in range(3):
        dp = np.polyval(dcoeffs, z)
        if dp == 0:
            break
        z = z - np.polyval(coeffs, z) / dp
    return complex(z)


def omega_oracle_smallcase(mu: DiscreteMeasure, k: int, w: complex) -> complex:
    """Independent ``omega(w)`` for bases with at most three atoms.

    Clearing denominators in ``z + (k-1)(z - F_mu(z)) = w`` gives a monic
    polynomial of degree ``m <= 3``, solved in closed form.  For ``Im w > 0``
    the answer is the root in the upper half-plane; for real ``w`` it is the
    upper-half-plane root if one exists and otherwise the real root where the
    curve of ``rho`` touches the axis.
    """
    k = _check_k(k)
    if mu.is_point_mass:
        raise DegenerateLaw("the oracle needs a nondegenerate base")
    if mu.size > 3:
        raise ValueError("the closed-form oracle handles at most three atoms")
    w = complex(w)
    if w.imag < 0:
        raise ValueError("w must lie in the closed upper half-plane")
    x, p = mu.arrays()
    q_poly = np.poly(x)
    p_poly = np.zeros(len(x))
    for i in range(len(x)):
        p_poly = p_poly + p[i] * np.poly(np.delete(x, i))
    poly = np.polysub(np.polymul([k, -w], p_poly), (k - 1) * q_poly)
    poly = np.asarray(poly, complex) / poly[0]
    if len(poly) == 3:
        roots = _quadratic_roots(poly[1], poly[2])
    else:
        roots = _cubic_roots(poly[1], poly[2], poly[3])
    roots = [_polish(poly, r) for r in roots]

    def h_rho(z: complex) -> complex:
        f = 1 / complex((p / (z - x)).sum())
        return z + (k - 1) * (z - f)

    scale = 1 + abs(w)
    upper = [r for r in roots if r.imag > 1e-12 * (scale + abs(r))]
    if upper:
        best = max(upper, key=lambda r: r.imag)
        if h_rho(best).imag < -1e-9 * scale:
            raise NoAdmissibleRoot(f"root {best} lies outside the image of omega")
        return best
    if w.imag > 0:
        raise NoAdmissibleRoot(f"no upper half-plane root for w={w}")

    # real w: pick the real root where (k-1)(F_mu'(x) - 1) <= 1
    def g_rho(z: float) -> float:
        gz = (p / (z - x)).sum()
        gpz = -(p / (z - x) ** 2).sum()
        return (k - 1) * (-gpz / gz**2 - 1)

    real = [r.real for r in roots]
    ok = [(g_rho(r), r) for r in real if np.all(np.abs(r - x) > POLE_TOL)]
    admissible = [r for g, r in ok if g <= 1 + 1e-8]
    if not admissible:
        raise NoAdmissibleRoot(f"no admissible real root for w={w}")
    return complex(min(admissible, key=lambda r: g_rho(r)))
