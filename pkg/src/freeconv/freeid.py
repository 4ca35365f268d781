"""Freely infinitely divisible laws.

A law is described by its Voiculescu transform ``phi``: either a free
Levy-Khintchine pair (``gamma`` plus a finite node measure ``sigma``) or one
of the closed-form freely stable transforms.  ``F`` is recovered as the
inverse of ``H(z) = z + phi(z)``:

* in the open upper half-plane by solving ``H(z) = w`` (fixed point of
  ``z -> w - phi(z)``, with a damped Newton fallback);
* on the real line through the boundary curve ``x + i u(x)``, where ``u(x)``
  is the height at which ``Im H`` vanishes.  ``x -> Re H(x + i u(x))`` is
  increasing, so ``F(t)`` is found by bracketing and bisecting in ``x``.

All solvers below work on whole arrays at once; the scalar helpers are thin
wrappers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Union

import numpy as np

from .errors import (
    BracketExpansionFailure,
    CurveMonotonicityViolation,
    DegenerateLaw,
    EvaluationAtSingularity,
    InvalidStableParameters,
    NoConvergence,
    PoleAtSigmaNode,
    RootFindingFailure,
    ZeroJump,
)
from .measures import DiscreteMeasure, GeneratingPair, make_nodes
from .transforms import POLE_TOL, pair_transform

__all__ = [
    "StableSpec",
    "FreeIdLaw",
    "BoundaryCurve",
    "AtomReport",
    "DensityTable",
    "make_law",
    "make_stable",
    "pair_law",
    "semicircle",
    "marchenko_pastur",
    "cauchy_law",
    "phi_eval",
    "h_eval",
    "h_prime",
    "g_of_x",
    "u_of_x",
    "boundary_curve",
    "invert_h",
    "f_boundary",
    "f_eval",
    "density_at",
    "density_values",
    "density_table",
    "atom_report",
    "compound_poisson_pair",
    "in_omega",
    "support_intervals",
    "sigma_kernel",
    "DEFAULT_ZERO_RADIUS",
    "stable_dilation_error",
]

ANGLE_TOL = 1e-12
DEFAULT_ZERO_RADIUS = 0.05
_EPS = np.finfo(float).eps


@dataclass(frozen=True)
class StableSpec:
    """Closed-form freely stable transform.

    ``alpha == 2``: ``phi = 1/z``.  ``alpha != 1``: ``phi = b z^(1-alpha)``.
    ``alpha == 1``: ``phi = -2 b i + 2 (2b - 1)/pi log z`` with real ``b``.
    ``scale`` multiplies ``phi``; ``scale = c^alpha`` is the law of ``c X``
    (up to a shift when ``alpha == 1``).  Use :func:`make_stable` to validate
    the parameter ranges.
    """

    alpha: float
    b: complex = 1.0
    scale: float = 1.0

    def to_dict(self) -> dict:
        b = complex(self.b)
        return {"alpha": self.alpha, "b": [b.real, b.imag], "scale": self.scale}


PhiSpec = Union[GeneratingPair, StableSpec]


@dataclass(frozen=True, eq=False)
class FreeIdLaw:
    phi: PhiSpec
    degenerate: bool = False
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    @property
    def is_pair(self) -> bool:
        return isinstance(self.phi, GeneratingPair)

    def describe(self) -> dict:
        if self.is_pair:
            return {"kind": "pair", **self.phi.to_dict()}
        return {"kind": "stable", **self.phi.to_dict()}


@dataclass(frozen=True, eq=False)
class BoundaryCurve:
    x: np.ndarray
    u: np.ndarray
    t: np.ndarray

    @property
    def samples(self) -> list[tuple[float, float, float]]:
        return list(zip(self.x.tolist(), self.u.tolist(), self.t.tolist()))


@dataclass(frozen=True)
class AtomReport:
    L: float
    t_nu: float | None
    atom_mass: float
    has_zero: bool

    @property
    def atom(self) -> tuple[float, float] | None:
        if self.atom_mass > 0:
            return (self.t_nu, self.atom_mass)
        return None


@dataclass(frozen=True, eq=False)
class DensityTable:
    """Density samples on a grid; excluded points carry ``nan``."""

    grid: np.ndarray
    values: np.ndarray
    excluded: tuple[float, float] | None = None
    atom: tuple[float, float] | None = None

    @property
    def included(self) -> np.ndarray:
        return ~np.isnan(self.values)

    def mass(self) -> float:
        """Trapezoid mass over the non-excluded grid segments."""
        keep = self.included
        pair_ok = keep[1:] & keep[:-1]
        dt = np.diff(self.grid)
        v = np.where(keep, self.values, 0.0)
        return float((0.5 * (v[1:] + v[:-1]) * dt)[pair_ok].sum())

    def total_mass(self) -> float:
        return self.mass() + (self.atom[1] if self.atom else 0.0)


# ---------------------------------------------------------------------------
# construction


def make_stable(alpha: float, b: complex = 1.0, scale: float = 1.0) -> StableSpec:
    """Validate the stable parameters against the four-case classification."""
    alpha = float(alpha)
    scale = float(scale)
    if not 0 < alpha <= 2:
        raise InvalidStableParameters(f"alpha={alpha} outside (0, 2]")
    if not 0 < scale < math.inf:
        raise InvalidStableParameters(f"scale={scale} must be positive and finite")
    if alpha == 2:
        return StableSpec(2.0, 1.0, scale)
    b = complex(b)
    if alpha == 1:
        if abs(b.imag) > ANGLE_TOL or not -ANGLE_TOL <= b.real <= 1 + ANGLE_TOL:
            raise InvalidStableParameters(f"alpha=1 needs real b in [0, 1], got {b}")
        return StableSpec(1.0, min(max(b.real, 0.0), 1.0), scale)
    if abs(abs(b) - 1) > ANGLE_TOL:
        raise InvalidStableParameters(f"|b| must be 1, got {abs(b)}")
    theta = math.atan2(b.imag, b.real)
    if alpha > 1:
        ok = (alpha - 2) * math.pi - ANGLE_TOL <= theta <= ANGLE_TOL
    else:
        theta %= 2 * math.pi
        if theta < ANGLE_TOL:
            theta += 2 * math.pi
        ok = math.pi - ANGLE_TOL <= theta <= (1 + alpha) * math.pi + ANGLE_TOL
    if not ok:
        raise InvalidStableParameters(f"arg b = {theta:.6g} outside the range for alpha={alpha}")
    return StableSpec(alpha, b, scale)


def make_law(phi: PhiSpec) -> FreeIdLaw:
    if isinstance(phi, StableSpec):
        return FreeIdLaw(make_stable(phi.alpha, phi.b, phi.scale))
    if isinstance(phi, GeneratingPair):
        return FreeIdLaw(phi, degenerate=phi.sigma.is_zero)
    raise TypeError(f"unsupported phi spec {phi!r}")


def pair_law(gamma: float, nodes) -> FreeIdLaw:
    return make_law(GeneratingPair(float(gamma), make_nodes(nodes)))


def semicircle() -> FreeIdLaw:
    return pair_law(0.0, [(0.0, 1.0)])


def marchenko_pastur(lam: float) -> FreeIdLaw:
    return make_law(compound_poisson_pair(lam, DiscreteMeasure((1.0,), (1.0,))))


def cauchy_law() -> FreeIdLaw:
    return make_law(StableSpec(1.0, 0.5))


def compound_poisson_pair(lam: float, jump: DiscreteMeasure) -> GeneratingPair:
    """Free generating pair of the compound free Poisson law."""
    if not lam > 0:
        raise ValueError("rate must be positive")
    x, p = jump.arrays()
    if np.all(x == 0):
        raise ZeroJump("jump distribution is the point mass at 0")
    gamma = lam * float((p * x / (1 + x**2)).sum())
    sigma = make_nodes(zip(x, lam * p * x**2 / (1 + x**2)))
    return GeneratingPair(gamma, sigma)


# ---------------------------------------------------------------------------
# transforms


def _require_nondegenerate(law: FreeIdLaw) -> None:
    if law.degenerate:
        raise DegenerateLaw("sigma = 0: the law is a point mass")


def _phi(law: FreeIdLaw, z: np.ndarray) -> np.ndarray:
    spec = law.phi
    if isinstance(spec, GeneratingPair):
        t, _ = spec.sigma.arrays()
        if t.size and np.any(z.imag <= 0):
            zr = z[z.imag <= 0].real
            if np.any(np.abs(zr[:, None] - t[None, :]) < POLE_TOL):
                raise PoleAtSigmaNode("boundary evaluation at a sigma node")
        return np.asarray(pair_transform(spec, z), dtype=complex)
    z = z + 0.0j  # drop any negative zero in the imaginary part
    if spec.alpha == 1:
        k = 2 * (2 * spec.b.real - 1) / math.pi
        return spec.scale * (-2j * spec.b.real + k * np.log(z))
    return spec.scale * spec.b * z ** (1 - spec.alpha)


def _phi_prime(law: FreeIdLaw, z: np.ndarray) -> np.ndarray:
    spec = law.phi
    if isinstance(spec, GeneratingPair):
        t, w = spec.sigma.arrays()
        if t.size == 0:
            return np.zeros_like(z)
        return -(w * (1 + t**2) / (z[..., None] - t) ** 2).sum(axis=-1)
    if spec.alpha == 1:
        return spec.scale * 2 * (2 * spec.b.real - 1) / math.pi / z
    return spec.scale * spec.b * (1 - spec.alpha) * z ** (-spec.alpha)


def _wrap(fn, law, z):
    zz = np.asarray(z, dtype=complex)
    if np.any(zz.imag < 0):
        raise ValueError("evaluation is restricted to Im z >= 0")
    out = fn(law, zz)
    return complex(out) if zz.ndim == 0 else out


def phi_eval(law: FreeIdLaw, z):
    """Voiculescu transform ``phi(z)``."""
    return _wrap(_phi, law, z)


def h_eval(law: FreeIdLaw, z):
    """``H(z) = z + phi(z)``, the inverse of ``F``."""
    return _wrap(lambda lw, zz: zz + _phi(lw, zz), law, z)


def h_prime(law: FreeIdLaw, z):
    return _wrap(lambda lw, zz: 1 + _phi_prime(lw, zz), law, z)


def sigma_kernel(law: FreeIdLaw, z):
    """``int (1+t^2)/(z-t)^2 dsigma(t)``, i.e. ``1 - H'(z)``."""
    return _wrap(lambda lw, zz: -_phi_prime(lw, zz), law, z)


def in_omega(law: FreeIdLaw, z) -> bool:
    """Membership in ``{z : Im H(z) > 0}``, the image of ``F``."""
    z = complex(z)
    if z.imag <= 0:
        raise ValueError("in_omega needs Im z > 0")
    return h_eval(law, z).imag > 0


# ---------------------------------------------------------------------------
# boundary curve


def _g_values(law: FreeIdLaw, x: np.ndarray) -> np.ndarray:
    t, w = law.phi.sigma.arrays()
    a = w * (1 + t**2)
    d2 = (t[None, :] - x[:, None]) ** 2
    with np.errstate(divide="ignore", over="ignore"):
        g = (a / d2).sum(axis=1)
    hit = (np.abs(t[None, :] - x[:, None]) < POLE_TOL).any(axis=1)
    g[hit] = np.inf
    return g


def g_of_x(law: FreeIdLaw, x: float) -> float:
    """``g(x) = int (1+t^2)/(t-x)^2 dsigma``; ``x`` lies under the curve iff ``g > 1``.

    Stable laws report ``inf``.
    """
    if not law.is_pair:
        return math.inf
    return float(_g_values(law, np.array([float(x)]))[0])


def _u_pair(law: FreeIdLaw, x: np.ndarray) -> np.ndarray:
    # Solve J(s) = 1/I(s) = 1 for s = y^2, I(s) = sum a_j/((t_j-x)^2 + s).
    # J is increasing and concave, so Newton from the right approaches the root
    # monotonically; iterates leaving the bracket fall back to bisection.
    t, w = law.phi.sigma.arrays()
    a = w * (1 + t**2)
    g = _g_values(law, x)
    u = np.zeros_like(x)
    idx = np.flatnonzero(g > 1)
    if idx.size == 0:
        return u
    d2 = (t[None, :] - x[idx, None]) ** 2
    s_max = a.sum()
    lo = np.zeros(idx.size)
    hi = np.full(idx.size, s_max)
    s = hi.copy()
    out = np.empty(idx.size)
    live = np.arange(idx.size)
    for _ in range(200):
        den = d2[live] + s[:, None]
        i_val = (a / den).sum(axis=1)
        di = (a / den**2).sum(axis=1)
        f = 1.0 / i_val - 1.0
        fp = di / i_val**2
        left = f < 0
        lo[live[left]] = s[left]
        hi[live[~left]] = s[~left]
        with np.errstate(divide="ignore", invalid="ignore"):
            s_new = s - f / fp
        bad = ~((s_new >= lo[live]) & (s_new <= hi[live]))
        s_new[bad] = 0.5 * (lo[live][bad] + hi[live][bad])
        s_new[f == 0] = s[f == 0]
        # J is close to 1 near the root, so |f| cannot drop much below eps
        done = (
            (np.abs(s_new - s) <= 4 * _EPS * s_new)
            | (np.abs(f) <= 4 * _EPS)
            | (hi[live] - lo[live] <= 4 * _EPS * hi[live])
        )
        out[live[done]] = s_new[done]
        keep = ~done
        live, s = live[keep], s_new[keep]
        if live.size == 0:
            break
    else:
        raise RootFindingFailure("height solve did not converge")
    u[idx] = np.sqrt(out)
    return u


def _im_h(law: FreeIdLaw, x: np.ndarray, y: np.ndarray) -> np.ndarray:
    z = x + 1j * y
    return (z + _phi(law, z)).imag


def _u_stable(law: FreeIdLaw, x: np.ndarray) -> np.ndarray:
    # Im H(x+iy) > 0 exactly when y > u(x); bracket the sign change by
    # doubling/halving from y = 1, then bisect.
    n = x.size
    hi = np.ones(n)
    for _ in range(64):
        bad = _im_h(law, x, hi) <= 0
        if not bad.any():
            break
        hi[bad] *= 2
    else:
        raise BracketExpansionFailure("no upper bracket for the boundary height")
    floor = 1e-15 * np.maximum(1.0, np.abs(x))
    lo = 0.5 * hi
    live = np.arange(n)
    for _ in range(1100):
        pos = _im_h(law, x[live], lo[live]) > 0
        above_floor = lo[live] > floor[live]
        move = pos & above_floor
        if not move.any():
            break
        m = live[move]
        hi[m] = lo[m]
        lo[m] *= 0.5
        live = m
    u = np.zeros(n)
    # points still positive at the floor lie on the real axis
    pos_floor = _im_h(law, x, lo) > 0
    live = np.flatnonzero(~pos_floor)
    for _ in range(200):
        if live.size == 0:
            break
        mid = 0.5 * (lo[live] + hi[live])
        stuck = (mid <= lo[live]) | (mid >= hi[live])
        pos = _im_h(law, x[live], mid) > 0
        hi[live[pos]] = mid[pos]
        lo[live[~pos]] = mid[~pos]
        done = stuck | (hi[live] - lo[live] <= 4 * _EPS * hi[live])
        live = live[~done]
    u[~pos_floor] = 0.5 * (lo[~pos_floor] + hi[~pos_floor])
    return u


def _u_values(law: FreeIdLaw, x) -> np.ndarray:
    _require_nondegenerate(law)
    x = np.atleast_1d(np.asarray(x, float))
    if law.is_pair:
        return _u_pair(law, x)
    return _u_stable(law, x)


def u_of_x(law: FreeIdLaw, x: float) -> float:
    """Height ``u(x)`` of the boundary curve above ``x`` (0 outside ``A``)."""
    u = float(_u_values(law, [x])[0])
    if law.is_pair and u > 0:
        t, w = law.phi.sigma.arrays()
        resid = float((w * (1 + t**2) / ((t - x) ** 2 + u**2)).sum()) - 1.0
        if abs(resid) > 1e-11:
            raise RootFindingFailure(f"height residual {resid:.3e}")
    return u


def _curve_point(law: FreeIdLaw, x: np.ndarray):
    u = _u_values(law, x)
    z = x + 1j * u
    h = z + _phi(law, z)
    return h.real, u, h.imag


def boundary_curve(law: FreeIdLaw, x_lo: float, x_hi: float, n_samples: int) -> BoundaryCurve:
    """Sample ``x -> (x, u(x), H(x + i u(x)))`` on a uniform grid."""
    if not x_lo < x_hi or n_samples < 2:
        raise ValueError("need x_lo < x_hi and at least two samples")
    key = ("curve", float(x_lo), float(x_hi), int(n_samples))
    cached = law._cache.get(key)
    if cached is not None:
        return cached
    x = np.linspace(x_lo, x_hi, n_samples)
    t, u, im = _curve_point(law, x)
    scale = 1.0 + np.abs(t)
    if np.any(np.abs(im) > 1e-9 * scale):
        raise CurveMonotonicityViolation("Im H does not vanish along the curve")
    if np.any(np.diff(t) <= 0):
        raise CurveMonotonicityViolation("t(x) is not strictly increasing")
    curve = BoundaryCurve(x, u, t)
    law._cache[key] = curve
    return curve


def _boundary_solve(law: FreeIdLaw, t) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized ``F(t) = x + i u`` for real ``t``."""
    _require_nondegenerate(law)
    t = np.atleast_1d(np.asarray(t, float))
    lo = t - 1.0
    hi = t + 1.0
    t_lo, _, _ = _curve_point(law, lo)
    t_hi, _, _ = _curve_point(law, hi)
    for j in range(1, 62):
        bad_lo = t_lo > t
        bad_hi = t_hi < t
        if not (bad_lo.any() or bad_hi.any()):
            break
        if j == 61:
            raise BracketExpansionFailure("could not bracket F(t)")
        step = 2.0**j
        if bad_lo.any():
            lo[bad_lo] = t[bad_lo] - step
            t_lo[bad_lo] = _curve_point(law, lo[bad_lo])[0]
        if bad_hi.any():
            hi[bad_hi] = t[bad_hi] + step
            t_hi[bad_hi] = _curve_point(law, hi[bad_hi])[0]
    live = np.arange(t.size)
    for _ in range(400):
        mid = 0.5 * (lo[live] + hi[live])
        stuck = (mid <= lo[live]) | (mid >= hi[live])
        tm, _, _ = _curve_point(law, mid)
        below = tm < t[live]
        lo[live[below]] = mid[below]
        hi[live[~below]] = mid[~below]
        width = hi[live] - lo[live]
        done = stuck | (width <= 2 * _EPS * np.maximum(1.0, np.abs(mid)))
        live = live[~done]
        if live.size == 0:
            break
    x = 0.5 * (lo + hi)
    u = _u_values(law, x)
    return x, u


def f_boundary(law: FreeIdLaw, t: float) -> tuple[float, float]:
    """Boundary value ``F(t) = x + i u(x)`` as the pair ``(x, u)``."""
    x, u = _boundary_solve(law, [float(t)])
    return float(x[0]), float(u[0])


def invert_h(law: FreeIdLaw, w, *, tol: float = 1e-13, max_iter: int = 10_000):
    """``F(w)`` for ``Im w > 0``: the unique solution of ``H(z) = w`` in ``C+``.

    Fixed-point iteration ``z <- w - phi(z)`` from ``z = w``; entries that
    stall (iteration cap, or contraction ratio above 0.999 over 50 steps)
    are handed to damped Newton on ``H(z) - w`` kept inside ``Im z > 0``.
    Any solution in the upper half-plane is the right one, since ``H`` is
    injective on the image of ``F`` and ``Im H = Im w > 0`` there.
    """
    ww = np.asarray(w, dtype=complex)
    scalar = ww.ndim == 0
    ww = np.atleast_1d(ww).ravel()
    if np.any(ww.imag <= 0):
        raise ValueError("invert_h needs Im w > 0")
    if law.degenerate:
        out = ww - law.phi.gamma
        return complex(out[0]) if scalar else out.reshape(np.shape(w))
    z = ww.copy()
    out = np.full_like(ww, np.nan)
    live = np.arange(ww.size)
    ref = np.full(ww.size, np.nan)
    slow = []
    for it in range(1, max_iter + 1):
        z_new = ww[live] - _phi(law, z)
        step = np.abs(z_new - z)
        done = step < tol * (1 + np.abs(z))
        out[live[done]] = z_new[done]
        if it % 50 == 0:
            with np.errstate(divide="ignore", invalid="ignore"):
                ratio = (step / ref) ** (1 / 50)
            stalled = ~done & (ratio > 0.999)
            if stalled.any():
                slow.append(live[stalled])
                out[live[stalled]] = z_new[stalled]
                done = done | stalled
            ref = step
        keep = ~done
        live, z, ref = live[keep], z_new[keep], ref[keep]
        if live.size == 0:
            break
    if live.size:
        out[live] = z
        slow.append(live)
    slow = np.concatenate(slow) if slow else np.zeros(0, int)
    if slow.size:
        out[slow] = _newton_h(law, out[slow], ww[slow])
    out = _polish_h(law, out, ww)
    resid = np.abs(out + _phi(law, out) - ww)
    if np.any(~np.isfinite(out)) or np.any(resid > 1e-11 * (1 + np.abs(ww))):
        raise NoConvergence(f"H(z) = w residual {np.nanmax(resid):.3e}")
    return complex(out[0]) if scalar else out.reshape(np.shape(w))


def _polish_h(law: FreeIdLaw, z: np.ndarray, w: np.ndarray, steps: int = 2) -> np.ndarray:
    # The fixed-point stop bounds the step, not the error; a couple of plain
    # Newton steps bring the residual to rounding level.  Kept entrywise only
    # where they help.
    r = z + _phi(law, z) - w
    for _ in range(steps):
        with np.errstate(divide="ignore", invalid="ignore"):
            trial = z - r / (1 + _phi_prime(law, z))
        ok = np.isfinite(trial) & (trial.imag > 0)
        r_trial = np.full_like(r, np.inf)
        r_trial[ok] = trial[ok] + _phi(law, trial[ok]) - w[ok]
        better = ok & (np.abs(r_trial) < np.abs(r))
        if not better.any():
            break
        z = np.where(better, trial, z)
        r = np.where(better, r_trial, r)
    return z


def _newton_h(law: FreeIdLaw, z: np.ndarray, w: np.ndarray) -> np.ndarray:
    z = z.copy()
    bump = z.imag <= 0
    z[bump] = z[bump].real + 1j * np.maximum(w[bump].imag, 1e-300)
    for _ in range(200):
        r = z + _phi(law, z) - w
        if np.all(np.abs(r) < 1e-14 * (1 + np.abs(w))):
            break
        d = r / (1 + _phi_prime(law, z))
        lam = np.ones(z.size)
        trial = z - d
        for _ in range(60):
            ok = trial.imag > 0
            ok[ok] &= np.abs(trial[ok] + _phi(law, trial[ok]) - w[ok]) < np.abs(r[ok])
            if ok.all():
                break
            lam[~ok] *= 0.5
            trial[~ok] = z[~ok] - lam[~ok] * d[~ok]
        else:
            # no decrease possible: already at the precision floor
            trial = np.where(ok, trial, z)
        if np.array_equal(trial, z):
            break
        z = trial
    return z


def f_eval(law: FreeIdLaw, w):
    """``F`` on the closed upper half-plane (interior by inversion, real via the curve)."""
    ww = np.asarray(w, dtype=complex)
    flat = np.atleast_1d(ww).ravel()
    out = np.empty_like(flat)
    real = flat.imag == 0
    if real.any():
        x, u = _boundary_solve(law, flat[real].real)
        out[real] = x + 1j * u
    if (~real).any():
        out[~real] = invert_h(law, flat[~real])
    return complex(out[0]) if ww.ndim == 0 else out.reshape(ww.shape)


# ---------------------------------------------------------------------------
# atoms and densities


def atom_report(law: FreeIdLaw) -> AtomReport:
    """Zero of ``F`` on the real line and the atom sitting there, if any.

    ``L = int (1+t^2)/t^2 dsigma``.  ``F`` has a real zero iff ``L <= 1``; the
    zero is ``gamma - int dsigma/t`` and carries mass ``1 - L``.
    """
    _require_nondegenerate(law)
    if not law.is_pair:
        return AtomReport(math.inf, None, 0.0, False)
    t, w = law.phi.sigma.arrays()
    if np.any(np.abs(t) < POLE_TOL):
        return AtomReport(math.inf, None, 0.0, False)
    L = float((w * (1 + t**2) / t**2).sum())
    if L > 1:
        return AtomReport(L, None, 0.0, False)
    t_nu = law.phi.gamma - float((w / t).sum())
    return AtomReport(L, t_nu, max(1.0 - L, 0.0), True)


def _is_singular(report: AtomReport, t: np.ndarray) -> np.ndarray:
    if not report.has_zero:
        return np.zeros(t.shape, bool)
    return np.abs(t - report.t_nu) <= 1e-12 * (1 + abs(report.t_nu))


def density_from_f(f: np.ndarray) -> np.ndarray:
    """Stieltjes inversion ``(1/pi) Im F / |F|^2`` (``F = 0`` is singular)."""
    mod2 = f.real**2 + f.imag**2
    if np.any(mod2 == 0):
        raise EvaluationAtSingularity("F vanishes at a requested point")
    return f.imag / (math.pi * mod2)


def density_values(law: FreeIdLaw, t) -> np.ndarray:
    """Vectorized :func:`density_at`."""
    t = np.atleast_1d(np.asarray(t, float))
    report = atom_report(law)
    if np.any(_is_singular(report, t)):
        raise EvaluationAtSingularity(f"density requested at the zero t_nu = {report.t_nu}")
    x, u = _boundary_solve(law, t)
    return density_from_f(x + 1j * u)


def density_at(law: FreeIdLaw, t: float) -> float:
    """Density of the absolutely continuous part at ``t``."""
    return float(density_values(law, [t])[0])


def _resolve_excluded(excluded, report: AtomReport, radius: float):
    if isinstance(excluded, str):
        if excluded != "auto":
            raise ValueError(f"unknown exclusion {excluded!r}")
        if report.has_zero:
            return (report.t_nu - radius, report.t_nu + radius)
        return None
    if excluded is None:
        return None
    lo, hi = map(float, excluded)
    if not lo < hi:
        raise ValueError("excluded interval must have lo < hi")
    return (lo, hi)


def excluded_mask(grid: np.ndarray, excluded) -> np.ndarray:
    if excluded is None:
        return np.zeros(grid.shape, bool)
    return (grid > excluded[0]) & (grid < excluded[1])


def check_grid(grid) -> np.ndarray:
    grid = np.asarray(grid, float)
    if grid.ndim != 1 or grid.size < 1 or np.any(np.diff(grid) <= 0):
        raise ValueError("grid must be a strictly increasing 1-d array")
    return grid


def density_table(law: FreeIdLaw, grid, excluded="auto", *, zero_radius: float = DEFAULT_ZERO_RADIUS) -> DensityTable:
    """Density on ``grid`` minus the open interval ``excluded``.

    ``excluded="auto"`` drops a ``zero_radius`` neighbourhood of the real
    zero of ``F`` when there is one; pass ``None`` to keep every point.
    """
    grid = check_grid(grid)
    report = atom_report(law)
    exc = _resolve_excluded(excluded, report, zero_radius)
    skip = excluded_mask(grid, exc)
    values = np.full(grid.shape, np.nan)
    if (~skip).any():
        values[~skip] = density_values(law, grid[~skip])
    return DensityTable(grid, values, exc, report.atom)


def stable_dilation_error(alpha: float, b: complex = 1.0, grid=None) -> float:
    """Max ``|s_{2 phi}(t) - s_phi((t - shift)/c)/c|`` with ``c = 2^(1/alpha)``.

    Doubling ``phi`` gives the law of ``c X``; for ``alpha == 1`` the
    logarithm adds the shift ``2 K log 2``, ``K = 2 (2b - 1)/pi``.
    """
    spec = make_stable(alpha, b)
    law = FreeIdLaw(spec)
    doubled = FreeIdLaw(make_stable(spec.alpha, spec.b, 2 * spec.scale))
    grid = check_grid(np.linspace(-4.0, 4.0, 401) if grid is None else grid)
    c = 2.0 ** (1 / spec.alpha)
    shift = 0.0
    if spec.alpha == 1:
        shift = 2 * (2 * (2 * spec.b.real - 1) / math.pi) * math.log(2)
    lhs = density_values(doubled, grid)
    rhs = density_values(law, (grid - shift) / c) / c
    return float(np.max(np.abs(lhs - rhs)))


# ---------------------------------------------------------------------------
# support of the absolutely continuous part (pair laws)


def _bisect_scalar(f, lo: float, hi: float) -> float:
    # f(lo) < 0 < f(hi)
    for _ in range(400):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if f(mid) < 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def _x_edges(law: FreeIdLaw) -> list[tuple[float, float]]:
    # components of A = {g > 1}; g is convex between nodes and tends to +inf
    # at every node, to 0 at +-inf
    t, w = law.phi.sigma.arrays()
    a = w * (1 + t**2)

    def g1(x: float) -> float:
        return float((a / (t - x) ** 2).sum()) - 1.0

    def dg(x: float) -> float:
        return float((2 * a / (t - x) ** 3).sum())

    step = 1.0
    while g1(t[0] - step) > 0:
        step *= 2
    left = _bisect_scalar(g1, t[0] - step, t[0])
    step = 1.0
    while g1(t[-1] + step) > 0:
        step *= 2
    right = _bisect_scalar(lambda x: -g1(x), t[-1], t[-1] + step)
    pieces = []
    start = left
    for n0, n1 in zip(t[:-1], t[1:]):
        xm = _bisect_scalar(dg, n0, n1)
        if g1(xm) < 0:
            pieces.append((start, _bisect_scalar(lambda x: -g1(x), n0, xm)))
            start = _bisect_scalar(g1, xm, n1)
    pieces.append((start, right))
    return pieces


def support_intervals(law: FreeIdLaw) -> list[tuple[float, float]]:
    """Closed intervals carrying the absolutely continuous part (pair laws)."""
    _require_nondegenerate(law)
    if not law.is_pair:
        raise NotImplementedError("support edges are only available for pair laws")
    out = []
    for x0, x1 in _x_edges(law):
        h = np.array([x0, x1]) + _phi(law, np.array([x0, x1], dtype=complex))
        out.append((float(h[0].real), float(h[1].real)))
    return out
