"""Concave conjugates and supergradients for concave increasing functions.

The reweighting schemes rest on writing a concave increasing ``psi`` as an
infimum of affine majorants.  The key object is the concave conjugate

    ``psi_conj(t) = inf_{s >= 0} (s*t - psi(s))``,

which is itself concave and increasing, satisfies a Fenchel-type
inequality ``psi(s) + psi_conj(t) <= s*t`` with equality exactly at
supergradient pairs, and is an involution on this function class.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

__all__ = [
    "CIFunction",
    "ConjugateBoundaryWarning",
    "concave_conjugate_numeric",
    "concave_conjugate_power",
    "fenchel_gap",
    "double_conjugate_residual",
    "power_ci",
    "log1p_ci",
    "linear_ci",
]

_INVPHI = (np.sqrt(5.0) - 1.0) / 2.0


class ConjugateBoundaryWarning(UserWarning):
    """The numeric infimum was attained at the search boundary ``s_max``."""


@dataclass(frozen=True)
class CIFunction:
    """A concave increasing scalar function on ``[0, inf)``.

    ``fn`` must accept numpy arrays.  ``supergradient`` and ``conjugate``
    are optional closed forms used when available.
    """

    fn: Callable
    supergradient: Optional[Callable] = None
    conjugate: Optional[Callable] = None
    label: str = ""

    def __call__(self, s):
        return self.fn(s)


def power_ci(p: float) -> CIFunction:
    """``psi(s) = s**p`` with closed-form conjugate and derivative."""
    if not 0 < p < 1:
        raise ValueError("power_ci requires p in (0, 1)")
    return CIFunction(
        fn=lambda s: np.asarray(s, float) ** p,
        supergradient=lambda s: p * np.asarray(s, float) ** (p - 1.0),
        conjugate=lambda t: concave_conjugate_power(p, t),
        label=f"s^{p:g}",
    )


def _log1p_conjugate(t: float) -> float:
    if t <= 0:
        raise ValueError("conjugate of log(1+s) requires t > 0")
    return 1.0 - t + np.log(t) if t <= 1.0 else 0.0


def log1p_ci() -> CIFunction:
    """``psi(s) = log(1 + s)``."""
    return CIFunction(
        fn=np.log1p,
        supergradient=lambda s: 1.0 / (1.0 + np.asarray(s, float)),
        conjugate=_log1p_conjugate,
        label="log(1+s)",
    )


def linear_ci() -> CIFunction:
    """``psi(s) = s``; its conjugate is 0 for t >= 1 and -inf below."""
    return CIFunction(
        fn=lambda s: np.asarray(s, float) + 0.0,
        supergradient=lambda s: np.ones_like(np.asarray(s, float)),
        conjugate=lambda t: 0.0 if t >= 1.0 else -np.inf,
        label="s",
    )


def concave_conjugate_power(p: float, t: float) -> float:
    """Closed-form conjugate of ``s -> s**p`` for ``0 < p < 1`` at ``t > 0``.

    The infimand is minimised at ``s = (t/p)**(1/(p-1))`` and evaluates to
    ``(p**(-1/(p-1)) - p**(-p/(p-1))) * t**(p/(p-1))``; for ``p = 1/2``
    this reduces to ``-1/(4t)``.  The value diverges to -inf as t -> 0+.
    """
    if not 0 < p < 1:
        raise ValueError("p must lie in (0, 1)")
    if t <= 0:
        raise ValueError("conjugate of a power requires t > 0")
    coeff = p ** (-1.0 / (p - 1.0)) - p ** (-p / (p - 1.0))
    return float(coeff * t ** (p / (p - 1.0)))


def _eval_on(fn, s):
    try:
        out = np.asarray(fn(s), dtype=float)
        if out.shape == np.shape(s):
            return out
    except (TypeError, ValueError):
        pass
    return np.array([float(fn(v)) for v in np.asarray(s, float).ravel()]).reshape(np.shape(s))


def _golden_min(fn, a: float, b: float, tol: float):
    """Golden-section minimisation of a unimodal scalar function on [a, b]."""
    c = b - _INVPHI * (b - a)
    d = a + _INVPHI * (b - a)
    fc, fd = fn(c), fn(d)
    while (b - a) > tol * (1.0 + abs(a) + abs(b)):
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - _INVPHI * (b - a)
            fc = fn(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INVPHI * (b - a)
            fd = fn(d)
    return (c, fc) if fc <= fd else (d, fd)


def concave_conjugate_numeric(psi, t: float, s_max: Optional[float] = None,
                              tol: float = 1e-10) -> float:
    """Numeric conjugate ``inf_{0 <= s <= s_max} (s*t - psi(s))``.

    A log-spaced coarse grid of 256 points on ``(0, s_max]`` plus ``s = 0``
    brackets the minimiser (the infimand is unimodal for concave ``psi``);
    golden-section then refines the bracket.  If the coarse minimum sits in
    the last grid cell a :class:`ConjugateBoundaryWarning` is issued, since
    that indicates ``s_max`` truncated the true infimum.
    """
    if t < 0:
        raise ValueError("conjugate argument must be nonnegative")
    fn = psi.fn if isinstance(psi, CIFunction) else psi
    if s_max is None:
        s_max = 1e6 * (1.0 + t)
    grid = np.concatenate(([0.0], np.logspace(np.log10(s_max) - 16.0, np.log10(s_max), 256)))
    vals = grid * t - _eval_on(fn, grid)
    i = int(np.argmin(vals))
    best = float(vals[i])
    if i >= grid.size - 1:
        warnings.warn(
            f"conjugate infimum attained at s_max={s_max:g}; result may be truncated",
            ConjugateBoundaryWarning,
            stacklevel=2,
        )
    lo = grid[max(i - 1, 0)]
    hi = grid[min(i + 1, grid.size - 1)]
    if hi > lo:
        _, fmin = _golden_min(lambda s: s * t - float(fn(s)), lo, hi, tol)
        best = min(best, float(fmin))
    return best


def _conjugate_value(psi, t: float, s_max=None, tol: float = 1e-10) -> float:
    if isinstance(psi, CIFunction) and psi.conjugate is not None:
        return float(psi.conjugate(t))
    return concave_conjugate_numeric(psi, t, s_max=s_max, tol=tol)


def fenchel_gap(psi: CIFunction, s: float, s_star: float, s_max=None,
                tol: float = 1e-10) -> float:
    """``s*s_star - psi(s) - psi_conj(s_star)``; nonnegative, and zero exactly
    when ``s_star`` is a supergradient of ``psi`` at ``s``."""
    return float(s * s_star - float(psi.fn(s)) - _conjugate_value(psi, s_star, s_max, tol))


def double_conjugate_residual(psi: CIFunction, grid, s_max=None, tol: float = 1e-10) -> float:
    """Max over the grid of ``|conj(conj(psi))(s) - psi(s)|`` using nested
    numeric conjugation.  The involution property makes the exact value 0;
    the residual measures the numeric pipeline only."""
    grid = np.asarray(grid, dtype=float)
    if grid.size == 0:
        raise ValueError("grid must be nonempty")
    inner = lambda t: concave_conjugate_numeric(psi, t, s_max=s_max, tol=tol)
    worst = 0.0
    for s in grid:
        val = concave_conjugate_numeric(inner, float(s), s_max=s_max, tol=tol)
        worst = max(worst, abs(val - float(psi.fn(s))))
    return worst
