"""Coefficient-wise concave sparsity penalties and their smoothed quadratic surrogates.

Each coefficient of the unknown gets its own one-dimensional penalty
``phi_k``, drawn from a small catalogue of concave, nondecreasing functions
with ``phi_k(0) = 0``.  The catalogue is parametrised by an exponent ``p``
(and for one family a second exponent ``q``).  The module also provides the
smoothed surrogate ``Psi_{eps,p}`` that replaces ``t -> t**(p/2)`` near zero
by a quadratic, which is what the reweighted-l2 solver iterates on.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional, Sequence

import numpy as np

__all__ = [
    "Family",
    "Variant",
    "PenaltySpec",
    "PenaltySequence",
    "SmoothedPenalty",
    "penalty_eval",
    "penalty_derivative",
    "sequence_eval",
    "smoothed_psi",
    "smoothed_psi_derivative",
    "psi_eps",
    "psi_eps_derivative",
    "weight_vector",
    "verify_assumptions",
    "assumption_constants",
]


class Family(str, Enum):
    """Catalogue of scalar penalty families ``phi(t)`` on ``t >= 0``."""

    POWER = "power"                                  # t**p
    LOG_POWER = "log_power"                          # log(t**p + 1)
    LOG_PLUS_POWER = "log_plus_power"                # log(t+1) + t**p
    POWER_SUM_POWER = "power_sum_power"              # (t + t**p)**q
    POWER_TIMES_LOG = "power_times_log"              # t**p * log(t+1)
    LINEAR_TIMES_LOG_POWER = "linear_times_log_power"  # t * log(t+1)**p


class Variant(str, Enum):
    """Penalty variant used by the reweighted-l2 solver."""

    POWER = "power"
    LOG_POWER = "log_power"

    @property
    def family(self) -> Family:
        return Family.POWER if self is Variant.POWER else Family.LOG_POWER


@dataclass(frozen=True)
class PenaltySpec:
    """One scalar penalty: a family plus its exponent(s).

    Parameters
    ----------
    family : Family
        Which formula from the catalogue.
    p : float
        Exponent in (0, 1].  Values above 1 are rejected unless
        ``allow_large_p`` is set (some experiment ramps start slightly
        above 1; sparsity guarantees do not cover those indices).
    q : float, optional
        Second exponent in (0, 1); required by POWER_SUM_POWER and
        forbidden elsewhere.
    """

    family: Family
    p: float
    q: Optional[float] = None
    allow_large_p: bool = field(default=False, repr=False, compare=False)

    def __post_init__(self):
        family = Family(self.family)
        object.__setattr__(self, "family", family)
        if not self.p > 0:
            raise ValueError(f"exponent p must be positive, got {self.p}")
        if self.p > 1 and not self.allow_large_p:
            raise ValueError(
                f"exponent p={self.p} exceeds 1; pass allow_large_p=True to permit it"
            )
        if family is Family.POWER_SUM_POWER:
            if self.q is None or not 0 < self.q < 1:
                raise ValueError("power_sum_power requires q in (0, 1)")
        elif self.q is not None:
            raise ValueError(f"family {family.value} takes no q exponent")

    def __call__(self, t):
        return penalty_eval(self, t)

    def derivative(self, t):
        return penalty_derivative(self, t)

    def to_dict(self) -> dict:
        d = {"family": self.family.value, "p": self.p}
        if self.q is not None:
            d["q"] = self.q
        return d

    @classmethod
    def from_dict(cls, d: dict, allow_large_p: bool = False) -> "PenaltySpec":
        return cls(Family(d["family"]), float(d["p"]), d.get("q"), allow_large_p=allow_large_p)


def _family_eval(family: Family, p, q, t):
    """Vectorised phi(t); p, q, t broadcast together, t >= 0."""
    if family is Family.POWER:
        return t**p
    if family is Family.LOG_POWER:
        return np.log1p(t**p)
    if family is Family.LOG_PLUS_POWER:
        return np.log1p(t) + t**p
    if family is Family.POWER_SUM_POWER:
        return (t + t**p) ** q
    if family is Family.POWER_TIMES_LOG:
        return t**p * np.log1p(t)
    if family is Family.LINEAR_TIMES_LOG_POWER:
        return t * np.log1p(t) ** p
    raise ValueError(f"unknown family {family!r}")


def _family_deriv(family: Family, p, q, t):
    """Vectorised phi'(t) for t > 0."""
    if family is Family.POWER:
        return p * t ** (p - 1)
    if family is Family.LOG_POWER:
        return p * t ** (p - 1) / (t**p + 1.0)
    if family is Family.LOG_PLUS_POWER:
        return 1.0 / (t + 1.0) + p * t ** (p - 1)
    if family is Family.POWER_SUM_POWER:
        return q * (t + t**p) ** (q - 1) * (1.0 + p * t ** (p - 1))
    if family is Family.POWER_TIMES_LOG:
        return p * t ** (p - 1) * np.log1p(t) + t**p / (t + 1.0)
    if family is Family.LINEAR_TIMES_LOG_POWER:
        lg = np.log1p(t)
        return lg**p + t * p * lg ** (p - 1) / (t + 1.0)
    raise ValueError(f"unknown family {family!r}")


def penalty_eval(spec: PenaltySpec, t: float) -> float:
    """Evaluate phi(t) for a single spec at a nonnegative point."""
    if t < 0:
        raise ValueError(f"penalty argument must be nonnegative, got {t}")
    if t == 0:
        return 0.0
    return float(_family_eval(spec.family, spec.p, spec.q, float(t)))


def penalty_derivative(spec: PenaltySpec, t: float) -> float:
    """Evaluate phi'(t) at t > 0.

    The derivative of every family with p < 1 is unbounded at 0, so the
    origin is rejected outright; solvers evaluate at ``|x| + eps`` or use
    clamped weights instead.
    """
    if t <= 0:
        raise ValueError(f"penalty derivative requires t > 0, got {t}")
    return float(_family_deriv(spec.family, spec.p, spec.q, float(t)))


class PenaltySequence:
    """A vector of penalty specs, one per coefficient.

    The infimum of the exponents must stay positive; this is what the
    convergence theory of the reweighted schemes requires.
    """

    def __init__(self, specs: Sequence[PenaltySpec]):
        specs = tuple(specs)
        if not specs:
            raise ValueError("penalty sequence may not be empty")
        p = np.array([s.p for s in specs], dtype=float)
        if p.min() <= 0:
            raise ValueError("inf_k p_k must be positive")
        self._specs = specs
        self._p = p
        self._q = np.array([math.nan if s.q is None else s.q for s in specs], dtype=float)
        self._families = tuple(s.family for s in specs)

    @classmethod
    def from_exponents(cls, family, p, q=None, allow_large_p: bool = False) -> "PenaltySequence":
        """Build a homogeneous sequence from an exponent vector."""
        family = Family(family)
        p = np.asarray(p, dtype=float)
        qs = np.full(p.shape, math.nan) if q is None else np.broadcast_to(np.asarray(q, float), p.shape)
        specs = [
            PenaltySpec(family, float(pi), None if math.isnan(qi) else float(qi),
                        allow_large_p=allow_large_p)
            for pi, qi in zip(p, qs)
        ]
        return cls(specs)

    @classmethod
    def power(cls, p, allow_large_p: bool = False) -> "PenaltySequence":
        return cls.from_exponents(Family.POWER, p, allow_large_p=allow_large_p)

    @classmethod
    def log_power(cls, p, allow_large_p: bool = False) -> "PenaltySequence":
        return cls.from_exponents(Family.LOG_POWER, p, allow_large_p=allow_large_p)

    def __len__(self) -> int:
        return len(self._specs)

    def __iter__(self):
        return iter(self._specs)

    def __getitem__(self, k) -> PenaltySpec:
        return self._specs[k]

    @property
    def specs(self) -> tuple:
        return self._specs

    @property
    def exponents(self) -> np.ndarray:
        return self._p

    @property
    def uniform_family(self) -> Optional[Family]:
        fam = self._families[0]
        return fam if all(f is fam for f in self._families) else None

    def require_family(self, family: Family) -> None:
        if self.uniform_family is not Family(family):
            raise ValueError(f"penalty sequence is not uniformly of family {Family(family).value}")

    def _grouped(self, t, deriv: bool):
        t = np.asarray(t, dtype=float)
        out = np.empty_like(t)
        fams = np.array([f.value for f in self._families])
        fn = _family_deriv if deriv else _family_eval
        for fam in np.unique(fams):
            m = fams == fam
            out[m] = fn(Family(fam), self._p[m], self._q[m], t[m])
        return out

    def eval_abs(self, t) -> np.ndarray:
        """Componentwise phi_k(t_k) for t_k >= 0."""
        t = np.asarray(t, dtype=float)
        if t.shape != self._p.shape:
            raise ValueError(f"length mismatch: {t.shape} vs {self._p.shape}")
        if np.any(t < 0):
            raise ValueError("penalty arguments must be nonnegative")
        out = self._grouped(np.maximum(t, 0.0), deriv=False)
        out[t == 0] = 0.0
        return out

    def derivatives(self, t) -> np.ndarray:
        """Componentwise phi_k'(t_k) for t_k > 0."""
        t = np.asarray(t, dtype=float)
        if t.shape != self._p.shape:
            raise ValueError(f"length mismatch: {t.shape} vs {self._p.shape}")
        if np.any(t <= 0):
            raise ValueError("penalty derivatives require strictly positive arguments")
        return self._grouped(t, deriv=True)


def sequence_eval(seq: PenaltySequence, x) -> float:
    """Total penalty ``sum_k phi_k(|x_k|)`` of a coefficient vector."""
    x = np.asarray(x, dtype=float)
    return float(np.sum(seq.eval_abs(np.abs(x))))


# ---------------------------------------------------------------------------
# Smoothed surrogate Psi_{eps,p}


def psi_eps(t, eps, p):
    """Smoothed power surrogate evaluated at ``t >= 0`` (arrays broadcast).

    Equal to ``(p/2) * t / eps**(2-p)`` for ``t <= eps**2`` and to
    ``t**(p/2) - (1 - p/2) * eps**p`` beyond; the two branches meet at
    ``t = eps**2`` with matching value and slope.
    """
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise ValueError("psi_eps requires t >= 0")
    eps_sq = eps**2
    lo = 0.5 * p * t / eps ** (2.0 - p)
    hi = np.maximum(t, eps_sq) ** (p / 2.0) - (1.0 - p / 2.0) * eps**p
    return np.where(t <= eps_sq, lo, hi)


def psi_eps_derivative(t, eps, p):
    """Derivative of :func:`psi_eps` in ``t``; the kink takes the flat-branch value."""
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise ValueError("psi_eps_derivative requires t >= 0")
    eps_sq = eps**2
    lo = 0.5 * p / eps ** (2.0 - p) * np.ones_like(t)
    hi = 0.5 * p * np.maximum(t, eps_sq) ** (p / 2.0 - 1.0)
    return np.where(t <= eps_sq, lo, hi)


@dataclass(frozen=True)
class SmoothedPenalty:
    """The pair (eps, p) defining the surrogate ``Psi_{eps,p}``."""

    eps: float
    p: float

    def __post_init__(self):
        if not self.eps > 0:
            raise ValueError("eps must be positive")
        if not 0 < self.p < 1:
            raise ValueError("smoothing exponent p must lie in (0, 1)")

    def value(self, t):
        return psi_eps(t, self.eps, self.p)

    def derivative(self, t):
        return psi_eps_derivative(t, self.eps, self.p)


def smoothed_psi(sp: SmoothedPenalty, t: float) -> float:
    """Scalar ``Psi_{eps,p}(t)``."""
    return float(sp.value(float(t)))


def smoothed_psi_derivative(sp: SmoothedPenalty, t: float) -> float:
    """Scalar ``Psi'_{eps,p}(t)``; satisfies ``2 Psi'(x^2) x = p x / max(eps^{2-p}, |x|^{2-p})``."""
    return float(sp.derivative(float(t)))


def weight_vector(pk: PenaltySequence, eps: float, x, variant=Variant.POWER) -> np.ndarray:
    """Reweighting diagonal for the quadratic subproblems (alpha excluded).

    POWER:      ``w_k = p_k / max(eps**(2-p_k), |x_k|**(2-p_k))``
    LOG_POWER:  the same multiplied by ``1 / (Psi_{eps,p_k}(x_k^2) + 1)``.

    The clamp at ``eps`` removes the singularity at ``x_k = 0``, so the
    weights are finite and positive for every iterate.
    """
    if not eps > 0:
        raise ValueError("eps must be positive")
    variant = Variant(variant)
    pk.require_family(variant.family)
    x = np.asarray(x, dtype=float)
    p = pk.exponents
    w = p / np.maximum(eps ** (2.0 - p), np.abs(x) ** (2.0 - p))
    if variant is Variant.LOG_POWER:
        w = w / (psi_eps(x * x, eps, p) + 1.0)
    return w


# ---------------------------------------------------------------------------
# Numeric checks of the standing assumptions


def verify_assumptions(seq: PenaltySequence, c: float, M: float, L: float, grid) -> bool:
    """Grid check of the two regularization conditions.

    Returns True iff for every spec and every grid point ``t > 0`` both
    ``phi_k(t) >= c*t/(t+1)`` and ``phi_k(t) <= M  implies  t <= L`` hold.
    """
    t = np.asarray(grid, dtype=float)
    if t.size == 0 or np.any(t <= 0):
        raise ValueError("grid must be nonempty with positive entries")
    p = seq.exponents[:, None]
    q = seq._q[:, None]
    fams = np.array([f.value for f in seq._families])
    vals = np.empty((len(seq), t.size))
    for fam in np.unique(fams):
        m = fams == fam
        vals[m] = _family_eval(Family(fam), p[m], q[m], t[None, :])
    lower = c * t / (t + 1.0)
    if not np.all(vals >= lower[None, :] - 1e-12):
        return False
    small = vals <= M
    return bool(np.all(np.where(small, t[None, :], 0.0) <= L + 1e-12))


def assumption_constants(family, p: float, M: float, q: Optional[float] = None):
    """Documented (c, L) pairs for the sublevel/lower-bound conditions.

    ``p`` (and ``q``) are the infima over the sequence.  Only the four
    families with known constants are covered; the two log-weighted
    families grow like ``t**(p+1)`` and carry no sparsity constants.
    """
    family = Family(family)
    if family is Family.POWER:
        return 1.0, max(1.0, M ** (1.0 / p))
    if family is Family.LOG_POWER:
        return p, max(1.0, (math.exp(M) - 1.0) ** (1.0 / p))
    if family is Family.LOG_PLUS_POWER:
        return 2.0, max(math.exp(M), math.exp(M) - 1.0 + M ** (1.0 / p))
    if family is Family.POWER_SUM_POWER:
        if q is None:
            raise ValueError("power_sum_power needs q")
        return 1.0, max(1.0, M ** (1.0 / q)) + max(1.0, M ** (1.0 / (p * q)))
    raise ValueError(f"no documented constants for family {family.value}")
