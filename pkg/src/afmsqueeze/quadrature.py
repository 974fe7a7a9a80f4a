"""Quadrature variances of the total mode Σ = (a + b)/√2, squeeze and
stretch factors, squeezing rates and squeezing-energy correlations."""

from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np

from .errors import ConfigurationError, DomainError

FACTOR_KINDS = ("OX", "O_T_X", "O_Kz_P", "O_Kz_X", "O_T_P", "O_T_E", "O_Kz_E")
UNCERTAINTY_SLACK = 1e-9


@dataclass(frozen=True)
class QuadratureStats:
    var_x: float
    var_p: float
    n: int = 0
    m: int = 0
    q: Optional[tuple] = None
    var_x_err: float = 0.0
    var_p_err: float = 0.0
    cov_xp: float = 0.0

    @property
    def uncertainty_product(self):
        return self.var_x * self.var_p

    def satisfies_uncertainty(self, slack=UNCERTAINTY_SLACK):
        return self.uncertainty_product >= 0.25 - slack


@dataclass(frozen=True)
class FactorReport:
    kind: str
    value: float
    K_z: float
    kBT: float
    q: tuple = (0.0, 0.0)
    state: tuple = (0, 0)


def variance_xp(amps, q=None) -> QuadratureStats:
    """Δ²X and Δ²P of a fixed-δ two-mode state from its coefficient table.

    With p padded by one zero, 4Δ²X = δ|p_0|² + Σ_l |p_{l+1}√(l+δ+1) + p_l√(l+1)|²
    + Σ_l |p_{l+1}√(l+1) + p_l√(l+δ+1)|², and 4Δ²P is the same with the
    inner signs flipped. The mean of X and P vanishes in every fixed-δ
    sector. The truncated tail contributes at most (2L+δ+3)·tail_bound.

    ``cov_xp`` is ½⟨{X, P}⟩ = Im⟨ab⟩ with ⟨ab⟩ = Σ_l conj(p_{l-1}) p_l √(l(l+δ));
    it vanishes whenever the squeezing phase is 0 or π.
    """
    p = np.asarray(amps.coefficients, dtype=complex)
    delta = amps.delta
    L = len(p) - 1
    l = np.arange(L + 1)
    nxt = np.concatenate([p[1:], [0.0]])
    head = delta * abs(p[0]) ** 2
    lo = np.sqrt(l + 1.0)
    hi = np.sqrt(l + delta + 1.0)
    x4 = head + np.sum(np.abs(nxt * hi + p * lo) ** 2) + np.sum(np.abs(nxt * lo + p * hi) ** 2)
    p4 = head + np.sum(np.abs(nxt * hi - p * lo) ** 2) + np.sum(np.abs(nxt * lo - p * hi) ** 2)
    err = (2 * L + delta + 3) * amps.tail_bound
    ab = np.sum(np.conj(p[:-1]) * p[1:] * np.sqrt(l[1:] * (l[1:] + delta)))
    return QuadratureStats(var_x=float(x4 / 4), var_p=float(p4 / 4), n=amps.n, m=amps.m,
                           q=None if q is None else tuple(q), var_x_err=err, var_p_err=err,
                           cov_xp=float(ab.imag))


def variance_polar(stats: QuadratureStats, nu):
    """Δ²Q^ν of Q^ν = cos ν X + sin ν P.

    cos²ν Δ²X + sin²ν Δ²P + sin 2ν cov_xp; the last term is zero for real
    squeezing phases, which covers every square-lattice state.
    """
    nu = np.asarray(nu, dtype=float)
    res = (np.cos(nu) ** 2 * stats.var_x + np.sin(nu) ** 2 * stats.var_p
           + np.sin(2 * nu) * stats.cov_xp)
    return res[()] if res.ndim == 0 else res


def squeeze_factor(kind: str, current, reference=None):
    """-10 log10(current / reference); positive means reduced noise.

    For ``OX`` the reference is the vacuum variance 1/2 and may be omitted.
    """
    if kind not in FACTOR_KINDS:
        raise ConfigurationError(f"unknown factor kind {kind!r}; expected one of {FACTOR_KINDS}")
    if reference is None:
        if kind != "OX":
            raise DomainError(f"factor {kind} needs a reference value")
        reference = 0.5
    current = np.asarray(current, dtype=float)
    reference = np.asarray(reference, dtype=float)
    if np.any(~(current > 0)) or np.any(~(reference > 0)):
        raise DomainError("squeeze factors need strictly positive values")
    res = -10.0 * np.log10(current / reference)
    return res[()] if res.ndim == 0 else res


def squeezing_rate(axis, values):
    """d(values)/d(axis): central differences inside, one-sided at the ends.

    Negative rates mean the fluctuation shrinks along the axis.
    """
    axis = np.asarray(axis, dtype=float)
    values = np.asarray(values, dtype=float)
    if axis.ndim != 1 or len(axis) < 3:
        raise ConfigurationError("a squeezing rate needs at least 3 axis samples")
    if values.shape[0] != len(axis):
        raise ConfigurationError("axis and values lengths differ")
    steps = np.diff(axis)
    if not (np.all(steps > 0) or np.all(steps < 0)):
        raise ConfigurationError("axis samples must be strictly monotone")
    return np.gradient(values, axis, axis=0, edge_order=1)


class Correlation(NamedTuple):
    squeeze: np.ndarray
    energy: np.ndarray
    pearson: float
    sign: int


def energy_correlation(squeeze, energy) -> Correlation:
    """Pearson coefficient between squeeze factors and energy factors."""
    x = np.asarray(squeeze, dtype=float)
    y = np.asarray(energy, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise ConfigurationError("squeeze and energy factors must be 1-D of equal length")
    if len(x) < 3:
        raise ConfigurationError("correlation needs at least 3 pairs")
    dx, dy = x - x.mean(), y - y.mean()
    sx, sy = np.sqrt(np.sum(dx * dx)), np.sqrt(np.sum(dy * dy))
    if sx == 0 or sy == 0:
        raise DomainError("correlation undefined: a column has zero variance")
    r = float(np.sum(dx * dy) / (sx * sy))
    r = min(1.0, max(-1.0, r))
    return Correlation(squeeze=x, energy=y, pearson=r, sign=int(np.sign(r)))
