"""Two-mode eigenstates of the renormalized magnon Hamiltonian written in
the sublattice (Kittel) modes a, b.

Chain of transformations at one q::

    (a, b†) --[u, v]--> (α, β†) --[ũ, ṽ, φ]--> (η, ζ†)

so that a = w η + ν ζ† and b† = conj(ν) η + conj(w) ζ†. The state
|ψ_nm> = (η†)^n (ζ†)^m |ψ_00> / √(n! m!) lives in the sector of fixed
occupation difference δ = |n - m| and is stored as one coefficient per l.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegeneratePointError, InvalidTransformError

DEGENERATE_ENERGY = 1e-14
MAX_TABLE_LENGTH = 200_000


@dataclass(frozen=True)
class HybridPair:
    u_tilde: float
    v_tilde: float
    phi: float


@dataclass(frozen=True)
class CompositeTransform:
    """Top row (w, ν) of the composite Kittel-to-hybrid matrix.

    ``r`` is the two-mode squeeze parameter, tanh r = |ν|/|w|, and
    ``varphi`` the squeezing phase arg(ν / conj(w)); for every transform
    built from a physical mean-field point w is real and positive, so this
    equals arg(ν / w).
    """

    w: complex
    nu: complex
    r: float
    varphi: float

    @classmethod
    def from_wnu(cls, w, nu):
        w, nu = complex(w), complex(nu)
        if not abs(nu) < abs(w):
            raise InvalidTransformError(f"|nu| >= |w| ({abs(nu)} >= {abs(w)})")
        r = float(np.arctanh(abs(nu) / abs(w)))
        varphi = float(np.angle(nu / np.conj(w))) if nu != 0 else 0.0
        return cls(w=w, nu=nu, r=r, varphi=varphi)

    @classmethod
    def squeezed(cls, r, varphi=np.pi):
        """Transform whose vacuum is Σ_l (e^{iφ} tanh r)^l |l,l> / cosh r."""
        return cls(w=complex(np.cosh(r)), nu=complex(np.sinh(r) * np.exp(1j * varphi)),
                   r=float(r), varphi=float(varphi))

    @property
    def symplectic_defect(self):
        return abs(self.w) ** 2 - abs(self.nu) ** 2 - 1.0


@dataclass(frozen=True)
class StateAmplitudes:
    """Coefficients p_l of |ψ_nm> on |l+δ, l> (``offset_mode == "a"``,
    n >= m) or |l, l+δ> (``"b"``), for l = 0..L.

    ``tail_bound`` is the probability mass beyond L, 1 - Σ_{l<=L} |p_l|².
    """

    n: int
    m: int
    coefficients: np.ndarray
    tail_bound: float
    r: float
    varphi: float

    @property
    def delta(self):
        return abs(self.n - self.m)

    @property
    def mu(self):
        return min(self.n, self.m)

    @property
    def L(self):
        return len(self.coefficients) - 1

    @property
    def offset_mode(self):
        return "a" if self.n >= self.m else "b"

    @property
    def probabilities(self):
        return np.abs(self.coefficients) ** 2


def hybrid_arrays(diag, g, E):
    """Vectorized ũ, ṽ, φ from ε+ε̃, g and E."""
    E = np.asarray(E, dtype=float)
    if np.any(E <= DEGENERATE_ENERGY):
        raise DegeneratePointError("renormalized energy vanishes; hybrid coefficients diverge")
    ut = np.sqrt((diag + E) / (2.0 * E))
    vt = np.sqrt(np.maximum(diag - E, 0.0) / (2.0 * E))
    return ut, vt, np.angle(g)


def hybridize(pt) -> HybridPair:
    """ũ_q, ṽ_q and φ_q = arg g_q for a renormalized point."""
    ut, vt, phi = hybrid_arrays(pt.eps_bare + pt.eps_tilde, pt.g, pt.E)
    return HybridPair(u_tilde=float(ut), v_tilde=float(vt), phi=float(phi))


def composite_arrays(u, v, ut, vt, phi):
    """Top row of [[ū, -v̄], [-v, u]] · [[ũ, -e^{-iφ}ṽ], [-e^{iφ}ṽ, ũ]]."""
    w = np.conj(u) * ut + np.conj(v) * np.exp(1j * phi) * vt
    nu = -np.conj(u) * np.exp(-1j * phi) * vt - np.conj(v) * ut
    return w, nu


def composite_transform(bare, hyb: HybridPair) -> CompositeTransform:
    w, nu = composite_arrays(bare.u, bare.v, hyb.u_tilde, hyb.v_tilde, hyb.phi)
    return CompositeTransform.from_wnu(w, nu)


def _ground_length(t, eps_trunc):
    """Smallest L with tail t^{2(L+1)} <= eps_trunc."""
    if t == 0.0:
        return 0
    L = math.ceil(math.log(eps_trunc) / (2.0 * math.log(t))) - 1
    return max(L, 0)


def _ground_coefficients(ct, L):
    t = math.tanh(ct.r)
    l = np.arange(L + 1)
    return np.exp(1j * ct.varphi * l) * t**l / math.cosh(ct.r)


def ground_amplitudes(ct: CompositeTransform, eps_trunc: float = 1e-12) -> StateAmplitudes:
    """Two-mode squeezed vacuum p_l = e^{ilφ} tanh^l r / cosh r, truncated
    where the geometric tail drops below ``eps_trunc``."""
    if not eps_trunc > 0:
        raise ValueError("eps_trunc must be > 0")
    t = math.tanh(ct.r)
    L = _ground_length(t, eps_trunc)
    tail = t ** (2 * (L + 1)) if t > 0 else 0.0
    return StateAmplitudes(n=0, m=0, coefficients=_ground_coefficients(ct, L),
                           tail_bound=float(tail), r=ct.r, varphi=ct.varphi)


def f_recursion(mu: int, delta: int, r: float, L: int) -> np.ndarray:
    """Polynomial factors f^(μ,δ)_l, l = 0..L, relative to the vacuum.

    Starting from f^(0,0) = 1, μ pair-creation steps give
    f^(μ,0)_l = l c⁴ f_{l-1} - (2l+1) c² s² f_l + (l+1) s⁴ f_{l+1},
    then δ single-mode steps give
    f^(μ,δ)_l = √(l+δ) c² f_l - √(l+1) s² f_{l+1},
    with c = cosh r, s = sinh r and f on the right at the previous level.
    """
    if mu < 0 or delta < 0:
        raise ValueError("mu and delta must be non-negative")
    c2, s2 = math.cosh(r) ** 2, math.sinh(r) ** 2
    f = np.ones(L + 1 + mu + delta)
    for _ in range(mu):
        l = np.arange(len(f) - 1)
        prev = np.concatenate([[0.0], f[:-2]])
        f = l * c2 * c2 * prev - (2 * l + 1) * c2 * s2 * f[:-1] + (l + 1) * s2 * s2 * f[1:]
    for d in range(1, delta + 1):
        l = np.arange(len(f) - 1)
        f = np.sqrt(l + d) * c2 * f[:-1] - np.sqrt(l + 1) * s2 * f[1:]
    return f[: L + 1]


def _suffix_tail(weights):
    """Suffix sums Σ_{l>=k} |p_l|² plus a geometric bound on the mass past
    the end of the table."""
    rho = weights[-1] / weights[-2] if weights[-2] > 0 else 0.0
    rest = weights[-1] * rho / (1.0 - rho) if rho < 1 else math.inf
    return np.cumsum(weights[::-1])[::-1] + rest


def eigenstate_amplitudes(ct: CompositeTransform, n: int, m: int,
                          eps_trunc: float = 1e-12) -> StateAmplitudes:
    """Coefficient table of |ψ_nm>.

    p_l = (n! m!)^{-1/2} conj(w)^{-δ} (conj(w) ν)^{-μ} f^(μ,δ)_l p^(0,0)_l.
    The expansion is exactly normalized over all l. The omitted mass is
    summed directly on a table twice as long as needed, so tails far below
    round-off of 1 - Σ|p_l|² are resolved; L is the shortest table whose
    omitted mass is <= eps_trunc.
    """
    n, m = int(n), int(m)
    if n < 0 or m < 0:
        raise ValueError("occupations must be non-negative")
    if not eps_trunc > 0:
        raise ValueError("eps_trunc must be > 0")
    if n == 0 and m == 0:
        return ground_amplitudes(ct, eps_trunc)
    delta, mu = abs(n - m), min(n, m)
    if mu > 0 and ct.nu == 0:
        raise DegeneratePointError("excited pair states need nu != 0 (unsqueezed limit is singular)")
    prefactor = 1.0 / math.sqrt(math.factorial(n) * math.factorial(m))
    prefactor *= (1.0 / np.conj(ct.w)) ** delta
    if mu:
        prefactor *= (1.0 / (np.conj(ct.w) * ct.nu)) ** mu
    L = _ground_length(math.tanh(ct.r), eps_trunc) + mu + delta + 8
    while True:
        size = 2 * L + 16
        p = prefactor * f_recursion(mu, delta, ct.r, size) * _ground_coefficients(ct, size)
        tails = _suffix_tail(np.abs(p) ** 2)
        ok = np.flatnonzero(tails[1:] <= eps_trunc)
        if ok.size:
            L = int(ok[0])
            break
        if size > MAX_TABLE_LENGTH:
            raise RuntimeError(f"amplitude table for ({n},{m}) did not converge (tail {tails[-1]:.2e})")
        L = int(L * 1.5) + 8
    return StateAmplitudes(n=n, m=m, coefficients=p[: L + 1], tail_bound=float(tails[L + 1]),
                           r=ct.r, varphi=ct.varphi)
