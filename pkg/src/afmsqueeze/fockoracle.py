"""Brute-force two-mode Fock-space oracle.

Everything here is built from ladder-operator matrices on the truncated
basis |l_a, l_b>, l <= cutoff, without reference to the closed-form
amplitude tables: the vacuum is the common null vector of the truncated
hybrid annihilators and excited states from repeated application of η† and ζ†.
"""

import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import spsolve

from .errors import ConfigurationError, CutoffTooSmallError
from .quadrature import QuadratureStats

NORM_LOSS_TOL = 1e-6
MAX_CUTOFF = 128


@dataclass(frozen=True)
class FockSpace:
    cutoff: int

    def __post_init__(self):
        if not 1 <= int(self.cutoff) <= MAX_CUTOFF:
            raise ConfigurationError(f"cutoff must be in [1, {MAX_CUTOFF}], got {self.cutoff}")

    @property
    def dimension(self):
        return (self.cutoff + 1) ** 2

    def index(self, la, lb):
        return la * (self.cutoff + 1) + lb

    def occupations(self):
        l = np.arange(self.cutoff + 1)
        la, lb = np.meshgrid(l, l, indexing="ij")
        return la.ravel(), lb.ravel()


def ladder_matrices(fs: FockSpace):
    """Sparse (a, a†, b, b†) on the truncated two-mode basis."""
    c = fs.cutoff
    single = sp.diags(np.sqrt(np.arange(1, c + 1, dtype=float)), 1, format="csr")
    eye = sp.identity(c + 1, format="csr")
    a = sp.kron(single, eye, format="csr").astype(complex)
    b = sp.kron(eye, single, format="csr").astype(complex)
    return a, a.conj().T.tocsr(), b, b.conj().T.tocsr()


def hybrid_annihilators(ct, fs: FockSpace):
    """η = conj(w) a - ν b† and ζ = -ν a† + conj(w) b."""
    a, ad, b, bd = ladder_matrices(fs)
    w, nu = complex(ct.w), complex(ct.nu)
    eta = np.conj(w) * a - nu * bd
    zeta = -nu * ad + np.conj(w) * b
    return eta.tocsr(), zeta.tocsr()


def _edge_mass(vec, fs):
    la, lb = fs.occupations()
    edge = (la == fs.cutoff) | (lb == fs.cutoff)
    return float(np.sum(np.abs(vec[edge]) ** 2))


def vacuum(ct, fs: FockSpace):
    """Common kernel of the truncated η and ζ, normalized with real
    positive |0,0> amplitude.

    Truncated η and ζ annihilate the exact truncation of the hybrid vacuum,
    so (η†η + ζ†ζ + |0,0><0,0|) v = |0,0> determines it without truncation
    error.
    """
    eta, zeta = hybrid_annihilators(ct, fs)
    M = (eta.conj().T @ eta + zeta.conj().T @ zeta).tolil()
    M[0, 0] += 1.0
    rhs = np.zeros(fs.dimension, dtype=complex)
    rhs[0] = 1.0
    vec = spsolve(M.tocsc(), rhs)
    vec = vec / np.linalg.norm(vec)
    loss = _edge_mass(vec, fs)
    if loss > NORM_LOSS_TOL:
        raise CutoffTooSmallError(
            f"cutoff {fs.cutoff} too small for r={ct.r:.4g}: edge mass {loss:.2e}"
        )
    return vec


def build_excited(ct, fs: FockSpace, n: int, m: int):
    """Normalized (η†)^n (ζ†)^m |ψ_00> in the truncated space."""
    vec = vacuum(ct, fs)
    eta, zeta = hybrid_annihilators(ct, fs)
    eta_d, zeta_d = eta.conj().T.tocsr(), zeta.conj().T.tocsr()
    for _ in range(m):
        vec = zeta_d @ vec
    for _ in range(n):
        vec = eta_d @ vec
    norm2 = float(np.vdot(vec, vec).real)
    expected = math.factorial(n) * math.factorial(m)
    loss = abs(norm2 / expected - 1.0)
    if loss > NORM_LOSS_TOL:
        raise CutoffTooSmallError(
            f"cutoff {fs.cutoff} too small for ({n},{m}) at r={ct.r:.4g}: norm loss {loss:.2e}"
        )
    return vec / math.sqrt(norm2)


def embed(amps, fs: FockSpace):
    """Place a coefficient table on the truncated basis (entries beyond the
    cutoff are dropped)."""
    vec = np.zeros(fs.dimension, dtype=complex)
    d = amps.delta
    for l, coef in enumerate(amps.coefficients):
        la, lb = (l + d, l) if amps.offset_mode == "a" else (l, l + d)
        if la > fs.cutoff or lb > fs.cutoff:
            break
        vec[fs.index(la, lb)] = coef
    return vec


def extract(vec, fs: FockSpace, delta: int, offset_mode: str, length: int):
    """Inverse of :func:`embed`: coefficients on the δ sector."""
    out = np.zeros(length, dtype=complex)
    for l in range(length):
        la, lb = (l + delta, l) if offset_mode == "a" else (l, l + delta)
        if la > fs.cutoff or lb > fs.cutoff:
            break
        out[l] = vec[fs.index(la, lb)]
    return out


def quadrature_operators(fs: FockSpace):
    """X = (Σ + Σ†)/√2 and P = (Σ - Σ†)/(i√2) with Σ = (a + b)/√2."""
    a, ad, b, bd = ladder_matrices(fs)
    X = 0.5 * (a + ad + b + bd)
    P = -0.5j * (a - ad + b - bd)
    return X.tocsr(), P.tocsr()


def direct_variance(vec, fs: FockSpace, n=0, m=0) -> QuadratureStats:
    """⟨X²⟩ - ⟨X⟩² and ⟨P²⟩ - ⟨P⟩² by matrix expectation values."""
    X, P = quadrature_operators(fs)
    xv, pv = X @ vec, P @ vec
    mx = np.vdot(vec, xv).real
    mp = np.vdot(vec, pv).real
    var_x = np.vdot(xv, xv).real - mx**2
    var_p = np.vdot(pv, pv).real - mp**2
    cov = np.vdot(xv, pv).real - mx * mp
    return QuadratureStats(var_x=float(var_x), var_p=float(var_p), n=n, m=m, cov_xp=float(cov))


def xp_covariance(vec, fs: FockSpace):
    """Symmetrized covariance ½⟨{X, P}⟩ - ⟨X⟩⟨P⟩."""
    X, P = quadrature_operators(fs)
    xv, pv = X @ vec, P @ vec
    return float(np.vdot(xv, pv).real - np.vdot(vec, xv).real * np.vdot(vec, pv).real)


def number_hamiltonian(ct, fs: FockSpace, energy=1.0):
    """E (η†η + ζ†ζ)."""
    eta, zeta = hybrid_annihilators(ct, fs)
    return (energy * (eta.conj().T @ eta + zeta.conj().T @ zeta)).tocsr()


def eigen_residual(ct, fs: FockSpace, vec, n, m, energy=1.0, edge=0):
    """‖H v - E(n+m) v‖, relative to E(n+m) when that is nonzero.

    With ``edge`` > 0 only rows with max(l_a, l_b) <= cutoff - edge enter
    the norm: products of truncated ladder matrices are wrong on the last
    layers by construction, whatever the vector.
    """
    H = number_hamiltonian(ct, fs, energy)
    lam = energy * (n + m)
    diff = H @ vec - lam * vec
    if edge:
        la, lb = fs.occupations()
        diff = diff[np.maximum(la, lb) <= fs.cutoff - edge]
    res = float(np.linalg.norm(diff))
    return res / lam if lam else res
