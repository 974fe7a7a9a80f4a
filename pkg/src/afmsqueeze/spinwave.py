"""Linear spin-wave layer: classical energy, bare magnon dispersion, the
first Bogoliubov transformation and Bose occupations.

Energies are in meV; temperatures enter as k_B T in meV.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError, DegeneratePointError, DomainError
from .lattice import LatticeSpec, structure_factor

# eps_q below DEGENERATE_RTOL * S * z * J is treated as a zero mode
DEGENERATE_RTOL = 1e-12


@dataclass(frozen=True)
class ModelParams:
    """Physical inputs of the uniaxial antiferromagnet."""

    S: float = 1.0
    J: float = 1.0
    K_z: float = 0.01
    kBT: float = 1.0
    lattice: LatticeSpec = field(default_factory=LatticeSpec)

    def __post_init__(self):
        for name, ok in (
            ("S", self.S > 0),
            ("J", self.J > 0),
            ("K_z", self.K_z >= 0),
            ("kBT", self.kBT >= 0),
        ):
            if not (ok and np.isfinite(getattr(self, name))):
                raise ConfigurationError(f"invalid model parameter {name}={getattr(self, name)!r}")

    @property
    def z(self):
        return self.lattice.z

    @property
    def diagonal(self):
        """Coefficient A = S(zJ + 2K_z) of the number operators."""
        return self.S * (self.z * self.J + 2.0 * self.K_z)


@dataclass(frozen=True)
class BogoliubovPair:
    """Hyperbolic pair with u real >= 1; any phase is carried by v."""

    u: complex
    v: complex
    theta: float

    @property
    def symplectic_defect(self):
        return abs(self.u) ** 2 - abs(self.v) ** 2 - 1.0


def classical_ground_energy(p: ModelParams, N: int) -> float:
    """Classical Néel energy -N (zJ/2 + K_z) S² for N sites."""
    if N % 2:
        raise DomainError(f"N must be even for two sublattices, got {N}")
    return -N * (p.z * p.J / 2.0 + p.K_z) * p.S**2


def dispersion_from_gamma(p: ModelParams, gamma):
    g = np.abs(gamma)
    arg = (p.z * p.J + 2.0 * p.K_z) ** 2 - (p.z * p.J * g) ** 2
    return p.S * np.sqrt(np.maximum(arg, 0.0))


def bare_dispersion(p: ModelParams, q):
    """ε_q = S √((zJ + 2K_z)² - (zJ|γ_q|)²)."""
    return dispersion_from_gamma(p, structure_factor(p.lattice, q))


def bogoliubov_arrays(p: ModelParams, gamma):
    """Vectorized first Bogoliubov transformation.

    Returns ``(eps, u, v)`` with u real and v = e^{-i arg γ} sinh θ. This
    phase makes the anomalous α β term vanish for complex γ_q; for the
    square lattice it reduces to v = sign(γ_q) sinh θ.
    """
    gamma = np.asarray(gamma, dtype=complex)
    eps = dispersion_from_gamma(p, gamma)
    floor = DEGENERATE_RTOL * p.S * p.z * p.J
    if np.any(eps < floor):
        raise DegeneratePointError(
            f"bare magnon energy vanishes (K_z={p.K_z}, |gamma|=1): "
            "Bogoliubov coefficients diverge"
        )
    A = p.diagonal
    u = np.sqrt((A + eps) / (2.0 * eps))
    v_abs = np.sqrt(np.maximum(A - eps, 0.0) / (2.0 * eps))
    v = v_abs * np.exp(-1j * np.angle(gamma))
    return eps, u, v


def bare_bogoliubov(p: ModelParams, q) -> BogoliubovPair:
    gamma = structure_factor(p.lattice, q)
    _, u, v = bogoliubov_arrays(p, gamma)
    u, v = complex(u), complex(v)
    return BogoliubovPair(u=u, v=v, theta=float(np.arcsinh(abs(v))))


def bose_occupation(energy, kBT):
    """Bose factor 1/(e^{E/kT} - 1); identically zero at kBT = 0."""
    energy = np.asarray(energy, dtype=float)
    if np.any(~(energy > 0)):
        raise DomainError("Bose occupation requires strictly positive energies")
    if kBT < 0:
        raise DomainError(f"negative temperature kBT={kBT}")
    if kBT == 0:
        n = np.zeros_like(energy)
    else:
        with np.errstate(over="ignore"):
            n = 1.0 / np.expm1(energy / kBT)
    return n[()] if n.ndim == 0 else n
