"""Hartree-Fock reduction of the quartic magnon interaction and the
self-consistent renormalized dispersion E_q.

The loop iterates the renormalized energies: occupations n_q = n_B(E_q)
feed the mean-field averages (chi, chi'), which fix Lambda and Lambda'_q,
which fix eps_tilde_q and g_q, which give new E_q. The first Bogoliubov
pair (u_q, v_q) stays the bare one unless ``update_pairs`` is set.
"""

import logging
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from .errors import ConvergenceError, InstabilityError
from .lattice import BZGrid, bz_grid, high_symmetry_path, structure_factor
from .spinwave import ModelParams, bogoliubov_arrays, bose_occupation

log = logging.getLogger(__name__)

DEFAULT_TOL = 1e-10
DEFAULT_MAX_ITER = 200
DEFAULT_DAMPING = 0.5


@dataclass(frozen=True)
class MeanFieldParams:
    chi: float
    chi_prime: complex


@dataclass(frozen=True)
class RenormalizedPoint:
    q: tuple
    eps_bare: float
    eps_tilde: float
    g: complex
    E: float
    u: complex = 1.0
    v: complex = 0.0


@dataclass
class MeanFieldSolution:
    """Converged mean-field state on a BZ grid.

    Per-point quantities are stored as arrays; :attr:`points` materializes
    them as :class:`RenormalizedPoint` records.
    """

    params: MeanFieldParams
    model: ModelParams
    grid_size: int
    q: np.ndarray
    eps_bare: np.ndarray
    eps_tilde: np.ndarray
    g: np.ndarray
    E: np.ndarray
    iterations: int
    residual: float
    residuals: list = field(default_factory=list)
    update_pairs: bool = False

    @property
    def points(self):
        return [
            RenormalizedPoint(
                q=tuple(self.q[i]),
                eps_bare=float(self.eps_bare[i]),
                eps_tilde=float(self.eps_tilde[i]),
                g=complex(self.g[i]),
                E=float(self.E[i]),
            )
            for i in range(len(self.E))
        ]

    def evaluate(self, q):
        """Renormalized point at an arbitrary wave vector using the
        converged mean-field averages."""
        return renormalize(self.model, self.params, q)

    def diagnostics(self):
        return {
            "chi": float(self.params.chi),
            "chi_prime_re": float(np.real(self.params.chi_prime)),
            "chi_prime_im": float(np.imag(self.params.chi_prime)),
            "iterations": int(self.iterations),
            "residual": float(self.residual),
            "residual_trace": [float(r) for r in self.residuals],
            "grid_size": int(self.grid_size),
            "update_pairs": bool(self.update_pairs),
        }


def _sums(S, gamma, w, nu, n, weights):
    chi = np.sum(weights * ((np.abs(w) ** 2 + np.abs(nu) ** 2) * n + np.abs(nu) ** 2)) / S
    chi_prime = np.sum(weights * np.conj(gamma) * w * nu * (2.0 * n + 1.0)) / S
    return MeanFieldParams(chi=float(chi), chi_prime=complex(chi_prime))


def mean_field_sums(p: ModelParams, grid: BZGrid, occupations, pairs=None) -> MeanFieldParams:
    """chi and chi' as weighted BZ averages.

    chi = <(|u|²+|v|²) n + |v|²> / S and chi' = -<γ u v (2n+1)> / S. With
    ``pairs=(w, nu)`` the thermal averages are taken in that basis instead,
    with a = w η + nu ζ† (the bare case is w = u, nu = -conj(v)).
    """
    gamma = structure_factor(p.lattice, grid.q)
    if pairs is None:
        _, u, v = bogoliubov_arrays(p, gamma)
        w, nu = u, -np.conj(v)
    else:
        w, nu = pairs
    n = np.broadcast_to(np.asarray(occupations, dtype=float), np.shape(gamma))
    return _sums(p.S, gamma, w, nu, n, grid.weights)


def lambda_terms(p: ModelParams, mf: MeanFieldParams, q=None, gamma=None):
    """Returns (Lambda, Lambda'_q). Lambda is q-independent."""
    if gamma is None:
        gamma = structure_factor(p.lattice, q)
    zJS = p.z * p.J * p.S
    lam = -(p.z * p.J + 4.0 * p.K_z) * p.S * mf.chi - zJS * np.real(mf.chi_prime)
    lam_prime = -zJS * (mf.chi + np.conj(mf.chi_prime)) * gamma
    return float(lam), lam_prime


def _shift_and_coupling(lam, lam_prime, u, v):
    eps_tilde = lam * (np.abs(u) ** 2 + np.abs(v) ** 2) - 2.0 * np.real(lam_prime * u * v)
    g = -2.0 * lam * np.conj(u) * v + lam_prime * v**2 + np.conj(lam_prime) * np.conj(u) ** 2
    return eps_tilde, g


def _dispersion(p, eps, eps_tilde, g, q):
    diag = eps + eps_tilde
    disc = diag**2 - np.abs(g) ** 2
    bad = (disc < 0) | (diag <= 0)
    if np.any(bad):
        i = int(np.flatnonzero(np.ravel(bad))[0])
        qi = [float(x) for x in (np.reshape(q, (-1, 2))[i] if np.ndim(q) > 1 else q)]
        raise InstabilityError(
            f"mean-field mode softening at q=({qi[0]:.6g}, {qi[1]:.6g}) "
            f"(S={p.S}, J={p.J}, K_z={p.K_z}, kBT={p.kBT}): (eps+eps_tilde)^2 < |g|^2",
            q=qi,
            params=p,
        )
    return np.sqrt(disc)


def renormalize(p: ModelParams, mf: MeanFieldParams, q, bare=None) -> RenormalizedPoint:
    """eps_tilde_q, g_q and E_q = √((ε+ε̃)² - |g|²) at a single q."""
    q = np.asarray(q, dtype=float)
    gamma = structure_factor(p.lattice, q)
    if bare is None:
        eps, u, v = bogoliubov_arrays(p, gamma)
    else:
        u, v = bare.u, bare.v
        eps = float(np.real(p.diagonal / (abs(u) ** 2 + abs(v) ** 2)))
    lam, lam_prime = lambda_terms(p, mf, gamma=gamma)
    eps_tilde, g = _shift_and_coupling(lam, lam_prime, u, v)
    E = _dispersion(p, eps, eps_tilde, g, q)
    return RenormalizedPoint(
        q=tuple(float(x) for x in q),
        eps_bare=float(eps),
        eps_tilde=float(eps_tilde),
        g=complex(g),
        E=float(E),
        u=complex(u),
        v=complex(v),
    )


def _composite_pairs(u, v, eps, eps_tilde, g, E):
    from .states import composite_arrays, hybrid_arrays

    ut, vt, phi = hybrid_arrays(eps + eps_tilde, g, E)
    return composite_arrays(u, v, ut, vt, phi)


def solve_self_consistent(
    p: ModelParams,
    grid,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
    damping: float = DEFAULT_DAMPING,
    update_pairs: bool = False,
) -> MeanFieldSolution:
    """Damped fixed-point iteration for E_q on ``grid``.

    ``grid`` is a :class:`BZGrid` or an integer points-per-axis. The loop
    is seeded with E_q = ε_q and stops when max_q |F(E) - E| <= tol, where
    F is one pass of the loop body; the returned energies are F(E) at that
    point. At kBT = 0 the map does not depend on E and one undamped update
    reaches the fixed point.
    """
    if not tol > 0:
        raise ValueError("tol must be > 0")
    if max_iter < 1:
        raise ValueError("max_iter must be >= 1")
    if not 0 < damping <= 1:
        raise ValueError("damping must lie in (0, 1]")
    if not isinstance(grid, BZGrid):
        grid = bz_grid(p.lattice, int(grid))
    n_axis = int(round(np.sqrt(len(grid.weights))))

    gamma = structure_factor(p.lattice, grid.q)
    eps, u, v = bogoliubov_arrays(p, gamma)
    w, nu = u, -np.conj(v)
    mix = 1.0 if p.kBT == 0 else damping

    def body(E):
        n = bose_occupation(E, p.kBT)
        mf = _sums(p.S, gamma, w, nu, n, grid.weights)
        lam, lam_prime = lambda_terms(p, mf, gamma=gamma)
        eps_tilde, g = _shift_and_coupling(lam, lam_prime, u, v)
        return mf, eps_tilde, g, _dispersion(p, eps, eps_tilde, g, grid.q)

    E = eps.copy()
    residuals = []
    updates = 0
    while True:
        mf, eps_tilde, g, E_new = body(E)
        res = float(np.max(np.abs(E_new - E)))
        residuals.append(res)
        if mf.chi < 0:
            log.warning("chi < 0 during iteration %d: %g", updates, mf.chi)
        if res <= tol:
            break
        if updates >= max_iter:
            raise ConvergenceError(
                f"no convergence after {max_iter} iterations "
                f"(residual {res:.3e} > tol {tol:.1e}; K_z={p.K_z}, kBT={p.kBT})",
                residuals=residuals,
            )
        E = (1.0 - mix) * E + mix * E_new
        updates += 1
        if update_pairs:
            w, nu = _composite_pairs(u, v, eps, eps_tilde, g, E_new)

    if len(residuals) > 4 and damping <= 0.5:
        tail = np.asarray(residuals[3:])
        if np.any(np.diff(tail) > 0):
            log.info("non-monotone residual after iteration 3 (K_z=%g, kBT=%g)", p.K_z, p.kBT)
    lam, _ = lambda_terms(p, mf, gamma=gamma)
    if lam > 1e-12 and np.real(mf.chi_prime) <= mf.chi:
        log.info("Lambda=%g > 0 with Re chi' <= chi", lam)

    return MeanFieldSolution(
        params=mf,
        model=p,
        grid_size=n_axis,
        q=grid.q,
        eps_bare=eps,
        eps_tilde=eps_tilde,
        g=g,
        E=E_new,
        iterations=updates,
        residual=res,
        residuals=residuals,
        update_pairs=update_pairs,
    )


def fixed_point_defect(sol: MeanFieldSolution) -> float:
    """max_q |ΔE_q| produced by one more pass of the loop body."""
    p = sol.model
    grid = BZGrid(q=sol.q, weights=np.full(len(sol.E), 1.0 / len(sol.E)))
    gamma = structure_factor(p.lattice, grid.q)
    eps, u, v = bogoliubov_arrays(p, gamma)
    if sol.update_pairs:
        w, nu = _composite_pairs(u, v, sol.eps_bare, sol.eps_tilde, sol.g, sol.E)
    else:
        w, nu = u, -np.conj(v)
    n = bose_occupation(sol.E, p.kBT)
    mf = _sums(p.S, gamma, w, nu, n, grid.weights)
    lam, lam_prime = lambda_terms(p, mf, gamma=gamma)
    eps_tilde, g = _shift_and_coupling(lam, lam_prime, u, v)
    E_next = _dispersion(p, eps, eps_tilde, g, grid.q)
    return float(np.max(np.abs(E_next - sol.E)))


def dispersion_sweep(
    base: ModelParams,
    path,
    parameter: str,
    values,
    grid=64,
    solver: Optional[dict] = None,
):
    """Renormalized dispersion along ``path`` for each value of ``parameter``
    ("kBT" or "K_z").

    Returns a structured array with fields s, qx, qy, value, E, eps.
    """
    if parameter not in ("kBT", "K_z"):
        raise ValueError(f"parameter must be 'kBT' or 'K_z', got {parameter!r}")
    solver = solver or {}
    samples = high_symmetry_path(base.lattice, path)
    dtype = [("s", float), ("qx", float), ("qy", float), ("value", float), ("E", float), ("eps", float)]
    rows = []
    for value in values:
        p = replace(base, **{parameter: float(value)})
        sol = solve_self_consistent(p, grid, **solver)
        for s, q in zip(samples.s, samples.q):
            pt = sol.evaluate(q)
            rows.append((s, q[0], q[1], float(value), pt.E, pt.eps_bare))
    return np.array(rows, dtype=dtype)
