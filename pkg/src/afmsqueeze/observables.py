"""Glue from a converged mean-field solution to per-q squeezing observables."""

from dataclasses import dataclass, field, replace

import numpy as np

from .meanfield import solve_self_consistent
from .quadrature import QuadratureStats, variance_xp
from .spinwave import ModelParams, bogoliubov_arrays
from .states import CompositeTransform, composite_arrays, eigenstate_amplitudes, hybrid_arrays

GAMMA = (0.0, 0.0)


@dataclass
class PointObservables:
    q: tuple
    K_z: float
    kBT: float
    E: float
    eps_bare: float
    transform: CompositeTransform
    stats: dict = field(default_factory=dict)  # (n, m) -> QuadratureStats
    amplitudes: dict = field(default_factory=dict)  # (n, m) -> StateAmplitudes


def transform_at(sol, q=GAMMA):
    """Renormalized point and composite (w, ν) transform at ``q``."""
    pt = sol.evaluate(q)
    ut, vt, phi = hybrid_arrays(pt.eps_bare + pt.eps_tilde, pt.g, pt.E)
    w, nu = composite_arrays(pt.u, pt.v, ut, vt, phi)
    return pt, CompositeTransform.from_wnu(w, nu)


def observe(sol, q=GAMMA, states=((0, 0),), eps_trunc=1e-12, keep_amplitudes=False):
    pt, ct = transform_at(sol, q)
    out = PointObservables(q=tuple(float(x) for x in q), K_z=sol.model.K_z, kBT=sol.model.kBT,
                           E=pt.E, eps_bare=pt.eps_bare, transform=ct)
    for n, m in states:
        amps = eigenstate_amplitudes(ct, n, m, eps_trunc)
        out.stats[(n, m)] = variance_xp(amps, q=q)
        if keep_amplitudes:
            out.amplitudes[(n, m)] = amps
    return out


def observe_params(p: ModelParams, q=GAMMA, states=((0, 0),), grid=64, solver=None,
                   eps_trunc=1e-12, keep_amplitudes=False):
    """Solve the mean field for ``p`` and evaluate observables at ``q``."""
    sol = solve_self_consistent(p, grid, **(solver or {}))
    return observe(sol, q, states, eps_trunc, keep_amplitudes)


def ladder(p: ModelParams, parameter, values, **kwargs):
    """:func:`observe_params` along a ladder of ``parameter`` values."""
    return [observe_params(replace(p, **{parameter: float(v)}), **kwargs) for v in values]


def bare_squeeze_parameter(p: ModelParams, q=GAMMA):
    """r of the unrenormalized ground state, tanh r = |v_q| / u_q."""
    from .lattice import structure_factor

    _, u, v = bogoliubov_arrays(p, structure_factor(p.lattice, q))
    return float(np.arctanh(abs(v) / abs(u)))


def stats_arrays(observations, state=(0, 0)):
    """(var_x, var_p, E) arrays from a list of :class:`PointObservables`."""
    vx = np.array([o.stats[state].var_x for o in observations])
    vp = np.array([o.stats[state].var_p for o in observations])
    E = np.array([o.E for o in observations])
    return vx, vp, E


__all__ = [
    "GAMMA",
    "PointObservables",
    "QuadratureStats",
    "transform_at",
    "observe",
    "observe_params",
    "ladder",
    "bare_squeeze_parameter",
    "stats_arrays",
]
