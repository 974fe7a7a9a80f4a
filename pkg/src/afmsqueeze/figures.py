"""Figure-data pipelines: one plot-ready table per figure id.

Every pipeline first declares the (K_z, kBT) mean-field solves it needs.
The orchestrator solves their union (optionally in a process pool, results
gathered in submission order), then each pipeline builds its rows serially
from the cached solutions, so output never depends on the worker count.
"""

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import AfmSqueezeError, ConvergenceError, InstabilityError
from .lattice import high_symmetry_path
from .meanfield import solve_self_consistent
from .observables import GAMMA, observe
from .quadrature import UNCERTAINTY_SLACK, energy_correlation, squeeze_factor, squeezing_rate, variance_polar

log = logging.getLogger(__name__)

VACUUM = ((0, 0),)


class FigureAborted(AfmSqueezeError):
    """A pipeline could not complete; ``diagnostic`` goes to the metadata."""

    def __init__(self, message, diagnostic):
        super().__init__(message)
        self.diagnostic = diagnostic


@dataclass
class FigureData:
    figure: str
    columns: tuple
    rows: list
    meta: dict = field(default_factory=dict)


@dataclass(frozen=True)
class SolveFailure:
    K_z: float
    kBT: float
    error: str
    message: str
    residual_trace: tuple = ()

    def diagnostic(self):
        return {"K_z": self.K_z, "kBT": self.kBT, "error": self.error,
                "message": self.message, "residual_trace": list(self.residual_trace)}


def _solve_task(args):
    model, grid, solver = args
    try:
        return solve_self_consistent(model, grid, **solver)
    except ConvergenceError as exc:
        return SolveFailure(model.K_z, model.kBT, type(exc).__name__, str(exc), tuple(exc.residuals))
    except (InstabilityError, ArithmeticError, ValueError) as exc:
        return SolveFailure(model.K_z, model.kBT, type(exc).__name__, str(exc))


class SolveCache:
    """Mean-field solutions keyed by (K_z, kBT)."""

    def __init__(self, cfg):
        self.cfg = cfg
        self._store = {}
        self._obs = {}  # (K_z, kBT, states) -> PointObservables

    def solve_all(self, keys, workers=1):
        todo = [k for k in dict.fromkeys(keys) if k not in self._store]
        if not todo:
            return
        tasks = [(replace(self.cfg.model, K_z=K, kBT=T), self.cfg.grid, self.cfg.solver.kwargs())
                 for K, T in todo]
        if workers > 1 and len(tasks) > 1:
            with ProcessPoolExecutor(max_workers=workers) as pool:
                results = list(pool.map(_solve_task, tasks))
        else:
            results = [_solve_task(t) for t in tasks]
        self._store.update(zip(todo, results))

    def solution(self, K, T):
        key = (float(K), float(T))
        if key not in self._store:
            self.solve_all([key])
        sol = self._store[key]
        if isinstance(sol, SolveFailure):
            raise FigureAborted(f"solver failed at K_z={K:g}, kBT={T:g}: {sol.message}", sol.diagnostic())
        return sol

    def at_gamma(self, K, T, states=None):
        """Observables at Γ for (K, T); ``states`` defaults to the configured list."""
        states = tuple(self.cfg.states if states is None else states)
        key = (float(K), float(T), states)
        if key not in self._obs:
            self._obs[key] = observe(self.solution(K, T), GAMMA, states, self.cfg.eps_trunc)
        return self._obs[key]

    def diagnostics(self, keys):
        out = []
        for key in dict.fromkeys(keys):
            sol = self._store.get(key)
            if sol is None or isinstance(sol, SolveFailure):
                continue
            out.append({"K_z": key[0], "kBT": key[1], **sol.diagnostics()})
        return out


class _Tracker:
    """Collects uncertainty and truncation bounds over every state emitted."""

    def __init__(self):
        self.min_product = np.inf
        self.max_err = 0.0
        self.count = 0

    def add(self, stats):
        self.count += 1
        self.min_product = min(self.min_product, stats.uncertainty_product)
        self.max_err = max(self.max_err, stats.var_x_err, stats.var_p_err)
        return stats

    def meta(self):
        if not self.count:
            return {}
        return {
            "states_checked": self.count,
            "min_uncertainty_product": float(self.min_product),
            "uncertainty_ok": bool(self.min_product >= 0.25 - UNCERTAINTY_SLACK),
            "max_variance_error_bound": float(self.max_err),
        }


# -- declarations of required solves --------------------------------------

def _axes(cfg):
    return cfg.sweep_kBT.values(), cfg.sweep_K_z.values()


def _grid_keys(cfg):
    Ts, Ks = _axes(cfg)
    return [(float(K), float(T)) for K in Ks for T in Ts]


def _ladder_keys(cfg):
    Ts, Ks = _axes(cfg)
    K0, T0 = cfg.model.K_z, cfg.model.kBT
    return [(float(K0), float(T)) for T in Ts] + [(float(K), float(T0)) for K in Ks]


def _reference_keys(cfg):
    Ts, Ks = _axes(cfg)
    s = cfg.solver
    return [(float(K), float(s.T_floor)) for K in Ks] + [(float(s.K_floor), float(T)) for T in Ts]


def required_solves(cfg, figure):
    Ts, Ks = _axes(cfg)
    K0, T0 = cfg.model.K_z, cfg.model.kBT
    if figure == "fig1":
        return [(float(K0), float(T)) for T in Ts]
    if figure == "fig2":
        return [(float(K), float(T0)) for K in Ks]
    if figure in ("fig3", "fig4", "fig10"):
        return _ladder_keys(cfg)
    if figure in ("fig5", "fig6", "fig8"):
        return _grid_keys(cfg)
    if figure in ("fig7", "fig9", "fig11", "fig12"):
        return _grid_keys(cfg) + _reference_keys(cfg)
    raise KeyError(figure)


# -- pipelines -------------------------------------------------------------

def _dispersion(cache, cfg, figure, parameter):
    Ts, Ks = _axes(cfg)
    samples = high_symmetry_path(cfg.model.lattice, cfg.path)
    pairs = ([(cfg.model.K_z, T) for T in Ts] if parameter == "kBT"
             else [(K, cfg.model.kBT) for K in Ks])
    rows = []
    for K, T in pairs:
        sol = cache.solution(K, T)
        for s, q in zip(samples.s, samples.q):
            pt = sol.evaluate(q)
            rows.append((parameter, K, T, s, q[0], q[1], pt.E, pt.eps_bare))
    meta = {"sweep": parameter,
            "ticks": [[lab, float(s)] for lab, s in samples.ticks]}
    return FigureData(figure, ("sweep", "K_z", "kBT", "s", "qx", "qy", "E", "eps_bare"), rows, meta)


def fig1(cache, cfg):
    return _dispersion(cache, cfg, "fig1", "kBT")


def fig2(cache, cfg):
    return _dispersion(cache, cfg, "fig2", "K_z")


def _ladder(cfg):
    Ts, Ks = _axes(cfg)
    return ([("kBT", cfg.model.K_z, T) for T in Ts]
            + [("K_z", K, cfg.model.kBT) for K in Ks])


def fig3(cache, cfg):
    rows = []
    tails = []
    for panel, K, T in _ladder(cfg):
        sol = cache.solution(K, T)
        obs = observe(sol, GAMMA, cfg.states, cfg.eps_trunc, keep_amplitudes=True)
        for (n, m), amps in obs.amplitudes.items():
            tails.append(amps.tail_bound)
            for l, p in enumerate(amps.coefficients):
                rows.append((panel, K, T, n, m, amps.offset_mode, l, p.real, p.imag, abs(p) ** 2))
    meta = {"max_tail_bound": float(max(tails)) if tails else 0.0}
    return FigureData("fig3", ("sweep", "K_z", "kBT", "n", "m", "offset_mode", "l",
                               "re_p", "im_p", "abs2_p"), rows, meta)


def fig4(cache, cfg):
    track = _Tracker()
    nus = np.linspace(0.0, np.pi, cfg.polar_samples)
    rows = []
    minima = []
    for panel, K, T in _ladder(cfg):
        obs = cache.at_gamma(K, T)
        for (n, m), st in obs.stats.items():
            track.add(st)
            vq = variance_polar(st, nus)
            minima.append({"sweep": panel, "K_z": K, "kBT": T, "n": n, "m": m,
                           "nu_min": float(nus[int(np.argmin(vq))])})
            rows.extend((panel, K, T, n, m, nu, v) for nu, v in zip(nus, vq))
    meta = {"minima": minima, **track.meta()}
    return FigureData("fig4", ("sweep", "K_z", "kBT", "n", "m", "nu", "var_q"), rows, meta)


def fig5(cache, cfg):
    track = _Tracker()
    rows = []
    for K, T in _grid_keys(cfg):
        obs = cache.at_gamma(K, T)
        for (n, m), st in obs.stats.items():
            track.add(st)
            rows.append((K, T, n, m, st.var_x, st.var_p, st.var_x_err, st.var_p_err, obs.E))
    return FigureData("fig5", ("K_z", "kBT", "n", "m", "var_x", "var_p", "var_x_err",
                               "var_p_err", "E"), rows, track.meta())


def fig6(cache, cfg):
    track = _Tracker()
    rows = []
    for K, T in _grid_keys(cfg):
        obs = cache.at_gamma(K, T)
        for (n, m), st in obs.stats.items():
            track.add(st)
            rows.append((K, T, n, m, st.var_x, squeeze_factor("OX", st.var_x)))
    return FigureData("fig6", ("K_z", "kBT", "n", "m", "var_x", "OX"), rows, track.meta())


def _factor_rows(cache, cfg, states, track):
    s = cfg.solver
    rows = []
    for K, T in _grid_keys(cfg):
        cur = cache.at_gamma(K, T, states)
        ref_T = cache.at_gamma(K, s.T_floor, states)
        ref_K = cache.at_gamma(s.K_floor, T, states)
        for state in states:
            st, rT, rK = cur.stats[state], ref_T.stats[state], ref_K.stats[state]
            for x in (st, rT, rK):
                track.add(x)
            rows.append((K, T, state[0], state[1], st.var_x, st.var_p,
                         squeeze_factor("O_T_X", st.var_x, rT.var_x),
                         squeeze_factor("O_T_P", st.var_p, rT.var_p),
                         squeeze_factor("O_Kz_P", st.var_p, rK.var_p),
                         squeeze_factor("O_Kz_X", st.var_x, rK.var_x),
                         squeeze_factor("O_T_E", cur.E, ref_T.E),
                         squeeze_factor("O_Kz_E", cur.E, ref_K.E)))
    return rows


_FACTOR_COLUMNS = ("K_z", "kBT", "n", "m", "var_x", "var_p", "O_T_X", "O_T_P",
                   "O_Kz_P", "O_Kz_X", "O_T_E", "O_Kz_E")


def _factor_meta(cfg):
    return {"T_floor": cfg.solver.T_floor, "K_floor": cfg.solver.K_floor}


def fig7(cache, cfg):
    track = _Tracker()
    rows = _factor_rows(cache, cfg, cfg.states, track)
    return FigureData("fig7", _FACTOR_COLUMNS, rows, {**_factor_meta(cfg), **track.meta()})


def fig11(cache, cfg):
    track = _Tracker()
    rows = _factor_rows(cache, cfg, ((1, 0), (0, 1)), track)
    return FigureData("fig11", _FACTOR_COLUMNS, rows, {**_factor_meta(cfg), **track.meta()})


def fig12(cache, cfg):
    track = _Tracker()
    rows = _factor_rows(cache, cfg, ((1, 1),), track)
    return FigureData("fig12", _FACTOR_COLUMNS, rows, {**_factor_meta(cfg), **track.meta()})


def fig8(cache, cfg):
    Ts, Ks = _axes(cfg)
    track = _Tracker()
    rows = []
    notes = []
    for state in cfg.states:
        if len(Ts) >= 3:
            for K in Ks:
                obs = [cache.at_gamma(K, T).stats[state] for T in Ts]
                vx = np.array([track.add(o).var_x for o in obs])
                vp = np.array([o.var_p for o in obs])
                rx, rp = squeezing_rate(Ts, vx), squeezing_rate(Ts, vp)
                rows.extend(("kBT", state[0], state[1], K, T, a, b, c, d)
                            for T, a, b, c, d in zip(Ts, vx, vp, rx, rp))
        if len(Ks) >= 3:
            for T in Ts:
                obs = [cache.at_gamma(K, T).stats[state] for K in Ks]
                vx = np.array([track.add(o).var_x for o in obs])
                vp = np.array([o.var_p for o in obs])
                rx, rp = squeezing_rate(Ks, vx), squeezing_rate(Ks, vp)
                rows.extend(("K_z", state[0], state[1], T, K, a, b, c, d)
                            for K, a, b, c, d in zip(Ks, vx, vp, rx, rp))
    for name, axis in (("kBT", Ts), ("K_z", Ks)):
        if len(axis) < 3:
            notes.append(f"{name} sweep has {len(axis)} sample(s); no finite-difference output")
    return FigureData("fig8", ("axis", "n", "m", "fixed", "value", "var_x", "var_p",
                               "rate_var_x", "rate_var_p"), rows, {"notes": notes, **track.meta()})


def fig9(cache, cfg):
    Ts, Ks = _axes(cfg)
    track = _Tracker()
    s = cfg.solver
    rows, pearson = [], []
    for K in Ks:
        ref = cache.at_gamma(K, s.T_floor, VACUUM)
        xs, es = [], []
        for T in Ts:
            cur = cache.at_gamma(K, T, VACUUM)
            track.add(cur.stats[(0, 0)])
            x = squeeze_factor("O_T_X", cur.stats[(0, 0)].var_x, ref.stats[(0, 0)].var_x)
            e = squeeze_factor("O_T_E", cur.E, ref.E)
            xs.append(x)
            es.append(e)
            rows.append(("kBT", K, T, x, e))
        pearson.append(_pearson("kBT", K, xs, es))
    for T in Ts:
        ref = cache.at_gamma(s.K_floor, T, VACUUM)
        xs, es = [], []
        for K in Ks:
            if K < cfg.correlation_min_K_z:
                continue
            cur = cache.at_gamma(K, T, VACUUM)
            x = squeeze_factor("O_Kz_P", cur.stats[(0, 0)].var_p, ref.stats[(0, 0)].var_p)
            e = squeeze_factor("O_Kz_E", cur.E, ref.E)
            xs.append(x)
            es.append(e)
            rows.append(("K_z", T, K, x, e))
        pearson.append(_pearson("K_z", T, xs, es))
    meta = {"pearson": pearson, "correlation_min_K_z": cfg.correlation_min_K_z,
            **_factor_meta(cfg), **track.meta()}
    return FigureData("fig9", ("axis", "fixed", "value", "O_squeeze", "O_energy"), rows, meta)


def _pearson(axis, fixed, xs, es):
    try:
        r = energy_correlation(np.array(xs), np.array(es)).pearson
    except (AfmSqueezeError, ValueError) as exc:
        return {"axis": axis, "fixed": float(fixed), "pearson": None, "note": str(exc)}
    return {"axis": axis, "fixed": float(fixed), "pearson": r}


def fig10(cache, cfg):
    Ts, Ks = _axes(cfg)
    samples = high_symmetry_path(cfg.model.lattice, cfg.path)
    track = _Tracker()
    rows = []
    for name, pairs, axis in (("kBT", [(cfg.model.K_z, T) for T in Ts], Ts),
                              ("K_z", [(K, cfg.model.kBT) for K in Ks], Ks)):
        vx = np.empty((len(pairs), len(samples.s)))
        vp = np.empty_like(vx)
        E = np.empty_like(vx)
        for i, (K, T) in enumerate(pairs):
            sol = cache.solution(K, T)
            for j, q in enumerate(samples.q):
                obs = observe(sol, q, ((0, 0),), cfg.eps_trunc)
                st = track.add(obs.stats[(0, 0)])
                vx[i, j], vp[i, j], E[i, j] = st.var_x, st.var_p, obs.E
        if len(axis) >= 3:
            rx, rp = squeezing_rate(axis, vx), squeezing_rate(axis, vp)
        else:
            rx = rp = np.full_like(vx, np.nan)
        for i, (K, T) in enumerate(pairs):
            for j, (s, q) in enumerate(zip(samples.s, samples.q)):
                rows.append((name, K, T, s, q[0], q[1], vx[i, j], vp[i, j], E[i, j],
                             rx[i, j], rp[i, j]))
    meta = {"ticks": [[lab, float(s)] for lab, s in samples.ticks], **track.meta()}
    return FigureData("fig10", ("sweep", "K_z", "kBT", "s", "qx", "qy", "var_x", "var_p", "E",
                                "rate_var_x", "rate_var_p"), rows, meta)


PIPELINES = {
    "fig1": fig1, "fig2": fig2, "fig3": fig3, "fig4": fig4, "fig5": fig5, "fig6": fig6,
    "fig7": fig7, "fig8": fig8, "fig9": fig9, "fig10": fig10, "fig11": fig11, "fig12": fig12,
}


def run_figure(cache, cfg, figure):
    """Build one figure's table; raises :class:`FigureAborted` on failure.

    Failures while building rows (e.g. a mode that is stable on the solver
    grid but soft at Γ) abort the figure like solver failures do.
    """
    try:
        data = PIPELINES[figure](cache, cfg)
    except FigureAborted:
        raise
    except (AfmSqueezeError, ArithmeticError) as exc:
        diag = {"error": type(exc).__name__, "message": str(exc)}
        params = getattr(exc, "params", None)
        if params is not None:
            diag.update(K_z=params.K_z, kBT=params.kBT)
        raise FigureAborted(f"{figure}: {exc}", diag) from exc
    data.meta = {
        "figure": figure,
        "status": "ok",
        "rows": len(data.rows),
        "config": cfg.to_dict(),
        "solver_diagnostics": cache.diagnostics(required_solves(cfg, figure)),
        **data.meta,
    }
    return data
