"""Acceptance criteria 1-12 at the default model (S=1, J=1, square lattice).

Each test prints one ``criterion N: PASS|FAIL`` line; the lines are
repeated in the terminal summary. Run directly with
``python3 tests/test_acceptance.py`` or through pytest.
"""

import functools
import json
import math
import os
import time
from dataclasses import replace

import numpy as np
import pytest

from afmsqueeze import cli
from afmsqueeze import states as st
from afmsqueeze.fockoracle import FockSpace, build_excited, direct_variance, extract
from afmsqueeze.lattice import BZPath, high_symmetry_path, structure_factor
from afmsqueeze.meanfield import fixed_point_defect, solve_self_consistent
from afmsqueeze.observables import GAMMA, observe
from afmsqueeze.quadrature import UNCERTAINTY_SLACK, energy_correlation, squeeze_factor, squeezing_rate, variance_xp
from afmsqueeze.spinwave import ModelParams, bogoliubov_arrays

DEFAULT = ModelParams()
GRID = 64
T_LADDER = (0.2, 0.6, 1.0, 1.4, 1.8)
K_LADDER = (0.01, 0.05, 0.1, 0.2)
T_FLOOR, K_FLOOR = 1e-3, 1e-4
STATES = ((0, 0), (1, 0), (0, 1), (1, 1))
# criterion 1 fixes no temperatures; these lie inside the S=1 stable range
SYMPLECTIC_T = (0.1, 0.3, 0.5, 0.7, 0.9)
SYMPLECTIC_K = (0.005, 0.01, 0.05, 0.1, 0.2)

_uncertainty_minima = {}


@functools.lru_cache(maxsize=None)
def _solve(K, T):
    return solve_self_consistent(replace(DEFAULT, K_z=float(K), kBT=float(T)), GRID)


@functools.lru_cache(maxsize=None)
def _gamma(K, T):
    return observe(_solve(K, T), GAMMA, STATES)


def _check(record, number, body):
    start = time.perf_counter()
    try:
        passed, detail = body()
    except Exception as exc:  # any failure to evaluate counts against the criterion
        passed, detail = False, f"{type(exc).__name__}: {exc}"
    detail = f"{detail} [{time.perf_counter() - start:.1f} s]"
    record(number, passed, detail)
    assert passed, detail


def _strict(values, sign):
    return bool(np.all(sign * np.diff(values) > 0))


def _fmt(values):
    return "[" + ", ".join(f"{v:.4g}" for v in values) + "]"


def _criterion_1():
    start = time.perf_counter()
    dev, worst_unc = 0.0, math.inf
    for K in SYMPLECTIC_K:
        for T in SYMPLECTIC_T:
            sol = _solve(K, T)
            gamma = structure_factor(DEFAULT.lattice, sol.q)
            _, u, v = bogoliubov_arrays(sol.model, gamma)
            ut, vt, phi = st.hybrid_arrays(sol.eps_bare + sol.eps_tilde, sol.g, sol.E)
            w, nu = st.composite_arrays(u, v, ut, vt, phi)
            for a, b in ((u, v), (ut, vt), (w, nu)):
                dev = max(dev, float(np.max(np.abs(np.abs(a) ** 2 - np.abs(b) ** 2 - 1.0))))
            for wi, ni in zip(w, nu):
                s = variance_xp(st.ground_amplitudes(st.CompositeTransform.from_wnu(wi, ni)))
                worst_unc = min(worst_unc, s.uncertainty_product)
    elapsed = time.perf_counter() - start
    _uncertainty_minima[1] = worst_unc
    ok = dev <= 1e-10 and elapsed < 10
    return ok, f"max defect {dev:.2e} (tol 1e-10) over {GRID}x{GRID} x 5 T x 5 K_z in {elapsed:.1f} s (limit 10 s)"


def test_criterion_01_symplectic(criterion):
    _check(criterion, 1, _criterion_1)


def _criterion_2():
    start = time.perf_counter()
    dev, worst_unc = 0.0, math.inf
    for r in np.linspace(0.0, 1.6, 20):
        s = variance_xp(st.ground_amplitudes(st.CompositeTransform.squeezed(r, math.pi), 1e-12))
        dev = max(dev, abs(s.var_x - math.exp(-2 * r) / 2), abs(s.var_p - math.exp(2 * r) / 2))
        worst_unc = min(worst_unc, s.uncertainty_product)
    elapsed = time.perf_counter() - start
    _uncertainty_minima[2] = worst_unc
    return dev <= 1e-9 and elapsed < 1, f"max deviation {dev:.2e} (tol 1e-9) in {elapsed:.2f} s (limit 1 s)"


def test_criterion_02_closed_form(criterion):
    _check(criterion, 2, _criterion_2)


def _criterion_3():
    start = time.perf_counter()
    fs = FockSpace(80)
    coef_dev = var_dev = 0.0
    worst_unc = math.inf
    for r in (0.3, 0.8, 1.2):
        ct = st.CompositeTransform.squeezed(r)
        for n, m in STATES:
            amps = st.eigenstate_amplitudes(ct, n, m, 1e-12)
            vec = build_excited(ct, fs, n, m)
            # the last δ+n+m layers of the operator-built state carry truncation error
            size = min(fs.cutoff - amps.delta - (n + m), len(amps.coefficients))
            ref = extract(vec, fs, amps.delta, amps.offset_mode, size)
            coef_dev = max(coef_dev, float(np.max(np.abs(amps.coefficients[:size] - ref))))
            a, b = variance_xp(amps), direct_variance(vec, fs, n, m)
            var_dev = max(var_dev, abs(a.var_x - b.var_x), abs(a.var_p - b.var_p))
            worst_unc = min(worst_unc, a.uncertainty_product, b.uncertainty_product)
    elapsed = time.perf_counter() - start
    _uncertainty_minima[3] = worst_unc
    ok = coef_dev <= 1e-8 and var_dev <= 1e-7 and elapsed < 60
    return ok, (f"coefficients {coef_dev:.2e} (tol 1e-8), variances {var_dev:.2e} (tol 1e-7), "
                f"cutoff 80, {elapsed:.1f} s (limit 60 s)")


def test_criterion_03_oracle(criterion):
    _check(criterion, 3, _criterion_3)


def _run_all(out, workers):
    text = f"output: {{dir: {out}}}\nworkers: {workers}\n"
    path = os.path.join(os.path.dirname(out), f"run-{workers}.yaml")
    with open(path, "w") as fh:
        fh.write(text)
    return cli.main(["all", "--config", path])


@pytest.fixture(scope="module")
def all_runs(tmp_path_factory):
    base = tmp_path_factory.mktemp("acceptance")
    runs = {}
    for workers in (1, 8):
        out = str(base / f"workers{workers}")
        runs[workers] = (_run_all(out, workers), out)
    return runs


def test_criterion_04_uncertainty(criterion, all_runs):
    def body():
        for n, fn in ((1, _criterion_1), (2, _criterion_2), (3, _criterion_3)):
            if n not in _uncertainty_minima:
                fn()
        worst = min(_uncertainty_minima.values())
        _, out = all_runs[1]
        checked, aborted, fig_ok = [], [], True
        for name in sorted(os.listdir(out)):
            if not name.endswith(".json"):
                continue
            meta = json.load(open(os.path.join(out, name)))
            if meta.get("status") != "ok":
                aborted.append(meta["figure"])
            elif "uncertainty_ok" in meta:
                checked.append(meta["figure"])
                fig_ok &= bool(meta["uncertainty_ok"])
                worst = min(worst, float(meta["min_uncertainty_product"]))
        ok = worst >= 0.25 - UNCERTAINTY_SLACK and fig_ok
        detail = f"min product {worst:.6f} (bound 0.25 - 1e-9) over criteria 1-3 and {len(checked)} figures"
        if aborted:
            detail += f"; aborted figures not covered: {', '.join(aborted)}"
        return ok, detail
    _check(criterion, 4, body)


def test_criterion_05_self_consistency(criterion):
    def body():
        Ts = np.round(np.linspace(0.1, 2.0, 8), 6)
        Ks = (0.005, 0.01, 0.05, 0.1, 0.2)
        failures, worst, iters = [], 0.0, 0
        for K in Ks:
            for T in Ts:
                try:
                    sol = _solve(K, float(T))
                except Exception as exc:
                    failures.append(f"(K_z={K:g}, kBT={T:g}: {type(exc).__name__})")
                    continue
                worst = max(worst, fixed_point_defect(sol))
                iters = max(iters, sol.iterations)
        ok = not failures and worst <= 1e-10 and iters <= 200
        detail = f"max defect {worst:.2e} (tol 1e-10), max iterations {iters}"
        if failures:
            detail += f"; {len(failures)}/{len(Ks) * len(Ts)} points fail, first {failures[0]}"
        return ok, detail
    _check(criterion, 5, body)


def test_criterion_06_dispersion_trends(criterion):
    def body():
        ET = [_gamma(0.01, T).E for T in T_LADDER]
        EK = [_gamma(K, 1.0).E for K in K_LADDER]
        ok = _strict(ET, -1) and _strict(EK, +1)
        return ok, f"E_Gamma(T) {_fmt(ET)} decreasing, E_Gamma(K_z) {_fmt(EK)} increasing"
    _check(criterion, 6, body)


def test_criterion_07_conjugate_squeezing(criterion):
    def body():
        oT = [_gamma(0.01, T).stats[(0, 0)] for T in T_LADDER]
        oK = [_gamma(K, 1.0).stats[(0, 0)] for K in K_LADDER]
        xT, pT = [s.var_x for s in oT], [s.var_p for s in oT]
        xK, pK = [s.var_x for s in oK], [s.var_p for s in oK]
        ok = _strict(xT, -1) and _strict(pT, +1) and _strict(xK, +1) and _strict(pK, -1)
        return ok, f"var_x(T) {_fmt(xT)}, var_x(K_z) {_fmt(xK)}"
    _check(criterion, 7, body)


def test_criterion_08_rate_saturation(criterion):
    def body():
        Ks = np.linspace(0.02, 0.2, 10)
        pK = [_gamma(float(K), 1.0).stats[(0, 0)].var_p for K in Ks]
        rK = np.abs(squeezing_rate(Ks, pK))
        Ts = np.linspace(0.3, 1.8, 16)
        xT = [_gamma(0.01, float(T)).stats[(0, 0)].var_x for T in Ts]
        rT = np.abs(squeezing_rate(Ts, xT))
        okK, okT = _strict(rK, -1), _strict(rT, +1)
        return okK and okT, f"|dP/dK_z| decreasing: {okK}; |dX/dT| increasing: {okT}"
    _check(criterion, 8, body)


def test_criterion_09_energy_correlation(criterion):
    def body():
        ref_T = _gamma(0.01, T_FLOOR)
        oT = [_gamma(0.01, T) for T in T_LADDER]
        ox = squeeze_factor("O_T_X", [o.stats[(0, 0)].var_x for o in oT], ref_T.stats[(0, 0)].var_x)
        oe = squeeze_factor("O_T_E", [o.E for o in oT], ref_T.E)
        rT = energy_correlation(ox, oe).pearson
        ref_K = _gamma(K_FLOOR, 1.0)
        Ks = [K for K in K_LADDER if K >= 0.005]
        oK = [_gamma(K, 1.0) for K in Ks]
        op = squeeze_factor("O_Kz_P", [o.stats[(0, 0)].var_p for o in oK], ref_K.stats[(0, 0)].var_p)
        ok_e = squeeze_factor("O_Kz_E", [o.E for o in oK], ref_K.E)
        rK = energy_correlation(op, ok_e).pearson
        return rT > 0.9 and rK < -0.9, f"Pearson T {rT:.4f} (> 0.9), K_z {rK:.4f} (< -0.9)"
    _check(criterion, 9, body)


def test_criterion_10_zone_centre_dominance(criterion):
    def body():
        path = high_symmetry_path(DEFAULT.lattice, BZPath(("Γ", "X", "M", "Γ"), 8))
        cold, hot = _solve(0.01, 0.2), _solve(0.01, 1.8)
        change = np.array([abs(observe(hot, q).stats[(0, 0)].var_x - observe(cold, q).stats[(0, 0)].var_x)
                           for q in path.q])
        at_gamma = max(change[0], change[-1])
        best = int(np.argmax(change))
        ok = at_gamma >= change.max()
        return ok, f"change at Gamma {at_gamma:.4g}, maximum {change.max():.4g} at sample {best}"
    _check(criterion, 10, body)


def test_criterion_11_excited_sign_structure(criterion):
    def body():
        ref_T, ref_K = _gamma(0.01, T_FLOOR), _gamma(K_FLOOR, 1.0)
        bad = []
        for state in STATES[1:]:
            for T in T_LADDER:
                s, r = _gamma(0.01, T).stats[state], ref_T.stats[state]
                if not (squeeze_factor("O_T_X", s.var_x, r.var_x) > 0 and
                        squeeze_factor("O_T_P", s.var_p, r.var_p) < 0):
                    bad.append(f"{state} kBT={T}")
            for K in K_LADDER:
                s, r = _gamma(K, 1.0).stats[state], ref_K.stats[state]
                if not (squeeze_factor("O_Kz_P", s.var_p, r.var_p) > 0 and
                        squeeze_factor("O_Kz_X", s.var_x, r.var_x) < 0):
                    bad.append(f"{state} K_z={K}")
        return not bad, "all signs as expected" if not bad else f"wrong sign at {', '.join(bad)}"
    _check(criterion, 11, body)


def test_criterion_12_determinism(criterion, all_runs):
    def body():
        (_, a), (_, b) = all_runs[1], all_runs[8]
        csv_a = sorted(f for f in os.listdir(a) if f.endswith(".csv"))
        csv_b = sorted(f for f in os.listdir(b) if f.endswith(".csv"))
        same = csv_a == csv_b and all(
            open(os.path.join(a, f), "rb").read() == open(os.path.join(b, f), "rb").read() for f in csv_a)
        return same and bool(csv_a), f"{len(csv_a)} CSVs byte-identical between workers 1 and 8: {same}"
    _check(criterion, 12, body)


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-v", "-s"]))
