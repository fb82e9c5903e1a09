"""Acceptance criteria, one test per criterion.

Each test prints a single ``[PASS]``/``[FAIL]`` line with the measured
numbers.  ``python tests/test_acceptance.py`` runs them outside pytest.

Criterion 7 uses alpha = 0.1, 0.2, 0.4 by default; set
``ACCEPTANCE_ALPHAS=0.05,0.1,0.2`` to run another set (alpha = 0.05 takes
about twenty minutes on one core).
"""
import contextlib
import filecmp
import io
import os
import sys
import tempfile
import warnings

import numpy as np
import pytest

from floquet_resonance import (PoschlTeller, PropagationConfig, SpatialGrid, ZeroPotential, averaged_survival,
                               benchmark_model, benchmark_static, boundary_value, build_hamiltonian, eigensolve,
                               f_value, gamma_fgr, gamma_limiting, genericity_sample, propagate, random_bump_drive,
                               resolvent_element, scaling_study)
from floquet_resonance.cli import main as cli_main

ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
T = np.pi


def report(number, title, passed, detail):
    line = f"[{'PASS' if passed else 'FAIL'}] criterion {number:>2}: {title} -- {detail}"
    print(line, flush=True)
    return passed


# ---------------------------------------------------------------------------

def criterion_1():
    errs, hs = [], []
    for n in (3001, 6001, 12001):
        H = build_hamiltonian(PoschlTeller(), SpatialGrid.symmetric(30.0, n))
        errs.append(abs(eigensolve(H, cap=16384, upper=-0.5).values[0] + 1.0))
        hs.append(H.grid.h)
    rates = np.log2(np.array(errs[:-1]) / np.array(errs[1:]))
    ok = errs[0] < 1e-3 and bool(np.all(np.abs(rates - 2.0) < 0.1))
    return report(1, "eigenvalue oracle", ok,
                  f"|E0 + 1| = {errs[0]:.3e} at h = {hs[0]:.3g}; convergence orders {np.round(rates, 4).tolist()}")


def criterion_2():
    H = build_hamiltonian(ZeroPotential(), SpatialGrid.symmetric(30.0, 3001))
    psi = np.pi ** -0.25 * np.exp(-0.5 * H.grid.x ** 2)
    val = boundary_value(H, psi, 1.0).value.imag
    err = abs(val - np.sqrt(np.pi) / np.e)
    return report(2, "free-resolvent oracle", err < 1e-3, f"Im = {val:.8f}, closed form {np.sqrt(np.pi) / np.e:.8f}")


def criterion_3():
    model = benchmark_model()
    a, b = gamma_fgr(model).Gamma, gamma_limiting(model).Gamma
    rel = abs(a - b) / b
    return report(3, "route equivalence", rel < 1e-2, f"fgr {a:.10f}, limiting {b:.10f}, rel diff {rel:.2e}")


def criterion_4():
    rng = np.random.default_rng(4)
    H = build_hamiltonian(PoschlTeller(), SpatialGrid.symmetric(30.0, 3001))
    worst = np.inf
    for _ in range(100):
        psi = rng.normal(size=H.n) * np.exp(-0.5 * (H.grid.x / rng.uniform(0.5, 10)) ** 2) \
            + 1j * rng.normal(size=H.n)
        val = resolvent_element(H, psi, rng.uniform(-3.0, 10.0), 10 ** rng.uniform(-3, 0))
        worst = min(worst, val.imag)
    res = gamma_limiting(benchmark_model(static_shift=0.3))
    closed = max(abs(v) for v in res.diagnostics["closed_imag"].values())
    proj = abs(res.diagnostics["projector_term"].imag)
    ok = worst >= 0 and closed <= 1e-6 and proj <= 1e-6
    return report(4, "Herglotz positivity", ok,
                  f"min Im over 100 draws = {worst:.3e}; closed-channel |Im| = {closed:.2e}; projector |Im| = {proj:.2e}")


def criterion_5():
    model = benchmark_model(static_shift=0.3)
    ref = f_value(model, 0.05, 4, 0)
    diffs = [abs(f_value(model, 0.05, 4, n0) - ref) for n0 in (-3, -1, 1, 2, 5)]
    return report(5, "n0-independence of F", max(diffs) <= 1e-12, f"max |F(n0) - F(0)| = {max(diffs):.2e}")


def criterion_6():
    rng = np.random.default_rng(6)
    model = benchmark_model(20.0, 201).with_alpha(0.3)
    n = model.grid.n_points
    psi = rng.normal(size=n) + 1j * rng.normal(size=n)
    psi /= np.linalg.norm(psi)
    free_cfg = PropagationConfig(max_boundary_amplitude=np.inf)
    dt = free_cfg.dt(T)
    drift = abs(np.linalg.norm(propagate(psi, 0.0, 10_000 * dt, model, free_cfg).psi) - 1.0)
    a = propagate(psi, 3 * dt, 27 * dt, model, free_cfg).psi
    b = propagate(psi, 3 * dt + T, 27 * dt + T, model, free_cfg).psi
    period = np.linalg.norm(a - b) / np.linalg.norm(a)
    bench = benchmark_model(30.0, 301)
    cfg = PropagationConfig(h=0.2)
    a0 = abs(averaged_survival(bench, 0.3, 4 * T, config=cfg).amplitudes[0] - 1.0)
    stat = np.max(np.abs(np.abs(averaged_survival(bench, 0.0, 20 * T, config=cfg).amplitudes) - 1.0))
    ok = drift < 1e-8 and period <= 1e-12 and a0 <= 1e-12 and stat <= 1e-9
    return report(6, "propagator invariants", ok,
                  f"norm drift {drift:.1e}; periodicity {period:.1e}; |A(0) - 1| = {a0:.1e}; alpha=0 ||A|-1| = {stat:.1e}")


def acceptance_alphas():
    text = os.environ.get("ACCEPTANCE_ALPHAS")
    return [float(a) for a in text.split(",")] if text else [0.1, 0.2, 0.4]


def criterion_7():
    model = benchmark_model()
    gamma = gamma_limiting(model).Gamma
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        rep = scaling_study(model, acceptance_alphas(), gamma_ref=gamma, decay_product=1.2)
    products = [s.fit.Gamma_fit * s.s_max for s in rep.series]
    ok = (all(1.0 <= p <= 3.0 for p in products) and all(0.85 <= r <= 1.15 for r in rep.ratios)
          and abs(rep.slope - 2.0) <= 0.1 and not caught)
    return report(7, "width validation", ok,
                  f"alpha {rep.alphas}: ratios {np.round(rep.ratios, 4).tolist()}, Gamma_fit*s_max "
                  f"{np.round(products, 3).tolist()}, log-log slope {rep.slope:.4f}, warnings {len(caught)}")


def criterion_8():
    model = benchmark_model(static_shift=0.3)
    rep = scaling_study(model, [-0.2, -0.1, 0.1, 0.2], s_max=20 * T, gamma_ref=1.0)
    rel = abs(rep.shift_coefficient - rep.c1) / abs(rep.c1)
    return report(8, "first-order shift", rel < 0.1,
                  f"linear coefficient {rep.shift_coefficient:.6f}, c1 = {rep.c1:.6f}, rel diff {rel:.2e}")


def criterion_9():
    model = benchmark_model()
    g = gamma_fgr(model).Gamma
    errs = []
    for c in (-1.0, 2.0, 0.5):
        gc = gamma_fgr(model.with_perturbation(model.perturbation.scaled(c))).Gamma
        errs.append(abs(gc - c * c * g) / (c * c * g))
    return report(9, "quadratic scaling", max(errs) <= 1e-10, f"max rel error {max(errs):.2e}")


def criterion_10():
    rep = genericity_sample(benchmark_static(), T, random_bump_drive(), 100, seed=2024)
    hits = int(round(rep.fraction * 100))
    return report(10, "genericity proxy", hits >= 99, f"{hits}/100 with Gamma > 1e-10; min Gamma {min(rep.gammas):.3e}")


def criterion_11():
    cfg = os.path.join(ROOT, "configs", "quick.cfg")
    with tempfile.TemporaryDirectory() as tmp:
        outs = [os.path.join(tmp, f"run{i}") for i in (1, 2)]
        with contextlib.redirect_stdout(io.StringIO()):
            codes = [cli_main(["compare", "--config", cfg, "--out", o, "--seed", "7"]) for o in outs]
        names = sorted(f for f in os.listdir(outs[0]) if f != "metadata.json")
        same = [filecmp.cmp(os.path.join(outs[0], f), os.path.join(outs[1], f), shallow=False) for f in names]
        listing_equal = names == sorted(f for f in os.listdir(outs[1]) if f != "metadata.json")
    ok = codes == [0, 0] and all(same) and listing_equal and len(names) >= 3
    return report(11, "determinism", ok, f"{sum(same)}/{len(names)} payload files byte-identical; exit codes {codes}")


CRITERIA = [criterion_1, criterion_2, criterion_3, criterion_4, criterion_5, criterion_6, criterion_7, criterion_8,
            criterion_9, criterion_10, criterion_11]


@pytest.mark.parametrize("criterion", CRITERIA, ids=[f"criterion_{i}" for i in range(1, 12)])
def test_criterion(criterion, capsys):
    with capsys.disabled():
        passed = criterion()
    assert passed


if __name__ == "__main__":
    results = [c() for c in CRITERIA]
    print(f"{sum(results)}/{len(results)} criteria passed")
    sys.exit(0 if all(results) else 1)
