"""Acceptance criteria, one test each.

Every test prints a single ``[PASS]`` or ``[FAIL]`` line with the measured
quantities, then asserts. Tolerances are fixed here, not derived from runs.
"""

import math
import time

import numpy as np
import pytest

from afosmc.cli import main
from afosmc.fraccalc import (HistoryWindow, frac_integral, frac_operator, gl_coeffs,
                             gl_derivative, memory_length_for_accuracy,
                             short_memory_error_bound)
from afosmc.harness import (Reference, Scenario, chattering_energy, compute_metrics,
                            run_scenario, sweep_memory)
from afosmc.plant import NOMINAL, PlantParams, PlantState, default_uncertainty, step

H = 1e-3
ORDERS = (0.3, 0.5, 0.7)


@pytest.fixture
def report(capsys):
    def _report(tag, title, ok, detail):
        with capsys.disabled():
            print(f"\n[{'PASS' if ok else 'FAIL'}] {tag} {title}: {detail}")
        assert ok, detail
    return _report


def _window(x, h=H):
    return HistoryWindow.from_samples(x, h)


def test_ac01_operator_accuracy(report):
    t0 = time.perf_counter()
    worst = 0.0
    grid = np.arange(round(1 / H) + 1) * H
    for k in (1, 2):
        w = _window(grid ** k)
        for a in ORDERS:
            exact = math.gamma(k + 1) / math.gamma(k + 1 - a)
            worst = max(worst, abs(gl_derivative(w, a) / exact - 1))
    elapsed = time.perf_counter() - t0
    report("AC01", "GL derivative vs power-law formula", worst <= 1e-2 and elapsed < 1.0,
           f"max rel err {worst:.2e} (tol 1e-2), {elapsed:.3f} s (limit 1 s)")


def test_ac02_short_memory_bound(report):
    M = 1.0
    t = np.arange(10_001) * H
    signals = {
        "constant": np.full(t.size, M),
        "sine": M * np.sin(2 * np.pi * 0.7 * t),
        "square": M * np.sign(np.sin(2 * np.pi * 3 * t)),
        "uniform": np.random.default_rng(2024).uniform(-M, M, t.size),
    }
    lengths = (0.05, 0.1, 0.5, 1.0)
    violations, checked, tightest = 0, 0, 0.0
    for x in signals.values():
        for a in ORDERS:
            for row in sweep_memory(x, H, lengths, a):
                bound = short_memory_error_bound(M, row.length, a)
                checked += 1
                violations += row.deviation > bound
                tightest = max(tightest, row.deviation / bound)
    report("AC02", "short-memory truncation bound", violations == 0,
           f"{violations} violations in {checked} (signal, order, L) sweeps over 10 s; "
           f"largest deviation/bound {tightest:.3f}")


def test_ac03_memory_planner(report):
    plan = memory_length_for_accuracy(1.0, 0.01, 0.5)
    bound = short_memory_error_bound(1.0, plan.length, 0.5)
    ok = abs(plan.length - 3183.1) <= 0.05 and bound <= 0.01
    report("AC03", "memory-length planner", ok,
           f"L = {plan.length:.4f} (expect 3183.1), bound = {bound!r} (<= 0.01)")


def test_ac04_operator_properties(report):
    rng = np.random.default_rng(7)
    lin_ok = True
    for _ in range(200):
        n = int(rng.integers(1, 300))
        f, g = rng.uniform(-10, 10, (2, n))
        a, b = rng.uniform(-5, 5, 2)
        order = float(rng.uniform(0.05, 1.95))
        lhs = gl_derivative(_window(a * f + b * g), order)
        rhs = a * gl_derivative(_window(f), order) + b * gl_derivative(_window(g), order)
        c = np.abs(gl_coeffs(order, n - 1).coeffs)
        scale = (np.dot(c, np.abs(a * f[::-1])) + np.dot(c, np.abs(b * g[::-1]))) / H ** order
        lin_ok &= abs(lhs - rhs) <= 8 * np.spacing(scale)

    ident_ok = True
    for _ in range(50):
        x = rng.normal(size=int(rng.integers(1, 40)))
        ident_ok &= frac_operator(_window(x), 0) == x[-1]

    bd_ok = True
    x = rng.normal(size=200)
    w = HistoryWindow(200, H)
    for k, v in enumerate(x):
        w.append(v)
        bd_ok &= gl_derivative(w, 1.0) == ((x[k] - x[k - 1]) / H if k else x[0] / H)

    cubic = lambda t: 1 + t - 2 * t ** 2 + t ** 3  # noqa: E731
    comp_err = 0.0
    n = round(1 / H) + 1
    xs = cubic(np.arange(n) * H)
    for a in ORDERS:
        wi, integ = HistoryWindow(n, H), []
        for v in xs:
            wi.append(v)
            integ.append(frac_integral(wi, a))
        comp_err = max(comp_err, abs(gl_derivative(_window(integ), a) / xs[-1] - 1))
    ok = lin_ok and ident_ok and bd_ok and comp_err <= 5e-2
    report("AC04", "operator properties", ok,
           f"linearity<=8ulp {lin_ok}, order-0 identity {ident_ok}, "
           f"alpha=1 backward difference {bd_ok}, composition rel err {comp_err:.1e} (tol 5e-2)")


def test_ac05_plant_integrator(report):
    def terminal(dt, T=0.02):
        s = PlantState(q=1.0)
        for _ in range(round(T / dt)):
            s = step(s, 0.0, NOMINAL, dt)
        return np.array([s.q, s.q_dot])

    dt = 1e-3
    ref = terminal(dt / 64)
    ratio = np.max(np.abs(terminal(dt) - ref)) / np.max(np.abs(terminal(dt / 2) - ref))
    s = PlantState(q=1.0, q_dot=-3.0)
    energy = lambda s: 0.5 * s.q_dot ** 2 + 0.5 * NOMINAL.c_bar * s.q ** 2  # noqa: E731
    worst_rise, prev = -math.inf, energy(s)
    for _ in range(5000):
        s = step(s, 0.0, NOMINAL, dt)
        worst_rise, prev = max(worst_rise, energy(s) - prev), energy(s)
    ok = 12 <= ratio <= 20 and worst_rise <= 1e-9
    report("AC05", "RK4 order and passivity", ok,
           f"halving ratio {ratio:.3f} (in [12, 20]), largest energy step change {worst_rise:.2e}")


def test_ac06_adaptive_laws(report, default_runs):
    beta_ok, eps_err, w_max = True, 0.0, 0.0
    for (label, case), (tr, _) in default_runs.items():
        if case != 1:
            continue
        beta_ok &= bool(np.all(np.diff(tr.beta_hat) >= 0))
        exact = np.exp(-0.01 * tr.t)
        pre = exact > 1e-6
        eps_err = max(eps_err, float(np.max(np.abs(tr.epsilon[pre] / exact[pre] - 1))))
        w_max = max(w_max, float(np.max(np.linalg.norm(np.c_[tr.W1, tr.W2, tr.W3], axis=1))))
    ok = beta_ok and eps_err <= 1e-12 and w_max <= 1e3
    report("AC06", "adaptive-law properties", ok,
           f"beta_hat nondecreasing {beta_ok}, epsilon rel err {eps_err:.1e} (tol 1e-12), "
           f"max |W| {w_max:.2e} (cap 1e3)")


def test_ac07_sliding_convergence(report):
    plant = PlantParams(uncertainty=default_uncertainty())
    t0 = time.perf_counter()
    tr = run_scenario(Scenario(1, Reference("sine", 1.0, 1.0, 5.0), plant))
    elapsed = time.perf_counter() - t0
    s = np.abs(tr.s)
    avgs = [float(np.mean(s[(tr.t >= k) & (tr.t < k + 1)])) for k in range(5)]
    ok = False
    for k, a in enumerate(avgs):
        if k and a >= avgs[k - 1]:
            break
        if a < 1e-3:
            ok = True
            break
    ok = ok and elapsed < 10.0
    report("AC07", "closed-loop sliding convergence", ok,
           "per-second mean |s| = [" + ", ".join(f"{a:.2e}" for a in avgs)
           + f"] (need strictly decreasing to < 1e-3), {elapsed:.2f} s (limit 10 s)")


def test_ac08_controller_ordering(report, default_runs):
    lines, ok = [], True
    labels = sorted({k[0] for k in default_runs}, key=lambda s: (s.startswith("tri"), s))
    for label in labels:
        r = [compute_metrics(*default_runs[(label, c)]).rmse for c in (1, 2, 3)]
        good = r[0] < r[2] < r[1]
        ok &= good
        lines.append(f"{label}: {r[0]:.2e} < {r[2]:.2e} < {r[1]:.2e} {'ok' if good else 'NO'}")
    report("AC08", "RMSE ordering case1 < case3 < case2", ok, "; ".join(lines))


def test_ac09_chattering(report, default_runs):
    lines, ok = [], True
    for label in ("sine 5 Hz", "sine 10 Hz"):
        c1 = chattering_energy(*default_runs[(label, 1)])
        c3 = chattering_energy(*default_runs[(label, 3)])
        ok &= c1 < c3
        lines.append(f"{label}: {c1:.3g} < {c3:.3g}")
    report("AC09", "input chattering case1 < case3", ok, "; ".join(lines))


def test_ac10_deterministic_io(report, tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text('{"references": [{"kind": "sine", "frequency": 1.0, "duration": 2.0}]}')
    outs = [tmp_path / "a.csv", tmp_path / "b.csv"]
    codes = [main(["run", "--config", str(cfg), "--case", "1", "--out", str(p)]) for p in outs]
    capsys.readouterr()
    same = outs[0].read_bytes() == outs[1].read_bytes()
    m = compute_metrics(np.array([0.1, -0.2, 0.2]))
    metric_ok = m.mae == 0.2 and round(m.rmse, 6) == 0.173205
    ok = codes == [0, 0] and same and metric_ok
    report("AC10", "deterministic CSV and metric examples", ok,
           f"exit codes {codes}, byte-identical {same}, "
           f"mae {m.mae!r} rmse {m.rmse:.6f} (expect 0.2, 0.173205)")
