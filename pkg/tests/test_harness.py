import math
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from afosmc.control import HIGH_GAIN_AFOSMC
from afosmc.harness import (TRACE_COLUMNS, Metrics, Reference, Scenario, SimulationDivergence,
                            Trace, chattering_energy, compare_cases, compute_metrics,
                            reference_at, run_scenario, sweep_memory)
from afosmc.plant import PlantParams, default_uncertainty

UNCERTAIN = PlantParams(uncertainty=default_uncertainty())


def test_sine_reference_examples():
    q, v, a = reference_at(Reference("sine", 1, 1, 5), 0.25)
    assert q == 1.0 and v == pytest.approx(0, abs=1e-15)
    assert a == pytest.approx(-(2 * math.pi) ** 2)
    r = Reference("sine", 3, 2, 5)
    assert reference_at(r, 0.0) == (0.0, 2 * math.pi * 3 * 2, -0.0)


def test_triangle_reference_vertex():
    r = Reference("triangle", 1, 1, 4)
    q, v, a = reference_at(r, 0.25)
    assert q == 1.0 and a == 0.0
    assert v == 4.0  # left-limit slope
    assert reference_at(r, 0.2501)[1] == -4.0
    assert reference_at(r, 0.75)[0] == pytest.approx(-1.0)
    assert reference_at(r, 1.0)[1] == 4.0


@given(st.floats(0, 4))
def test_triangle_is_bounded_with_zero_acceleration(t):
    q, v, a = reference_at(Reference("triangle", 1.3, 2.0, 4), t)
    assert abs(q) <= 2.0 + 1e-12 and abs(v) == pytest.approx(4 * 2.0 * 1.3) and a == 0.0


def test_reference_time_outside_range():
    with pytest.raises(ValueError):
        reference_at(Reference(duration=1.0), 1.5)
    with pytest.raises(ValueError):
        reference_at(Reference(), -0.1)


@pytest.mark.parametrize("kw", [{"kind": "square"}, {"frequency": 0}, {"duration": -1},
                                {"amplitude": -1}])
def test_reference_validation(kw):
    with pytest.raises(ValueError):
        Reference(**kw)


@pytest.mark.parametrize("case", [1, 2, 3])
def test_zero_reference_stays_at_equilibrium(case):
    tr = run_scenario(Scenario(case, Reference("sine", 1, 0.0, 0.5)))
    assert np.all(tr.e == 0.0) and np.all(tr.q == 0.0)


@pytest.mark.parametrize("case", [1, 2, 3])
def test_runs_are_bit_identical(case):
    sc = Scenario(case, Reference("sine", 5, 1, 0.6), UNCERTAIN)
    a, b = run_scenario(sc), run_scenario(sc)
    for c in TRACE_COLUMNS:
        assert np.array_equal(a[c], b[c], equal_nan=True)


@pytest.mark.parametrize("duration,step", [(0.5, 1e-3), (0.3333, 1e-3), (0.01, 2e-3)])
def test_trace_length(duration, step):
    tr = run_scenario(Scenario(2, Reference(duration=duration), step=step))
    assert len(tr) == math.ceil(duration / step - 1e-9)
    assert np.all(np.diff(tr.t) > 0)


def test_trace_columns_present_per_case():
    t1 = run_scenario(Scenario(1, Reference(duration=0.05)))
    t3 = run_scenario(Scenario(3, Reference(duration=0.05)))
    assert np.all(np.isnan(t1.d_hat)) and not np.any(np.isnan(t1.s))
    assert np.all(np.isnan(t3.s)) and not np.any(np.isnan(t3.d_hat))
    # the total input is the sum of its parts at every tick
    assert np.array_equal(t1.mu, t1.mu_s + t1.mu_c)


def test_high_gain_preset_diverges_with_tick_index():
    sc = Scenario(1, Reference(duration=1.0), UNCERTAIN, HIGH_GAIN_AFOSMC)
    with pytest.raises(SimulationDivergence) as info:
        run_scenario(sc)
    assert 0 < info.value.tick < 1000 and info.value.signal in ("q", "mu")


def test_quantization_applied_to_measurement():
    res = 1e-4
    tr = run_scenario(Scenario(3, Reference(duration=0.2), quantization=res))
    assert np.allclose(tr.q / res, np.round(tr.q / res), atol=1e-6)


def test_superposition_for_linear_case():
    base = Scenario(2, Reference("sine", 2, 1.0, 1.0))
    scaled = replace(base, reference=Reference("sine", 2, 3.0, 1.0))
    e1, e3 = run_scenario(base).e, run_scenario(scaled).e
    mask = np.abs(e1) > 1e-12
    assert np.allclose(e3[mask] / e1[mask], 3.0, rtol=1e-9, atol=0)


# --- metrics ---------------------------------------------------------------

def test_metrics_examples():
    m = compute_metrics(np.array([0.1, -0.2, 0.2]))
    assert m.mae == 0.2 and round(m.rmse, 6) == 0.173205
    assert compute_metrics(np.zeros(5)) == Metrics(0.0, 0.0)
    c = compute_metrics(np.full(7, -0.3))
    assert c.mae == c.rmse == 0.3


def test_metrics_settle_skip_and_empty():
    e = np.array([5.0, 1.0, -1.0])
    t = np.array([0.0, 1.0, 2.0])
    assert compute_metrics(e, 0.5, t) == Metrics(1.0, 1.0)
    with pytest.raises(ValueError):
        compute_metrics(e, 3.0, t)


finite = st.floats(-1e3, 1e3, allow_nan=False)


@given(st.lists(finite, min_size=1, max_size=200))
def test_rmse_not_above_mae(xs):
    m = compute_metrics(np.array(xs))
    assert 0 <= m.rmse <= m.mae


@settings(max_examples=100)
@given(st.lists(finite, min_size=1, max_size=200), st.randoms(use_true_random=False))
def test_metrics_permutation_invariant(xs, rnd):
    a = compute_metrics(np.array(xs))
    ys = xs[:]
    rnd.shuffle(ys)
    b = compute_metrics(np.array(ys))
    assert a.mae == b.mae
    assert abs(a.rmse - b.rmse) <= 4 * np.spacing(max(a.rmse, 1e-300))


def test_chattering_energy():
    tr = Trace(1, {"t": np.arange(4.0), "mu": np.array([0.0, 1.0, -1.0, -1.0])})
    assert chattering_energy(tr) == 5.0
    assert chattering_energy(tr, settle_skip=2.0) == 0.0


def test_compare_cases_rows():
    ref = Reference("sine", 1, 1, 1.5)
    rows = compare_cases([Scenario(2, ref)])
    assert len(rows) == 1 and rows[0][0] == 2
    zero = Reference("sine", 1, 0.0, 1.5)
    rows = compare_cases([Scenario(c, zero) for c in (1, 2, 3)])
    assert [r[0] for r in rows] == [1, 2, 3]
    assert all(m == Metrics(0.0, 0.0) for _, m in rows)
    with pytest.raises(ValueError):
        compare_cases([Scenario(1, ref), Scenario(2, zero)])


def test_compare_cases_parallel_matches_serial():
    scs = [Scenario(c, Reference("sine", 5, 1, 0.6), UNCERTAIN) for c in (1, 2, 3)]
    assert compare_cases(scs, parallel=True) == compare_cases(scs, parallel=False)


# --- memory sweep ----------------------------------------------------------

def test_sweep_full_length_has_zero_deviation_and_bounds_hold():
    x = np.sin(np.arange(2000) * 2e-3 * 2 * math.pi)
    rows = sweep_memory(x, 1e-3, [0.05, 0.5, 2.0], 0.5)
    assert rows[-1].deviation == 0.0
    assert all(r.deviation <= r.bound for r in rows)
    assert all(r.bound_M == pytest.approx(1.0, abs=1e-6) for r in rows)
    assert [r.capacity for r in rows] == [51, 501, 2001]
