"""Reference trajectories, closed-loop runs and tracking metrics."""

from __future__ import annotations

import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .control import (AfosmcController, AfosmcParams, BaselineParams, Compensator,
                      CompensatorParams, ControllerFault, DobState, dob_estimate,
                      pid_dob_control, smc_dob_control, total_control)
from .fraccalc import HistoryWindow, capacity_for_length, gl_derivative, short_memory_error_bound
from .plant import PlantDivergence, PlantParams, PlantState, step as plant_step

__all__ = [
    "SimulationDivergence",
    "Reference",
    "Scenario",
    "Trace",
    "Metrics",
    "TRACE_COLUMNS",
    "reference_at",
    "run_scenario",
    "compute_metrics",
    "compare_cases",
    "run_many",
    "VELOCITY_ESTIMATES",
    "chattering_energy",
    "CASE_NAMES",
    "SweepRow",
    "sweep_memory",
]

CASE_NAMES = {1: "AFOSMC + compensator", 2: "PID + DOB", 3: "SMC + DOB"}

TRACE_COLUMNS = ("t", "q_r", "q", "e", "mu", "mu_s", "mu_c", "s", "beta_hat",
                 "epsilon", "W1", "W2", "W3", "d_hat")


VELOCITY_ESTIMATES = ("backward", "midpoint")


class SimulationDivergence(RuntimeError):
    """A closed-loop signal became non-finite."""

    def __init__(self, tick: int, signal: str, detail: str = ""):
        self.tick = tick
        self.signal = signal
        msg = f"divergence at tick {tick} in {signal}"
        super().__init__(f"{msg}: {detail}" if detail else msg)


@dataclass(frozen=True)
class Reference:
    kind: str = "sine"
    frequency: float = 1.0
    amplitude: float = 1.0
    duration: float = 5.0

    def __post_init__(self):
        if self.kind not in ("sine", "triangle"):
            raise ValueError(f"unknown reference kind {self.kind!r}")
        for name in ("frequency", "duration"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0):
                raise ValueError(f"reference {name} must be positive, got {v}")
        if not (math.isfinite(self.amplitude) and self.amplitude >= 0):
            raise ValueError("reference amplitude must be non-negative")

    @property
    def period(self) -> float:
        return 1.0 / self.frequency

    @property
    def label(self) -> str:
        return f"{self.kind} {self.frequency:g} Hz"


def reference_at(ref: Reference, t: float) -> tuple[float, float, float]:
    """Position, velocity and acceleration of the reference at ``t``.

    The triangle starts at zero rising, peaks a quarter period in, and
    reports the left-limit slope at its vertices with zero acceleration.
    """
    if not 0.0 <= t <= ref.duration + 1e-12:
        raise ValueError(f"t={t} outside [0, {ref.duration}]")
    A, f = ref.amplitude, ref.frequency
    if ref.kind == "sine":
        w = 2.0 * math.pi * f
        return A * math.sin(w * t), w * A * math.cos(w * t), -w * w * A * math.sin(w * t)
    slope = 4.0 * A * f
    phase = (t * f) % 1.0
    if phase <= 0.25:
        q, v = slope * phase / f, slope
    elif phase <= 0.75:
        q, v = A - slope * (phase - 0.25) / f, -slope
    else:
        q, v = -A + slope * (phase - 0.75) / f, slope
    if phase == 0.0 and t > 0:
        v = slope  # end of a falling-to-rising leg is approached from below
    return q, v, 0.0


@dataclass(frozen=True)
class Scenario:
    case_id: int
    reference: Reference = field(default_factory=Reference)
    plant: PlantParams = field(default_factory=PlantParams)
    afosmc: AfosmcParams = field(default_factory=AfosmcParams)
    compensator: CompensatorParams = field(default_factory=CompensatorParams)
    baseline: BaselineParams = field(default_factory=BaselineParams)
    step: float = 1e-3
    quantization: float = 0.0  # encoder resolution in mm, 0 disables
    velocity_estimate: str = "midpoint"

    def __post_init__(self):
        if self.case_id not in (1, 2, 3):
            raise ValueError(f"case_id must be 1, 2 or 3, got {self.case_id}")
        if not self.step > 0:
            raise ValueError("step must be positive")
        if self.quantization < 0:
            raise ValueError("quantization must be non-negative")
        if self.velocity_estimate not in VELOCITY_ESTIMATES:
            raise ValueError(f"velocity_estimate must be one of {VELOCITY_ESTIMATES}")

    @property
    def n_ticks(self) -> int:
        return math.ceil(self.reference.duration / self.step - 1e-9)


@dataclass
class Trace:
    """Per-tick record; unused signals are NaN."""

    case_id: int
    columns: dict[str, np.ndarray]

    def __len__(self) -> int:
        return len(self.columns["t"])

    def __getitem__(self, name: str) -> np.ndarray:
        return self.columns[name]

    def __getattr__(self, name: str) -> np.ndarray:
        try:
            return self.__dict__["columns"][name]
        except KeyError:
            raise AttributeError(name) from None


@dataclass(frozen=True)
class Metrics:
    mae: float
    rmse: float


def _quantize(x: float, res: float) -> float:
    return res * round(x / res) if res > 0 else x


def run_scenario(sc: Scenario) -> Trace:
    """Simulate the closed loop at one controller tick per plant step.

    Raises
    ------
    SimulationDivergence
        With the tick index and the offending signal.
    """
    n = sc.n_ticks
    dt = sc.step
    nominal = sc.plant.nominal()
    rec = {c: np.full(n, np.nan) for c in TRACE_COLUMNS}

    if sc.case_id == 1:
        smc = AfosmcController(sc.afosmc, nominal, dt)
        comp = Compensator(sc.compensator, nominal, dt)
    else:
        dob = DobState()

    state = PlantState()
    e_prev = q_r_prev = None
    integral_e = 0.0
    mu = 0.0
    for k in range(n):
        t = k * dt
        q_r, q_r_dot, q_r_ddot = reference_at(sc.reference, min(t, sc.reference.duration))
        q = _quantize(state.q, sc.quantization)
        e = q - q_r
        if e_prev is None:
            e_dot, q_dot = 0.0, q_r_dot
        else:
            e_dot = (e - e_prev) / dt
            q_dot = e_dot + (q_r - q_r_prev) / dt
        q_dot_ff = q_dot
        if sc.velocity_estimate == "midpoint" and e_prev is not None:
            # the held input acts over the coming tick: advance the lagged
            # difference quotient to the middle of that tick
            q_dot_ff = q_dot + q_r_ddot * dt
        e_prev, q_r_prev = e, q_r
        integral_e += e * dt

        try:
            if sc.case_id == 1:
                # record the adaptive values this tick's law uses, not the updated ones
                rec["beta_hat"][k], rec["epsilon"][k] = smc.state.beta_hat, smc.state.epsilon
                mu_s = smc(e, e_dot, q, q_dot_ff, q_r_ddot)
                mu_c = comp(e, e_dot)
                mu = total_control(mu_s, mu_c)
                rec["mu_s"][k], rec["mu_c"][k], rec["s"][k] = mu_s, mu_c, smc.state.s
                rec["W1"][k], rec["W2"][k], rec["W3"][k] = comp.state.W_hat
            else:
                dob, d_hat = dob_estimate(dob, q, q_dot, mu, nominal, dt,
                                          sc.baseline.dob_bandwidth)
                if sc.case_id == 2:
                    # PID gains act on the acceleration-normalised input
                    mu = nominal.m_bar / nominal.g_bar * pid_dob_control(
                        e, integral_e, e_dot, d_hat / nominal.m_bar, sc.baseline)
                else:
                    mu = smc_dob_control(e, e_dot, q, q_dot_ff, q_r_ddot, d_hat,
                                         nominal, sc.baseline)
                rec["d_hat"][k] = d_hat
        except ControllerFault as exc:
            raise SimulationDivergence(k, "mu", str(exc)) from exc
        if not math.isfinite(mu):
            raise SimulationDivergence(k, "mu")

        rec["t"][k], rec["q_r"][k], rec["q"][k], rec["e"][k], rec["mu"][k] = t, q_r, q, e, mu
        try:
            state = plant_step(state, mu, sc.plant, dt)
        except PlantDivergence as exc:
            raise SimulationDivergence(k, "q", str(exc)) from exc
        if abs(state.q) > 1e6:
            raise SimulationDivergence(k, "q", f"position {state.q:g} mm out of range")
    return Trace(sc.case_id, rec)


def compute_metrics(trace: Trace | np.ndarray, settle_skip: float = 0.0,
                    t: np.ndarray | None = None) -> Metrics:
    """Maximum absolute and RMS tracking error over ``t >= settle_skip``.

    Accepts a :class:`Trace` or a bare error array (with optional times).
    """
    if isinstance(trace, Trace):
        e, t = trace["e"], trace["t"]
    else:
        e = np.asarray(trace, dtype=float)
        if t is None:
            t = np.zeros(len(e))
    e = e[np.asarray(t) >= settle_skip]
    if e.size == 0:
        raise ValueError("no samples left after settle_skip")
    mae = float(np.max(np.abs(e)))
    rmse = float(math.sqrt(math.fsum(e * e) / e.size))
    # rounding can push a constant signal's rmse an ulp past its mae
    return Metrics(mae, min(rmse, mae))


def chattering_energy(trace: Trace, settle_skip: float = 0.0) -> float:
    """Sum of squared tick-to-tick changes of ``mu`` over ``t >= settle_skip``."""
    mu = trace["mu"][trace["t"] >= settle_skip]
    return float(np.sum(np.diff(mu) ** 2))


def run_many(scenarios: list[Scenario], parallel: bool = True) -> list[Trace]:
    """Run independent scenarios, one thread each; results keep input order."""
    if parallel and len(scenarios) > 1:
        with ThreadPoolExecutor(max_workers=len(scenarios)) as pool:
            return list(pool.map(run_scenario, scenarios))
    return [run_scenario(sc) for sc in scenarios]


def compare_cases(scenarios: list[Scenario], settle_skip: float | None = None,
                  parallel: bool = True) -> list[tuple[int, Metrics]]:
    """Metrics per scenario in input order; scenarios must share a reference."""
    if not scenarios:
        return []
    ref = scenarios[0].reference
    if any(s.reference != ref for s in scenarios):
        raise ValueError("scenarios must share the same reference")
    skip = ref.period if settle_skip is None else settle_skip
    traces = run_many(scenarios, parallel)
    return [(sc.case_id, compute_metrics(tr, skip)) for sc, tr in zip(scenarios, traces)]


@dataclass(frozen=True)
class SweepRow:
    length: float  # seconds
    capacity: int
    deviation: float
    bound: float
    bound_M: float
    seconds_per_tick: float


def sweep_memory(signal, step: float, lengths, order: float) -> list[SweepRow]:
    """Short-memory versus full-memory GL derivative of a recorded signal.

    For each memory length the windowed derivative is evaluated at every
    tick; ``deviation`` is its largest distance from the full-memory value
    and ``bound`` the analytic truncation bound with ``M = max|signal|``.
    Before a window fills the two sums coincide, so those ticks contribute
    zero deviation.
    """
    x = np.asarray(signal, dtype=float)
    if x.size == 0:
        raise ValueError("empty signal")
    M = float(np.max(np.abs(x)))
    full_w = HistoryWindow(x.size, step)
    full = np.empty(x.size)
    for k, v in enumerate(x):
        full_w.append(v)
        full[k] = gl_derivative(full_w, order)
    rows = []
    for L in lengths:
        cap = capacity_for_length(L, step)
        w = HistoryWindow(cap, step)
        short = np.empty(x.size)
        t0 = time.perf_counter()
        for k, v in enumerate(x):
            w.append(v)
            short[k] = gl_derivative(w, order)
        per_tick = (time.perf_counter() - t0) / x.size
        dev = float(np.max(np.abs(short - full)))
        rows.append(SweepRow(float(L), cap, dev, short_memory_error_bound(M, L, order), M,
                             per_tick))
    return rows
