"""Control laws: adaptive fractional-order SMC, HJB critic compensator, baselines.

Every law here works in the plant's own input units. Adaptive quantities are
advanced by forward Euler at the controller tick, except the decaying gain
``epsilon`` which has a closed-form solution.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .fraccalc import HistoryWindow, capacity_for_length, frac_integral, gl_derivative
from .plant import PlantParams

__all__ = [
    "ControllerFault",
    "AfosmcParams",
    "HIGH_GAIN_AFOSMC",
    "AfosmcState",
    "CompensatorParams",
    "CompensatorState",
    "PidGains",
    "SmcGains",
    "BaselineParams",
    "DobState",
    "sgn",
    "sat",
    "sliding_surface",
    "pi_bound",
    "afosmc_control",
    "update_beta",
    "update_epsilon",
    "compensator_io",
    "activation",
    "compensator_control",
    "hamiltonian_estimate",
    "update_weights",
    "total_control",
    "dob_estimate",
    "pid_dob_control",
    "smc_dob_control",
    "AfosmcController",
    "Compensator",
]


class ControllerFault(ArithmeticError):
    """A control law produced a non-finite output."""


def sgn(x: float) -> float:
    """Signum with ``sgn(0) == 0``."""
    return (x > 0) - (x < 0)


def sat(x: float) -> float:
    return x if -1.0 <= x <= 1.0 else float(sgn(x))


# ---------------------------------------------------------------------------
# AFOSMC

@dataclass(frozen=True)
class AfosmcParams:
    """AFOSMC gains. ``memory_L`` is in seconds.

    The defaults keep the per-tick loop gain of a 1 kHz loop below one.
    :data:`HIGH_GAIN_AFOSMC` (``lam=1, k_p=6000, k_s=5000``) diverges at
    that rate within a few ticks and is kept for comparison.
    """

    lam: float = 3000.0
    alpha: float = 0.5
    k_p: float = 1000.0
    k_s: float = 1e-3
    l_bar: float = 0.01
    k1: float = 0.1
    epsilon0: float = 1.0
    beta0: float = 0.1
    memory_L: float = 0.05  # seconds
    epsilon_floor: float = 1e-6

    def __post_init__(self):
        for name in ("lam", "k_p", "k_s", "l_bar", "k1", "epsilon0", "beta0", "memory_L"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0):
                raise ValueError(f"{name} must be positive and finite, got {v}")
        if not 0 < self.alpha < 1:
            raise ValueError(f"alpha must lie in (0, 1), got {self.alpha}")
        if not (math.isfinite(self.epsilon_floor) and self.epsilon_floor >= 0):
            raise ValueError("epsilon_floor must be non-negative")


HIGH_GAIN_AFOSMC = AfosmcParams(lam=1.0, k_p=6000.0, k_s=5000.0)


@dataclass
class AfosmcState:
    """Sliding value, adaptive estimates and the four operator windows."""

    s: float
    beta_hat: float
    epsilon: float
    e_window: HistoryWindow
    e_dot_window: HistoryWindow
    s_window: HistoryWindow
    robust_window: HistoryWindow  # s * Pi^2 / epsilon

    @classmethod
    def initial(cls, params: AfosmcParams, step: float, t0: float = 0.0) -> "AfosmcState":
        cap = capacity_for_length(params.memory_L, step)
        return cls(0.0, params.beta0, params.epsilon0,
                   *(HistoryWindow(cap, step, t0) for _ in range(4)))


def sliding_surface(e_window: HistoryWindow, params: AfosmcParams) -> float:
    """``lam * e + D^(1+alpha) e`` over the short-memory window."""
    return params.lam * e_window.latest + gl_derivative(e_window, 1.0 + params.alpha)


def pi_bound(beta_hat: float, q: float) -> float:
    """Reduced uncertainty bound ``beta_hat * (|q| + 1)^2``."""
    return beta_hat * (abs(q) + 1.0) ** 2


def afosmc_control(state: AfosmcState, plant_nominal: PlantParams, q: float,
                   q_dot: float, q_ddot_ref: float, params: AfosmcParams) -> float:
    """Sliding-mode part ``mu_s`` of the control input.

    The windows in ``state`` must already hold the current samples of
    ``e_dot``, ``s`` and ``s * Pi^2 / epsilon``.
    """
    p = plant_nominal
    a = params.alpha
    inner = (p.b_bar * q_dot + p.c_bar * q + p.m_bar * q_ddot_ref
             - params.lam * p.m_bar * frac_integral(state.e_dot_window, a)
             - params.k_p * p.m_bar * frac_integral(state.s_window, a)
             - params.k_s * p.m_bar * sgn(state.s)
             - p.m_bar * frac_integral(state.robust_window, a))
    mu = inner / p.g_bar
    if not math.isfinite(mu):
        raise ControllerFault(f"non-finite AFOSMC output (s={state.s})")
    return mu


def update_beta(state: AfosmcState, q: float, dt: float, params: AfosmcParams) -> AfosmcState:
    if not dt > 0:
        raise ValueError("dt must be positive")
    growth = dt * params.k1 * abs(state.s) * (abs(q) + 1.0) ** 2
    return replace(state, beta_hat=state.beta_hat + growth)


def update_epsilon(state: AfosmcState, dt: float, params: AfosmcParams) -> AfosmcState:
    if not dt > 0:
        raise ValueError("dt must be positive")
    eps = max(state.epsilon * math.exp(-params.l_bar * dt), params.epsilon_floor)
    return replace(state, epsilon=eps)


class AfosmcController:
    """Runs the AFOSMC law tick by tick, owning its state.

    ``epsilon`` is evaluated from elapsed time rather than by repeated
    multiplication so that it stays on the exact exponential.
    """

    def __init__(self, params: AfosmcParams, plant_nominal: PlantParams, step: float,
                 t0: float = 0.0):
        self.params = params
        self.plant = plant_nominal
        self.step_size = step
        self.t0 = t0
        self.state = AfosmcState.initial(params, step, t0)
        self._ticks = 0

    def __call__(self, e: float, e_dot: float, q: float, q_dot: float,
                 q_ddot_ref: float) -> float:
        st, p = self.state, self.params
        st.e_window.append(e)
        st.e_dot_window.append(e_dot)
        st.s = sliding_surface(st.e_window, p)
        st.s_window.append(st.s)
        st.robust_window.append(st.s * pi_bound(st.beta_hat, q) ** 2 / st.epsilon)
        mu_s = afosmc_control(st, self.plant, q, q_dot, q_ddot_ref, p)
        # adapt for the next tick
        self.state = st = update_beta(st, q, self.step_size, p)
        self._ticks += 1
        eps = p.epsilon0 * math.exp(-p.l_bar * self._ticks * self.step_size)
        st.epsilon = max(eps, p.epsilon_floor)
        return mu_s


# ---------------------------------------------------------------------------
# HJB critic compensator

@dataclass(frozen=True)
class CompensatorParams:
    lambda1: float = 10.0
    lambda2: float = 1.0
    lambda3: float = 0.1
    Q: np.ndarray = field(default_factory=lambda: np.eye(3))
    R: float = 494.0
    kappa: float = 1e-5
    n_c: int = 3

    def __post_init__(self):
        for name in ("lambda1", "lambda2", "lambda3", "R", "kappa"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0):
                raise ValueError(f"{name} must be positive and finite, got {v}")
        Q = np.asarray(self.Q, dtype=float)
        if Q.shape != (3, 3):
            raise ValueError("Q must be 3x3")
        if not np.allclose(Q, Q.T, rtol=0, atol=0):
            raise ValueError("Q must be symmetric")
        if np.linalg.eigvalsh(Q).min() <= 0:
            raise ValueError("Q must be positive definite")
        if self.n_c != 3:
            raise ValueError("the critic uses one sigmoid per input, n_c must be 3")
        object.__setattr__(self, "Q", Q)

    def __eq__(self, other):
        if not isinstance(other, CompensatorParams):
            return NotImplemented
        return (self.lambda1, self.lambda2, self.lambda3, self.R, self.kappa, self.n_c) == (
            other.lambda1, other.lambda2, other.lambda3, other.R, other.kappa, other.n_c
        ) and np.array_equal(self.Q, other.Q)


@dataclass
class CompensatorState:
    I: np.ndarray
    W_hat: np.ndarray
    integral_e: float = 0.0

    @classmethod
    def initial(cls, params: CompensatorParams) -> "CompensatorState":
        return cls(np.zeros(3), np.zeros(params.n_c), 0.0)


def compensator_io(e: float, e_dot: float, integral_e: float,
                   params: CompensatorParams) -> np.ndarray:
    return np.array([params.lambda1 * integral_e, params.lambda2 * e, params.lambda3 * e_dot])


def activation(I) -> tuple[np.ndarray, np.ndarray]:
    """Sigmoid features and their (diagonal) Jacobian."""
    I = np.asarray(I, dtype=float)
    # tanh form avoids overflow in exp for large |I|
    sigma = 0.5 * (1.0 + np.tanh(0.5 * I))
    return sigma, np.diag(sigma * (1.0 - sigma))


def compensator_control(state: CompensatorState, g_c3: float,
                        params: CompensatorParams) -> float:
    """Approximate optimal compensation ``-R^-1 g_c^T grad(sigma)^T W / 2``."""
    _, grad = activation(state.I)
    return -0.5 / params.R * g_c3 * float(grad.T[2] @ state.W_hat)


def hamiltonian_estimate(I, I_dot, mu_c: float, W_hat, params: CompensatorParams) -> float:
    I = np.asarray(I, dtype=float)
    I_dot = np.asarray(I_dot, dtype=float)
    _, grad = activation(I)
    grad_J = grad.T @ np.asarray(W_hat, dtype=float)
    return float(I @ params.Q @ I + params.R * mu_c * mu_c + grad_J @ I_dot)


def update_weights(state: CompensatorState, H_hat: float, grad_sigma, I_dot, dt: float,
                   params: CompensatorParams) -> CompensatorState:
    """One gradient-descent step on ``kappa * H^2 / 2``."""
    if not dt > 0:
        raise ValueError("dt must be positive")
    regressor = np.asarray(grad_sigma) @ np.asarray(I_dot, dtype=float)
    return replace(state, W_hat=state.W_hat - dt * params.kappa * H_hat * regressor)


def total_control(mu_s: float, mu_c: float) -> float:
    return mu_s + mu_c


class Compensator:
    """Critic-network compensator driven by the tracking error."""

    def __init__(self, params: CompensatorParams, plant_nominal: PlantParams, step: float):
        self.params = params
        self.step_size = step
        self.g_c3 = params.lambda3 * plant_nominal.g_bar * plant_nominal.h
        self.state = CompensatorState.initial(params)
        self._I_prev: np.ndarray | None = None
        self.H_hat = 0.0

    def __call__(self, e: float, e_dot: float) -> float:
        st, p, dt = self.state, self.params, self.step_size
        st.integral_e += e * dt
        st.I = compensator_io(e, e_dot, st.integral_e, p)
        _, grad = activation(st.I)
        mu_c = compensator_control(st, self.g_c3, p)
        I_dot = np.zeros(3) if self._I_prev is None else (st.I - self._I_prev) / dt
        self._I_prev = st.I.copy()
        self.H_hat = hamiltonian_estimate(st.I, I_dot, mu_c, st.W_hat, p)
        self.state = update_weights(st, self.H_hat, grad, I_dot, dt, p)
        if not math.isfinite(mu_c):
            raise ControllerFault("non-finite compensator output")
        return mu_c


# ---------------------------------------------------------------------------
# Baselines with a disturbance observer

@dataclass(frozen=True)
class PidGains:
    k_x1: float = 37.0
    k_x2: float = 0.1
    k_x3: float = 160.0


@dataclass(frozen=True)
class SmcGains:
    lambda_y: float = 50.0
    k_y1: float = 500.0
    k_y2: float = 300.0
    sigma_y: float = 0.1


@dataclass(frozen=True)
class BaselineParams:
    pid: PidGains = field(default_factory=PidGains)
    smc: SmcGains = field(default_factory=SmcGains)
    dob_bandwidth: float = 500.0

    def __post_init__(self):
        values = [*vars(self.pid).values(), *vars(self.smc).values(), self.dob_bandwidth]
        if not all(math.isfinite(v) and v > 0 for v in values):
            raise ValueError("baseline gains and DOB bandwidth must be positive")


@dataclass
class DobState:
    """Auxiliary filter state ``z = d_hat - K m q_dot`` and the last inputs."""

    z: float = 0.0
    d_hat: float = 0.0
    q_dot_prev: float | None = None
    mu_prev: float = 0.0


def dob_estimate(state: DobState, q: float, q_dot: float, mu: float,
                 plant_nominal: PlantParams, dt: float,
                 bandwidth: float) -> tuple[DobState, float]:
    """First-order nominal-model disturbance observer.

    Estimates ``d = m q'' + b q' + c q - g mu`` through a low-pass filter of
    the given bandwidth (rad/s). The filter runs on ``z = d_hat - K m q'``
    so acceleration is never formed explicitly; ``K = (1 - a) / dt`` with
    ``a = exp(-bandwidth dt)`` makes it the exact discretisation of the
    first-order lag applied to the backward-difference residual.

    ``mu`` is the input applied over the tick that ends at this sample.
    """
    if not (dt > 0 and bandwidth > 0):
        raise ValueError("dt and bandwidth must be positive")
    p = plant_nominal
    a = math.exp(-bandwidth * dt)
    K = (1.0 - a) / dt
    if state.q_dot_prev is None:
        # no history yet: start from rest at the current velocity
        z = -K * p.m_bar * q_dot
        new = DobState(z, 0.0, q_dot, mu)
        return new, 0.0
    w = p.b_bar * q_dot + p.c_bar * q - p.g_bar * mu
    z = a * state.z + (1.0 - a) * (w - K * p.m_bar * state.q_dot_prev)
    d_hat = z + K * p.m_bar * q_dot
    return DobState(z, d_hat, q_dot, mu), d_hat


def pid_dob_control(e: float, integral_e: float, e_dot: float, d_hat: float,
                    params: BaselineParams) -> float:
    g = params.pid
    return -g.k_x1 * e - g.k_x2 * integral_e - g.k_x3 * e_dot - d_hat


def smc_dob_control(e: float, e_dot: float, q: float, q_dot: float, q_ddot_ref: float,
                    d_hat: float, plant_nominal: PlantParams, params: BaselineParams) -> float:
    g, p = params.smc, plant_nominal
    s_y = e_dot + g.lambda_y * e
    inner = (p.b_bar / p.m_bar * q_dot + p.c_bar / p.m_bar * q + q_ddot_ref
             - g.lambda_y * e_dot - g.k_y1 * s_y - g.k_y2 * sat(s_y / g.sigma_y)
             - d_hat / p.m_bar)
    return p.m_bar / p.g_bar * inner
