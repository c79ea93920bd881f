"""Second-order ultrasonic-motor model with bounded time-varying uncertainty.

Positions are in mm, velocities in mm/s. The plant obeys

    m(t) q'' + b(t) q' + c(t) q + F(q') = g(t) mu

where every coefficient is a nominal value plus a bounded perturbation and
``F`` is a smoothed Coulomb plus viscous friction term.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

__all__ = [
    "PlantDivergence",
    "Sinusoid",
    "Friction",
    "UncertaintyModel",
    "PlantParams",
    "PlantState",
    "acceleration",
    "step",
    "default_uncertainty",
    "NOMINAL",
]


class PlantDivergence(ArithmeticError):
    """Integration produced a non-finite state."""


@dataclass(frozen=True)
class Sinusoid:
    """``amplitude * sin(2 pi frequency t + phase)``; zero amplitude disables it."""

    amplitude: float = 0.0
    frequency: float = 0.0
    phase: float = 0.0

    def __post_init__(self):
        for name in ("amplitude", "frequency", "phase"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"sinusoid {name} must be finite")
        if self.frequency < 0:
            raise ValueError("sinusoid frequency must be non-negative")

    def __call__(self, t: float) -> float:
        if self.amplitude == 0.0:
            return 0.0
        return self.amplitude * math.sin(2.0 * math.pi * self.frequency * t + self.phase)


@dataclass(frozen=True)
class Friction:
    """Coulomb level (N) with a tanh transition of ``width`` mm/s, plus extra viscous drag."""

    coulomb_level: float = 0.0
    viscous_extra: float = 0.0
    width: float = 1e-3

    def __post_init__(self):
        if not (math.isfinite(self.coulomb_level) and math.isfinite(self.viscous_extra)):
            raise ValueError("friction coefficients must be finite")
        if self.coulomb_level < 0:
            raise ValueError("coulomb_level must be non-negative")
        if not self.width > 0:
            raise ValueError("friction width must be positive")

    def __call__(self, q_dot: float) -> float:
        f = self.viscous_extra * q_dot
        if self.coulomb_level:
            f += self.coulomb_level * math.tanh(q_dot / self.width)
        return f


@dataclass(frozen=True)
class UncertaintyModel:
    dm: Sinusoid = field(default_factory=Sinusoid)
    db: Sinusoid = field(default_factory=Sinusoid)
    dc: Sinusoid = field(default_factory=Sinusoid)
    dg: Sinusoid = field(default_factory=Sinusoid)
    friction: Friction = field(default_factory=Friction)

    @property
    def is_zero(self) -> bool:
        return (all(s.amplitude == 0 for s in (self.dm, self.db, self.dc, self.dg))
                and self.friction.coulomb_level == 0 and self.friction.viscous_extra == 0)


@dataclass(frozen=True)
class PlantParams:
    """Nominal coefficients plus the uncertainty acting on them."""

    m_bar: float = 1.0
    b_bar: float = 248.4
    c_bar: float = 202.0
    g_bar: float = 4940.0
    uncertainty: UncertaintyModel = field(default_factory=UncertaintyModel)

    def __post_init__(self):
        for name in ("m_bar", "b_bar", "c_bar", "g_bar"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")
        if not self.m_bar > 0:
            raise ValueError(f"m_bar must be positive, got {self.m_bar}")
        if self.g_bar == 0:
            raise ValueError("g_bar must be nonzero")
        if abs(self.uncertainty.dm.amplitude) >= self.m_bar:
            raise ValueError("mass perturbation amplitude must stay below m_bar")

    @property
    def h(self) -> float:
        """Inverse nominal mass."""
        return 1.0 / self.m_bar

    def nominal(self) -> "PlantParams":
        """Same nominal coefficients with the uncertainty removed."""
        return replace(self, uncertainty=UncertaintyModel())

    def coefficients(self, t: float) -> tuple[float, float, float, float]:
        """Actual ``(m, b, c, g)`` at time ``t``."""
        u = self.uncertainty
        return (self.m_bar + u.dm(t), self.b_bar + u.db(t),
                self.c_bar + u.dc(t), self.g_bar + u.dg(t))


NOMINAL = PlantParams()


def default_uncertainty(params: PlantParams = NOMINAL) -> UncertaintyModel:
    """10 % sinusoidal drift of b, c and g at 0.5 Hz plus 0.5 N Coulomb friction."""
    return UncertaintyModel(
        db=Sinusoid(0.1 * params.b_bar, 0.5),
        dc=Sinusoid(0.1 * params.c_bar, 0.5),
        dg=Sinusoid(0.1 * params.g_bar, 0.5),
        friction=Friction(coulomb_level=0.5, width=1e-3),
    )


@dataclass(frozen=True)
class PlantState:
    q: float = 0.0
    q_dot: float = 0.0
    t: float = 0.0


def _accel(t: float, q: float, q_dot: float, mu: float, params: PlantParams) -> float:
    m, b, c, g = params.coefficients(t)
    return (g * mu - b * q_dot - c * q - params.uncertainty.friction(q_dot)) / m


def acceleration(state: PlantState, mu: float, params: PlantParams) -> float:
    """Plant acceleration at ``state`` under input ``mu``."""
    return _accel(state.t, state.q, state.q_dot, mu, params)


def step(state: PlantState, mu: float, params: PlantParams, dt: float) -> PlantState:
    """Advance one RK4 step with ``mu`` held constant.

    Raises
    ------
    PlantDivergence
        If the new state is not finite.
    """
    if not dt > 0:
        raise ValueError("dt must be positive")
    t, q, v = state.t, state.q, state.q_dot
    h2 = 0.5 * dt
    k1q, k1v = v, _accel(t, q, v, mu, params)
    k2q, k2v = v + h2 * k1v, _accel(t + h2, q + h2 * k1q, v + h2 * k1v, mu, params)
    k3q, k3v = v + h2 * k2v, _accel(t + h2, q + h2 * k2q, v + h2 * k2v, mu, params)
    k4q, k4v = v + dt * k3v, _accel(t + dt, q + dt * k3q, v + dt * k3v, mu, params)
    q_new = q + dt / 6.0 * (k1q + 2.0 * k2q + 2.0 * k3q + k4q)
    v_new = v + dt / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v)
    if not (math.isfinite(q_new) and math.isfinite(v_new)):
        raise PlantDivergence(f"non-finite plant state at t={t + dt}")
    return PlantState(q_new, v_new, t + dt)
