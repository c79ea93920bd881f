"""Grünwald-Letnikov fractional operators with short-memory windows.

All operators work on a :class:`HistoryWindow`, a fixed-capacity buffer of
uniformly spaced samples. A window whose capacity covers the whole history
gives the full-memory GL sum; a shorter one gives the short-memory value.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "FracDomainError",
    "IrregularSamplingError",
    "EmptyWindowError",
    "FracCoeffTable",
    "HistoryWindow",
    "MemoryPlan",
    "gamma",
    "gl_coeffs",
    "gl_derivative",
    "frac_integral",
    "frac_operator",
    "short_memory_error_bound",
    "memory_length_for_accuracy",
    "capacity_for_length",
]


class FracDomainError(ValueError):
    """Argument outside the domain of a fractional-calculus routine."""


class IrregularSamplingError(ValueError):
    """A sample arrived off the window's uniform time grid."""


class EmptyWindowError(ValueError):
    """An operator was applied to a window without samples."""


# Lanczos approximation, g = 7, n = 9.
_LANCZOS_G = 7.0
_LANCZOS_COEFFS = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)


def gamma(x: float) -> float:
    """Gamma function for real arguments.

    Uses the reflection formula below 0.5 and a Lanczos series above it.

    Raises
    ------
    FracDomainError
        If ``x`` is a pole (0, -1, -2, ...) or not finite.
    """
    x = float(x)
    if not math.isfinite(x):
        raise FracDomainError(f"gamma argument must be finite, got {x}")
    if x <= 0.0 and x == math.floor(x):
        raise FracDomainError(f"gamma has a pole at {x}")
    if x < 0.5:
        return math.pi / (math.sin(math.pi * x) * gamma(1.0 - x))
    # exact factorials for small integers
    if x == math.floor(x) and x <= 171:
        return float(math.factorial(int(x) - 1))
    z = x - 1.0
    acc = _LANCZOS_COEFFS[0]
    for i in range(1, len(_LANCZOS_COEFFS)):
        acc += _LANCZOS_COEFFS[i] / (z + i)
    t = z + _LANCZOS_G + 0.5
    # split the power to delay overflow for large x
    half = t ** ((z + 0.5) / 2.0)
    return math.sqrt(2.0 * math.pi) * half * (half * math.exp(-t)) * acc


@dataclass(frozen=True)
class FracCoeffTable:
    """GL binomial weights ``coeffs[j]`` for one order and time step."""

    order: float
    coeffs: np.ndarray
    step: float = 1.0

    def __post_init__(self):
        if not math.isfinite(self.order):
            raise FracDomainError("order must be finite")
        if not (self.step > 0 and math.isfinite(self.step)):
            raise FracDomainError("step must be positive and finite")

    def __len__(self) -> int:
        return len(self.coeffs)


@functools.lru_cache(maxsize=256)
def _coeff_array(order: float, n: int) -> np.ndarray:
    out = np.empty(n + 1)
    out[0] = 1.0
    c = 1.0
    for j in range(1, n + 1):
        c = (1.0 - (1.0 + order) / j) * c
        out[j] = c
    out.setflags(write=False)
    return out


def gl_coeffs(order: float, n: int, step: float = 1.0) -> FracCoeffTable:
    """Return the ``n + 1`` GL coefficients for ``order``.

    Tables are cached per ``(order, n)``; the returned array is read-only.
    """
    order = float(order)
    if not math.isfinite(order):
        raise FracDomainError("order must be finite")
    if n < 0:
        raise FracDomainError("n must be non-negative")
    return FracCoeffTable(order, _coeff_array(order, int(n)), step)


def capacity_for_length(length: float, step: float) -> int:
    """Number of samples ``floor(L / step) + 1`` a memory length spans."""
    if length <= 0 or step <= 0:
        raise FracDomainError("memory length and step must be positive")
    # guard against 0.05 / 0.001 = 49.999... style rounding
    return int(math.floor(length / step + 1e-9)) + 1


class HistoryWindow:
    """Ring buffer of uniformly spaced samples, most recent last.

    The backing store is twice the capacity so that the chronological
    contents are always one contiguous slice.

    Parameters
    ----------
    capacity : int
        Maximum number of samples kept; older samples are evicted.
    step : float
        Sample spacing in seconds.
    origin_time : float
        Time stamp of the first sample.
    """

    def __init__(self, capacity: int, step: float, origin_time: float = 0.0):
        if capacity < 1:
            raise ValueError("capacity must be at least 1")
        if not (step > 0 and math.isfinite(step)):
            raise ValueError("step must be positive and finite")
        self.capacity = int(capacity)
        self.step = float(step)
        self.origin_time = float(origin_time)
        self._buf = np.zeros(2 * self.capacity)
        self._len = 0
        self._count = 0  # samples ever appended

    @classmethod
    def from_samples(cls, samples, step: float, capacity: int | None = None,
                     origin_time: float = 0.0) -> "HistoryWindow":
        samples = np.asarray(samples, dtype=float)
        w = cls(capacity or max(len(samples), 1), step, origin_time)
        for v in samples:
            w.append(v)
        return w

    @classmethod
    def for_memory(cls, length: float, step: float,
                   origin_time: float = 0.0) -> "HistoryWindow":
        """Window sized for a memory length given in seconds."""
        return cls(capacity_for_length(length, step), step, origin_time)

    def __len__(self) -> int:
        return self._len

    @property
    def latest_time(self) -> float:
        """Time stamp of the newest sample."""
        if self._count == 0:
            raise EmptyWindowError("window is empty")
        return self.origin_time + (self._count - 1) * self.step

    @property
    def samples(self) -> np.ndarray:
        """Chronological view of the stored samples (read-only)."""
        end = (self._count - 1) % self.capacity + self.capacity + 1 if self._count else 0
        view = self._buf[end - self._len:end].view()
        view.setflags(write=False)
        return view

    @property
    def latest(self) -> float:
        if self._len == 0:
            raise EmptyWindowError("window is empty")
        return float(self._buf[(self._count - 1) % self.capacity + self.capacity])

    def append(self, value: float, t: float | None = None) -> None:
        """Push a sample, evicting the oldest one when full.

        If ``t`` is given it must lie on the window's grid.
        """
        value = float(value)
        if not math.isfinite(value):
            raise ValueError(f"non-finite sample {value}")
        if t is not None:
            expected = self.origin_time + self._count * self.step
            if abs(t - expected) > 1e-9 * max(1.0, abs(expected)):
                raise IrregularSamplingError(
                    f"sample at t={t} is off the grid (expected {expected})")
        # mirrored write keeps the newest `capacity` samples contiguous
        idx = self._count % self.capacity
        self._buf[idx] = value
        self._buf[idx + self.capacity] = value
        self._len = min(self._len + 1, self.capacity)
        self._count += 1

    def copy(self) -> "HistoryWindow":
        w = HistoryWindow(self.capacity, self.step, self.origin_time)
        w._buf = self._buf.copy()
        w._len, w._count = self._len, self._count
        return w

    def __repr__(self) -> str:
        return (f"HistoryWindow(len={self._len}, capacity={self.capacity}, "
                f"step={self.step})")


def _weighted_sum(window: HistoryWindow, order: float) -> float:
    n = len(window)
    if n == 0:
        raise EmptyWindowError("fractional operator applied to an empty window")
    c = _coeff_array(float(order), window.capacity - 1)[:n]
    return float(np.dot(c, window.samples[::-1]))


def gl_derivative(window: HistoryWindow, order: float) -> float:
    """GL derivative of the newest sample using every sample in the window.

    Orders of one or more use a single coefficient table for the full order.
    """
    if not order > 0:
        raise FracDomainError(f"derivative order must be positive, got {order}")
    return _weighted_sum(window, order) / window.step ** order


def frac_integral(window: HistoryWindow, order: float) -> float:
    """GL approximation of the Riemann-Liouville integral of ``order``."""
    if not order > 0:
        raise FracDomainError(f"integral order must be positive, got {order}")
    return _weighted_sum(window, -order) * window.step ** order


def frac_operator(window: HistoryWindow, order: float) -> float:
    """Derivative for positive orders, identity at zero, integral below."""
    if order > 0:
        return gl_derivative(window, order)
    if order == 0:
        return window.latest
    return frac_integral(window, -order)


@dataclass(frozen=True)
class MemoryPlan:
    """Memory length (seconds) meeting an accuracy target for ``|signal| <= bound_M``."""

    bound_M: float
    accuracy: float
    order: float
    length: float

    def __post_init__(self):
        if not (self.bound_M > 0 and self.accuracy > 0 and self.length > 0):
            raise FracDomainError("bound, accuracy and length must be positive")
        if not 0 < self.order < 1:
            raise FracDomainError("order must lie in (0, 1)")


def _check_unit_order(order: float) -> None:
    if not 0 < order < 1:
        raise FracDomainError(f"order must lie in (0, 1), got {order}")


def short_memory_error_bound(bound_M: float, length_L: float, order: float) -> float:
    """Worst-case truncation error ``M L^-a / |Gamma(1-a)|``."""
    _check_unit_order(order)
    if bound_M < 0 or not length_L > 0:
        raise FracDomainError("need bound_M >= 0 and length_L > 0")
    return bound_M * length_L ** (-order) / abs(gamma(1.0 - order))


def memory_length_for_accuracy(bound_M: float, accuracy: float, order: float) -> MemoryPlan:
    """Shortest memory length whose truncation bound does not exceed ``accuracy``."""
    _check_unit_order(order)
    if not (bound_M > 0 and accuracy > 0):
        raise FracDomainError("bound_M and accuracy must be positive")
    length = (bound_M / (accuracy * abs(gamma(1.0 - order)))) ** (1.0 / order)
    # rounding can leave the bound an ulp above the target
    while short_memory_error_bound(bound_M, length, order) > accuracy:
        length = math.nextafter(length, math.inf)
    return MemoryPlan(bound_M, accuracy, order, length)
