"""Fourth-order Runge-Kutta integration of the fluid limit y' = lambda_x(y, t)."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from mallows_lab.global_limit.curves import lambda_rate


@dataclass(frozen=True)
class OdeSolution:
    times: np.ndarray
    values: np.ndarray

    def at(self, t: float):
        """Linear interpolation between steps (first axis is time)."""
        times, values = self.times, self.values
        if times[-1] < times[0]:
            times, values = times[::-1], values[::-1]
        if len(times) == 1:
            return values[0]
        idx = int(np.clip(np.searchsorted(times, t), 1, len(times) - 1))
        t0, t1 = times[idx - 1], times[idx]
        weight = (t - t0) / (t1 - t0)
        return values[idx - 1] + weight * (values[idx] - values[idx - 1])


def ode_solve(x, y0, t_span: tuple[float, float], step: float) -> OdeSolution:
    """Integrate from ``t_span[0]`` to ``t_span[1]``; ``x`` and ``y0`` may be arrays.

    The step is shrunk so the span is covered by a whole number of steps.
    Values are clipped to the invariant region [0, x].
    """
    if not step > 0:
        raise ValueError(f"ode_solve needs step > 0, got {step}.")
    x = np.asarray(x, dtype=float)
    y = np.asarray(y0, dtype=float) + np.zeros_like(x)
    if np.any(y < 0) or np.any(y > x):
        raise ValueError("ode_solve needs 0 <= y0 <= x.")
    t0, t1 = (float(v) for v in t_span)
    count = max(1, math.ceil(abs(t1 - t0) / step - 1e-9)) if t1 != t0 else 0
    h = (t1 - t0) / count if count else 0.0
    times = t0 + h * np.arange(count + 1)
    values = np.empty((count + 1, *y.shape))
    values[0] = y
    for k in range(count):
        t = times[k]
        k1 = lambda_rate(x, y, t)
        k2 = lambda_rate(x, np.clip(y + h * k1 / 2, 0.0, x), t + h / 2)
        k3 = lambda_rate(x, np.clip(y + h * k2 / 2, 0.0, x), t + h / 2)
        k4 = lambda_rate(x, np.clip(y + h * k3, 0.0, x), t + h)
        y = np.clip(y + h * (k1 + 2 * k2 + 2 * k3 + k4) / 6, 0.0, x)
        values[k + 1] = y
    if count:
        times[-1] = t1
    return OdeSolution(times=times, values=values)
