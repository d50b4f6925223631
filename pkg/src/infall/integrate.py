"""Adaptive Dormand-Prince 5(4) integrator.

Small and explicit on purpose: the infall solver needs to land exactly on
requested output abscissae, stop on a user event after any accepted step and
report step statistics, nothing more.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

# Butcher tableau (FSAL, 5th-order propagation)
_C = (0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0)
_A = (
    (),
    (1 / 5,),
    (3 / 40, 9 / 40),
    (44 / 45, -56 / 15, 32 / 9),
    (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
    (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
    (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84),
)
_B = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
_B_LOW = np.array([5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40])
_E = _B - _B_LOW

SAFETY = 0.9
MIN_FACTOR = 0.2
MAX_FACTOR = 5.0


@dataclass
class IntegrationResult:
    t: np.ndarray
    y: np.ndarray
    steps: int = 0
    rejected: int = 0
    evaluations: int = 0
    status: str = "complete"
    t_final: float = math.nan
    y_final: np.ndarray = field(default_factory=lambda: np.empty(0))
    message: str = ""


def _error_norm(err, y0, y1, rtol, atol):
    scale = atol + rtol * np.maximum(np.abs(y0), np.abs(y1))
    return float(np.sqrt(np.mean((err / scale) ** 2)))


def dopri45(
    f: Callable[[float, np.ndarray], np.ndarray],
    t0: float,
    y0: Sequence[float],
    t_out: Sequence[float],
    rtol: float = 1e-9,
    atol: float = 1e-12,
    t_end: float | None = None,
    stop: Callable[[float, np.ndarray], str | None] | None = None,
    h0: float | None = None,
    max_steps: int = 1_000_000,
) -> IntegrationResult:
    """Integrate ``y' = f(t, y)`` forward from ``t0``.

    The solution is reported at every ``t_out`` (ascending, ``>= t0``); steps
    are clipped so that each output abscissa is hit exactly.  Integration
    continues to ``t_end`` (default ``t_out[-1]``) unless ``stop`` returns a
    non-empty reason after an accepted step.  A step size below the spacing of
    floating-point numbers at ``t`` ends the run with status ``"underflow"``.
    """
    t_out = np.asarray(t_out, dtype=float)
    if t_out.size and (np.any(np.diff(t_out) < 0) or t_out[0] < t0):
        raise ValueError("t_out must be ascending and start at or after t0")
    t_end = float(t_out[-1]) if t_end is None else float(t_end)
    if t_out.size and t_end < t_out[-1]:
        raise ValueError("t_end must not precede the last output point")

    y = np.atleast_1d(np.asarray(y0, dtype=float)).copy()
    t = float(t0)
    ts: list[float] = []
    ys: list[np.ndarray] = []
    k = 0
    while k < t_out.size and t_out[k] == t:
        ts.append(t)
        ys.append(y.copy())
        k += 1

    span = t_end - t
    h = h0 if h0 is not None else max(span * 1e-6, 1e-300)
    fy = np.atleast_1d(f(t, y))
    res = IntegrationResult(t=np.empty(0), y=np.empty((0, y.size)))
    res.evaluations = 1
    status, message = "complete", ""

    while t < t_end:
        if res.steps + res.rejected >= max_steps:
            status, message = "max_steps", f"step budget {max_steps} exhausted at t = {t!r}"
            break
        target = t_out[k] if k < t_out.size else t_end
        hit = t + h >= target
        h_try = target - t if hit else h
        tiny = abs(t) * 4 * np.finfo(float).eps
        if hit and h_try <= tiny:
            # output point within rounding of t
            t = target
            while k < t_out.size and t_out[k] <= t:
                ts.append(t)
                ys.append(y.copy())
                k += 1
            continue
        if h_try <= tiny or h_try <= 0.0:
            status, message = "underflow", f"step size underflow at t = {t!r}"
            break

        stages = [fy]
        for i in range(1, 7):
            yi = y + h_try * sum(a * s for a, s in zip(_A[i], stages))
            stages.append(np.atleast_1d(f(t + _C[i] * h_try, yi)))
        res.evaluations += 6
        y_new = y + h_try * sum(b * s for b, s in zip(_B, stages) if b != 0.0)
        err = h_try * sum(e * s for e, s in zip(_E, stages) if e != 0.0)
        en = _error_norm(err, y, y_new, rtol, atol)
        if not np.all(np.isfinite(y_new)):
            en = math.inf

        if en <= 1.0:
            t = target if hit else t + h_try
            y = y_new
            fy = stages[6]
            res.steps += 1
            while k < t_out.size and t_out[k] <= t:
                ts.append(t)
                ys.append(y.copy())
                k += 1
            factor = MAX_FACTOR if en == 0.0 else min(MAX_FACTOR, SAFETY * en ** -0.2)
            # a step clipped to an output point says little about the scale
            h = max(h, h_try * factor) if hit else h_try * factor
            if stop is not None:
                reason = stop(t, y)
                if reason:
                    status, message = "stopped", reason
                    break
        else:
            res.rejected += 1
            factor = 0.0 if not math.isfinite(en) else SAFETY * en ** -0.2
            h = h_try * max(MIN_FACTOR, factor)

    res.t = np.array(ts)
    res.y = np.array(ys).reshape(len(ts), y.size)
    res.status = status
    res.message = message
    res.t_final = t
    res.y_final = y
    return res
