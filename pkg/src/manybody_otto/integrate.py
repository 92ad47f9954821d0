"""Embedded Dormand-Prince 5(4) integrator with adaptive step control.

Accepted steps are stored together with the right-hand side evaluated at
each step end, which is all a cubic Hermite interpolant needs.
"""

from __future__ import annotations

from typing import Callable, Sequence

import numpy as np

from .errors import IntegrationError

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
# 5th-order weights minus embedded 4th-order weights
_E = (71 / 57600, 0.0, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40)

_SAFETY = 0.9
_MIN_FACTOR = 0.2
_MAX_FACTOR = 5.0


def _initial_step(rhs, t0, y0, f0, direction_span, rtol, atol):
    scale = atol + rtol * np.abs(y0)
    d0 = np.sqrt(np.mean((y0 / scale) ** 2))
    d1 = np.sqrt(np.mean((f0 / scale) ** 2))
    h0 = 1e-6 if (d0 < 1e-5 or d1 < 1e-5) else 0.01 * d0 / d1
    h0 = min(h0, direction_span)
    f1 = rhs(t0 + h0, y0 + h0 * f0)
    d2 = np.sqrt(np.mean(((f1 - f0) / scale) ** 2)) / h0
    if max(d1, d2) <= 1e-15:
        h1 = max(1e-6, h0 * 1e-3)
    else:
        h1 = (0.01 / max(d1, d2)) ** (1 / 5)
    return min(100 * h0, h1, direction_span)


def dormand_prince(
    rhs: Callable[[float, np.ndarray], np.ndarray],
    t_span: tuple[float, float],
    y0: Sequence[float],
    rel_tol: float = 1e-10,
    abs_tol: float = 1e-12,
    t_eval: Sequence[float] | None = None,
    max_steps: int = 1_000_000,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Integrate ``y' = rhs(t, y)`` forward over ``t_span``.

    Every time in ``t_eval`` is hit exactly by a step boundary, so the
    returned grid contains those times. Returns ``(t, y, dy)`` where ``dy``
    holds ``rhs`` at each stored sample.
    """
    t0, t1 = float(t_span[0]), float(t_span[1])
    if not t1 >= t0:
        raise ValueError("t_span must be increasing")
    y = np.asarray(y0, dtype=float).copy()
    f = np.asarray(rhs(t0, y), dtype=float)

    # forced stops closer than a few ulps to a neighbour cannot be stepped to;
    # such times are served by interpolation instead
    stops = []
    prev = t0
    for s in sorted({float(s) for s in (() if t_eval is None else t_eval) if t0 < s < t1}):
        if s - prev > 64 * np.spacing(max(abs(s), 1.0)) and t1 - s > 64 * np.spacing(max(abs(t1), 1.0)):
            stops.append(s)
            prev = s
    stops.append(t1)

    ts, ys, fs = [t0], [y.copy()], [f.copy()]
    if t1 == t0:
        return np.array(ts), np.array(ys), np.array(fs)

    t = t0
    h = _initial_step(rhs, t0, y, f, t1 - t0, rel_tol, abs_tol)
    stop_index = 0
    steps = 0
    while t < t1:
        if steps >= max_steps:
            raise IntegrationError("maximum number of steps exceeded", t)
        target = stops[stop_index]
        hits_stop = t + h >= target
        if hits_stop:
            h = target - t
        if h <= 16 * np.spacing(max(abs(t), 1.0)):
            raise IntegrationError("step size underflow", t)

        k = [f]
        for i in range(1, 7):
            incr = _A[i][0] * k[0]
            for j in range(1, i):
                if _A[i][j] != 0.0:
                    incr = incr + _A[i][j] * k[j]
            y_stage = y + h * incr
            k.append(np.asarray(rhs(t + _C[i] * h, y_stage), dtype=float))
        y_new = y_stage  # last stage is evaluated at the 5th-order solution
        err = h * sum(_E[i] * k[i] for i in range(7) if _E[i] != 0.0)
        scale = abs_tol + rel_tol * np.maximum(np.abs(y), np.abs(y_new))
        err_norm = float(np.sqrt(np.mean((err / scale) ** 2)))
        steps += 1

        if err_norm <= 1.0:
            t = target if hits_stop else t + h
            y = y_new
            f = k[6]
            ts.append(t)
            ys.append(y.copy())
            fs.append(f.copy())
            if hits_stop:
                stop_index += 1
            factor = _MAX_FACTOR if err_norm == 0.0 else min(
                _MAX_FACTOR, _SAFETY * err_norm ** (-1 / 5)
            )
            h = h * factor
        else:
            h = h * max(_MIN_FACTOR, _SAFETY * err_norm ** (-1 / 5))

    return np.array(ts), np.array(ys), np.array(fs)


def hermite_interpolate(t_grid, values, derivs, t):
    """Cubic Hermite interpolation of sampled values with known derivatives."""
    t_grid = np.asarray(t_grid)
    i = int(np.searchsorted(t_grid, t, side="right")) - 1
    i = min(max(i, 0), len(t_grid) - 2)
    t_a, t_b = t_grid[i], t_grid[i + 1]
    h = t_b - t_a
    s = (t - t_a) / h
    h00 = (1 + 2 * s) * (1 - s) ** 2
    h10 = s * (1 - s) ** 2
    h01 = s * s * (3 - 2 * s)
    h11 = s * s * (s - 1)
    return (
        h00 * values[i]
        + h10 * h * derivs[i]
        + h01 * values[i + 1]
        + h11 * h * derivs[i + 1]
    )
