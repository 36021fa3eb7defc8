"""Adaptive Dormand-Prince 5(4) integrator with dense output.

The stepper works on plain Python floats because the systems solved here are
tiny (2 or 3 components) and numpy's per-call overhead would dominate. Dense
output coefficients are assembled with numpy once integration finishes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import NonFiniteField, StepSizeUnderflow

__all__ = ["OdeProblem", "Trajectory", "integrate", "solve"]

Field = Callable[[float, Sequence[float]], Sequence[float]]

# Dormand & Prince (1980) tableau.
C2, C3, C4, C5 = 1 / 5, 3 / 10, 4 / 5, 8 / 9
A21 = 1 / 5
A31, A32 = 3 / 40, 9 / 40
A41, A42, A43 = 44 / 45, -56 / 15, 32 / 9
A51, A52, A53, A54 = 19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729
A61, A62, A63, A64, A65 = 9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656
B1, B3, B4, B5, B6 = 35 / 384, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84
# error weights: 5th-order minus embedded 4th-order solution
E1 = 35 / 384 - 5179 / 57600
E3 = 500 / 1113 - 7571 / 16695
E4 = 125 / 192 - 393 / 640
E5 = -2187 / 6784 + 92097 / 339200
E6 = 11 / 84 - 187 / 2100
E7 = -1 / 40

# Shampine's 4th-order continuous extension: y(x0 + t*h) = y0 + h * K^T P [t, t^2, t^3, t^4].
DENSE_P = np.array(
    [
        [1.0, -8048581381 / 2820520608, 8663915743 / 2820520608, -12715105075 / 11282082432],
        [0.0, 0.0, 0.0, 0.0],
        [0.0, 131558114200 / 32700410799, -68118460800 / 10900136933, 87487479700 / 32700410799],
        [0.0, -1754552775 / 470086768, 14199869525 / 1410260304, -10690763975 / 1880347072],
        [0.0, 127303824393 / 49829197408, -318862633887 / 49829197408, 701980252875 / 199316789632],
        [0.0, -282668133 / 205662961, 2019193451 / 616988883, -1453857185 / 822651844],
        [0.0, 40617522 / 29380423, -110615467 / 29380423, 69997945 / 29380423],
    ]
)

SAFETY = 0.9
MIN_FACTOR = 0.2
MAX_FACTOR = 10.0


@dataclass(frozen=True)
class OdeProblem:
    field: Field
    x_start: float
    x_end: float
    initial_state: tuple[float, ...]
    rel_tol: float = 1e-10
    abs_tol: float = 1e-12
    max_steps: int = 200_000

    def __post_init__(self):
        object.__setattr__(self, "initial_state", tuple(float(v) for v in self.initial_state))
        if not self.initial_state:
            raise ValueError("initial_state must be non-empty")
        for name in ("rel_tol", "abs_tol"):
            tol = getattr(self, name)
            if not (0.0 < tol <= 1e-2):
                raise ValueError(f"{name} must lie in (0, 1e-2], got {tol}")
        if self.x_start == self.x_end:
            raise ValueError("x_start and x_end coincide")

    @property
    def dimension(self) -> int:
        return len(self.initial_state)


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Accepted nodes of an integration run plus the piecewise-quartic interpolant.

    ``x`` is strictly monotone in the integration direction; ``states[i]`` is
    the solution at ``x[i]``. Calling the trajectory evaluates the dense
    output anywhere between the first and last node.
    """

    x: np.ndarray
    states: np.ndarray
    steps: np.ndarray
    coeffs: np.ndarray  # (n_steps, dim, 4)
    n_rejected: int = 0
    n_evals: int = 0
    _key: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "_key", self.direction * self.x)

    @property
    def direction(self) -> float:
        return 1.0 if self.x[-1] > self.x[0] else -1.0

    @property
    def x_start(self) -> float:
        return float(self.x[0])

    @property
    def x_end(self) -> float:
        return float(self.x[-1])

    @property
    def final_state(self) -> np.ndarray:
        return self.states[-1]

    def _locate(self, xq: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        key = self.direction * xq
        span = abs(self.x[-1] - self.x[0])
        slack = 1e-12 * max(span, 1.0)
        if np.any(key < self._key[0] - slack) or np.any(key > self._key[-1] + slack):
            lo, hi = sorted((self.x_start, self.x_end))
            raise ValueError(f"dense output requested outside [{lo}, {hi}]")
        idx = np.searchsorted(self._key, key, side="right") - 1
        idx = np.clip(idx, 0, len(self.steps) - 1)
        theta = (xq - self.x[idx]) / self.steps[idx]
        return idx, theta

    def __call__(self, x):
        """State at ``x`` (scalar -> shape (dim,), array -> shape (len, dim))."""
        xq = np.asarray(x, dtype=float)
        scalar = xq.ndim == 0
        xq = np.atleast_1d(xq)
        idx, t = self._locate(xq)
        powers = np.stack([t, t * t, t**3, t**4], axis=-1)
        incr = np.einsum("ndj,nj->nd", self.coeffs[idx], powers)
        out = self.states[idx] + self.steps[idx, None] * incr
        return out[0] if scalar else out

    def derivative(self, x):
        """Derivative of the dense interpolant with respect to x."""
        xq = np.asarray(x, dtype=float)
        scalar = xq.ndim == 0
        xq = np.atleast_1d(xq)
        idx, t = self._locate(xq)
        powers = np.stack([np.ones_like(t), 2 * t, 3 * t * t, 4 * t**3], axis=-1)
        out = np.einsum("ndj,nj->nd", self.coeffs[idx], powers)
        return out[0] if scalar else out


def _norm(vals, scale) -> float:
    return max(abs(v) / s for v, s in zip(vals, scale))


def _initial_step(f, x0, y0, f0, direction, rtol, atol, span) -> float:
    scale = [atol + rtol * abs(v) for v in y0]
    d0 = _norm(y0, scale)
    d1 = _norm(f0, scale)
    h0 = 1e-6 if d0 < 1e-5 or d1 < 1e-5 else 0.01 * d0 / d1
    h0 = min(h0, span)
    y1 = [v + direction * h0 * k for v, k in zip(y0, f0)]
    f1 = f(x0 + direction * h0, y1)
    if not all(math.isfinite(v) for v in f1):
        return h0 * 1e-3
    d2 = _norm([a - b for a, b in zip(f1, f0)], scale) / h0
    if d1 <= 1e-15 and d2 <= 1e-15:
        h1 = max(1e-6, h0 * 1e-3)
    else:
        h1 = (0.01 / max(d1, d2)) ** 0.2
    return min(100 * h0, h1, span)


def integrate(problem: OdeProblem) -> Trajectory:
    f = problem.field
    x = float(problem.x_start)
    x_end = float(problem.x_end)
    rtol, atol = problem.rel_tol, problem.abs_tol
    direction = 1.0 if x_end > x else -1.0
    span = abs(x_end - x)
    h_floor = 1e-14 * span
    y = list(problem.initial_state)
    dim = len(y)
    rng = range(dim)

    k1 = list(f(x, y))
    n_evals = 1
    if len(k1) != dim:
        raise ValueError(f"field returned {len(k1)} components, expected {dim}")
    if not all(math.isfinite(v) for v in k1):
        raise NonFiniteField(f"field is not finite at the initial point x={x}", x)

    h_abs = _initial_step(f, x, y, k1, direction, rtol, atol, span)
    n_evals += 1

    xs = [x]
    ys = [tuple(y)]
    hs: list[float] = []
    ks: list[tuple] = []
    n_rejected = 0

    while direction * (x_end - x) > 0:
        if len(hs) >= problem.max_steps:
            raise StepSizeUnderflow(f"exceeded {problem.max_steps} steps near x={x}", x)
        if h_abs < h_floor:
            raise StepSizeUnderflow(f"step size fell below {h_floor:.3g} at x={x}", x)
        h = direction * h_abs
        last = direction * (x + h - x_end) >= 0
        if last:
            h = x_end - x

        y2 = [y[i] + h * A21 * k1[i] for i in rng]
        k2 = f(x + C2 * h, y2)
        y3 = [y[i] + h * (A31 * k1[i] + A32 * k2[i]) for i in rng]
        k3 = f(x + C3 * h, y3)
        y4 = [y[i] + h * (A41 * k1[i] + A42 * k2[i] + A43 * k3[i]) for i in rng]
        k4 = f(x + C4 * h, y4)
        y5 = [y[i] + h * (A51 * k1[i] + A52 * k2[i] + A53 * k3[i] + A54 * k4[i]) for i in rng]
        k5 = f(x + C5 * h, y5)
        y6 = [
            y[i] + h * (A61 * k1[i] + A62 * k2[i] + A63 * k3[i] + A64 * k4[i] + A65 * k5[i])
            for i in rng
        ]
        k6 = f(x + h, y6)
        y_new = [
            y[i] + h * (B1 * k1[i] + B3 * k3[i] + B4 * k4[i] + B5 * k5[i] + B6 * k6[i])
            for i in rng
        ]
        x_new = x_end if last else x + h
        k7 = f(x_new, y_new)
        n_evals += 6

        err = 0.0
        for i in rng:
            e = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i])
            sc = atol + rtol * max(abs(y[i]), abs(y_new[i]))
            r = abs(e) / sc
            if not r <= err:  # also catches NaN
                err = r
        if not math.isfinite(err):
            n_rejected += 1
            h_abs *= 0.25
            if h_abs < h_floor:
                raise NonFiniteField(f"field produced non-finite values near x={x}", x)
            continue

        if err <= 1.0:
            hs.append(h)
            ks.append((k1, k2, k3, k4, k5, k6, k7))
            x = x_new
            y = y_new
            k1 = list(k7)
            xs.append(x)
            ys.append(tuple(y))
            factor = MAX_FACTOR if err == 0.0 else min(MAX_FACTOR, SAFETY * err**-0.2)
            h_abs = abs(h) * factor
        else:
            n_rejected += 1
            h_abs = abs(h) * max(MIN_FACTOR, SAFETY * err**-0.2)

    K = np.asarray(ks, dtype=float)  # (n, 7, dim)
    coeffs = np.einsum("nkd,kj->ndj", K, DENSE_P)
    return Trajectory(
        x=np.asarray(xs),
        states=np.asarray(ys),
        steps=np.asarray(hs),
        coeffs=coeffs,
        n_rejected=n_rejected,
        n_evals=n_evals,
    )


def solve(
    field: Field,
    x_start: float,
    x_end: float,
    initial_state: Sequence[float],
    rel_tol: float = 1e-10,
    abs_tol: float = 1e-12,
) -> Trajectory:
    """Shorthand for ``integrate(OdeProblem(...))``."""
    return integrate(OdeProblem(field, x_start, x_end, tuple(initial_state), rel_tol, abs_tol))
