"""Independent oracles: Numerov Schroedinger solver, WKB and classical action.

None of this touches the Hamilton-Jacobi machinery, so it can check it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate, optimize
from scipy.interpolate import CubicSpline

from .errors import BracketNotFound, OutsideAllowedRegion
from .potential import (
    DEFAULT_DECAY_BUDGET,
    PhysicalConstants,
    PotentialSpec,
    TurningPoints,
    far_field_cutoffs,
    find_turning_points,
)
from .shooting import Probe, monotone_bracket

__all__ = [
    "NumerovSolution",
    "ClassicalAction",
    "numerov_solve",
    "classical_momentum",
    "classical_action",
    "wkb_energy",
    "staircase_action",
]


# --------------------------------------------------------------------------- classical / WKB


def classical_momentum(spec: PotentialSpec, consts: PhysicalConstants, E: float, tp: TurningPoints | None = None):
    """p_c(x) = sqrt(2m(E - V)) on [x1, x2]; clamped to zero at the ends."""
    tp = tp or find_turning_points(spec, E)
    slack = 1e-12 * max(1.0, tp.width)
    two_m = 2.0 * consts.mass

    def p(x):
        xa = np.asarray(x, dtype=float)
        if np.any(xa < tp.x1 - slack) or np.any(xa > tp.x2 + slack):
            raise OutsideAllowedRegion(f"x outside the allowed region [{tp.x1}, {tp.x2}]")
        out = np.sqrt(np.maximum(two_m * (E - spec.evaluate(xa)), 0.0))
        return float(out) if out.ndim == 0 else out

    return p


@dataclass(frozen=True, eq=False)
class ClassicalAction:
    """Hamilton's characteristic function W_C(x) = int_{x1}^x p_c dt."""

    E: float
    tp: TurningPoints
    total: float
    layer: float
    spec: PotentialSpec
    consts: PhysicalConstants
    momentum: object = field(repr=False)

    def _scalar_p(self, x: float) -> float:
        return math.sqrt(max(2.0 * self.consts.mass * (self.E - self.spec.evaluate(x)), 0.0))

    def _left_layer(self, upto: float) -> float:
        # x = x1 + s^2 removes the square-root endpoint behaviour
        top = math.sqrt(max(upto - self.tp.x1, 0.0))
        val, _ = integrate.quad(lambda s: 2 * s * self._scalar_p(self.tp.x1 + s * s), 0.0, top, epsabs=1e-13, epsrel=1e-13, limit=200)
        return val

    def _right_layer(self, start: float) -> float:
        top = math.sqrt(max(self.tp.x2 - start, 0.0))
        val, _ = integrate.quad(lambda s: 2 * s * self._scalar_p(self.tp.x2 - s * s), 0.0, top, epsabs=1e-13, epsrel=1e-13, limit=200)
        return val

    def _plain(self, a: float, b: float) -> float:
        if b <= a:
            return 0.0
        val, _ = integrate.quad(self._scalar_p, a, b, epsabs=1e-13, epsrel=1e-13, limit=200)
        return val

    def _scalar_W(self, x: float) -> float:
        x1, x2 = self.tp.x1, self.tp.x2
        a, b = x1 + self.layer, x2 - self.layer
        if x <= a:
            return self._left_layer(x)
        if x >= b:
            return self.total - self._right_layer(x)
        return self._left_layer(a) + self._plain(a, x)

    def __call__(self, x):
        xa = np.asarray(x, dtype=float)
        slack = 1e-12 * max(1.0, self.tp.width)
        if np.any(xa < self.tp.x1 - slack) or np.any(xa > self.tp.x2 + slack):
            raise OutsideAllowedRegion(f"x outside the allowed region [{self.tp.x1}, {self.tp.x2}]")
        xc = np.clip(xa, self.tp.x1, self.tp.x2)
        out = np.array([self._scalar_W(float(v)) for v in xc.ravel()]).reshape(xc.shape)
        return float(out) if out.ndim == 0 else out


def _action_integral(spec, consts, E, tp, layer) -> float:
    probe = ClassicalAction(E, tp, 0.0, layer, spec, consts, None)
    a, b = tp.x1 + layer, tp.x2 - layer
    return probe._left_layer(a) + probe._plain(a, b) + probe._right_layer(b)


def classical_action(
    spec: PotentialSpec,
    consts: PhysicalConstants,
    E: float,
    layer_fraction: float = 0.25,
    tp: TurningPoints | None = None,
) -> ClassicalAction:
    """``layer_fraction`` is the width of each substitution layer relative to x2 - x1."""
    tp = tp or find_turning_points(spec, E)
    if not 0 < layer_fraction <= 0.5:
        raise ValueError("layer_fraction must lie in (0, 0.5]")
    layer = layer_fraction * tp.width
    total = _action_integral(spec, consts, E, tp, layer)
    return ClassicalAction(E, tp, total, layer, spec, consts, classical_momentum(spec, consts, E, tp))


def wkb_energy(spec: PotentialSpec, consts: PhysicalConstants, n: int) -> float:
    """Energy solving int_{x1}^{x2} p_c dx = (n + 1/2) pi hbar."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    target = (n + 0.5) * math.pi * consts.hbar
    _, vmin = spec.minimum()

    def excess(E):
        tp = find_turning_points(spec, E)
        return _action_integral(spec, consts, E, tp, 0.25 * tp.width) - target

    lo = vmin + 1e-12 * max(1.0, abs(vmin))
    d = (n + 0.5) * consts.hbar
    hi = vmin + d
    for _ in range(200):
        if excess(hi) > 0:
            break
        lo, d = hi, 2 * d
        hi = vmin + d
    else:
        raise BracketNotFound(f"WKB level {n} not bracketed")
    return optimize.brentq(excess, lo, hi, xtol=1e-14, rtol=1e-15)


# --------------------------------------------------------------------------- Numerov


@dataclass(frozen=True, eq=False)
class NumerovSolution:
    E: float
    n: int
    x: np.ndarray
    psi: np.ndarray
    nodes: list
    grid_history: list  # (points, E) for every grid that was solved
    doubling_change: float
    spline: CubicSpline = field(repr=False)

    @property
    def step(self) -> float:
        return float(self.x[1] - self.x[0])

    def __call__(self, x):
        return self.spline(x)

    def derivative(self, x):
        return self.spline(x, 1)

    def log_derivative(self, x: float) -> float:
        return float(self.spline(x, 1) / self.spline(x))


class _NumerovGrid:
    def __init__(self, spec, consts, a, b, points, match_x):
        self.x = np.linspace(a, b, points)
        self.h = self.x[1] - self.x[0]
        self.v = spec.evaluate(self.x)
        self.scale = 2.0 * consts.mass / consts.hbar**2
        self.m = int(np.clip(np.rint((match_x - a) / self.h), 2, points - 3))

    def _coeffs(self, E):
        f = self.scale * (self.v - E)
        return (1.0 - self.h**2 / 12.0 * f).tolist()

    def sweep(self, E):
        """Left solution on [0, m+1], right solution on [m-1, N-1]."""
        c = self._coeffs(E)
        N = len(c)
        m = self.m
        left = [0.0] * (m + 2)
        left[1] = 1e-12
        for i in range(1, m + 1):
            left[i + 1] = ((12.0 - 10.0 * c[i]) * left[i] - c[i - 1] * left[i - 1]) / c[i + 1]
        right = [0.0] * N
        right[N - 2] = 1e-12
        for i in range(N - 2, m - 1, -1):
            right[i - 1] = ((12.0 - 10.0 * c[i]) * right[i] - c[i + 1] * right[i + 1]) / c[i - 1]
        return left, right

    def probe(self, E, n):
        left, right = self.sweep(E)
        m = self.m
        count = sum(1 for i in range(1, m) if (left[i] < 0) != (left[i + 1] < 0) and left[i + 1] != 0)
        a = left[m + 1] * right[m]
        b = left[m] * right[m + 1]
        w = (a - b) / (abs(a) + abs(b) + 1e-300)
        return Probe(E, count, (-1) ** n * w)

    def assemble(self, E):
        left, right = self.sweep(E)
        m = self.m
        psi = np.array(right)
        psi[: m + 1] = np.array(left[: m + 1]) * (right[m] / left[m]) if left[m] != 0 else left[: m + 1]
        psi /= math.sqrt(integrate.simpson(psi**2, x=self.x))
        return psi


def _solve_on_grid(grid: _NumerovGrid, n, guess, spacing, floor):
    lo, hi = monotone_bracket(lambda E: grid.probe(E, n), n, guess, spacing, floor)
    return optimize.brentq(lambda E: grid.probe(E, n).g, lo.E, hi.E, xtol=1e-15, rtol=1e-15)


def numerov_solve(
    spec: PotentialSpec,
    consts: PhysicalConstants | None = None,
    n: int = 0,
    tol_E: float = 1e-9,
    decay_budget: float = DEFAULT_DECAY_BUDGET,
    initial_points: int = 1001,
    max_doublings: int = 10,
) -> NumerovSolution:
    """n-th eigenstate of the Schroedinger equation on a grid-doubling-validated mesh.

    The domain is set by the far-field cutoffs at the WKB estimate of level
    n + 1, with psi = 0 imposed at both ends. Left and right Numerov sweeps
    meet at the grid point nearest the right turning point.
    """
    if n < 0:
        raise ValueError("n must be nonnegative")
    consts = consts or PhysicalConstants()
    _, vmin = spec.minimum()
    e_n = wkb_energy(spec, consts, n)
    e_up = wkb_energy(spec, consts, n + 1)
    tp_up = find_turning_points(spec, e_up)
    a, b = far_field_cutoffs(spec, e_up, tp_up, decay_budget, consts)
    match_x = find_turning_points(spec, e_n).x2

    points = initial_points
    history = []
    spacing = e_up - e_n
    guess = e_n
    change = math.inf
    for _ in range(max_doublings + 1):
        grid = _NumerovGrid(spec, consts, a, b, points, match_x)
        E = _solve_on_grid(grid, n, guess, spacing, vmin)
        if history:
            change = abs(E - history[-1][1])
        history.append((points, E))
        if change < tol_E:
            break
        guess = E
        if math.isfinite(change):
            spacing = max(10 * change, 1e-9)
        points = 2 * (points - 1) + 1
    else:
        raise BracketNotFound(f"Numerov level {n} did not converge under grid doubling (last change {change})")

    psi = grid.assemble(E)
    # sign convention: positive just right of the left turning point
    tp = find_turning_points(spec, E)
    i1 = int(np.searchsorted(grid.x, tp.x1))
    if psi[i1] < 0:
        psi = -psi
    spline = CubicSpline(grid.x, psi)
    nodes = []
    for i in range(len(psi) - 1):
        if tp.x1 < grid.x[i] < tp.x2 and psi[i] != 0 and (psi[i] < 0) != (psi[i + 1] < 0):
            nodes.append(optimize.brentq(spline, grid.x[i], grid.x[i + 1], xtol=1e-15))
    return NumerovSolution(E, n, grid.x, psi, nodes, history, change, spline)


def staircase_action(sol: NumerovSolution, consts: PhysicalConstants | None = None):
    """Real part of hbar (Arg psi - i log|psi|) for a real eigenfunction: pi hbar per node passed."""
    consts = consts or PhysicalConstants()
    nodes = np.asarray(sol.nodes, dtype=float)

    def X_S(x):
        xa = np.asarray(x, dtype=float)
        out = math.pi * consts.hbar * np.searchsorted(nodes, xa, side="right")
        return float(out) if out.ndim == 0 else out

    return X_S
