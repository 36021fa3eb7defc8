"""Real part X of the quantum reduced action between the turning points.

X obeys the third-order equation

    4X'^4 - 3 hbar^2 X''^2 + 2 hbar^2 X' X''' = 8m (E - V) X'^2

and the wavefunction in the allowed region is

    psi_II = A_II / sqrt(X') * sin(X / hbar + pi/4),   X(x1) = 0.

Every b = X'(x1) > 0 reproduces the same psi; b* is the value for which
X(x2) - X(x1) = (n + 1/2) pi hbar.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import optimize

from . import odecore
from .errors import BracketNotFound, NonpositiveB, PhaseDerivativeVanished
from .potential import PhysicalConstants, PotentialSpec, TurningPoints

__all__ = [
    "ALPHA",
    "AllowedSolution",
    "BStarResult",
    "x_field",
    "match_at_left",
    "default_b",
    "integrate_allowed",
    "delta_X",
    "find_b_star",
    "imaginary_part_car",
]

ALPHA = math.pi / 4


def _vanish_threshold(E: float, consts: PhysicalConstants) -> float:
    return 1e-10 * math.sqrt(2.0 * consts.mass * max(1.0, abs(E)))


def x_field(E: float, spec: PotentialSpec, consts: PhysicalConstants):
    """Field (x, (X, X', X'')) -> (X', X'', X''')."""
    v = spec.scalar()
    eight_m = 8.0 * consts.mass
    h2 = consts.hbar**2
    three_h2 = 3.0 * h2
    two_h2 = 2.0 * h2
    tiny = _vanish_threshold(E, consts)

    def field(x, s):
        p = s[1]
        r = s[2]
        if abs(p) < tiny:
            raise PhaseDerivativeVanished(f"X' = {p:.3g} at x={x} (E={E})", x)
        p2 = p * p
        return (p, r, (eight_m * (E - v(x)) * p2 - 4.0 * p2 * p2 + three_h2 * r * r) / (two_h2 * p))

    return field


def match_at_left(b: float, psi_value: float, log_deriv: float, consts: PhysicalConstants) -> tuple[float, float]:
    """A_II and X''(x1) that continue (psi_value, log_deriv) into the allowed region.

    At x1 the phase is pi/4, so psi_II = A_II / sqrt(2b) and
    psi_II'/psi_II = -X''/(2b) + b/hbar.
    """
    if not b > 0:
        raise NonpositiveB(f"b must be positive, got {b}")
    if psi_value == 0:
        raise ValueError("psi_value must be nonzero")
    amplitude = psi_value * math.sqrt(2.0 * b)
    x2_initial = 2.0 * b * (b / consts.hbar - log_deriv)
    return amplitude, x2_initial


def default_b(E: float, spec: PotentialSpec, consts: PhysicalConstants, tp: TurningPoints) -> float:
    """Classical momentum at the middle of the well."""
    return math.sqrt(2.0 * consts.mass * (E - spec.evaluate(tp.midpoint)))


@dataclass(frozen=True, eq=False)
class AllowedSolution:
    E: float
    b: float
    A_II: float
    trajectory: odecore.Trajectory
    tp: TurningPoints
    spec: PotentialSpec
    consts: PhysicalConstants
    alpha: float = ALPHA

    def X(self, x):
        return self.trajectory(x)[..., 0]

    def dX(self, x):
        return self.trajectory(x)[..., 1]

    def ddX(self, x):
        return self.trajectory(x)[..., 2]

    def phase(self, x):
        return self.X(x) / self.consts.hbar + self.alpha

    def envelope(self, x):
        """1/sqrt(X')."""
        return 1.0 / np.sqrt(self.dX(x))

    def sine_factor(self, x):
        """A_II sin(X/hbar + pi/4)."""
        return self.A_II * np.sin(self.phase(x))

    def psi(self, x):
        s = self.trajectory(x)
        return self.A_II / np.sqrt(s[..., 1]) * np.sin(s[..., 0] / self.consts.hbar + self.alpha)

    def dpsi(self, x):
        s = self.trajectory(x)
        X, P, R = s[..., 0], s[..., 1], s[..., 2]
        th = X / self.consts.hbar + self.alpha
        return self.A_II / np.sqrt(P) * (-0.5 * R / P * np.sin(th) + P / self.consts.hbar * np.cos(th))

    @property
    def end_state(self) -> np.ndarray:
        return self.trajectory.final_state

    def psi_at_x2(self) -> tuple[float, float]:
        X, P, R = self.end_state
        th = X / self.consts.hbar + self.alpha
        amp = self.A_II / math.sqrt(P)
        return amp * math.sin(th), amp * (-0.5 * R / P * math.sin(th) + P / self.consts.hbar * math.cos(th))

    @property
    def delta_X(self) -> float:
        return float(self.end_state[0])

    def node_count(self) -> int:
        """Number of k >= 1 with (k - 1/4) pi hbar strictly inside X's range."""
        ratio = self.delta_X / (math.pi * self.consts.hbar) + 0.25
        k = math.floor(ratio)
        if k == ratio:
            k -= 1
        return max(k, 0)

    def node_positions(self) -> list[float]:
        """Points where X = (k - 1/4) pi hbar, i.e. zeros of psi_II."""
        out = []
        hbar = self.consts.hbar
        for k in range(1, self.node_count() + 1):
            target = (k - 0.25) * math.pi * hbar
            xs = self.trajectory.x
            Xs = self.trajectory.states[:, 0]
            j = int(np.searchsorted(Xs, target))
            lo, hi = xs[max(j - 1, 0)], xs[min(j, len(xs) - 1)]
            out.append(optimize.brentq(lambda x: float(self.X(x)) - target, lo, hi, xtol=1e-14, rtol=1e-15))
        return out

    def defect(self) -> np.ndarray:
        """Scaled defect of the X equation at every node, X''' from the interpolant."""
        x = self.trajectory.x
        X, P, R = self.trajectory.states.T
        R_prime = self.trajectory.derivative(x)[:, 2]
        h2 = self.consts.hbar**2
        two_m_kin = 2.0 * self.consts.mass * (self.E - self.spec.evaluate(x))
        num = 4 * P**4 - 3 * h2 * R**2 + 2 * h2 * P * R_prime - 4 * two_m_kin * P**2
        return np.abs(num) / (4 * P**2) / np.maximum(1.0, np.abs(two_m_kin))


def integrate_allowed(
    E: float,
    b: float,
    spec: PotentialSpec,
    consts: PhysicalConstants,
    tp: TurningPoints,
    left_match: tuple[float, float],
    rel_tol: float = 1e-10,
    abs_tol: float = 1e-12,
) -> AllowedSolution:
    """Integrate X from x1 to x2.

    ``left_match`` is (psi, psi'/psi) of the region-I branch at x1.
    """
    psi_value, log_deriv = left_match
    amplitude, r0 = match_at_left(b, psi_value, log_deriv, consts)
    traj = odecore.solve(x_field(E, spec, consts), tp.x1, tp.x2, (0.0, b, r0), rel_tol, abs_tol)
    P = traj.states[:, 1]
    if np.any(P <= 0):
        bad = float(traj.x[np.argmax(P <= 0)])
        raise PhaseDerivativeVanished(f"X' changed sign near x={bad} (E={E}, b={b})", bad)
    return AllowedSolution(E=E, b=b, A_II=amplitude, trajectory=traj, tp=tp, spec=spec, consts=consts)


def delta_X(sol: AllowedSolution) -> float:
    return sol.delta_X


@dataclass(frozen=True, eq=False)
class BStarResult:
    b_star: float
    delta_X: float
    bracket: tuple[float, float]
    iterations: int
    solution: AllowedSolution


def find_b_star(
    E: float,
    n: int,
    spec: PotentialSpec,
    consts: PhysicalConstants,
    tp: TurningPoints,
    left_boundary: tuple[float, float],
    rel_tol: float = 1e-12,
    abs_tol: float = 1e-14,
    max_expansions: int = 60,
) -> BStarResult:
    """Solve X(x2; b) = (n + 1/2) pi hbar for b.

    ``left_boundary`` is the (psi, psi'/psi) pair at x1 used for matching.
    """
    target = (n + 0.5) * math.pi * consts.hbar
    cache: dict[float, AllowedSolution] = {}

    def solution(b):
        if b not in cache:
            cache[b] = integrate_allowed(E, b, spec, consts, tp, left_boundary, rel_tol, abs_tol)
        return cache[b]

    def excess(b):
        return solution(b).delta_X - target

    b0 = default_b(E, spec, consts, tp)
    lo = hi = b0
    f0 = excess(b0)
    if f0 == 0:
        return BStarResult(b0, target, (b0, b0), 0, solution(b0))
    for _ in range(max_expansions):
        if f0 < 0:
            lo, hi = hi, hi * 2.0
            if excess(hi) >= 0:
                break
        else:
            hi, lo = lo, lo * 0.5
            if excess(lo) <= 0:
                break
    else:
        raise BracketNotFound(f"no b bracket for Delta X = {target} at E={E}")

    b_star, info = optimize.brentq(excess, lo, hi, xtol=1e-15 * hi, rtol=1e-15, full_output=True)
    return BStarResult(
        b_star=b_star,
        delta_X=solution(b_star).delta_X,
        bracket=(lo, hi),
        iterations=info.iterations,
        solution=solution(b_star),
    )


def imaginary_part_car(sol: AllowedSolution, consts: PhysicalConstants):
    """Y(x) in the allowed region, normalised so exp(-Y/hbar) = |A_II| / sqrt(X')."""
    amp = abs(sol.A_II)

    def Y(x):
        return consts.hbar * np.log(np.sqrt(sol.dX(x)) / amp)

    return Y
