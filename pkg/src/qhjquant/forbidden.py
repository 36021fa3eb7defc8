"""Imaginary reduced action in the classically forbidden regions.

With the real part set to zero the quantum Hamilton-Jacobi equation becomes a
Riccati equation for Q = Y':

    hbar Q' = Q^2 + 2m (E - V(x))

and psi = A exp(-Y / hbar). Region I (left of x1) is integrated forward from
the left cutoff, region III (right of x2) backward from the right cutoff; in
both directions the decaying branch is the attracting fixed point, so the
zeroth-order initial value is forgotten exponentially fast.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import odecore
from .errors import WrongBranch
from .potential import PhysicalConstants, PotentialSpec, TurningPoints

__all__ = ["ForbiddenSolution", "riccati_field", "solve_region", "log_derivative_at_tp"]

# fraction of the region next to the turning point where a sign flip of Q is tolerated
_TP_GRACE = 0.01


def riccati_field(E: float, spec: PotentialSpec, consts: PhysicalConstants):
    """Scalar field (x, Q) -> Q'."""
    v = spec.scalar()
    two_m = 2.0 * consts.mass
    hbar = consts.hbar

    def field(x: float, Q: float) -> float:
        return (Q * Q + two_m * (E - v(x))) / hbar

    return field


def _augmented_field(E: float, spec: PotentialSpec, consts: PhysicalConstants):
    v = spec.scalar()
    two_m = 2.0 * consts.mass
    inv_hbar = 1.0 / consts.hbar

    def field(x, s):
        q = s[0]
        return ((q * q + two_m * (E - v(x))) * inv_hbar, q)

    return field


@dataclass(frozen=True, eq=False)
class ForbiddenSolution:
    region: str
    E: float
    turning_point: float
    cutoff: float
    trajectory: odecore.Trajectory
    Q_tp: float
    Y_shift: float  # raw Y at the turning point; subtracted so that Y(tp) = 0
    spec: PotentialSpec
    consts: PhysicalConstants

    @property
    def interval(self) -> tuple[float, float]:
        return tuple(sorted((self.cutoff, self.turning_point)))

    def Q(self, x):
        return self.trajectory(x)[..., 0]

    def Y(self, x):
        return self.trajectory(x)[..., 1] - self.Y_shift

    def psi_unit(self, x):
        """exp(-Y/hbar): the branch with unit amplitude at the turning point."""
        return np.exp(-self.Y(x) / self.consts.hbar)

    def dpsi_unit(self, x):
        s = self.trajectory(x)
        return -s[..., 0] / self.consts.hbar * np.exp(-(s[..., 1] - self.Y_shift) / self.consts.hbar)

    @property
    def nodes(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """(x, Q, Y) at the accepted integration nodes, Y re-based."""
        t = self.trajectory
        return t.x, t.states[:, 0], t.states[:, 1] - self.Y_shift

    def residual(self) -> np.ndarray:
        """Scaled Riccati residual at every node, using the interpolant's derivative."""
        x = self.trajectory.x
        Q = self.trajectory.states[:, 0]
        dQ = self.trajectory.derivative(x)[:, 0]
        two_m = 2.0 * self.consts.mass
        r = self.consts.hbar * dQ - Q * Q - two_m * (self.E - self.spec.evaluate(x))
        return np.abs(r) / np.maximum(1.0, Q * Q)


def solve_region(
    region: str,
    E: float,
    spec: PotentialSpec,
    consts: PhysicalConstants,
    cutoffs: tuple[float, float],
    tp: TurningPoints,
    rel_tol: float = 1e-10,
    abs_tol: float = 1e-12,
) -> ForbiddenSolution:
    if region not in ("I", "III"):
        raise ValueError(f"region must be 'I' or 'III', got {region!r}")
    if region == "I":
        start, end, sign = cutoffs[0], tp.x1, -1.0
    else:
        start, end, sign = cutoffs[1], tp.x2, 1.0
    depth = 2.0 * consts.mass * (spec.evaluate(start) - E)
    if not depth > 0:
        raise ValueError(f"cutoff {start} is not inside the forbidden region at E={E}")
    q0 = sign * math.sqrt(depth)

    traj = odecore.solve(_augmented_field(E, spec, consts), start, end, (q0, 0.0), rel_tol, abs_tol)

    Q = traj.states[:, 0]
    grace = _TP_GRACE * abs(end - start)
    away = np.abs(traj.x - end) > grace
    if np.any(sign * Q[away] <= 0):
        bad = traj.x[away][np.argmax(sign * Q[away] <= 0)]
        raise WrongBranch(f"Q left the decaying branch in region {region} near x={bad} (E={E})")

    return ForbiddenSolution(
        region=region,
        E=E,
        turning_point=end,
        cutoff=start,
        trajectory=traj,
        Q_tp=float(traj.states[-1, 0]),
        Y_shift=float(traj.states[-1, 1]),
        spec=spec,
        consts=consts,
    )


def log_derivative_at_tp(sol: ForbiddenSolution, consts: PhysicalConstants) -> float:
    """psi'/psi at the turning point, from psi = A exp(-Y/hbar)."""
    return -sol.Q_tp / consts.hbar
