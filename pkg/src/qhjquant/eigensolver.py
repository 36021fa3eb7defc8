"""Quantization by turning-point matching.

A trial energy is accepted when the forbidden-region branches and the
allowed-region representation join with a continuous first derivative at x2
(continuity of the value at x2 is imposed by choosing A_III, and both value
and derivative are matched at x1 by construction).
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

from scipy import optimize

from .allowed import AllowedSolution, default_b, integrate_allowed
from .errors import MismatchNotConverged, NaNMismatch, NodeCountMismatch
from .forbidden import ForbiddenSolution, log_derivative_at_tp, solve_region
from .potential import (
    DEFAULT_DECAY_BUDGET,
    PhysicalConstants,
    PotentialSpec,
    TurningPoints,
    far_field_cutoffs,
    find_turning_points,
)
from .reference import wkb_energy
from .shooting import Probe, monotone_bracket

__all__ = [
    "SolverOptions",
    "Shot",
    "EigenResult",
    "shoot",
    "mismatch",
    "count_nodes",
    "bracket",
    "solve",
]

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class SolverOptions:
    rel_tol: float = 1e-10
    abs_tol: float = 1e-12
    decay_budget: float = DEFAULT_DECAY_BUDGET
    # floor on the |w| accepted at a converged root; 7-digit reference values sit near 1e-5
    mismatch_tol: float = 1e-5

    def __post_init__(self):
        for name in ("rel_tol", "abs_tol", "decay_budget", "mismatch_tol"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")


DEFAULT_OPTIONS = SolverOptions()


@dataclass(frozen=True, eq=False)
class Shot:
    """Everything built for one trial energy."""

    E: float
    b: float
    tp: TurningPoints
    cutoffs: tuple[float, float]
    region_I: ForbiddenSolution
    allowed: AllowedSolution
    region_III: ForbiddenSolution
    w: float

    @property
    def nodes(self) -> int:
        return self.allowed.node_count()


def shoot(
    E: float,
    spec: PotentialSpec,
    consts: PhysicalConstants,
    b: float | None = None,
    options: SolverOptions = DEFAULT_OPTIONS,
    cutoffs: tuple[float, float] | None = None,
) -> Shot:
    tp = find_turning_points(spec, E)
    if cutoffs is None or not (cutoffs[0] < tp.x1 and cutoffs[1] > tp.x2):
        cutoffs = far_field_cutoffs(spec, E, tp, options.decay_budget, consts)
    rt, at = options.rel_tol, options.abs_tol
    reg1 = solve_region("I", E, spec, consts, cutoffs, tp, rt, at)
    reg3 = solve_region("III", E, spec, consts, cutoffs, tp, rt, at)
    if b is None:
        b = default_b(E, spec, consts, tp)
    allowed = integrate_allowed(E, b, spec, consts, tp, (1.0, log_derivative_at_tp(reg1, consts)), rt, at)

    psi2, dpsi2 = allowed.psi_at_x2()
    # unit-amplitude region-III branch: value 1, slope -Q/hbar at x2
    dpsi3 = log_derivative_at_tp(reg3, consts)
    a = dpsi2
    c = psi2 * dpsi3
    w = (a - c) / (abs(c) + abs(a) + 1e-300)
    if not math.isfinite(w):
        raise NaNMismatch(f"mismatch is not finite at E={E}")
    return Shot(E, b, tp, cutoffs, reg1, allowed, reg3, w)


def mismatch(
    E: float,
    b: float | None,
    spec: PotentialSpec,
    consts: PhysicalConstants,
    options: SolverOptions = DEFAULT_OPTIONS,
) -> float:
    """Scaled Wronskian between psi_II and the decaying region-III branch at x2."""
    return shoot(E, spec, consts, b, options).w


def count_nodes(
    E: float,
    b: float | None,
    spec: PotentialSpec,
    consts: PhysicalConstants,
    options: SolverOptions = DEFAULT_OPTIONS,
) -> int:
    return shoot(E, spec, consts, b, options).nodes


@dataclass(frozen=True)
class EigenResult:
    n: int
    E: float
    tp: TurningPoints
    mismatch_residual: float
    b_used: float
    iterations: int
    function_evaluations: int
    bracket: tuple[float, float] = (math.nan, math.nan)
    cutoffs: tuple[float, float] = (math.nan, math.nan)

    def as_record(self) -> dict:
        return {
            "n": self.n,
            "E": self.E,
            "x1": self.tp.x1,
            "x2": self.tp.x2,
            "mismatch_residual": self.mismatch_residual,
            "b_used": self.b_used,
            "iterations": self.iterations,
            "function_evaluations": self.function_evaluations,
        }


class _Shooter:
    """Caches shots for one (n, potential) solve and counts evaluations."""

    def __init__(self, n, spec, consts, options, cutoffs=None):
        self.n = n
        self.spec = spec
        self.consts = consts
        self.options = options
        self.cutoffs = cutoffs
        self.shots: dict[float, Shot] = {}

    def shot(self, E: float) -> Shot:
        if E not in self.shots:
            self.shots[E] = shoot(E, self.spec, self.consts, None, self.options, self.cutoffs)
        return self.shots[E]

    def probe(self, E: float) -> Probe:
        s = self.shot(E)
        return Probe(E, s.nodes, (-1) ** self.n * s.w)

    def g(self, E: float) -> float:
        return self.probe(E).g


def _hint(n, spec, consts, E_hint):
    e_n = wkb_energy(spec, consts, n) if E_hint is None else E_hint
    spacing = wkb_energy(spec, consts, n + 1) - wkb_energy(spec, consts, n)
    return e_n, spacing


def _domain_cutoffs(n, spec, consts, options, e_n, spacing):
    # cutoffs wide enough for every trial energy up to the next level
    e_top = e_n + spacing
    tp = find_turning_points(spec, e_top)
    return far_field_cutoffs(spec, e_top, tp, options.decay_budget, consts)


def bracket(
    n: int,
    spec: PotentialSpec,
    consts: PhysicalConstants,
    E_hint: float | None = None,
    options: SolverOptions = DEFAULT_OPTIONS,
) -> tuple[float, float]:
    """Energy interval holding level n, with node count n and opposite mismatch signs at its ends."""
    lo, hi = _bracket(_Shooter(n, spec, consts, options), n, spec, consts, E_hint, options)
    return lo.E, hi.E


def _bracket(shooter, n, spec, consts, E_hint, options):
    if n < 0:
        raise ValueError("n must be nonnegative")
    e_n, spacing = _hint(n, spec, consts, E_hint)
    if shooter.cutoffs is None:
        shooter.cutoffs = _domain_cutoffs(n, spec, consts, options, e_n, spacing)
    _, vmin = spec.minimum()
    return monotone_bracket(shooter.probe, n, e_n, 0.5 * spacing, vmin)


def solve(
    n: int,
    spec: PotentialSpec,
    consts: PhysicalConstants | None = None,
    tol_E: float = 1e-8,
    options: SolverOptions = DEFAULT_OPTIONS,
    E_hint: float | None = None,
) -> EigenResult:
    """Level n by bracketing on node counts, then Brent refinement of the mismatch."""
    if not tol_E > 0:
        raise ValueError("tol_E must be positive")
    consts = consts or PhysicalConstants()
    shooter = _Shooter(n, spec, consts, options)
    lo, hi = _bracket(shooter, n, spec, consts, E_hint, options)
    n_bracket = len(shooter.shots)
    E, info = optimize.brentq(shooter.g, lo.E, hi.E, xtol=tol_E, rtol=1e-15, full_output=True)
    final = shooter.shot(E)
    if final.nodes != n:
        raise NodeCountMismatch(f"root at E={E} has {final.nodes} nodes, expected {n}")
    # a loose tol_E legitimately leaves |w| of order slope * tol_E
    slope = abs(lo.g - hi.g) / (hi.E - lo.E) if hi.E > lo.E else 0.0
    allowed = max(options.mismatch_tol, 2.0 * slope * tol_E)
    if abs(final.w) > allowed:
        raise MismatchNotConverged(f"|w| = {abs(final.w):.3g} at E={E} exceeds {allowed:.3g}")
    log.debug("level %d: E=%.12g after %d bracket + %d refinement shots", n, E, n_bracket, info.function_calls)
    return EigenResult(
        n=n,
        E=E,
        tp=final.tp,
        mismatch_residual=abs(final.w),
        b_used=final.b,
        iterations=info.iterations,
        function_evaluations=len(shooter.shots),
        bracket=(lo.E, hi.E),
        cutoffs=final.cutoffs,
    )
