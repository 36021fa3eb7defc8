"""Piecewise wavefunction built from the three matched branches, and figure series."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate

from .allowed import AllowedSolution, BStarResult
from .eigensolver import DEFAULT_OPTIONS, EigenResult, SolverOptions, shoot
from .errors import SelectorRequiresBStar
from .forbidden import ForbiddenSolution
from .potential import PhysicalConstants, PotentialSpec, TurningPoints
from .reference import ClassicalAction, classical_action

__all__ = ["PiecewiseWavefunction", "Series", "assemble", "node_positions", "export_series", "SELECTORS"]

SELECTORS = ("psi", "action_real", "action_imag", "momentum", "envelope")
BSTAR_SELECTORS = frozenset(SELECTORS[1:])
NORM_POINTS = 4001


@dataclass(frozen=True, eq=False)
class PiecewiseWavefunction:
    """psi_I = A_I e^{-Y_I/hbar}, psi_II = A_II sin(X/hbar + pi/4)/sqrt(X'), psi_III = A_III e^{-Y_III/hbar}.

    ``scale`` is the global normalization factor applied to the raw
    amplitudes (A_I = 1 before normalization).
    """

    E: float
    tp: TurningPoints
    cutoffs: tuple[float, float]
    region_I: ForbiddenSolution
    allowed: AllowedSolution
    region_III: ForbiddenSolution
    A_III_raw: float
    scale: float
    consts: PhysicalConstants

    @property
    def b(self) -> float:
        return self.allowed.b

    @property
    def A_I(self) -> float:
        return self.scale

    @property
    def A_II(self) -> float:
        return self.scale * self.allowed.A_II

    @property
    def A_III(self) -> float:
        return self.scale * self.A_III_raw

    def branch(self, x) -> np.ndarray:
        xa = np.atleast_1d(np.asarray(x, dtype=float))
        return np.where(xa < self.tp.x1, "I", np.where(xa > self.tp.x2, "III", "II"))

    def _pieces(self, x):
        xa = np.atleast_1d(np.asarray(x, dtype=float))
        x_min, x_max = self.cutoffs
        m1 = (xa >= x_min) & (xa < self.tp.x1)
        m2 = (xa >= self.tp.x1) & (xa <= self.tp.x2)
        m3 = (xa > self.tp.x2) & (xa <= x_max)
        return xa, m1, m2, m3

    def __call__(self, x):
        """psi(x); zero outside the cutoffs."""
        xa, m1, m2, m3 = self._pieces(x)
        out = np.zeros_like(xa)
        out[m1] = self.A_I * self.region_I.psi_unit(xa[m1])
        out[m2] = self.scale * self.allowed.psi(xa[m2])
        out[m3] = self.A_III * self.region_III.psi_unit(xa[m3])
        return out[0] if np.ndim(x) == 0 else out

    def derivative(self, x):
        xa, m1, m2, m3 = self._pieces(x)
        out = np.zeros_like(xa)
        out[m1] = self.A_I * self.region_I.dpsi_unit(xa[m1])
        out[m2] = self.scale * self.allowed.dpsi(xa[m2])
        out[m3] = self.A_III * self.region_III.dpsi_unit(xa[m3])
        return out[0] if np.ndim(x) == 0 else out

    def one_sided(self, where: str) -> dict:
        """psi and psi' from both sides of a turning point ('x1' or 'x2')."""
        if where == "x1":
            x = self.tp.x1
            outer = (self.A_I * float(self.region_I.psi_unit(x)), self.A_I * float(self.region_I.dpsi_unit(x)))
        else:
            x = self.tp.x2
            outer = (self.A_III * float(self.region_III.psi_unit(x)), self.A_III * float(self.region_III.dpsi_unit(x)))
        inner = (self.scale * float(self.allowed.psi(x)), self.scale * float(self.allowed.dpsi(x)))
        return {"x": x, "outer": outer, "inner": inner}

    def matching_jumps(self, points: int = 2001) -> dict[str, float]:
        """Jumps of psi and psi' at both turning points, relative to max|psi| and max|psi'|."""
        xs = np.linspace(*self.cutoffs, points)
        psi_max = float(np.max(np.abs(self(xs))))
        dpsi_max = float(np.max(np.abs(self.derivative(xs))))
        out = {}
        for where in ("x1", "x2"):
            s = self.one_sided(where)
            out[f"psi_{where}"] = abs(s["outer"][0] - s["inner"][0]) / psi_max
            out[f"dpsi_{where}"] = abs(s["outer"][1] - s["inner"][1]) / dpsi_max
        return out

    def norm_integral(self, points: int = NORM_POINTS) -> float:
        return _raw_norm(self, points) * self.scale**2

    def node_positions(self) -> list[float]:
        return self.allowed.node_positions()


def _raw_norm(wf: PiecewiseWavefunction, points: int) -> float:
    x_min, x_max = wf.cutoffs
    total = 0.0
    xs = np.linspace(x_min, wf.tp.x1, points)
    total += integrate.simpson(wf.region_I.psi_unit(xs) ** 2, x=xs)
    xs = np.linspace(wf.tp.x1, wf.tp.x2, points)
    total += integrate.simpson(wf.allowed.psi(xs) ** 2, x=xs)
    xs = np.linspace(wf.tp.x2, x_max, points)
    total += integrate.simpson((wf.A_III_raw * wf.region_III.psi_unit(xs)) ** 2, x=xs)
    return float(total)


def assemble(
    eigen: EigenResult,
    b: float | None,
    spec: PotentialSpec,
    consts: PhysicalConstants | None = None,
    options: SolverOptions = DEFAULT_OPTIONS,
) -> PiecewiseWavefunction:
    """Normalized three-branch wavefunction at the converged energy.

    ``b=None`` uses the default mid-well momentum.
    """
    consts = consts or PhysicalConstants()
    shot = shoot(eigen.E, spec, consts, b, options)
    psi2, _ = shot.allowed.psi_at_x2()
    wf = PiecewiseWavefunction(
        E=eigen.E,
        tp=shot.tp,
        cutoffs=shot.cutoffs,
        region_I=shot.region_I,
        allowed=shot.allowed,
        region_III=shot.region_III,
        A_III_raw=psi2,  # region-III unit branch equals 1 at x2
        scale=1.0,
        consts=consts,
    )
    scale = 1.0 / math.sqrt(_raw_norm(wf, NORM_POINTS))
    return PiecewiseWavefunction(**{**wf.__dict__, "scale": scale})


def node_positions(wf: PiecewiseWavefunction) -> list[float]:
    return wf.node_positions()


@dataclass(frozen=True, eq=False)
class Series:
    selector: str
    columns: tuple[str, ...]
    data: dict = field(repr=False)
    meta: dict = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.data[self.columns[0]])

    def rows(self):
        cols = [self.data[c] for c in self.columns]
        for i in range(len(self)):
            yield tuple(c[i] for c in cols)


def export_series(
    wf: PiecewiseWavefunction,
    eigen: EigenResult,
    b_star_sol: BStarResult | None,
    classical: ClassicalAction | None,
    what: str,
    points: int = 2001,
) -> Series:
    """Tabulate one figure's curves on a uniform grid, with I/II/III branch tags."""
    if what not in SELECTORS:
        raise ValueError(f"unknown series selector {what!r}; choose from {SELECTORS}")
    if what in BSTAR_SELECTORS and b_star_sol is None:
        raise SelectorRequiresBStar(f"series {what!r} needs the b* solution")
    hbar = wf.consts.hbar
    meta = {"selector": what, "n": eigen.n, "E": wf.E, "x1": wf.tp.x1, "x2": wf.tp.x2, "b": wf.b}

    if what == "psi":
        xs = np.linspace(*wf.cutoffs, points)
        return Series(what, ("x", "branch", "psi"), {"x": xs, "branch": wf.branch(xs), "psi": wf(xs)}, meta)

    sol = b_star_sol.solution
    a_star = wf.scale * sol.A_II
    meta.update(b_star=b_star_sol.b_star, delta_X=b_star_sol.delta_X)

    if what == "action_imag":
        xs = np.linspace(*wf.cutoffs, points)
        br = wf.branch(xs)
        Y = np.empty_like(xs)
        m1, m2, m3 = br == "I", br == "II", br == "III"
        # every branch written as psi = e^{-Y/hbar} * (oscillating factor)
        Y[m1] = wf.region_I.Y(xs[m1]) - hbar * math.log(abs(wf.A_I))
        Y[m2] = hbar * np.log(np.sqrt(sol.dX(xs[m2])) / abs(a_star))
        Y[m3] = wf.region_III.Y(xs[m3]) - hbar * math.log(abs(wf.A_III))
        return Series(what, ("x", "branch", "Y"), {"x": xs, "branch": br, "Y": Y}, meta)

    xs = np.linspace(wf.tp.x1, wf.tp.x2, points)
    br = np.full(xs.shape, "II")
    if what in ("action_real", "momentum") and classical is None:
        classical = classical_action(wf.allowed.spec, wf.consts, wf.E, tp=wf.tp)
    if what == "action_real":
        return Series(what, ("x", "branch", "X", "W_C"), {"x": xs, "branch": br, "X": sol.X(xs), "W_C": classical(xs)}, meta)
    if what == "momentum":
        return Series(
            what, ("x", "branch", "X_prime", "p_c"), {"x": xs, "branch": br, "X_prime": sol.dX(xs), "p_c": classical.momentum(xs)}, meta
        )
    sine = a_star * np.sin(sol.phase(xs))
    env = sol.envelope(xs)
    return Series(
        what,
        ("x", "branch", "sine_factor", "inv_sqrt_X_prime", "psi"),
        {"x": xs, "branch": br, "sine_factor": sine, "inv_sqrt_X_prime": env, "psi": sine * env},
        meta,
    )

