"""Confining polynomial potentials, turning points and far-field cutoffs."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Any, Mapping

import numpy as np
from scipy import integrate, optimize

from .errors import CutoffSearchFailed, EnergyBelowMinimum, MultipleWells

__all__ = [
    "PhysicalConstants",
    "PotentialSpec",
    "TurningPoints",
    "evaluate",
    "find_turning_points",
    "far_field_cutoffs",
    "DEFAULT_DECAY_BUDGET",
]

DEFAULT_DECAY_BUDGET = 30.0
# below this the leading term cannot be resolved against the rest in double precision root finding
MIN_LEADING_RATIO = 1e-100


@dataclass(frozen=True)
class PhysicalConstants:
    hbar: float = 1.0
    mass: float = 1.0

    def __post_init__(self):
        if not (self.hbar > 0 and self.mass > 0):
            raise ValueError(f"hbar and mass must be positive, got hbar={self.hbar}, mass={self.mass}")


@dataclass(frozen=True)
class PotentialSpec:
    """A confining polynomial potential.

    ``coefficients`` are in ascending powers of x. Use the ``quartic``,
    ``harmonic`` and ``polynomial`` constructors, or :meth:`from_json`.
    """

    kind: str
    coefficients: tuple[float, ...]
    params: tuple[tuple[str, float], ...] = ()

    def __post_init__(self):
        c = [float(v) for v in self.coefficients]
        while len(c) > 1 and c[-1] == 0.0:
            c.pop()
        degree = len(c) - 1
        if degree < 2 or degree % 2 or c[-1] <= 0:
            raise ValueError(
                "potential must be an even-degree polynomial (degree >= 2) "
                f"with positive leading coefficient, got coefficients {self.coefficients}"
            )
        if not all(math.isfinite(v) for v in c):
            raise ValueError("coefficients must be finite")
        if c[-1] < MIN_LEADING_RATIO * max(abs(v) for v in c):
            raise ValueError(f"leading coefficient {c[-1]} is negligible next to the others")
        object.__setattr__(self, "coefficients", tuple(c))

    @classmethod
    def quartic(cls, k: float, lam: float) -> "PotentialSpec":
        """V(x) = k x^2 / 2 + lam x^4."""
        if lam < 0:
            raise ValueError(f"lambda must be nonnegative, got {lam}")
        if lam == 0 and k <= 0:
            raise ValueError("quartic with lambda = 0 needs k > 0 to confine")
        return cls("quartic", (0.0, 0.0, 0.5 * k, 0.0, lam), (("k", float(k)), ("lambda", float(lam))))

    @classmethod
    def harmonic(cls, k: float) -> "PotentialSpec":
        if k <= 0:
            raise ValueError(f"harmonic k must be positive, got {k}")
        return cls("harmonic", (0.0, 0.0, 0.5 * k), (("k", float(k)),))

    @classmethod
    def polynomial(cls, coefficients) -> "PotentialSpec":
        return cls("polynomial", tuple(float(c) for c in coefficients))

    @classmethod
    def from_json(cls, obj: str | Mapping[str, Any]) -> "PotentialSpec":
        data = json.loads(obj) if isinstance(obj, str) else dict(obj)
        kind = data.get("kind")
        try:
            if kind == "quartic":
                return cls.quartic(float(data["k"]), float(data["lambda"]))
            if kind == "harmonic":
                return cls.harmonic(float(data["k"]))
            if kind == "polynomial":
                return cls.polynomial(data["coefficients"])
        except KeyError as exc:
            raise ValueError(f"potential of kind {kind!r} is missing field {exc}") from None
        raise ValueError(f"unknown potential kind {kind!r}")

    def to_json(self) -> dict:
        if self.kind == "polynomial":
            return {"kind": "polynomial", "coefficients": list(self.coefficients)}
        return {"kind": self.kind, **dict(self.params)}

    @property
    def degree(self) -> int:
        return len(self.coefficients) - 1

    @property
    def is_even(self) -> bool:
        return all(c == 0.0 for c in self.coefficients[1::2])

    def __call__(self, x):
        return self.evaluate(x)

    def evaluate(self, x):
        """Horner evaluation; works on floats and numpy arrays."""
        acc = 0.0 * x
        for c in reversed(self.coefficients):
            acc = acc * x + c
        return acc

    def derivative(self, x):
        acc = 0.0 * x
        n = self.degree
        for p in range(n, 0, -1):
            acc = acc * x + p * self.coefficients[p]
        return acc

    def scalar(self):
        """A fast float-only closure for the inner loops of the ODE fields."""
        coeffs = tuple(reversed(self.coefficients))

        def v(x: float) -> float:
            acc = 0.0
            for c in coeffs:
                acc = acc * x + c
            return acc

        return v

    def minimum(self) -> tuple[float, float]:
        """Location and value of the global minimum."""
        dpoly = np.polynomial.Polynomial(self.coefficients).deriv()
        crit = _critical_points(self)
        if not crit:
            crit = [0.0]
        vals = [float(self.evaluate(x)) for x in crit]
        i = int(np.argmin(vals))
        x0 = crit[i]
        # polish the stationary point with Newton steps
        d2 = dpoly.deriv()
        for _ in range(3):
            curv = d2(x0)
            if curv <= 0:
                break
            x0 -= dpoly(x0) / curv
        return float(x0), float(self.evaluate(x0))


@dataclass(frozen=True)
class TurningPoints:
    x1: float
    x2: float

    def __post_init__(self):
        if not self.x1 < self.x2:
            raise ValueError(f"turning points must satisfy x1 < x2, got {self.x1}, {self.x2}")

    @property
    def midpoint(self) -> float:
        return 0.5 * (self.x1 + self.x2)

    @property
    def width(self) -> float:
        return self.x2 - self.x1


def evaluate(spec: PotentialSpec, x):
    return spec.evaluate(x)


def _critical_points(spec: PotentialSpec) -> list[float]:
    dpoly = np.polynomial.Polynomial(spec.coefficients).deriv()
    return sorted(r.real for r in dpoly.roots() if abs(r.imag) <= 1e-9 * max(1.0, abs(r)))


def _sign_changes(spec: PotentialSpec, E: float) -> int:
    """Real roots of V - E, counted from its signs at the critical points of V.

    V is monotone between consecutive critical points and positive at both
    infinities, so the count is exact for simple roots.
    """
    signs = [1.0] + [math.copysign(1.0, float(spec.evaluate(c)) - E) for c in _critical_points(spec)] + [1.0]
    return sum(1 for a, b in zip(signs, signs[1:]) if a != b)


def _bisect(g, lo: float, hi: float, ftol: float) -> float:
    """Bisect a sign change of g down to adjacent floats; the residual must end below ftol."""
    glo = g(lo)
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid == lo or mid == hi:
            break
        gm = g(mid)
        if gm == 0.0:
            return mid
        if (gm < 0) == (glo < 0):
            lo, glo = mid, gm
        else:
            hi = mid
    # whichever endpoint sits closer to the root
    best = lo if abs(g(lo)) <= abs(g(hi)) else hi
    if abs(g(best)) > ftol:
        raise ArithmeticError(f"bisection stalled at x={best} with residual {g(best)}")
    return best


def find_turning_points(spec: PotentialSpec, E: float) -> TurningPoints:
    """Both roots of V(x) = E around the potential minimum."""
    x0, vmin = spec.minimum()
    if E <= vmin:
        raise EnergyBelowMinimum(f"E={E} is not above the potential minimum {vmin}")

    changes = _sign_changes(spec, E)
    if changes > 2:
        raise MultipleWells(f"{changes} sign changes of V - E at E={E}; only single wells are supported")

    v = spec.scalar()

    def g(x):
        return v(x) - E

    ftol = 1e-12 * max(1.0, abs(E))
    roots = []
    for direction in (-1.0, 1.0):
        step = 1e-3 * max(1.0, abs(x0))
        inner = x0
        outer = x0 + direction * step
        while g(outer) < 0:
            inner = outer
            step *= 2.0
            outer = x0 + direction * step
        lo, hi = inner, outer
        roots.append(_bisect(g, lo, hi, ftol))
    return TurningPoints(roots[0], roots[1])


def _forbidden_accumulation(spec: PotentialSpec, E: float, start: float, end: float, consts) -> float:
    v = spec.scalar()
    two_m = 2.0 * consts.mass

    def kappa(x):
        return math.sqrt(max(two_m * (v(x) - E), 0.0))

    lo, hi = sorted((start, end))
    val, _ = integrate.quad(kappa, lo, hi, epsabs=1e-12, epsrel=1e-12, limit=200)
    return val / consts.hbar


def far_field_cutoffs(
    spec: PotentialSpec,
    E: float,
    tp: TurningPoints,
    decay_budget: float = DEFAULT_DECAY_BUDGET,
    consts: PhysicalConstants | None = None,
    max_extent: float | None = None,
) -> tuple[float, float]:
    """Cutoffs where the leading-order decay exponent reaches ``decay_budget``.

    Outside the returned interval psi is below exp(-decay_budget) relative to
    its value at the adjacent turning point.
    """
    if not decay_budget > 0:
        raise ValueError(f"decay_budget must be positive, got {decay_budget}")
    consts = consts or PhysicalConstants()
    if max_extent is None:
        max_extent = 1e3 * max(1.0, tp.width)

    out = []
    for anchor, direction in ((tp.x1, -1.0), (tp.x2, 1.0)):

        def excess(d, anchor=anchor, direction=direction):
            return _forbidden_accumulation(spec, E, anchor, anchor + direction * d, consts) - decay_budget

        inner = 0.0
        d = 0.05 * tp.width
        while excess(d) < 0:
            inner = d
            d *= 2.0
            if d > max_extent:
                raise CutoffSearchFailed(
                    f"decay budget {decay_budget} not reached within {max_extent} of x={anchor}"
                )
        if inner == 0.0 and excess(0.0) >= 0:
            out.append(anchor)
            continue
        root = optimize.brentq(excess, inner, d, xtol=1e-13, rtol=1e-15)
        # step outward until the budget is met, so the guarantee is one-sided
        while excess(root) < 0:
            root += 1e-12 * max(1.0, abs(root))
        out.append(anchor + direction * root)
    return out[0], out[1]
