"""Bracketing helper shared by the shooting eigensolvers.

Both solvers classify a trial energy by two numbers: the node count of the
left-started solution up to the matching point, and the sign-adjusted
matching Wronskian g = (-1)^n w. Inside the energy window where the node count
equals n, g is positive below the eigenvalue and negative above it, so
"too low" is the monotone predicate  count < n  or  (count == n and g > 0).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

from .errors import BracketNotFound


@dataclass(frozen=True)
class Probe:
    E: float
    count: int
    g: float


def too_low(p: Probe, n: int) -> bool:
    return p.count < n or (p.count == n and p.g > 0)


def monotone_bracket(
    probe: Callable[[float], Probe],
    n: int,
    guess: float,
    spacing: float,
    floor: float,
    max_iter: int = 200,
) -> tuple[Probe, Probe]:
    """Energies bracketing the n-th level with node count n at both ends.

    ``floor`` is a hard lower limit (the potential minimum); probes stay
    strictly above it.
    """
    spacing = abs(spacing)
    if not spacing > 0:
        raise ValueError("spacing must be positive")

    lo = probe(max(guess - 0.5 * spacing, floor + 0.5 * (guess - floor)))
    step = spacing
    it = 0
    while not too_low(lo, n):
        it += 1
        if it > max_iter:
            raise BracketNotFound(f"no lower bracket for level {n} near E={guess}")
        E = lo.E - step
        if E <= floor:
            E = floor + 0.5 * (lo.E - floor)
        lo = probe(E)
        step *= 2.0

    hi = probe(max(guess + 0.5 * spacing, lo.E + 0.5 * spacing))
    step = spacing
    while too_low(hi, n):
        it += 1
        if it > max_iter:
            raise BracketNotFound(f"no upper bracket for level {n} near E={guess}")
        lo = hi
        hi = probe(hi.E + step)
        step *= 2.0

    while not (lo.count == n and hi.count == n):
        it += 1
        mid_E = 0.5 * (lo.E + hi.E)
        if it > max_iter or mid_E in (lo.E, hi.E):
            raise BracketNotFound(f"node-count window for level {n} not resolved in [{lo.E}, {hi.E}]")
        mid = probe(mid_E)
        if too_low(mid, n):
            lo = mid
        else:
            hi = mid
    return lo, hi
