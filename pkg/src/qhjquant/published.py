"""Published quartic-oscillator levels, V = x^2/2 + lambda x^4 with hbar = m = 1.

``qhj`` holds the values obtained with the Hamilton-Jacobi method, ``se`` the
Schroedinger-equation values quoted alongside them. Both are kept as printed.
"""

from __future__ import annotations

from dataclasses import dataclass

__all__ = ["PublishedLevel", "TABLE1", "LAMBDAS", "inconsistent"]


@dataclass(frozen=True)
class PublishedLevel:
    lam: float
    n: int
    qhj: float
    se: float


LAMBDAS = (0.002, 0.01, 0.1, 1.0)

TABLE1 = (
    PublishedLevel(0.002, 0, 0.5014895, 0.50148966),
    PublishedLevel(0.002, 1, 1.5074192, 1.50741940),
    PublishedLevel(0.002, 2, 2.51920, 2.51920212),
    PublishedLevel(0.01, 0, 0.50725615, 0.50725620),
    PublishedLevel(0.01, 1, 1.5356482, 1.53564828),
    PublishedLevel(0.01, 2, 2.590842, 2.59084580),
    PublishedLevel(0.1, 0, 0.5591463, 0.55914633),
    PublishedLevel(0.1, 1, 1.769450, 1.76950264),
    PublishedLevel(0.1, 2, 3.13862431, 3.13862431),
    PublishedLevel(1.0, 0, 0.80377065, 0.80377065),
    PublishedLevel(1.0, 1, 2.737789, 2.73789227),
    PublishedLevel(1.0, 2, 5.179295, 5.17929169),
)


def inconsistent(level: PublishedLevel, tol: float = 5e-6) -> bool:
    """True when the two printed values for a level disagree by more than ``tol``."""
    return abs(level.qhj - level.se) > tol
