import functools
import sys

from qhjquant import PhysicalConstants, PotentialSpec, solve
from qhjquant.allowed import find_b_star
from qhjquant.assembly import assemble
from qhjquant.eigensolver import shoot
from qhjquant.forbidden import log_derivative_at_tp
from qhjquant.reference import numerov_solve

UNIT = PhysicalConstants()
QUARTIC = PotentialSpec.quartic(1.0, 1.0)
HARMONIC = PotentialSpec.harmonic(1.0)


@functools.lru_cache(maxsize=None)
def eigen(lam, n, tol_E=1e-8):
    spec = HARMONIC if lam == 0 else PotentialSpec.quartic(1.0, lam)
    return solve(n, spec, UNIT, tol_E)


@functools.lru_cache(maxsize=None)
def numerov(lam, n):
    spec = HARMONIC if lam == 0 else PotentialSpec.quartic(1.0, lam)
    return numerov_solve(spec, UNIT, n)


@functools.lru_cache(maxsize=None)
def bstar(lam, n, tol_E=1e-8):
    spec = HARMONIC if lam == 0 else PotentialSpec.quartic(1.0, lam)
    r = eigen(lam, n, tol_E)
    base = shoot(r.E, spec, UNIT)
    left = (1.0, log_derivative_at_tp(base.region_I, UNIT))
    return find_b_star(r.E, n, spec, UNIT, base.tp, left)


@functools.lru_cache(maxsize=None)
def wavefunction(lam, n, b=None):
    spec = HARMONIC if lam == 0 else PotentialSpec.quartic(1.0, lam)
    return assemble(eigen(lam, n), b, spec, UNIT)


ACCEPTANCE_CRITERIA = 10


def pytest_terminal_summary(terminalreporter):
    module = sys.modules.get("test_acceptance")
    if module is None:
        return
    results = module.RESULTS
    terminalreporter.section("acceptance criteria")
    for k in range(1, ACCEPTANCE_CRITERIA + 1):
        if k in results:
            ok, detail = results[k]
            terminalreporter.write_line(f"criterion {k:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
        else:
            terminalreporter.write_line(f"criterion {k:2d}: FAIL  not evaluated (test errored or was deselected)")
