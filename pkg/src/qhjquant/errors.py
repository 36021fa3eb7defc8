"""Exception hierarchy for the solver stack."""

from __future__ import annotations


class QHJError(Exception):
    """Base class for every failure raised by :mod:`qhjquant`."""

    code = "qhj_error"

    def to_record(self) -> dict:
        return {"error": self.code, "type": type(self).__name__, "message": str(self)}


class EnergyBelowMinimum(QHJError):
    code = "energy_below_minimum"


class MultipleWells(QHJError):
    code = "multiple_wells"


class CutoffSearchFailed(QHJError):
    code = "cutoff_search_failed"


class IntegrationError(QHJError):
    """Raised by the ODE layer; ``x`` is where the integrator gave up."""

    code = "integration_error"

    def __init__(self, message: str, x: float | None = None):
        super().__init__(message)
        self.x = x

    def to_record(self) -> dict:
        rec = super().to_record()
        rec["x"] = self.x
        return rec


class StepSizeUnderflow(IntegrationError):
    code = "step_size_underflow"


class NonFiniteField(IntegrationError):
    code = "non_finite_field"


class PhaseDerivativeVanished(IntegrationError):
    code = "phase_derivative_vanished"


class WrongBranch(QHJError):
    code = "wrong_branch"


class NonpositiveB(QHJError):
    code = "nonpositive_b"


class BracketNotFound(QHJError):
    code = "bracket_not_found"


class NodeCountMismatch(QHJError):
    code = "node_count_mismatch"


class MismatchNotConverged(QHJError):
    code = "mismatch_not_converged"


class NaNMismatch(QHJError):
    code = "nan_mismatch"


class OutsideAllowedRegion(QHJError):
    code = "outside_allowed_region"


class SelectorRequiresBStar(QHJError):
    code = "selector_requires_bstar"
