import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qhjquant.errors import NonFiniteField, StepSizeUnderflow
from qhjquant.odecore import OdeProblem, integrate, solve

RTOL = 1e-10


def test_exponential():
    traj = solve(lambda x, y: (y[0],), 0.0, 1.0, (1.0,), RTOL, 1e-12)
    assert abs(traj.final_state[0] - math.e) <= 10 * RTOL * math.e


def test_riccati_closed_form():
    traj = solve(lambda x, y: (-2 * x * y[0] ** 2,), 0.0, 2.0, (1.0,), RTOL, 1e-12)
    assert traj.final_state[0] == pytest.approx(0.2, abs=10 * RTOL)


def test_oscillator_period():
    traj = solve(lambda x, y: (y[1], -y[0]), 0.0, 2 * math.pi, (1.0, 0.0), RTOL, 1e-12)
    np.testing.assert_allclose(traj.final_state, [1.0, 0.0], atol=100 * RTOL)


def test_dense_output_between_nodes():
    traj = solve(lambda x, y: (y[1], -y[0]), 0.0, 10.0, (0.0, 1.0), 1e-10, 1e-12)
    xq = np.linspace(0.0, 10.0, 777)
    np.testing.assert_allclose(traj(xq)[:, 0], np.sin(xq), atol=1e-8)
    np.testing.assert_allclose(traj.derivative(xq)[:, 0], np.cos(xq), atol=1e-7)
    # interpolant reproduces the accepted nodes exactly
    np.testing.assert_allclose(traj(traj.x), traj.states, atol=1e-14)


def test_scalar_query_shape():
    traj = solve(lambda x, y: (y[0],), 0.0, 1.0, (1.0,))
    assert traj(0.5).shape == (1,)
    assert traj(np.array([0.2, 0.5])).shape == (2, 1)


def test_backward_integration():
    traj = solve(lambda x, y: (y[0],), 1.0, 0.0, (math.e,), RTOL, 1e-12)
    assert traj.direction == -1.0
    assert traj.final_state[0] == pytest.approx(1.0, rel=10 * RTOL)
    assert traj(0.5)[0] == pytest.approx(math.exp(0.5), rel=1e-9)


def test_dense_output_outside_range():
    traj = solve(lambda x, y: (y[0],), 0.0, 1.0, (1.0,))
    with pytest.raises(ValueError):
        traj(1.5)


@settings(max_examples=20, deadline=None)
@given(rate=st.floats(-3.0, 3.0), length=st.floats(0.1, 3.0))
def test_reversibility(rate, length):
    fwd = solve(lambda x, y: (rate * y[0] * math.cos(x),), 0.0, length, (1.0,), 1e-11, 1e-13)
    back = solve(lambda x, y: (rate * y[0] * math.cos(x),), length, 0.0, tuple(fwd.final_state), 1e-11, 1e-13)
    assert back.final_state[0] == pytest.approx(1.0, rel=1e-9)


def test_convergence_with_tolerance():
    errs = []
    for tol in (1e-6, 1e-8, 1e-10):
        traj = solve(lambda x, y: (y[1], -y[0]), 0.0, 20.0, (0.0, 1.0), tol, tol * 1e-2)
        errs.append(abs(traj.final_state[0] - math.sin(20.0)))
    assert errs[0] > errs[1] > errs[2]
    assert errs[2] < 1e-8


def test_tolerance_validation():
    with pytest.raises(ValueError):
        OdeProblem(lambda x, y: (y[0],), 0.0, 1.0, (1.0,), rel_tol=0.0)
    with pytest.raises(ValueError):
        OdeProblem(lambda x, y: (y[0],), 0.0, 1.0, (1.0,), rel_tol=0.1)
    with pytest.raises(ValueError):
        OdeProblem(lambda x, y: (y[0],), 1.0, 1.0, (1.0,))


def test_blow_up_reports_position():
    # y' = y^2, y(0) = 1 blows up at x = 1
    with pytest.raises((StepSizeUnderflow, NonFiniteField)) as info:
        integrate(OdeProblem(lambda x, y: (y[0] ** 2,), 0.0, 2.0, (1.0,)))
    assert info.value.x == pytest.approx(1.0, abs=1e-3)
    assert info.value.to_record()["x"] == info.value.x


def test_non_finite_field():
    def field(x, y):
        return (math.nan if x > 0.5 else 1.0,)

    with pytest.raises(NonFiniteField):
        solve(field, 0.0, 1.0, (0.0,))
