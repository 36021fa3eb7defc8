import math

import numpy as np
import pytest

from qhjquant.assembly import SELECTORS, export_series, node_positions
from qhjquant.errors import SelectorRequiresBStar
from qhjquant.potential import PhysicalConstants
from qhjquant.reference import classical_action

from conftest import QUARTIC, bstar, eigen, numerov, wavefunction

UNIT = PhysicalConstants()


def _series(what, lam=1.0, n=2, points=2001):
    wf = wavefunction(lam, n)
    cl = classical_action(QUARTIC, UNIT, wf.E, tp=wf.tp)
    return export_series(wf, eigen(lam, n), bstar(lam, n), cl, what, points)


class TestWavefunction:
    def test_harmonic_ground_exact(self):
        wf = wavefunction(0.0, 0)
        xs = np.linspace(*wf.cutoffs, 3001)
        exact = math.pi**-0.25 * np.exp(-(xs**2) / 2)
        assert np.max(np.abs(wf(xs) - exact)) <= 1e-6

    def test_quartic_against_numerov(self):
        wf = wavefunction(1.0, 2)
        ref = numerov(1.0, 2)
        lo, hi = max(wf.cutoffs[0], ref.x[0]), min(wf.cutoffs[1], ref.x[-1])
        xs = np.linspace(lo, hi, 4001)
        assert np.max(np.abs(wf(xs) - ref(xs))) <= 1e-4

    @pytest.mark.parametrize("lam,n", [(1.0, 0), (1.0, 1), (1.0, 2), (0.01, 2)])
    def test_normalized(self, lam, n):
        assert wavefunction(lam, n).norm_integral() == pytest.approx(1.0, abs=1e-10)

    @pytest.mark.parametrize("lam,n", [(1.0, 0), (1.0, 1), (1.0, 2), (0.1, 1), (0.002, 2)])
    def test_matching_jumps(self, lam, n):
        jumps = wavefunction(lam, n).matching_jumps()
        assert max(jumps.values()) <= 1e-6

    @pytest.mark.parametrize("n", [1, 2])
    def test_tail_decays_without_sign_change(self, n):
        wf = wavefunction(1.0, n)
        xs = np.linspace(wf.tp.x2, wf.cutoffs[1], 500)
        tail = wf(xs)
        assert np.all(np.sign(tail) == np.sign(tail[0]))
        assert np.all(np.diff(np.abs(tail)) < 0)
        assert abs(tail[-1]) < 1e-10

    def test_zero_outside_cutoffs(self):
        wf = wavefunction(1.0, 2)
        assert wf(wf.cutoffs[1] + 1.0) == 0.0
        assert wf.derivative(wf.cutoffs[0] - 1.0) == 0.0

    def test_branch_tags(self):
        wf = wavefunction(1.0, 2)
        assert list(wf.branch([wf.tp.x1 - 0.1, 0.0, wf.tp.x2 + 0.1])) == ["I", "II", "III"]

    def test_amplitudes(self):
        wf = wavefunction(1.0, 2)
        assert wf.A_I > 0
        assert wf.A_II == pytest.approx(wf.scale * wf.allowed.A_II)
        assert wf.A_III == pytest.approx(wf.A_I, rel=1e-6)  # even state of an even well


class TestBIndependence:
    def test_three_b_values(self):
        b_star = bstar(1.0, 2).b_star
        wfs = [wavefunction(1.0, 2, b) for b in (0.5 * b_star, b_star, 2.0 * b_star)]
        xs = np.linspace(*wfs[0].cutoffs, 4001)
        ref = wfs[1](xs)
        for wf in (wfs[0], wfs[2]):
            assert np.max(np.abs(wf(xs) - ref)) <= 1e-6

    def test_nodes_invariant(self):
        b_star = bstar(1.0, 2).b_star
        a = node_positions(wavefunction(1.0, 2, 0.5 * b_star))
        b = node_positions(wavefunction(1.0, 2, 2.0 * b_star))
        np.testing.assert_allclose(a, b, atol=1e-6)


class TestNodes:
    def test_ground_state_empty(self):
        assert node_positions(wavefunction(1.0, 0)) == []

    def test_symmetric_and_match_numerov(self):
        pos = node_positions(wavefunction(1.0, 2))
        assert len(pos) == 2
        assert pos[0] == pytest.approx(-pos[1], abs=1e-7)
        np.testing.assert_allclose(pos, numerov(1.0, 2).nodes, atol=1e-4)


class TestSeries:
    def test_psi_series(self):
        s = _series("psi")
        assert s.columns == ("x", "branch", "psi")
        assert set(s.data["branch"]) == {"I", "II", "III"}
        inner = s.data["psi"][s.data["branch"] == "II"]
        assert np.count_nonzero(np.diff(np.sign(inner))) == 2
        assert len(s) == 2001
        assert len(list(s.rows())) == 2001

    def test_envelope_product(self):
        s = _series("envelope")
        np.testing.assert_allclose(s.data["psi"], s.data["sine_factor"] * s.data["inv_sqrt_X_prime"], atol=1e-10)
        # the b* representation reproduces the assembled wavefunction
        wf = wavefunction(1.0, 2)
        np.testing.assert_allclose(s.data["psi"], wf(s.data["x"]), atol=1e-6)

    def test_momentum(self):
        s = _series("momentum")
        xp = s.data["X_prime"]
        np.testing.assert_allclose(xp, xp[::-1], atol=1e-7 * xp.max())
        assert s.data["x"][0] == pytest.approx(-1.42811, abs=1e-5)
        assert s.data["p_c"][0] == pytest.approx(0.0, abs=1e-6)
        assert s.data["p_c"][-1] == pytest.approx(0.0, abs=1e-6)
        assert np.all(xp > 0)

    def test_action_real(self):
        s = _series("action_real")
        X, W = s.data["X"], s.data["W_C"]
        assert X[0] == 0.0 and W[0] == 0.0
        d = (X - W)[1:-1]
        assert np.count_nonzero(np.diff(np.sign(d))) >= 2  # X waves around W_C
        assert X[-1] == pytest.approx(2.5 * math.pi, abs=1e-8)

    def test_action_imag(self):
        s = _series("action_imag")
        assert set(s.data["branch"]) == {"I", "II", "III"}
        Y = s.data["Y"]
        assert np.all(np.isfinite(Y))
        # deep in the forbidden regions Y grows like the decay exponent
        assert Y[0] > Y[len(Y) // 2] + 20
        assert Y[-1] > Y[len(Y) // 2] + 20

    def test_meta(self):
        s = _series("action_real")
        assert s.meta["n"] == 2
        assert s.meta["delta_X"] == pytest.approx(2.5 * math.pi, abs=1e-8)

    @pytest.mark.parametrize("what", SELECTORS[1:])
    def test_requires_b_star(self, what):
        wf = wavefunction(1.0, 2)
        with pytest.raises(SelectorRequiresBStar):
            export_series(wf, eigen(1.0, 2), None, None, what)

    def test_unknown_selector(self):
        wf = wavefunction(1.0, 2)
        with pytest.raises(ValueError):
            export_series(wf, eigen(1.0, 2), None, None, "phase")
