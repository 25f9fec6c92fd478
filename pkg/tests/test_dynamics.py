import math

import numpy as np
import pytest
from scipy.integrate import solve_ivp

from qbattery.bath import BathSpec
from qbattery.dynamics import (Basis, DensityMatrix, default_steps, evolve, initial_dark_state)
from qbattery.errors import BasisError, DomainError, IntegrationError
from qbattery.hamiltonian import DriveSchedule
from qbattery.lindblad import Variant, build_generator
from qbattery.observables import gibbs_state, to_bare_basis


class TestInitialState:
    def test_dark_state(self):
        rho = initial_dark_state()
        np.testing.assert_array_equal(rho.entries, np.diag([0, 1, 0]))
        assert np.trace(rho.entries) == 1
        np.testing.assert_array_equal(rho.entries @ rho.entries, rho.entries)
        assert rho.basis is Basis.EIGEN

    def test_bare_basis_is_empty_battery(self, sched):
        bare = to_bare_basis(initial_dark_state(), sched, 0.0)
        np.testing.assert_allclose(bare.entries, np.diag([1, 0, 0]), atol=1e-15)


class TestEvolve:
    def test_isolated_dark_state_is_stationary(self, sched):
        traj = evolve(sched, BathSpec(eta_g2=0.0), 200.0, Variant.ADIABATIC)
        assert abs(traj.final.entries[1, 1] - 1.0) < 1e-9

    def test_optimal_time_dark_population(self, sched, bath):
        traj = evolve(sched, bath, 9.93)
        assert traj.final.entries[1, 1].real == pytest.approx(0.99, abs=0.01)

    def test_trajectory_shape_and_validity(self, sched, bath):
        traj = evolve(sched, bath, 9.93)
        assert traj.s[0] == 0.0 and traj.s[-1] == 1.0
        assert np.all(np.diff(traj.s) > 0)
        assert traj.steps == 20000
        for _, rho in traj.samples[::50]:
            assert rho.is_valid()
        assert traj.trace_drift < 1e-9
        assert traj.min_eigenvalue >= -1e-8
        assert traj.max_violation <= 1e-6

    def test_doubling_steps_converged(self, sched, bath):
        base = evolve(sched, bath, 9.93)
        fine = evolve(sched, bath, 9.93, steps=2 * base.steps)
        assert np.abs(fine.rho[-1] - base.rho[-1]).max() < 1e-6

    def test_fourth_order(self, sched, bath):
        finals = [evolve(sched, bath, 9.93, steps=n).rho[-1] for n in (1000, 2000, 4000)]
        coarse = np.abs(finals[0] - finals[1]).max()
        fine = np.abs(finals[1] - finals[2]).max()
        assert math.log2(coarse / fine) >= 3.5

    def test_matches_adaptive_reference(self, sched, bath):
        # independent route: direct-sum generator and scipy's DOP853
        def rhs(s, y):
            return build_generator(sched, bath, min(max(s, 0.0), 1.0), 9.93).matrix @ y
        ref = solve_ivp(rhs, (0.0, 1.0), initial_dark_state().entries.reshape(9),
                        method="DOP853", rtol=1e-11, atol=1e-13)
        traj = evolve(sched, bath, 9.93)
        assert np.abs(traj.rho[-1] - ref.y[:, -1].reshape(3, 3)).max() < 1e-8

    def test_variants_agree_for_slow_driving(self, sched, bath):
        full = evolve(sched, bath, 500.0, Variant.FULL).final.populations
        adia = evolve(sched, bath, 500.0, Variant.ADIABATIC).final.populations
        assert np.abs(full - adia).max() < 5e-3

    @pytest.mark.slow
    def test_long_time_approaches_gibbs(self, sched, bath):
        # at tf = 5000 the populations are still 0.027 away; 10000 is the
        # first round value inside 0.02
        traj = evolve(sched, bath, 10_000.0)
        gibbs = gibbs_state(sched, 1.0, bath.beta).populations
        assert np.abs(traj.final.populations - gibbs).max() < 0.02

    def test_default_steps(self):
        assert default_steps(1.0) == 20000
        assert default_steps(1000.0) == 200000
        assert default_steps(1000.3) == 201000


class TestEvolveErrors:
    def test_bare_initial_state(self, sched, bath):
        with pytest.raises(BasisError):
            evolve(sched, bath, 1.0, rho0=DensityMatrix(np.eye(3) / 3, Basis.BARE))

    def test_invalid_initial_state(self, sched, bath):
        with pytest.raises(DomainError):
            evolve(sched, bath, 1.0, rho0=DensityMatrix(np.diag([1.5, -0.5, 0.0])))

    @pytest.mark.parametrize("tf", [0.0, -1.0, math.inf])
    def test_bad_tf(self, sched, bath, tf):
        with pytest.raises(DomainError):
            evolve(sched, bath, tf)

    def test_too_few_steps(self, sched, bath):
        with pytest.raises(DomainError):
            evolve(sched, bath, 1.0, steps=50)

    def test_non_convergence_carries_diagnostics(self, sched):
        with pytest.raises(IntegrationError) as info:
            evolve(sched, BathSpec(eta_g2=1e4), 1.0, steps=100, max_steps=2000)
        assert info.value.diagnostics["steps"] == 2000
        assert "trace_drift" in info.value.diagnostics

    def test_wrong_shape(self):
        with pytest.raises(DomainError):
            DensityMatrix(np.eye(2))
