"""Coupled velocity/director dynamics: coefficients, operators, stepping."""

import math

import numpy as np
import pytest

from nematicflow import (
    CoefficientError,
    DivergenceError,
    GridSpec,
    LeslieCoefficients,
    SolverConfig,
    SpectralField,
    State,
    VectorField2,
    constant_vector,
    divergence_residual,
    ericksen_stress,
    generate_initial,
    gl_force,
    gl_gradient,
    iterate,
    l2_norm,
    laplacian,
    leray_project,
    leslie_stress,
    rhs,
    run,
    step,
    strain_and_vorticity,
    to_physical,
    vector_l2_norm,
)

from _frozen import GL_FORCE_AT_2, ODE_Y0


class _GeneralView(LeslieCoefficients):
    """Identical coefficient values routed through the general-form code path."""

    @property
    def is_ansatz(self):
        return False


def _random_state(grid, seed=0):
    u, d = generate_initial(grid, profile="random", seed=seed)
    return State(grid, u, d, 0.0)


def _vector_diff(a, b):
    return math.hypot(l2_norm(a.x - b.x), l2_norm(a.y - b.y))


def _exp_factor(grid, rate, dt):
    k2 = grid.tables()["radius"] ** 2
    return np.exp(-rate * k2 * dt)


def _reference_imex1(state, coeffs, dt):
    """Integrating-factor Euler assembled from the full-spectrum operators.

    The implicit part is the exact per-mode exponential of the viscous and
    director-diffusion terms; everything else in the right side is explicit.
    """
    grid = state.grid
    mom, direc = rhs(state, coeffs)
    visc = VectorField2(laplacian(state.u.x), laplacian(state.u.y)) * coeffs.nu
    diff = VectorField2(laplacian(state.d.x), laplacian(state.d.y)) * coeffs.kappa
    xu = leray_project(mom - visc)
    xd = direc - diff
    eu = _exp_factor(grid, coeffs.nu, dt)
    ed = _exp_factor(grid, coeffs.kappa, dt)

    def advance(comp, x, e):
        return SpectralField(grid, e * (comp.coeffs + dt * x.coeffs), True)

    u_new = VectorField2(advance(state.u.x, xu.x, eu), advance(state.u.y, xu.y, eu))
    d_new = VectorField2(advance(state.d.x, xd.x, ed), advance(state.d.y, xd.y, ed))
    return State(grid, u_new, d_new, state.t + dt)


class TestCoefficients:
    def test_default_set_and_derived_quantities(self):
        """The default set gives lambda1 = -1, lambda2 = 2, kappa = 1."""
        c = LeslieCoefficients.ansatz(nu=1.5)
        assert (c.mu1, c.mu2, c.mu3, c.mu4, c.mu5, c.mu6) == (
            1.0, -1.0, 0.0, 3.0, 3.0, 1.0)
        assert c.lambda1 == -1.0
        assert c.lambda2 == 2.0
        assert c.nu == 1.5
        assert c.kappa == 1.0
        assert c.is_ansatz

    def test_rejects_nonpositive_mu4(self):
        """mu4 = 2 nu must be positive."""
        with pytest.raises(CoefficientError):
            LeslieCoefficients(1.0, -1.0, 0.0, 0.0, 3.0, 1.0)

    def test_rejects_nonnegative_lambda1(self):
        """lambda1 = mu2 - mu3 must be negative."""
        with pytest.raises(CoefficientError):
            LeslieCoefficients(1.0, 1.0, 0.0, 2.0, 3.0, 1.0)

    def test_rejects_negative_mu1(self):
        with pytest.raises(CoefficientError):
            LeslieCoefficients(-0.5, -1.0, 0.0, 2.0, 3.0, 1.0)

    def test_rejects_dissipativity_violation(self):
        """Large |lambda2| with small mu5 + mu6 fails both admissible branches."""
        with pytest.raises(CoefficientError):
            LeslieCoefficients(1.0, -1.0, 0.0, 2.0, 5.0, -4.9)

    def test_accepts_non_default_admissible_set(self):
        """A coefficient set off the default ansatz can still be valid."""
        c = LeslieCoefficients(0.5, -2.0, 0.0, 1.0, 1.5, 0.75)
        assert not c.is_ansatz
        assert c.lambda1 == -2.0


class TestOperators:
    def test_strain_and_vorticity_of_shear(self, grid32):
        """u = (sin y, 0): A = [[0, cos y / 2], [cos y / 2, 0]], w_12 = cos y / 2."""
        _, y = grid32.points()
        u = VectorField2(
            SpectralField.from_samples(grid32, np.sin(y)),
            SpectralField.zero(grid32),
        )
        a, w = strain_and_vorticity(u)
        half_cos = 0.5 * np.cos(y)
        assert np.max(np.abs(to_physical(a.xy) - half_cos)) <= 1e-13
        assert np.max(np.abs(to_physical(w.xy) - half_cos)) <= 1e-13
        assert np.max(np.abs(to_physical(w.yx) + half_cos)) <= 1e-13
        assert l2_norm(a.xx) <= 1e-14
        assert l2_norm(a.yy) <= 1e-14

    def test_gl_gradient_on_constant_director(self, grid16):
        """grad_d W at d = (2, 0) is ((|d|^2 - 1) d_x, 0) = (6, 0)."""
        d = constant_vector(grid16, (2.0, 0.0))
        g = gl_gradient(d)
        assert g.x.mean == pytest.approx(GL_FORCE_AT_2, rel=1e-14)
        assert abs(g.y.mean) <= 1e-14
        assert l2_norm(g.x) == pytest.approx(
            2.0 * math.pi * GL_FORCE_AT_2, rel=1e-13)

    def test_gl_force_balances_at_unit_director(self, grid16):
        """lap d - grad_d W vanishes at the uniform unit director."""
        d = constant_vector(grid16, (1.0, 0.0))
        g = gl_force(d)
        assert vector_l2_norm(g) <= 1e-14

    def test_ericksen_stress_of_constant_director_vanishes(self, grid16):
        d = constant_vector(grid16, (2.0, 0.0))
        e = ericksen_stress(d)
        assert max(l2_norm(f) for f in (e.xx, e.xy, e.yx, e.yy)) <= 1e-14

    def test_leslie_stress_at_rest(self, grid16):
        """u = 0, d = (2, 0): the stress reduces to -(G x d) with G = (-6, 0).

        With the default coefficients the only surviving term is
        mu_2 N (x) d = [[12, 0], [0, 0]].
        """
        u = VectorField2.zero(grid16)
        d = constant_vector(grid16, (2.0, 0.0))
        sigma = leslie_stress(u, d, LeslieCoefficients.ansatz())
        assert sigma.xx.mean == pytest.approx(12.0, rel=1e-13)
        assert abs(sigma.xy.mean) <= 1e-13
        assert abs(sigma.yx.mean) <= 1e-13
        assert abs(sigma.yy.mean) <= 1e-13

    def test_rhs_vanishes_at_the_uniform_unit_state(self, grid32):
        """u = 0, d = (1, 0) is an equilibrium of both equations."""
        u, d = generate_initial(grid32, profile="rest-unit")
        mom, direc = rhs(State(grid32, u, d, 0.0), LeslieCoefficients.ansatz())
        assert vector_l2_norm(mom) <= 1e-13
        assert vector_l2_norm(direc) <= 1e-13

    def test_rhs_of_uniform_director_is_the_relaxation_ode(self, grid16):
        """At u = 0, d = (r, 0): dd/dt = -(r^2 - 1) r, no flow is generated."""
        u, d = generate_initial(grid16, profile="rest-uniform",
                                director=(ODE_Y0, 0.0))
        mom, direc = rhs(State(grid16, u, d, 0.0), LeslieCoefficients.ansatz())
        assert vector_l2_norm(mom) <= 1e-12
        assert direc.x.mean == pytest.approx(-GL_FORCE_AT_2, rel=1e-13)
        assert abs(direc.y.mean) <= 1e-13

    def test_general_path_reduces_to_the_default_path(self, grid32):
        """Forcing the general-coefficient branch reproduces the default rhs.

        The identity (3/2) J d + (1/2) J^T d = w d - (lambda_2/lambda_1) A d
        holds exactly for the default values, so both code paths must agree
        to roundoff.
        """
        state = _random_state(grid32, seed=3)
        fast = LeslieCoefficients.ansatz()
        slow = _GeneralView(1.0, -1.0, 0.0, 2.0, 3.0, 1.0)
        assert not slow.is_ansatz
        mom_f, dir_f = rhs(state, fast)
        mom_s, dir_s = rhs(state, slow)
        scale = vector_l2_norm(mom_f) + vector_l2_norm(dir_f)
        assert _vector_diff(mom_f, mom_s) <= 1e-12 * scale
        assert _vector_diff(dir_f, dir_s) <= 1e-12 * scale


class TestStepping:
    def test_engine_matches_the_reference_integrating_factor_step(self, grid32):
        """One solver step equals the full-spectrum reference assembly.

        Dual route: the production half-spectrum engine against an
        independently assembled exp(-nu k^2 dt) (u_hat + dt P N(u))_hat step
        built from the documented operators.
        """
        state = _random_state(grid32, seed=1)
        coeffs = LeslieCoefficients.ansatz()
        dt = 1e-3
        cfg = SolverConfig(dt=dt, t_end=dt, scheme="imex1")
        engine_state = step(state, coeffs, cfg)
        ref_state = _reference_imex1(state, coeffs, dt)
        scale = vector_l2_norm(state.u) + vector_l2_norm(state.d)
        assert _vector_diff(engine_state.u, ref_state.u) <= 1e-13 * scale
        assert _vector_diff(engine_state.d, ref_state.d) <= 1e-13 * scale
        assert engine_state.t == pytest.approx(dt)

    def test_two_stage_scheme_matches_its_reference(self, grid32):
        """The Heun-type variant equals its two-evaluation reference."""
        state = _random_state(grid32, seed=2)
        coeffs = LeslieCoefficients.ansatz()
        dt = 1e-3
        grid = grid32
        stage1 = _reference_imex1(state, coeffs, dt)
        mom2, dir2 = rhs(stage1, coeffs)
        visc2 = VectorField2(laplacian(stage1.u.x), laplacian(stage1.u.y)) * coeffs.nu
        diff2 = VectorField2(laplacian(stage1.d.x), laplacian(stage1.d.y)) * coeffs.kappa
        xu2 = leray_project(mom2 - visc2)
        xd2 = dir2 - diff2
        mom1, dir1 = rhs(state, coeffs)
        visc1 = VectorField2(laplacian(state.u.x), laplacian(state.u.y)) * coeffs.nu
        diff1 = VectorField2(laplacian(state.d.x), laplacian(state.d.y)) * coeffs.kappa
        xu1 = leray_project(mom1 - visc1)
        xd1 = dir1 - diff1
        eu = _exp_factor(grid, coeffs.nu, dt)
        ed = _exp_factor(grid, coeffs.kappa, dt)

        def heun(comp, x1, x2, e):
            c = e * comp.coeffs + 0.5 * dt * (e * x1.coeffs + x2.coeffs)
            return SpectralField(grid, c, True)

        ref_u = VectorField2(heun(state.u.x, xu1.x, xu2.x, eu),
                             heun(state.u.y, xu1.y, xu2.y, eu))
        ref_d = VectorField2(heun(state.d.x, xd1.x, xd2.x, ed),
                             heun(state.d.y, xd1.y, xd2.y, ed))
        cfg = SolverConfig(dt=dt, t_end=dt, scheme="imex2")
        engine_state = step(state, coeffs, cfg)
        scale = vector_l2_norm(state.u) + vector_l2_norm(state.d)
        assert _vector_diff(engine_state.u, ref_u) <= 1e-12 * scale
        assert _vector_diff(engine_state.d, ref_d) <= 1e-12 * scale

    def test_velocity_invariants_along_a_run(self, grid32):
        """Divergence residual and the velocity mean stay at machine zero."""
        state = _random_state(grid32, seed=4)
        cfg = SolverConfig(dt=1e-3, t_end=0.05, scheme="imex1")
        final, records = run(state, LeslieCoefficients.ansatz(), cfg)
        assert divergence_residual(final.u) <= 1e-12
        assert abs(final.u.x.mean) <= 1e-15
        assert abs(final.u.y.mean) <= 1e-15
        assert max(r.div_residual for r in records) <= 1e-12

    def test_energy_decreases_along_the_flow(self, grid32):
        """Total energy is nonincreasing along a resolved relaxation run."""
        state = _random_state(grid32, seed=5)
        cfg = SolverConfig(dt=1e-3, t_end=0.1, scheme="imex1")
        _, records = run(state, LeslieCoefficients.ansatz(), cfg)
        energies = [r.e_total for r in records]
        diffs = np.diff(energies)
        assert np.all(diffs <= 1e-12)

    def test_run_is_deterministic(self, grid32):
        """Two runs from the same state produce bit-identical results."""
        coeffs = LeslieCoefficients.ansatz()
        cfg = SolverConfig(dt=1e-3, t_end=0.02)
        f1, _ = run(_random_state(grid32, seed=6), coeffs, cfg)
        f2, _ = run(_random_state(grid32, seed=6), coeffs, cfg)
        assert np.array_equal(f1.u.x.coeffs, f2.u.x.coeffs)
        assert np.array_equal(f1.d.y.coeffs, f2.d.y.coeffs)

    def test_iterate_agrees_with_run(self, grid32):
        """The lockstep generator ends at the same state as run()."""
        coeffs = LeslieCoefficients.ansatz()
        cfg = SolverConfig(dt=1e-3, t_end=0.02, record_cadence=5)
        final_run, _ = run(_random_state(grid32, seed=7), coeffs, cfg)
        last = None
        count = 0
        for _, snap in iterate(_random_state(grid32, seed=7), coeffs, cfg):
            last = snap
            count += 1
        assert np.array_equal(last.u.x.coeffs, final_run.u.x.coeffs)
        assert np.array_equal(last.d.x.coeffs, final_run.d.x.coeffs)
        assert count == 1 + cfg.n_steps // cfg.record_cadence

    def test_record_cadence_and_endpoints(self, grid32):
        """Records start at t = 0 and end exactly at t_end."""
        state = _random_state(grid32, seed=8)
        cfg = SolverConfig(dt=1e-3, t_end=0.01, record_cadence=2)
        _, records = run(state, LeslieCoefficients.ansatz(), cfg)
        assert records[0].t == 0.0
        assert records[-1].t == pytest.approx(0.01, rel=1e-12)
        assert all(len(r.d_terms) == 5 for r in records)

    @pytest.mark.filterwarnings("ignore::RuntimeWarning")
    def test_blowup_raises_divergence_error(self, grid16):
        """A run driven past stability reports the failing step.

        Overflow warnings on the way to the non-finite state are expected;
        the contract is the typed error, raised before results are returned.
        """
        u, d = generate_initial(grid16, profile="random", seed=9,
                                amplitude_u=20.0, amplitude_d=20.0)
        state = State(grid16, u, d, 0.0)
        cfg = SolverConfig(dt=0.5, t_end=50.0)
        with pytest.raises(DivergenceError):
            run(state, LeslieCoefficients.ansatz(), cfg, record=False)

    def test_solver_config_validation(self):
        """Bad dt, t_end, scheme, cadence, or incompatible t_end/dt raise."""
        with pytest.raises(ValueError):
            SolverConfig(dt=0.0, t_end=1.0)
        with pytest.raises(ValueError):
            SolverConfig(dt=1e-3, t_end=0.0)
        with pytest.raises(ValueError):
            SolverConfig(dt=1e-3, t_end=1.0, scheme="rk4")
        with pytest.raises(ValueError):
            SolverConfig(dt=1e-3, t_end=1.0, record_cadence=0)
        with pytest.raises(ValueError):
            SolverConfig(dt=3e-3, t_end=1.0)
        assert SolverConfig(dt=1e-3, t_end=1.0).n_steps == 1000


class TestSchemeAccuracy:
    def test_uniform_director_ode_short_horizon(self, grid16):
        """Both schemes track y' = -(y^2 - 1) y; the two-stage one is sharper.

        Closed form y(t) = (1 - (3/4) exp(-2 t))^(-1/2) from y(0) = 2.  The
        check sits at t = 0.25, inside the fast initial transient where the
        discretization error peaks; the tolerance reflects that peak.
        """
        exact = (1.0 - 0.75 * math.exp(-0.5)) ** -0.5
        errors = {}
        for scheme in ("imex1", "imex2"):
            u, d = generate_initial(grid16, profile="rest-uniform",
                                    director=(ODE_Y0, 0.0))
            cfg = SolverConfig(dt=1e-3, t_end=0.25, scheme=scheme,
                               record_cadence=250)
            final, _ = run(State(grid16, u, d, 0.0),
                           LeslieCoefficients.ansatz(), cfg)
            errors[scheme] = abs(final.d.x.mean - exact) / exact
        assert errors["imex2"] <= 5e-6
        assert errors["imex1"] > 10.0 * errors["imex2"]

    def test_convergence_orders(self, grid16):
        """Halving dt cuts the error by ~2 (one-stage) and ~4 (two-stage).

        Errors are measured against a dt/8 run of the same scheme, which is
        accurate enough to expose the leading-order ratio.
        """
        coeffs = LeslieCoefficients.ansatz()
        t_end = 0.2

        def final_state(scheme, dt):
            cfg = SolverConfig(dt=dt, t_end=t_end, scheme=scheme,
                               record_cadence=10 ** 9)
            final, _ = run(_random_state(grid16, seed=10), coeffs, cfg,
                           record=False)
            return final

        for scheme, low, high in (("imex1", 1.6, 2.4), ("imex2", 3.3, 4.7)):
            ref = final_state(scheme, 5e-4)
            errs = []
            for dt in (4e-3, 2e-3):
                sol = final_state(scheme, dt)
                errs.append(_vector_diff(sol.u, ref.u)
                            + _vector_diff(sol.d, ref.d))
            ratio = errs[0] / errs[1]
            assert low <= ratio <= high, (scheme, ratio)
