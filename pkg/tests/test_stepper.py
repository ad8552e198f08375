import math

import numpy as np
import pytest

import tpgsim as t
from tpgsim.errors import PositivityBreached
from tpgsim.stepper import _cg_diffusion_solve

BULLY = dict(D_V=0.05, D_B=0.05, D_G=0.05, chi_B=2.0, chi_G=2.0,
             Phi_V=0.5, Phi_B=1.0, Psi=10.0)


def grid(n=16, L=np.pi):
    return t.GridSpec(L, L, n, n)


def constant_state(g, u0, v0, w0):
    return t.State(t.Field.full(g, u0), t.Field.full(g, v0),
                   t.Field.full(g, w0), 0.0)


def decay_model():
    # pure-reaction model: du/dt = -u, dv/dt = -v when spatially constant
    return t.preset("general", dict(
        D_u=0.1, D_v=0.1, D_w=0.1,
        f={"kind": "constant", "c": 0.0},
        g1={"kind": "constant", "c": 0.0},
        g2={"kind": "constant", "c": 0.0},
        h1={"kind": "affine", "a": 0.0, "b": -1.0},
        h2={"kind": "affine", "a": -1.0, "b": 0.0},
        chi1={"kind": "constant", "c": 0.0},
        chi2={"kind": "constant", "c": 0.0},
    ))


def test_cg_solves_identity_limit():
    # dt -> 0 reduces (I - dt D L) x = b to x = b
    g = grid(8)
    rng = np.random.default_rng(0)
    b = rng.random((3, 8, 8))
    x = _cg_diffusion_solve(b, np.array([0.1, 0.1, 0.1]), 1e-14, g, 1e-14)
    assert np.abs(x - b).max() < 1e-10


def test_cg_solves_cosine_mode_exactly():
    # (I - dt D L) has the discrete cosine mode as eigenvector; the solve must
    # return mode / (1 + dt D lambda_h)
    g = grid(16)
    m, dt, D = 2, 0.05, 0.3
    mode = t.Field.from_function(
        g, lambda X, Y: np.cos(m * X)).values
    lam = (4.0 / g.hx**2) * np.sin(m * np.pi * g.hx / (2 * np.pi))**2
    b = np.stack([mode, mode, mode])
    x = _cg_diffusion_solve(b, np.array([D, D, D]), dt, g, 1e-14)
    assert np.abs(x - mode / (1.0 + dt * D * lam)).max() < 1e-10


def test_cg_preserves_mean_exactly():
    g = grid(16)
    rng = np.random.default_rng(1)
    b = rng.random((3, 16, 16))
    # a loose tolerance must not break mean preservation (mass conservation)
    x = _cg_diffusion_solve(b, np.array([0.5, 0.5, 0.5]), 0.05, g, 1e-3)
    for i in range(3):
        assert abs(x[i].mean() - b[i].mean()) < 1e-14


def test_constant_steady_state_is_fixed_point():
    m = t.preset("bullying", BULLY)
    ss = t.trivial_steady_state(m, 1.0)
    g = grid(16)
    s0 = constant_state(g, ss.ubar, 0.0, 1.0)
    cfg = t.StepperConfig(t_end=2.0)
    series, final = t.run(s0, m, cfg, out_dt=0.5)
    assert np.abs(final.u.values - ss.ubar).max() < 1e-9
    assert np.all(final.v.values == 0.0)
    assert np.abs(final.w.values - 1.0).max() < 1e-12


def test_exponential_decay_ode_oracle():
    m = decay_model()
    g = grid(8)
    s0 = constant_state(g, 1.0, 1.0, 1.0)
    cfg = t.StepperConfig(t_end=1.0, dt_max=1e-3)
    _, final = t.run(s0, m, cfg)
    assert final.t == pytest.approx(1.0, abs=1e-12)
    assert np.abs(final.u.values - math.exp(-1.0)).max() < 0.01
    assert np.abs(final.v.values - math.exp(-1.0)).max() < 0.01


@pytest.mark.parametrize("scheme,expected_order", [("imex-euler", 1),
                                                   ("imex-midpoint", 2)])
def test_temporal_self_convergence(scheme, expected_order):
    # fixed-dt integration of a coupled, spatially varying state; halving dt
    # must cut the error by ~2^order
    m = t.preset("bullying", BULLY)
    g = grid(16)
    X, Y = g.cell_centers()
    s0 = t.State(t.Field(g, 0.25 + 0.05 * np.cos(X) * np.cos(Y)),
                 t.Field(g, 0.10 + 0.02 * np.cos(Y)),
                 t.Field(g, 1.00 + 0.05 * np.cos(X)), 0.0)
    t_end = 0.5

    def integrate_fixed(dt):
        cfg = t.StepperConfig(t_end=t_end, dt_max=dt, scheme=scheme)
        s = s0.copy()
        n = round(t_end / dt)
        for _ in range(n):
            s = t.step(s, m, cfg, dt)
        return np.stack([s.u.values, s.v.values, s.w.values])

    sols = [integrate_fixed(dt) for dt in (0.02, 0.01, 0.005)]
    e1 = np.abs(sols[0] - sols[2]).max()
    e2 = np.abs(sols[1] - sols[2]).max()
    ratio = e1 / e2
    # Richardson: errors vs the dt/4 solution differ by (4^p-1)/(2^p-1)... for
    # small p just demand the observed reduction bracket the expected order
    expected = 2.0**expected_order * (1 + 2.0**-expected_order)
    assert expected * 0.75 < ratio < expected * 1.25


def test_guardian_mass_conserved_to_solver_tolerance():
    m = t.preset("bullying", BULLY)
    g = grid(32)
    X, Y = g.cell_centers()
    s0 = t.State(t.Field(g, 0.25 + 0.01 * np.exp(-X - Y)),
                 t.Field(g, 0.01 * np.exp(-X - Y)),
                 t.Field(g, np.ones_like(X)), 0.0)
    cfg = t.StepperConfig(t_end=5.0, linear_tol=1e-12)
    series, _ = t.run(s0, m, cfg, out_dt=0.5)
    m0 = series.mass_w[0]
    drift = max(abs(mw - m0) for mw in series.mass_w)
    assert drift <= 10 * cfg.linear_tol * abs(m0)


def test_run_is_deterministic():
    m = t.preset("bullying", BULLY)
    g = grid(16)
    X, Y = g.cell_centers()

    def make_state():
        return t.State(t.Field(g, 0.25 + 0.01 * np.exp(-X - Y)),
                       t.Field(g, 0.01 * np.exp(-X - Y)),
                       t.Field(g, np.ones_like(X)), 0.0)

    cfg = t.StepperConfig(t_end=1.0)
    s1, f1 = t.run(make_state(), m, cfg, out_dt=0.25)
    s2, f2 = t.run(make_state(), m, cfg, out_dt=0.25)
    assert s1.times == s2.times
    assert s1.amp_u == s2.amp_u
    assert np.array_equal(f1.u.values, f2.u.values)


def test_output_cadence_and_final_time():
    m = decay_model()
    g = grid(8)
    s0 = constant_state(g, 1.0, 0.5, 1.0)
    cfg = t.StepperConfig(t_end=1.0)
    series, final = t.run(s0, m, cfg, out_dt=0.1)
    assert len(series.times) == 11
    assert series.times[0] == 0.0
    assert series.times[-1] == pytest.approx(1.0, abs=1e-12)
    np.testing.assert_allclose(np.diff(series.times), 0.1, rtol=1e-9)


def test_positivity_monitor_trips():
    # strong uniform removal drives v negative through the explicit reaction
    m = t.preset("general", dict(
        D_u=0.1, D_v=0.1, D_w=0.1,
        f={"kind": "constant", "c": 0.0},
        g1={"kind": "constant", "c": 0.0},
        g2={"kind": "constant", "c": 0.0},
        h1={"kind": "constant", "c": 0.0},
        h2={"kind": "affine", "a": -200.0, "b": 0.0},
        chi1={"kind": "constant", "c": 0.0},
        chi2={"kind": "constant", "c": 0.0},
    ))
    g = grid(8)
    s0 = constant_state(g, 1.0, 1e-4, 1.0)
    # dt_min == dt_max pins the step past the stability limit of the
    # explicit reaction (200 * 0.05 >> 1), overshooting v below zero
    cfg = t.StepperConfig(t_end=1.0, dt_init=0.05, dt_min=0.05, dt_max=0.05)
    with pytest.raises(PositivityBreached):
        t.run(s0, m, cfg)


def test_rejects_negative_initial_data():
    m = decay_model()
    g = grid(8)
    s0 = t.State(t.Field.full(g, -0.5), t.Field.zeros(g), t.Field.zeros(g), 0.0)
    with pytest.raises(ValueError):
        t.run(s0, m, t.StepperConfig(t_end=1.0))


def test_stepper_config_validation():
    with pytest.raises(ValueError):
        t.StepperConfig(t_end=-1.0)
    with pytest.raises(ValueError):
        t.StepperConfig(t_end=1.0, scheme="rk4")
    with pytest.raises(ValueError):
        t.StepperConfig(t_end=1.0, dt_min=0.1, dt_max=0.01)
