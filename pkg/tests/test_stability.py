import math
import time

import numpy as np
import pytest

import tpgsim as t
from tpgsim import rules as R
from tpgsim.errors import NoRootInBracket
from tpgsim.stability import dispersion_matrix, growth_rates

PROTEST = dict(D_A=0.1, D_P=0.1, D_M=0.1, chi_P=2.0, chi_M=1.0,
               Phi_A=1.0, Phi_P=2.0, psi=0.1, Psi=5.0)
BULLY = dict(D_V=0.05, D_B=0.05, D_G=0.05, chi_B=2.0, chi_G=2.0,
             Phi_V=0.5, Phi_B=1.0, Psi=10.0)


def bully_model():
    return t.preset("bullying", BULLY)


# --- steady state ---------------------------------------------------------------

def test_bullying_steady_triples():
    # u_bar = Phi_V / (1 + w_bar) for the victimization model
    m = bully_model()
    start = time.time()
    for wbar, want in [(1.0, 0.25), (0.5, 1.0 / 3.0), (0.25, 0.4)]:
        ss = t.trivial_steady_state(m, wbar)
        assert abs(ss.ubar - want) < 1e-10
        assert ss.vbar == 0.0 and ss.wbar == wbar
    assert time.time() - start < 1.0


def test_negotiated_steady_state_is_phi_a():
    m = t.preset("protest-negotiated", PROTEST)
    ss = t.trivial_steady_state(m, 1.0)
    assert abs(ss.ubar - 1.0) < 1e-10


def test_enhanced_steady_state_closed_form():
    # u(1 + tanh(-Psi))... at v=0: -u*(-tanh(-Psi)) + Phi_A - u = 0
    m = t.preset("protest-enhanced", PROTEST)
    ss = t.trivial_steady_state(m, 1.0)
    assert ss.ubar == pytest.approx(1.0 / (1.0 + math.tanh(5.0)), abs=1e-10)


def test_degenerate_model_has_zero_steady_state():
    m = t.preset("general", dict(
        D_u=0.1, D_v=0.1, D_w=0.1,
        f={"kind": "constant", "c": 1.0},
        g1={"kind": "constant", "c": 0.0},
        g2={"kind": "constant", "c": 0.0},
        h1={"kind": "affine", "a": 0.0, "b": -1.0},
        h2={"kind": "affine", "a": 1.0, "b": -1.0},
        chi1={"kind": "rational", "num": 1.0, "shift": 1.0},
        chi2={"kind": "rational", "num": 1.0, "shift": 1.0},
    ))
    ss = t.trivial_steady_state(m, 1.0)
    assert ss.ubar == 0.0
    e = t.jacobian_entries(m, ss)
    assert e.U2 == 0.0 and e.U3 == 0.0


def test_no_root_raises():
    # h1 = 1 + s grows without a zero of -s*g1 + h1 on s >= 0
    m = t.preset("general", dict(
        D_u=0.1, D_v=0.1, D_w=0.1,
        f={"kind": "constant", "c": 1.0},
        g1={"kind": "constant", "c": 0.0},
        g2={"kind": "constant", "c": 0.0},
        h1={"kind": "affine", "a": 1.0, "b": 1.0},
        h2={"kind": "affine", "a": 1.0, "b": -1.0},
        chi1={"kind": "constant", "c": 1.0},
        chi2={"kind": "constant", "c": 1.0},
    ))
    with pytest.raises(NoRootInBracket):
        t.trivial_steady_state(m, 1.0)


# --- linearization ---------------------------------------------------------------

def _fd_jacobian_bullying(ubar, wbar, eps=1e-7):
    """V2 and U entries by central differences on the transcribed reactions.

    Independent of the rule catalog: the full reaction strings of the
    victimization system are written out verbatim.
    """
    Psi, Phi_V, Phi_B = 10.0, 0.5, 1.0

    def Ru(u, v, w):
        return u * (v * (Psi - v) - w) + (Phi_V - u)

    def Rv(u, v, w):
        return v * (-u * (Psi - v)
                    - (u * (1 + v - Psi) + w * (1 + math.tanh(u)))
                    + (Phi_B - v))

    def d(fn, var, u, v, w):
        args = {"u": u, "v": v, "w": w}
        hi = dict(args); hi[var] += eps
        lo = dict(args); lo[var] -= eps
        return (fn(**hi) - fn(**lo)) / (2 * eps)

    U1 = d(Ru, "u", ubar, 0.0, wbar)
    U2 = d(Ru, "v", ubar, 0.0, wbar)
    U3 = d(Ru, "w", ubar, 0.0, wbar)
    V2 = d(Rv, "v", ubar, 0.0, wbar)
    return U1, U2, U3, V2


@pytest.mark.parametrize("wbar", [1.0, 0.5, 0.25])
def test_bullying_jacobian_matches_finite_differences(wbar):
    m = bully_model()
    ss = t.trivial_steady_state(m, wbar)
    e = t.jacobian_entries(m, ss)
    U1, U2, U3, V2 = _fd_jacobian_bullying(ss.ubar, wbar)
    assert e.U1 == pytest.approx(U1, abs=1e-6)
    assert e.U2 == pytest.approx(U2, abs=1e-6)
    assert e.U3 == pytest.approx(U3, abs=1e-6)
    assert e.V2 == pytest.approx(V2, abs=1e-6)


def test_negotiated_v2_arithmetic():
    # V2 = -ubar*f - g2 + h2(0) = -1 - 0 + Phi_P = 1 for Phi_A=1, Phi_P=2
    m = t.preset("protest-negotiated", PROTEST)
    ss = t.trivial_steady_state(m, 1.0)
    e = t.jacobian_entries(m, ss)
    assert e.V2 == pytest.approx(1.0, abs=1e-12)


# --- dispersion -----------------------------------------------------------------

def test_dispersion_matrix_structure():
    m = bully_model()
    ss = t.trivial_steady_state(m, 1.0)
    e = t.jacobian_entries(m, ss)
    A0 = dispersion_matrix(e, m, ss, 0.0)
    np.testing.assert_allclose(
        A0, [[e.U1, e.U2, e.U3], [0.0, e.V2, 0.0], [0.0, 0.0, 0.0]],
        atol=1e-15)
    k2 = 3.0
    A = dispersion_matrix(e, m, ss, k2)
    assert A[1, 1] == pytest.approx(-k2 * m.D_v + e.V2)
    assert A[2, 0] == pytest.approx(k2 * ss.wbar * float(m.chi2(ss.ubar)))
    assert A[2, 2] == pytest.approx(-k2 * m.D_w)


def test_sigma1_closed_form_matches_eigenvalues():
    m = t.preset("protest-negotiated", PROTEST)
    ss = t.trivial_steady_state(m, 1.0)
    e = t.jacobian_entries(m, ss)
    for k2 in (0.0, 0.5, 2.0, 10.0, 100.0):
        gr = growth_rates(m, ss, [k2])
        want = -k2 * m.D_v + e.V2
        assert gr.sigma1[0] == pytest.approx(want, abs=1e-12)
        eig = np.linalg.eigvals(dispersion_matrix(e, m, ss, k2))
        assert min(abs(eig - want)) < 1e-12
    # sigma1 = -10*0.1 + 1 = 0 at k2 = 10
    gr = growth_rates(m, ss, [10.0])
    assert abs(gr.sigma1[0]) < 1e-12


def test_growth_rates_match_dense_eigensolver_random():
    # Routh-Hurwitz booleans and sigma_max vs numpy eigvals on random entries
    rng = np.random.default_rng(42)
    m = bully_model()
    for _ in range(300):
        wbar = rng.uniform(0.05, 3.0)
        ss = t.trivial_steady_state(m, wbar)
        e = t.jacobian_entries(m, ss)
        k2 = 10.0 ** rng.uniform(-3, 3)
        gr = growth_rates(m, ss, [k2])
        eig = np.linalg.eigvals(dispersion_matrix(e, m, ss, k2))
        assert gr.sigma_max[0] == pytest.approx(eig.real.max(), abs=1e-9)
        quad_stable = bool(gr.rh1[0] and gr.rh2[0])
        # RH conditions govern the 2x2 (u,w) factor; stable iff its roots
        # have negative real parts
        quad_eigs = [z for z in eig if abs(z - gr.sigma1[0]) > 1e-9] or eig
        assert quad_stable == all(z.real < 0 for z in quad_eigs)


def test_stable_configuration_all_modes_decay():
    m = t.preset("protest-negotiated", {**PROTEST, "Phi_A": 2.0, "Phi_P": 1.0})
    ss = t.trivial_steady_state(m, 1.0)
    k2 = np.logspace(-3, 3, 50)
    gr = growth_rates(m, ss, k2)
    assert np.all(gr.sigma_max < 0)


def test_k2_zero_always_has_zero_eigenvalue():
    m = bully_model()
    ss = t.trivial_steady_state(m, 1.0)
    e = t.jacobian_entries(m, ss)
    eig = np.linalg.eigvals(dispersion_matrix(e, m, ss, 0.0))
    assert min(abs(eig)) < 1e-14


# --- verdicts -------------------------------------------------------------------

def test_negotiated_verdict_flips_with_phi_ordering():
    m_unstable = t.preset("protest-negotiated", PROTEST)
    ss = t.trivial_steady_state(m_unstable, 1.0)
    assert t.proposition1_verdict(m_unstable, ss) == "unstable-ineq1"

    m_stable = t.preset("protest-negotiated",
                        {**PROTEST, "Phi_A": 2.0, "Phi_P": 1.0})
    ss = t.trivial_steady_state(m_stable, 1.0)
    assert t.proposition1_verdict(m_stable, ss) == "stable"


def test_bullying_verdicts_across_guardian_levels():
    m = bully_model()
    verdicts = {}
    for wbar in (1.0, 0.5, 0.25):
        ss = t.trivial_steady_state(m, wbar)
        verdicts[wbar] = t.proposition1_verdict(m, ss)
    assert verdicts[1.0] == "stable"
    assert verdicts[0.5].startswith("unstable")
    assert verdicts[0.25].startswith("unstable")


def test_bullying_verdict_flip_point_matches_root_finder():
    # ineq1 boundary: ubar(G) * f(ubar,0,G) + g2(ubar,0,G) = h2(0); solve for
    # G with bisection on the independently transcribed reactions
    m = bully_model()
    Psi, Phi_V, Phi_B = 10.0, 0.5, 1.0

    def lhs_minus_rhs(G):
        ubar = Phi_V / (1.0 + G)
        return (ubar * Psi + (ubar * (1.0 - Psi)
                              + G * (1.0 + math.tanh(ubar)))) - Phi_B

    lo, hi = 0.25, 1.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if lhs_minus_rhs(mid) > 0:
            hi = mid
        else:
            lo = mid
    flip = 0.5 * (lo + hi)

    ss = t.trivial_steady_state(m, flip * 1.01)
    assert t.proposition1_verdict(m, ss) == "stable"
    ss = t.trivial_steady_state(m, flip * 0.99)
    assert t.proposition1_verdict(m, ss) == "unstable-ineq1"


# --- mass bounds ----------------------------------------------------------------

def test_theorem_bounds_worked_example():
    # u0=1, v0=0, w0=1 on [0,pi]^2 with A1=B1=B2=1, A2=2, gamma=1:
    # C2 = 2 pi^2, C1 = max{pi^2, pi^2 + 2 pi^2 * 3} = 7 pi^2, C3 = pi^2
    m = t.preset("protest-negotiated", PROTEST)
    hb, violations = t.hypothesis_check(m)
    assert violations == []
    g = t.GridSpec(np.pi, np.pi, 32, 32)
    s0 = t.State(t.Field.full(g, 1.0), t.Field.zeros(g), t.Field.full(g, 1.0),
                 0.0)
    C1, C2, C3 = t.theorem1_bounds(m, hb, s0)
    pi2 = np.pi ** 2
    assert C2 == pytest.approx(2 * pi2, rel=1e-12)
    assert C1 == pytest.approx(7 * pi2, rel=1e-12)
    assert C3 == pytest.approx(pi2, rel=1e-12)


def test_theorem_bounds_require_h3():
    m = t.preset("urban-crime", dict(D_A=0.05, D_rho=0.05, D_u=0.05,
                                     alpha=1.0, beta=2.0, chi=1.0))
    hb, _ = t.hypothesis_check(m)
    g = t.GridSpec(np.pi, np.pi, 8, 8)
    s0 = t.State(t.Field.full(g, 1.0), t.Field.full(g, 1.0),
                 t.Field.full(g, 1.0), 0.0)
    with pytest.raises(ValueError):
        t.theorem1_bounds(m, hb, s0)


# --- report ---------------------------------------------------------------------

def test_analyze_produces_full_report():
    m = bully_model()
    g = t.GridSpec(np.pi, np.pi, 16, 16)
    s0 = t.State(t.Field.full(g, 0.25), t.Field.zeros(g), t.Field.full(g, 1.0),
                 0.0)
    hb, _ = t.hypothesis_check(m)
    rep = t.analyze(m, 1.0, s0=s0, hb=hb)
    assert rep.verdict == "stable"
    assert len(rep.k2_grid) == len(rep.sigma_max)
    text = rep.to_text()
    assert "verdict: stable" in text
    assert "ubar=0.25" in text


def test_default_k2_grid_contains_neumann_eigenvalues():
    g = t.GridSpec(np.pi, np.pi, 64, 64)
    k2 = t.default_k2_grid(g)
    for want in (1.0, 2.0, 5.0):   # (1,0), (1,1), (1,2) modes on [0,pi]^2
        assert np.min(np.abs(k2 - want)) < 1e-9
    assert k2.min() > 0
