"""Linear stability of the trivial uniform state (ubar, 0, wbar).

The partaker-free uniform state has wbar equal to the initial guardian mean
and ubar solving -s*g1(s, 0, wbar) + h1(s) = 0.  Perturbations restricted to
a Fourier mode with wavenumber-squared k2 evolve by a 3x3 matrix whose middle
row decouples, giving one closed-form growth rate

    sigma_1 = -k2 * D_v + V2,      V2 = -ubar*f - g2 + h2(0),

and a quadratic factor over the (u, w) block.  Two inequalities decide local
asymptotic stability; their evaluation, the per-mode growth rates, and the
mass-bound constants live here.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import NoRootInBracket
from .grid import integrate
from .models import HypothesisBounds, ModelSpec, State


@dataclass(frozen=True)
class SteadyState:
    ubar: float
    vbar: float
    wbar: float


@dataclass(frozen=True)
class JacobianEntries:
    """Entries of the linearization at (ubar, 0, wbar).

    U1, U2, U3 weight the target equation; V2 is the decoupled partaker
    growth coefficient.
    """

    U1: float
    U2: float
    U3: float
    V2: float


@dataclass(frozen=True)
class StabilityReport:
    steady: SteadyState
    entries: JacobianEntries
    k2_grid: np.ndarray
    sigma_max: np.ndarray
    verdict: str
    bounds: tuple  # (C1, C2, C3) or None when H3 fails

    def to_text(self):
        lines = []
        lines.append(f"steady state: ubar={self.steady.ubar:.12g} "
                     f"vbar=0 wbar={self.steady.wbar:.12g}")
        e = self.entries
        lines.append(f"linearization: U1={e.U1:.12g} U2={e.U2:.12g} "
                     f"U3={e.U3:.12g} V2={e.V2:.12g}")
        lines.append(f"verdict: {self.verdict}")
        if self.bounds is not None:
            C1, C2, C3 = self.bounds
            lines.append(f"mass bounds: C1={C1:.12g} C2={C2:.12g} C3={C3:.12g}")
        else:
            lines.append("mass bounds: unavailable (H3 violated)")
        lines.append("")
        lines.append(f"{'k2':>14} {'sigma_max':>14}")
        for k2, s in zip(self.k2_grid, self.sigma_max):
            lines.append(f"{k2:14.6g} {s:14.6g}")
        return "\n".join(lines) + "\n"


def _phi(m, s, wbar):
    return float(-s * m.g1.value(s, 0.0, wbar) + m.h1(s))


def trivial_steady_state(m: ModelSpec, wbar, root_tol=1e-12,
                         bracket_scale=10.0, scan_points=2048) -> SteadyState:
    """Smallest nonnegative root of -s*g1(s,0,wbar) + h1(s) by bisection."""
    bound = m.h1.affine_bound() if hasattr(m.h1, "affine_bound") else None
    if bound is not None and bound[0] > 0:
        s_max = bracket_scale * bound[0] / bound[1]
    else:
        s_max = bracket_scale * max(1.0, abs(_phi(m, 0.0, wbar)))

    if abs(_phi(m, 0.0, wbar)) <= root_tol:
        return SteadyState(0.0, 0.0, float(wbar))

    grid = np.linspace(0.0, s_max, scan_points + 1)
    vals = np.array([_phi(m, s, wbar) for s in grid])
    sign_change = np.where(np.sign(vals[:-1]) * np.sign(vals[1:]) <= 0)[0]
    if sign_change.size == 0:
        raise NoRootInBracket(s_max)
    i = int(sign_change[0])
    lo, hi = float(grid[i]), float(grid[i + 1])
    flo = vals[i]
    while hi - lo > root_tol:
        mid = 0.5 * (lo + hi)
        fmid = _phi(m, mid, wbar)
        if fmid == 0.0:
            lo = hi = mid
            break
        if np.sign(fmid) == np.sign(flo):
            lo, flo = mid, fmid
        else:
            hi = mid
    return SteadyState(0.5 * (lo + hi), 0.0, float(wbar))


def jacobian_entries(m: ModelSpec, ss: SteadyState) -> JacobianEntries:
    u, v, w = ss.ubar, 0.0, ss.wbar
    g1 = float(m.g1.value(u, v, w))
    g2 = float(m.g2.value(u, v, w))
    f = float(m.f.value(u, v, w))
    dg1u, dg1v, dg1w = (float(x) for x in m.g1.grad(u, v, w))
    h1p = float(m.h1.deriv(u))
    U1 = -g1 + h1p - u * dg1u
    U2 = u * m.gamma * f - u * dg1v
    U3 = -u * dg1w
    V2 = -u * f - g2 + float(m.h2(0.0))
    return JacobianEntries(U1=U1, U2=U2, U3=U3, V2=V2)


def dispersion_matrix(e: JacobianEntries, m: ModelSpec, ss: SteadyState,
                      k2) -> np.ndarray:
    """3x3 linearization restricted to a mode with wavenumber-squared k2."""
    chi2 = float(m.chi2(ss.ubar))
    return np.array([
        [-k2 * m.D_u + e.U1, e.U2, e.U3],
        [0.0, -k2 * m.D_v + e.V2, 0.0],
        [k2 * ss.wbar * chi2, 0.0, -k2 * m.D_w],
    ])


@dataclass(frozen=True)
class GrowthRates:
    k2: np.ndarray
    sigma1: np.ndarray        # closed-form decoupled root
    quad_roots: np.ndarray    # shape (n, 2), complex roots of the 2x2 factor
    sigma_max: np.ndarray     # max real part over all three roots
    rh1: np.ndarray           # Routh-Hurwitz coefficient positivity, bool
    rh2: np.ndarray


def growth_rates(m: ModelSpec, ss: SteadyState, k2_list) -> GrowthRates:
    e = jacobian_entries(m, ss)
    chi2 = float(m.chi2(ss.ubar))
    k2 = np.asarray(k2_list, dtype=np.float64)
    if k2.size == 0 or (k2 < 0).any():
        raise ValueError("k2_list must be nonempty and nonnegative")

    sigma1 = -k2 * m.D_v + e.V2
    # 2x2 factor over (u, w): trace and determinant
    a11 = -k2 * m.D_u + e.U1
    a22 = -k2 * m.D_w
    a12a21 = e.U3 * k2 * ss.wbar * chi2
    tr = a11 + a22
    det = a11 * a22 - a12a21
    disc = np.asarray(tr * tr - 4.0 * det, dtype=np.complex128)
    sq = np.sqrt(disc)
    r1 = (tr + sq) / 2.0
    r2 = (tr - sq) / 2.0
    quad_roots = np.stack([r1, r2], axis=-1)
    sigma_max = np.maximum(sigma1, np.maximum(r1.real, r2.real))

    rh1 = k2 * (m.D_u + m.D_w) - e.U1 > 0
    rh2 = k2 * (k2 * m.D_u * m.D_w - m.D_w * e.U1 - ss.wbar * chi2 * e.U3) > 0
    return GrowthRates(k2=k2, sigma1=sigma1, quad_roots=quad_roots,
                       sigma_max=sigma_max, rh1=rh1, rh2=rh2)


def proposition1_inequalities(m: ModelSpec, ss: SteadyState):
    """(lhs, rhs) pairs of the two stability inequalities."""
    u, v, w = ss.ubar, 0.0, ss.wbar
    f = float(m.f.value(u, v, w))
    g1 = float(m.g1.value(u, v, w))
    g2 = float(m.g2.value(u, v, w))
    dg1u, _, dg1w = (float(x) for x in m.g1.grad(u, v, w))
    chi2 = float(m.chi2(u))

    ineq1 = (u * f + g2, float(m.h2(0.0)))
    ineq2 = (g1 + u * dg1u + min(u * w * chi2 / m.D_w * dg1w, 0.0),
             float(m.h1.deriv(u)))
    return ineq1, ineq2


def proposition1_verdict(m: ModelSpec, ss: SteadyState) -> str:
    (l1, r1), (l2, r2) = proposition1_inequalities(m, ss)
    ok1 = l1 > r1
    ok2 = l2 > r2
    if ok1 and ok2:
        return "stable"
    if not ok1 and not ok2:
        return "unstable-both"
    return "unstable-ineq1" if not ok1 else "unstable-ineq2"


def theorem1_bounds(m: ModelSpec, hb: HypothesisBounds, s0: State,
                    gamma=None):
    """Mass-bound constants (C1, C2, C3) from the structural hypotheses.

    C2 = max{int v0, A2|Omega|/B2},
    C1 = max{int (u0 + gamma v0), (A1|Omega| + gamma C2 (A2 + B1)) / B1},
    C3 = int w0.
    """
    if gamma is None:
        gamma = m.gamma
    if any(not math.isfinite(x) for x in (hb.A1, hb.B1, hb.A2, hb.B2)):
        raise ValueError("theorem bounds require H3 to hold (finite A_i, B_i)")
    area = s0.grid.area
    iv0 = integrate(s0.v)
    iu0 = integrate(s0.u)
    iw0 = integrate(s0.w)
    C2 = max(iv0, hb.A2 * area / hb.B2)
    C1 = max(iu0 + gamma * iv0,
             (hb.A1 * area + gamma * C2 * (hb.A2 + hb.B1)) / hb.B1)
    C3 = iw0
    return C1, C2, C3


def default_k2_grid(grid, n_log=64, max_mode=16):
    """Log-spaced k2 values up to the grid Nyquist scale, merged with the
    discrete Neumann eigenvalues (m pi/Lx)^2 + (n pi/Ly)^2 of the domain."""
    h = min(grid.hx, grid.hy)
    k2_hi = 4.0 * (np.pi / h) ** 2
    logs = np.logspace(-3, np.log10(k2_hi), n_log)
    modes = []
    for mm in range(max_mode + 1):
        for nn in range(max_mode + 1):
            if mm == 0 and nn == 0:
                continue
            modes.append((mm * np.pi / grid.length_x) ** 2
                         + (nn * np.pi / grid.length_y) ** 2)
    return np.unique(np.concatenate([logs, modes]))


def analyze(m: ModelSpec, wbar, s0: State = None, hb: HypothesisBounds = None,
            k2_grid=None, grid=None) -> StabilityReport:
    """Full stability report for a model around its trivial steady state."""
    ss = trivial_steady_state(m, wbar)
    e = jacobian_entries(m, ss)
    if k2_grid is None:
        if grid is None and s0 is not None:
            grid = s0.grid
        if grid is not None:
            k2_grid = default_k2_grid(grid)
        else:
            k2_grid = np.logspace(-3, 3, 64)
    gr = growth_rates(m, ss, k2_grid)
    verdict = proposition1_verdict(m, ss)
    bounds = None
    if s0 is not None and hb is not None:
        try:
            bounds = theorem1_bounds(m, hb, s0)
        except ValueError:
            bounds = None
    return StabilityReport(steady=ss, entries=e, k2_grid=gr.k2,
                           sigma_max=gr.sigma_max, verdict=verdict,
                           bounds=bounds)
