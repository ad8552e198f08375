"""Three-component target-partaker-guardian model definitions.

The general system is

    du/dt = D_u lap(u) + u*(gamma*v*f(u,v,w) - g1(u,v,w)) + h1(u)
    dv/dt = D_v lap(v) - div(v*chi1(u)*grad u) + v*(-u*f - g2 + h2(v))
    dw/dt = D_w lap(w) - div(w*chi2(u)*grad u)

with homogeneous Neumann boundary conditions.  This module defines the model
container, the built-in application presets, the semi-discrete right-hand
side, and a sampling-based checker for the structural hypotheses (H1)-(H6)
used by the mass-bound constants.
"""

from dataclasses import dataclass, field as dc_field
from typing import Callable, Optional

import numpy as np

from . import rules as R
from .errors import MissingParam, NonFiniteRhs, UnknownPreset
from .grid import Field, laplacian_values, taxis_divergence_values


@dataclass(frozen=True)
class ModelSpec:
    """Immutable description of one concrete model instance."""

    name: str
    D_u: float
    D_v: float
    D_w: float
    gamma: float
    f: object        # reaction rule of (u, v, w)
    g1: object       # reaction rule of (u, v, w)
    g2: object       # reaction rule of (u, v, w)
    h1: object       # scalar rule of u
    h2: object       # scalar rule of v
    chi1: object     # scalar rate rule of u
    chi2: object     # scalar rate rule of u
    params: dict = dc_field(default_factory=dict)

    def __post_init__(self):
        for nm in ("D_u", "D_v", "D_w", "gamma"):
            if not getattr(self, nm) > 0:
                raise ValueError(f"H1 violated: {nm} must be positive")


@dataclass
class State:
    """Simulation state: the three fields plus time."""

    u: Field
    v: Field
    w: Field
    t: float = 0.0

    def __post_init__(self):
        if not (self.u.grid == self.v.grid == self.w.grid):
            raise ValueError("u, v, w must share one grid")

    @property
    def grid(self):
        return self.u.grid

    def copy(self):
        return State(self.u.copy(), self.v.copy(), self.w.copy(), self.t)


# ---------------------------------------------------------------------------
# presets

def _require(params, names):
    missing = [n for n in names if n not in params]
    if missing:
        raise MissingParam(missing[0])
    return {n: params[n] for n in names}


def _build_protest_negotiated(params):
    p = _require(params, ["D_A", "D_P", "D_M", "chi_P", "chi_M",
                          "Phi_A", "Phi_P", "psi", "Psi"])
    gamma = float(params.get("gamma", 1.0))
    return ModelSpec(
        name="protest-negotiated",
        D_u=float(p["D_A"]), D_v=float(p["D_P"]), D_w=float(p["D_M"]),
        gamma=gamma,
        f=R.ConstantR(1.0),
        g1=R.SigmoidGate(psi=float(p["psi"]), thresh=float(p["Psi"])),
        g2=R.ConstantR(0.0),
        h1=R.Affine(float(p["Phi_A"]), -1.0),
        h2=R.Affine(float(p["Phi_P"]), -1.0),
        chi1=R.Rational(float(p["chi_P"]), 1.0),
        chi2=R.Rational(float(p["chi_M"]), 1.0),
        params=dict(params),
    )


def _build_protest_enhanced(params):
    p = _require(params, ["D_A", "D_P", "D_M", "chi_P", "chi_M",
                          "Phi_A", "Phi_P", "psi", "Psi"])
    gamma = float(params.get("gamma", 1.0))
    return ModelSpec(
        name="protest-enhanced",
        D_u=float(p["D_A"]), D_v=float(p["D_P"]), D_w=float(p["D_M"]),
        gamma=gamma,
        f=R.RecruitSaturation(psi=float(p["psi"])),
        # backlash: -g1 = +tanh(v*w - Psi) in the target equation
        g1=R.TanhThreshold(thresh=float(p["Psi"]), scale=-1.0),
        g2=R.LinearR(cw=1.0),
        h1=R.Affine(float(p["Phi_A"]), -1.0),
        h2=R.Affine(float(p["Phi_P"]), -1.0),
        chi1=R.Rational(float(p["chi_P"]), 1.0),
        chi2=R.Rational(float(p["chi_M"]), 1.0),
        params=dict(params),
    )


def _build_bullying(params):
    p = _require(params, ["D_V", "D_B", "D_G", "chi_B", "chi_G",
                          "Phi_V", "Phi_B", "Psi"])
    gamma = float(params.get("gamma", 1.0))
    thr = float(p["Psi"])
    return ModelSpec(
        name="bullying",
        D_u=float(p["D_V"]), D_v=float(p["D_B"]), D_w=float(p["D_G"]),
        gamma=gamma,
        # victimization rate f = Psi - v gives the logistic u*v*(Psi - v) term
        f=R.LinearR(a=thr, cv=-1.0),
        g1=R.LinearR(cw=1.0),
        g2=R.GuardedRemoval(thresh=thr),
        h1=R.Affine(float(p["Phi_V"]), -1.0),
        h2=R.Affine(float(p["Phi_B"]), -1.0),
        chi1=R.Rational(float(p["chi_B"]), 1.0),
        chi2=R.Rational(float(p["chi_G"]), 1.0),
        params=dict(params),
    )


def _build_urban_crime(params):
    p = _require(params, ["D_A", "D_rho", "D_u", "alpha", "beta", "chi"])
    gamma = float(params.get("gamma", 1.0))
    guard = float(params.get("guard", 1e-6))
    return ModelSpec(
        name="urban-crime",
        D_u=float(p["D_A"]), D_v=float(p["D_rho"]), D_w=float(p["D_u"]),
        gamma=gamma,
        f=R.ConstantR(1.0),
        g1=R.ConstantR(0.0),
        g2=R.LinearR(cw=1.0),
        h1=R.Affine(float(p["alpha"]), -1.0),
        # constant source beta enters as v*h2(v) with h2 = beta/v (singular)
        h2=R.Rational(float(p["beta"]), 0.0, guard=guard),
        # log-taxis chi * grad(ln A) = (chi/A) grad A; singular at A -> 0
        chi1=R.Rational(2.0, 0.0, guard=guard),
        chi2=R.Rational(float(p["chi"]), 0.0, guard=guard),
        params=dict(params),
    )


def _build_general(params):
    p = _require(params, ["D_u", "D_v", "D_w", "f", "g1", "g2",
                          "h1", "h2", "chi1", "chi2"])
    gamma = float(params.get("gamma", 1.0))

    def reaction(spec):
        return spec if hasattr(spec, "value") else R.reaction_rule_from_spec(spec)

    def scalar(spec):
        return spec if callable(spec) and hasattr(spec, "deriv") \
            else R.scalar_rule_from_spec(spec)

    return ModelSpec(
        name="general",
        D_u=float(p["D_u"]), D_v=float(p["D_v"]), D_w=float(p["D_w"]),
        gamma=gamma,
        f=reaction(p["f"]), g1=reaction(p["g1"]), g2=reaction(p["g2"]),
        h1=scalar(p["h1"]), h2=scalar(p["h2"]),
        chi1=scalar(p["chi1"]), chi2=scalar(p["chi2"]),
        params={k: v for k, v in params.items()
                if isinstance(v, (int, float, str, dict))},
    )


PRESETS = {
    "general": _build_general,
    "protest-negotiated": _build_protest_negotiated,
    "protest-enhanced": _build_protest_enhanced,
    "bullying": _build_bullying,
    "urban-crime": _build_urban_crime,
}

PRESET_PARAMS = {
    "general": ["D_u", "D_v", "D_w", "f", "g1", "g2", "h1", "h2",
                "chi1", "chi2", "(gamma)"],
    "protest-negotiated": ["D_A", "D_P", "D_M", "chi_P", "chi_M", "Phi_A",
                           "Phi_P", "psi", "Psi", "(gamma)"],
    "protest-enhanced": ["D_A", "D_P", "D_M", "chi_P", "chi_M", "Phi_A",
                         "Phi_P", "psi", "Psi", "(gamma)"],
    "bullying": ["D_V", "D_B", "D_G", "chi_B", "chi_G", "Phi_V", "Phi_B",
                 "Psi", "(gamma)"],
    "urban-crime": ["D_A", "D_rho", "D_u", "alpha", "beta", "chi",
                    "(gamma)", "(guard)"],
}


def preset(name, params):
    """Build the named preset ModelSpec from its parameter map."""
    if name not in PRESETS:
        raise UnknownPreset(name)
    return PRESETS[name](dict(params))


# ---------------------------------------------------------------------------
# right-hand side

def reaction_terms(u, v, w, m: ModelSpec):
    """Pointwise reaction parts (Ru, Rv); the guardian has no reaction.

    Every reaction is multiplied by its own population, so the product is
    taken to be exactly zero wherever that population is zero -- even when
    the per-capita rate (e.g. a singular h2) diverges there.
    """
    fval = m.f.value(u, v, w)
    with np.errstate(invalid="ignore"):
        Ru = np.where(u != 0.0,
                      u * (m.gamma * v * fval - m.g1.value(u, v, w)), 0.0) \
            + m.h1(u)
        Rv = np.where(v != 0.0,
                      v * (-u * fval - m.g2.value(u, v, w) + m.h2(v)), 0.0)
    return Ru, Rv


def rhs_values(u, v, w, m: ModelSpec, grid, taxis_scheme="upwind"):
    """Semi-discrete right-hand side on raw arrays."""
    for comp, arr in (("u", u), ("v", v), ("w", w)):
        bad = ~np.isfinite(arr)
        if bad.any():
            raise NonFiniteRhs(comp, tuple(np.argwhere(bad)[0]))
    Ru, Rv = reaction_terms(u, v, w, m)
    du = m.D_u * laplacian_values(u, grid) + Ru
    dv = (m.D_v * laplacian_values(v, grid)
          - taxis_divergence_values(v, u, m.chi1, grid, scheme=taxis_scheme)
          + Rv)
    dw = (m.D_w * laplacian_values(w, grid)
          - taxis_divergence_values(w, u, m.chi2, grid, scheme=taxis_scheme))
    for comp, arr in (("u", du), ("v", dv), ("w", dw)):
        bad = ~np.isfinite(arr)
        if bad.any():
            raise NonFiniteRhs(comp, tuple(np.argwhere(bad)[0]))
    return du, dv, dw


def rhs(s: State, m: ModelSpec, taxis_scheme="upwind"):
    """Time derivative of a State; returns (du, dv, dw) Fields."""
    g = s.grid
    du, dv, dw = rhs_values(s.u.values, s.v.values, s.w.values, m, g,
                            taxis_scheme=taxis_scheme)
    return Field(g, du), Field(g, dv), Field(g, dw)


# ---------------------------------------------------------------------------
# hypothesis checking

@dataclass(frozen=True)
class HypothesisBounds:
    """Empirical/structural constants for (H2), (H3), (H6)."""

    E1: float
    E2: float
    A1: float
    B1: float
    A2: float
    B2: float
    F: float


@dataclass(frozen=True)
class HypothesisViolation:
    hypothesis: str
    rule: str
    point: tuple
    value: float
    note: str = ""


def hypothesis_check(m: ModelSpec, box=((0.0, 5.0), (0.0, 5.0), (0.0, 5.0)),
                     samples=4096, seed=0):
    """Sample the model rules over a nonnegative box and report bounds.

    Returns (HypothesisBounds, [HypothesisViolation]).  Violations are data,
    not errors: models that fail a hypothesis simply fall outside the
    mass-bound guarantees.
    """
    if samples < 1000:
        raise ValueError("samples must be >= 1000")
    rng = np.random.default_rng(seed)
    lo = np.array([b[0] for b in box], dtype=np.float64)
    hi = np.array([b[1] for b in box], dtype=np.float64)
    if (lo < 0).any() or (hi < lo).any() or not np.isfinite(hi).all():
        raise ValueError("box must consist of finite nonnegative ranges")
    pts = lo + (hi - lo) * rng.random((samples, 3))
    # include corners so boundary behavior (e.g. v=0 or u=0 edges) is probed
    grid_pts = np.array([[a, b, c]
                         for a in (lo[0], hi[0])
                         for b in (lo[1], hi[1])
                         for c in (lo[2], hi[2])])
    pts = np.vstack([pts, grid_pts])
    u, v, w = pts[:, 0], pts[:, 1], pts[:, 2]

    violations = []

    # (H2): taxis rates bounded
    Es = []
    for nm, chi in (("chi1", m.chi1), ("chi2", m.chi2)):
        s = np.unique(np.concatenate([u, [lo[0], hi[0]]]))
        vals = np.asarray(chi(s), dtype=np.float64)
        finite = vals[np.isfinite(vals)]
        emp = float(finite.max()) if finite.size else np.inf
        if getattr(chi, "bounded_on_nonneg", False):
            Es.append(float(chi.sup_nonneg))
        else:
            Es.append(emp)
            worst = int(np.argmax(np.where(np.isfinite(vals), vals, np.inf)))
            violations.append(HypothesisViolation(
                "H2", nm, (float(s[worst]),), emp,
                "rate rule unbounded on [0, inf)"))
    E1, E2 = Es

    # (H3): growth terms saturated, h_i(s) <= A_i - B_i s
    ABs = []
    for nm, h, comp in (("h1", m.h1, u), ("h2", m.h2, v)):
        bound = h.affine_bound() if hasattr(h, "affine_bound") else None
        if bound is None:
            vals = np.asarray(h(comp), dtype=np.float64)
            finite = np.isfinite(vals)
            worst = int(np.argmax(np.where(finite, vals, -np.inf)))
            violations.append(HypothesisViolation(
                "H3", nm, (float(comp[worst]),),
                float(vals[worst]) if finite.any() else np.inf,
                "no affine decay bound A - B*s"))
            ABs.append((np.nan, np.nan))
        else:
            ABs.append(bound)
    (A1, B1), (A2, B2) = ABs

    # (H5): f, g1, g2 nonnegative
    for nm, rule in (("f", m.f), ("g1", m.g1), ("g2", m.g2)):
        vals = np.asarray(rule.value(u, v, w), dtype=np.float64)
        if (vals < 0).any():
            worst = int(np.argmin(vals))
            violations.append(HypothesisViolation(
                "H5", nm, (float(u[worst]), float(v[worst]), float(w[worst])),
                float(vals[worst]), "negative value sampled"))

    # (H6): gamma*v*f <= F + g1; report the empirical F
    excess = m.gamma * v * np.asarray(m.f.value(u, v, w)) \
        - np.asarray(m.g1.value(u, v, w))
    finite = np.isfinite(excess)
    F = float(np.max(excess[finite])) if finite.any() else np.inf
    F = max(F, np.finfo(float).tiny)

    hb = HypothesisBounds(E1=E1, E2=E2, A1=A1, B1=B1, A2=A2, B2=B2, F=F)
    return hb, violations
