"""Catalog of reaction and rate rules with analytic derivatives.

Model right-hand sides are assembled from a fixed catalog of parameterized
forms rather than arbitrary user code, so that analytic partial derivatives
stay available to the stability module and configurations stay serializable.

Two families:

* scalar rules, one argument (growth/decay terms h1, h2 and taxis rates
  chi1, chi2): value(s) and deriv(s), plus metadata used by the hypothesis
  checker (boundedness on [0, inf), affine decay bounds);
* reaction rules, three arguments (f, g1, g2): value(u, v, w) and
  grad(u, v, w).

All rules are frozen dataclasses; evaluation is vectorized over numpy arrays
and side-effect free.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError

# ---------------------------------------------------------------------------
# scalar rules (h1, h2, chi1, chi2)


@dataclass(frozen=True)
class ConstantS:
    """Constant scalar rule."""

    c: float

    def __call__(self, s):
        return np.full_like(np.asarray(s, dtype=np.float64), self.c)

    def deriv(self, s):
        return np.zeros_like(np.asarray(s, dtype=np.float64))

    @property
    def bounded_on_nonneg(self):
        return True

    @property
    def sup_nonneg(self):
        return self.c

    def affine_bound(self):
        # a constant cannot satisfy h(s) <= A - B*s with B > 0 for all s >= 0
        return None

    def to_spec(self):
        return {"kind": "constant", "c": self.c}


@dataclass(frozen=True)
class Affine:
    """a + b*s."""

    a: float
    b: float

    def __call__(self, s):
        return self.a + self.b * np.asarray(s, dtype=np.float64)

    def deriv(self, s):
        return np.full_like(np.asarray(s, dtype=np.float64), self.b)

    @property
    def bounded_on_nonneg(self):
        return self.b <= 0

    @property
    def sup_nonneg(self):
        return self.a if self.b <= 0 else math.inf

    def affine_bound(self):
        if self.b < 0:
            return (max(self.a, 0.0), -self.b)
        return None

    def to_spec(self):
        return {"kind": "affine", "a": self.a, "b": self.b}


@dataclass(frozen=True)
class Rational:
    """num / (shift + s), clipped at s >= 0.

    With shift == 0 this is the singular log-taxis rate num/s: it is
    undefined (returns +inf) for s <= guard, which the flux operator turns
    into a NonFiniteFlux error, and it is unbounded on any box touching 0.
    """

    num: float
    shift: float
    guard: float = 1e-6

    def __call__(self, s):
        s = np.asarray(s, dtype=np.float64)
        if self.shift > 0:
            return self.num / (self.shift + np.maximum(s, 0.0))
        return np.where(s > self.guard, self.num / np.where(s > self.guard, s, 1.0), np.inf)

    def deriv(self, s):
        s = np.asarray(s, dtype=np.float64)
        if self.shift > 0:
            d = self.shift + np.maximum(s, 0.0)
            return -self.num / (d * d)
        d = np.where(s > self.guard, s, np.inf)
        return -self.num / (d * d)

    @property
    def bounded_on_nonneg(self):
        return self.shift > 0

    @property
    def sup_nonneg(self):
        return self.num / self.shift if self.shift > 0 else math.inf

    def affine_bound(self):
        return None

    def to_spec(self):
        return {"kind": "rational", "num": self.num, "shift": self.shift,
                "guard": self.guard}


# ---------------------------------------------------------------------------
# reaction rules (f, g1, g2)


@dataclass(frozen=True)
class ConstantR:
    c: float

    def value(self, u, v, w):
        return np.full_like(np.asarray(u, dtype=np.float64), self.c)

    def grad(self, u, v, w):
        z = np.zeros_like(np.asarray(u, dtype=np.float64))
        return z, z.copy(), z.copy()

    def to_spec(self):
        return {"kind": "constant", "c": self.c}


@dataclass(frozen=True)
class LinearR:
    """a + cu*u + cv*v + cw*w."""

    a: float = 0.0
    cu: float = 0.0
    cv: float = 0.0
    cw: float = 0.0

    def value(self, u, v, w):
        u = np.asarray(u, dtype=np.float64)
        return self.a + self.cu * u + self.cv * np.asarray(v) + self.cw * np.asarray(w)

    def grad(self, u, v, w):
        shape = np.asarray(u, dtype=np.float64)
        return (
            np.full_like(shape, self.cu),
            np.full_like(shape, self.cv),
            np.full_like(shape, self.cw),
        )

    def to_spec(self):
        return {"kind": "linear", "a": self.a, "cu": self.cu, "cv": self.cv,
                "cw": self.cw}


@dataclass(frozen=True)
class SigmoidGate:
    """scale * v * (psi + w) / (1 + exp(-(v - thresh))).

    The logistic factor "activates" the term once v exceeds thresh.
    """

    psi: float
    thresh: float
    scale: float = 1.0

    def _sig(self, v):
        return 1.0 / (1.0 + np.exp(-(np.asarray(v, dtype=np.float64) - self.thresh)))

    def value(self, u, v, w):
        v = np.asarray(v, dtype=np.float64)
        return self.scale * v * (self.psi + np.asarray(w)) * self._sig(v)

    def grad(self, u, v, w):
        v = np.asarray(v, dtype=np.float64)
        w = np.asarray(w, dtype=np.float64)
        s = self._sig(v)
        dv = self.scale * (self.psi + w) * (s + v * s * (1.0 - s))
        dw = self.scale * v * s
        du = np.zeros_like(dv)
        return du, dv, dw

    def to_spec(self):
        return {"kind": "sigmoid-gate", "psi": self.psi, "thresh": self.thresh,
                "scale": self.scale}


@dataclass(frozen=True)
class TanhThreshold:
    """scale * tanh(v*w - thresh)."""

    thresh: float
    scale: float = 1.0

    def value(self, u, v, w):
        return self.scale * np.tanh(np.asarray(v, dtype=np.float64) * np.asarray(w)
                                    - self.thresh)

    def grad(self, u, v, w):
        v = np.asarray(v, dtype=np.float64)
        w = np.asarray(w, dtype=np.float64)
        t = np.tanh(v * w - self.thresh)
        sech2 = 1.0 - t * t
        dv = self.scale * w * sech2
        dw = self.scale * v * sech2
        du = np.zeros_like(dv)
        return du, dv, dw

    def to_spec(self):
        return {"kind": "tanh-threshold", "thresh": self.thresh, "scale": self.scale}


@dataclass(frozen=True)
class RecruitSaturation:
    """1 / (1 + v*(psi + w)): victimization damped by partaker/guardian load."""

    psi: float

    def value(self, u, v, w):
        v = np.asarray(v, dtype=np.float64)
        return 1.0 / (1.0 + v * (self.psi + np.asarray(w)))

    def grad(self, u, v, w):
        v = np.asarray(v, dtype=np.float64)
        w = np.asarray(w, dtype=np.float64)
        q = 1.0 + v * (self.psi + w)
        q2 = q * q
        dv = -(self.psi + w) / q2
        dw = -v / q2
        du = np.zeros_like(dv)
        return du, dv, dw

    def to_spec(self):
        return {"kind": "recruit-saturation", "psi": self.psi}


@dataclass(frozen=True)
class GuardedRemoval:
    """u*(1 + v - thresh) + w*(1 + tanh(u)).

    Partaker removal that grows with the target level once guardians engage;
    the tanh factor keeps the guardian contribution sign-preserving.
    """

    thresh: float

    def value(self, u, v, w):
        u = np.asarray(u, dtype=np.float64)
        return u * (1.0 + np.asarray(v) - self.thresh) + np.asarray(w) * (
            1.0 + np.tanh(u)
        )

    def grad(self, u, v, w):
        u = np.asarray(u, dtype=np.float64)
        v = np.asarray(v, dtype=np.float64)
        w = np.asarray(w, dtype=np.float64)
        t = np.tanh(u)
        du = (1.0 + v - self.thresh) + w * (1.0 - t * t)
        dv = u * np.ones_like(du)
        dw = (1.0 + t) * np.ones_like(du)
        return du, dv, dw

    def to_spec(self):
        return {"kind": "guarded-removal", "thresh": self.thresh}


# ---------------------------------------------------------------------------
# (de)serialization for the "general" preset and config files

_SCALAR_KINDS = {
    "constant": lambda d: ConstantS(float(d["c"])),
    "affine": lambda d: Affine(float(d["a"]), float(d["b"])),
    "rational": lambda d: Rational(float(d["num"]), float(d["shift"]),
                                   float(d.get("guard", 1e-6))),
}

_REACTION_KINDS = {
    "constant": lambda d: ConstantR(float(d["c"])),
    "linear": lambda d: LinearR(float(d.get("a", 0)), float(d.get("cu", 0)),
                                float(d.get("cv", 0)), float(d.get("cw", 0))),
    "sigmoid-gate": lambda d: SigmoidGate(float(d["psi"]), float(d["thresh"]),
                                          float(d.get("scale", 1.0))),
    "tanh-threshold": lambda d: TanhThreshold(float(d["thresh"]),
                                              float(d.get("scale", 1.0))),
    "recruit-saturation": lambda d: RecruitSaturation(float(d["psi"])),
    "guarded-removal": lambda d: GuardedRemoval(float(d["thresh"])),
}


def scalar_rule_from_spec(spec):
    if not isinstance(spec, dict) or "kind" not in spec:
        raise ConfigError("bad-rule", f"scalar rule spec must be a mapping with 'kind': {spec!r}")
    kind = spec["kind"]
    if kind not in _SCALAR_KINDS:
        raise ConfigError("bad-rule", f"unknown scalar rule kind {kind!r}")
    try:
        return _SCALAR_KINDS[kind](spec)
    except KeyError as e:
        raise ConfigError("bad-rule", f"rule {kind!r} missing parameter {e}") from e


def reaction_rule_from_spec(spec):
    if not isinstance(spec, dict) or "kind" not in spec:
        raise ConfigError("bad-rule", f"reaction rule spec must be a mapping with 'kind': {spec!r}")
    kind = spec["kind"]
    if kind not in _REACTION_KINDS:
        raise ConfigError("bad-rule", f"unknown reaction rule kind {kind!r}")
    try:
        return _REACTION_KINDS[kind](spec)
    except KeyError as e:
        raise ConfigError("bad-rule", f"rule {kind!r} missing parameter {e}") from e


def fd_reaction_grad(rule, u, v, w, step=1e-6):
    """Central-difference gradient of a reaction rule, for cross-checks."""
    du = (rule.value(u + step, v, w) - rule.value(u - step, v, w)) / (2 * step)
    dv = (rule.value(u, v + step, w) - rule.value(u, v - step, w)) / (2 * step)
    dw = (rule.value(u, v, w + step) - rule.value(u, v, w - step)) / (2 * step)
    return du, dv, dw


def fd_scalar_deriv(rule, s, step=1e-6):
    return (rule(s + step) - rule(s - step)) / (2 * step)
