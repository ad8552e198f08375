"""Exception types shared across the package."""


class TpgError(Exception):
    """Base class for all package errors."""


class ConfigError(TpgError):
    """Invalid or incomplete run configuration.

    ``reason`` is a short machine-parsable tag (e.g. "H1", "unknown-preset");
    ``detail`` is a human-readable explanation.
    """

    def __init__(self, reason, detail=""):
        self.reason = reason
        self.detail = detail
        super().__init__(f"{reason}: {detail}" if detail else reason)


class UnknownPreset(ConfigError):
    def __init__(self, name):
        self.name = name
        super().__init__("unknown-preset", str(name))


class MissingParam(ConfigError):
    def __init__(self, name):
        self.name = name
        super().__init__("missing-param", str(name))


class NonFiniteFlux(TpgError):
    """A taxis rate rule produced NaN/Inf on the current signal values."""


class NonFiniteRhs(TpgError):
    def __init__(self, component, index):
        self.component = component
        self.index = index
        super().__init__(f"non-finite rhs in component {component!r} at cell {index}")


class LinearSolveDiverged(TpgError):
    def __init__(self, iterations, residual):
        self.iterations = iterations
        self.residual = residual
        super().__init__(
            f"implicit diffusion solve stalled after {iterations} iterations "
            f"(residual {residual:.3e})"
        )


class NonFiniteState(TpgError):
    def __init__(self, component, time):
        self.component = component
        self.time = time
        super().__init__(f"non-finite state in component {component!r} at t={time:.6g}")


class PositivityBreached(TpgError):
    def __init__(self, component, time, min_value):
        self.component = component
        self.time = time
        self.min_value = min_value
        super().__init__(
            f"component {component!r} fell to {min_value:.3e} at t={time:.6g}"
        )


class NoRootInBracket(TpgError):
    def __init__(self, bracket):
        self.bracket = bracket
        super().__init__(
            f"no sign change of -s*g1(s,0,wbar)+h1(s) on [0, {bracket:.6g}]"
        )


class WindowTooShort(TpgError):
    """The series does not cover enough post-transient time to classify."""


class NonPositiveAmplitude(TpgError):
    """Growth-rate fit requested on amplitudes that are not strictly positive."""
