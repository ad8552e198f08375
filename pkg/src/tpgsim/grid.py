"""Uniform cell-centered 2D grid with Neumann closure.

Fields live at cell centers ((i+1/2)*hx, (j+1/2)*hy).  All discrete operators
use the finite-volume (flux) form so that their discrete integral vanishes
exactly (up to rounding), and homogeneous Neumann boundary conditions are
realized by mirror ghost cells / zero boundary fluxes.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import NonFiniteFlux


@dataclass(frozen=True)
class GridSpec:
    """Uniform rectangular grid on [0, length_x] x [0, length_y]."""

    length_x: float
    length_y: float
    nx: int
    ny: int

    def __post_init__(self):
        if not (self.length_x > 0 and self.length_y > 0):
            raise ValueError("domain side lengths must be positive")
        if self.nx < 4 or self.ny < 4:
            raise ValueError("nx and ny must be at least 4")

    @property
    def hx(self):
        return self.length_x / self.nx

    @property
    def hy(self):
        return self.length_y / self.ny

    @property
    def area(self):
        return self.length_x * self.length_y

    def cell_centers(self):
        """Return (X, Y) arrays of shape (nx, ny) with cell-center coordinates."""
        x = (np.arange(self.nx) + 0.5) * self.hx
        y = (np.arange(self.ny) + 0.5) * self.hy
        return np.meshgrid(x, y, indexing="ij")


@dataclass
class Field:
    """Scalar grid function: one float64 value per cell, shape (nx, ny)."""

    grid: GridSpec
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        if v.shape != (self.grid.nx, self.grid.ny):
            raise ValueError(
                f"values shape {v.shape} does not match grid "
                f"({self.grid.nx}, {self.grid.ny})"
            )
        self.values = v

    @classmethod
    def full(cls, grid, value):
        return cls(grid, np.full((grid.nx, grid.ny), float(value)))

    @classmethod
    def zeros(cls, grid):
        return cls(grid, np.zeros((grid.nx, grid.ny)))

    @classmethod
    def from_function(cls, grid, fn):
        X, Y = grid.cell_centers()
        return cls(grid, np.asarray(fn(X, Y), dtype=np.float64))

    def copy(self):
        return Field(self.grid, self.values.copy())

    def min(self):
        return float(self.values.min())

    def max(self):
        return float(self.values.max())


def laplacian_values(v, grid):
    """5-point Neumann Laplacian on a raw (nx, ny) array."""
    hx2 = grid.hx * grid.hx
    hy2 = grid.hy * grid.hy
    # mirror ghost cells: the reflected neighbor equals the boundary cell,
    # giving a zero flux through boundary faces
    p = np.pad(v, 1, mode="edge")
    return (
        (p[:-2, 1:-1] - 2.0 * v + p[2:, 1:-1]) / hx2
        + (p[1:-1, :-2] - 2.0 * v + p[1:-1, 2:]) / hy2
    )


def laplacian(f: Field) -> Field:
    """Discrete Laplacian with homogeneous Neumann boundary conditions."""
    return Field(f.grid, laplacian_values(f.values, f.grid))


def taxis_divergence_values(carrier, signal, chi, grid, scheme="upwind"):
    """div(carrier * chi(signal) * grad(signal)) in conservative flux form.

    Face flux = (face carrier) * chi(face-averaged signal) * (signal jump /
    spacing).  The face carrier is taken from the upwind side (sign of the
    face velocity chi * d signal) or centrally averaged when
    ``scheme == "central"``.  Boundary faces carry zero flux.
    """
    hx = grid.hx
    hy = grid.hy
    out = np.zeros_like(carrier)

    for axis, h in ((0, hx), (1, hy)):
        s_lo = signal[:-1, :] if axis == 0 else signal[:, :-1]
        s_hi = signal[1:, :] if axis == 0 else signal[:, 1:]
        c_lo = carrier[:-1, :] if axis == 0 else carrier[:, :-1]
        c_hi = carrier[1:, :] if axis == 0 else carrier[:, 1:]

        chi_face = np.asarray(chi(0.5 * (s_lo + s_hi)), dtype=np.float64)
        if not np.all(np.isfinite(chi_face)):
            raise NonFiniteFlux(
                "taxis rate rule returned NaN/Inf on a face-averaged signal"
            )
        vel = chi_face * (s_hi - s_lo) / h
        if scheme == "upwind":
            c_face = np.where(vel > 0.0, c_lo, c_hi)
        elif scheme == "central":
            c_face = 0.5 * (c_lo + c_hi)
        else:
            raise ValueError(f"unknown taxis scheme {scheme!r}")
        flux = c_face * vel

        # divergence: (F_{i+1/2} - F_{i-1/2}) / h with zero boundary fluxes
        if axis == 0:
            out[:-1, :] += flux / h
            out[1:, :] -= flux / h
        else:
            out[:, :-1] += flux / h
            out[:, 1:] -= flux / h
    return out


def taxis_divergence(carrier: Field, signal: Field, chi, scheme="upwind") -> Field:
    """Conservative divergence of the taxis flux carrier*chi(signal)*grad(signal)."""
    return Field(
        carrier.grid,
        taxis_divergence_values(
            carrier.values, signal.values, chi, carrier.grid, scheme=scheme
        ),
    )


def integrate(f: Field) -> float:
    """Midpoint-rule integral hx*hy*sum(values)."""
    return float(f.grid.hx * f.grid.hy * f.values.sum())


def rms_amplitude(f: Field) -> float:
    """sqrt of the domain-averaged square of f."""
    sq = Field(f.grid, f.values * f.values)
    return float(np.sqrt(integrate(sq) / f.grid.area))


def max_taxis_speed(carrier_unused, signal, chi, grid):
    """Largest face speed |chi(signal) * d signal / h|, for CFL control."""
    speed = 0.0
    for axis, h in ((0, grid.hx), (1, grid.hy)):
        s_lo = signal[:-1, :] if axis == 0 else signal[:, :-1]
        s_hi = signal[1:, :] if axis == 0 else signal[:, 1:]
        chi_face = np.asarray(chi(0.5 * (s_lo + s_hi)), dtype=np.float64)
        with np.errstate(invalid="ignore"):
            vel = np.abs(chi_face * (s_hi - s_lo) / h)
        if vel.size:
            speed = max(speed, float(np.nan_to_num(vel, nan=np.inf).max()))
    return speed
