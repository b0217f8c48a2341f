"""
Field value types over the spectral bases and the differential/product
operators used by the physics terms.

Fields are immutable: every operator returns a fresh field.  Nonlinear
terms are evaluated pseudo-spectrally (transform to the grid, multiply
pointwise, project back by quadrature), which is alias-free because the
quadrature rule is sized for the largest product degree.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .domain import Domain

__all__ = [
    "ResolutionMismatchError",
    "ScalarField",
    "VelocityField",
    "PressureField",
    "scalar_to_grid",
    "grid_to_scalar",
    "gradient",
    "laplacian",
    "advect",
    "reaction",
]


class ResolutionMismatchError(ValueError):
    """Raised when fields or grids from incompatible discretizations mix."""


def _check_same_domain(a, b):
    if a.domain is not b.domain and a.domain.spec != b.domain.spec:
        raise ResolutionMismatchError(
            f"fields live on different domains: {a.domain.spec} vs {b.domain.spec}"
        )


@dataclass(frozen=True, eq=False)
class ScalarField:
    """Concentration-like scalar: cosine coefficients (Ns, Ns)."""

    domain: Domain
    coeffs: np.ndarray

    def __post_init__(self):
        Ns = self.domain.spec.Ns
        c = np.asarray(self.coeffs, dtype=float)
        if c.shape != (Ns, Ns):
            raise ResolutionMismatchError(f"expected coefficients ({Ns}, {Ns}), got {c.shape}")
        if not np.all(np.isfinite(c)):
            raise ValueError("scalar field has non-finite coefficients")
        object.__setattr__(self, "coeffs", c)

    @property
    def mass(self) -> float:
        """Integral of the field over the rectangle."""
        s = self.domain.scalar
        return float(self.coeffs[0, 0] * s.norm_00 * s.Lx * s.Ly)

    @property
    def mean_value(self) -> float:
        return self.mass / (self.domain.spec.Lx * self.domain.spec.Ly)

    def l2_norm_sq(self) -> float:
        return float(np.sum(self.coeffs**2))

    def h1_seminorm_sq(self) -> float:
        return float(np.sum(self.domain.scalar.eigenvalues * self.coeffs**2))

    def h2_seminorm_sq(self) -> float:
        return float(np.sum(self.domain.scalar.eigenvalues**2 * self.coeffs**2))

    def __add__(self, other: "ScalarField") -> "ScalarField":
        _check_same_domain(self, other)
        return ScalarField(self.domain, self.coeffs + other.coeffs)

    def __sub__(self, other: "ScalarField") -> "ScalarField":
        _check_same_domain(self, other)
        return ScalarField(self.domain, self.coeffs - other.coeffs)

    def __mul__(self, scalar: float) -> "ScalarField":
        return ScalarField(self.domain, self.coeffs * float(scalar))

    __rmul__ = __mul__


@dataclass(frozen=True, eq=False)
class VelocityField:
    """Solenoidal no-slip velocity: streamfunction coefficients (Nv, Nv)."""

    domain: Domain
    coeffs: np.ndarray

    def __post_init__(self):
        Nv = self.domain.spec.Nv
        c = np.asarray(self.coeffs, dtype=float)
        if c.shape != (Nv, Nv):
            raise ResolutionMismatchError(f"expected coefficients ({Nv}, {Nv}), got {c.shape}")
        if not np.all(np.isfinite(c)):
            raise ValueError("velocity field has non-finite coefficients")
        object.__setattr__(self, "coeffs", c)

    def to_grid(self):
        return self.domain.velocity_values(self.coeffs)

    def l2_norm_sq(self) -> float:
        flat = self.coeffs.reshape(-1)
        return float(flat @ self.domain.velocity.gram @ flat)

    def h1_seminorm_sq(self) -> float:
        flat = self.coeffs.reshape(-1)
        return float(flat @ self.domain.velocity.stiffness @ flat)

    def __add__(self, other: "VelocityField") -> "VelocityField":
        _check_same_domain(self, other)
        return VelocityField(self.domain, self.coeffs + other.coeffs)

    def __sub__(self, other: "VelocityField") -> "VelocityField":
        _check_same_domain(self, other)
        return VelocityField(self.domain, self.coeffs - other.coeffs)

    def __mul__(self, scalar: float) -> "VelocityField":
        return VelocityField(self.domain, self.coeffs * float(scalar))

    __rmul__ = __mul__


@dataclass(frozen=True, eq=False)
class PressureField:
    """Diagnostic pressure in the cosine basis; the mean mode is pinned to 0."""

    domain: Domain
    coeffs: np.ndarray

    def __post_init__(self):
        Ns = self.domain.spec.Ns
        c = np.asarray(self.coeffs, dtype=float).copy()
        if c.shape != (Ns, Ns):
            raise ResolutionMismatchError(f"expected coefficients ({Ns}, {Ns}), got {c.shape}")
        c[0, 0] = 0.0
        if not np.all(np.isfinite(c)):
            raise ValueError("pressure field has non-finite coefficients")
        object.__setattr__(self, "coeffs", c)

    @property
    def mean_value(self) -> float:
        return 0.0

    def to_grid(self):
        return self.domain.scalar_values(self.coeffs)


def scalar_to_grid(field: ScalarField) -> np.ndarray:
    """Nodal values (M, M) of a scalar field."""
    return field.domain.scalar_values(field.coeffs)


def grid_to_scalar(domain: Domain, values: np.ndarray) -> ScalarField:
    """L2 projection of nodal values back onto the cosine basis.

    Round-trips scalar_to_grid exactly (to rounding) for resolved fields.
    """
    M = domain.grid.M
    v = np.asarray(values, dtype=float)
    if v.shape != (M, M):
        raise ResolutionMismatchError(f"expected grid values ({M}, {M}), got {v.shape}")
    return ScalarField(domain, domain.scalar_project(v))


def gradient(field: ScalarField):
    """Nodal (dC/dx, dC/dy), evaluated analytically mode by mode."""
    return field.domain.scalar_gradient_values(field.coeffs)


def laplacian(field: ScalarField) -> ScalarField:
    """Coefficient-space Laplacian: -lam[j,k] beta[j,k]."""
    return ScalarField(field.domain, -field.domain.scalar.eigenvalues * field.coeffs)


def advect(u: VelocityField, C: ScalarField) -> ScalarField:
    """Projection of u . grad C onto the scalar basis."""
    _check_same_domain(u, C)
    dom = C.domain
    ux, uy = dom.velocity_values(u.coeffs)
    cx, cy = dom.scalar_gradient_values(C.coeffs)
    return ScalarField(dom, dom.scalar_project(ux * cx + uy * cy))


def reaction(C: ScalarField, kappa: float) -> ScalarField:
    """Projection of kappa * C (1 - C) onto the scalar basis; kappa >= 0."""
    if kappa < 0:
        raise ValueError(f"reaction rate must be nonnegative, got {kappa}")
    dom = C.domain
    cg = dom.scalar_values(C.coeffs)
    return ScalarField(dom, dom.scalar_project(kappa * cg * (1.0 - cg)))
