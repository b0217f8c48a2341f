"""
Closed-form and manufactured references used by tests and verification.

The logistic formula is the exact uniform-state solution of the transport
equation (advection and diffusion drop out for spatially constant C), and
blows up in finite time for uniform initial values above 1.  Modal
diffusion factors are the exact decay of individual cosine modes.  The
manufactured cases prescribe smooth exact fields together with the body
force and transport source that make them solve the full nonlinear
system, for convergence verification.  The transport source exists only in
verification runs; production configurations cannot enable it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .domain import Domain
from .fields import ScalarField, VelocityField
from .forcing import ForcingSpec
from .mobility import evaluate as mobility_values

__all__ = [
    "LogisticBlowup",
    "logistic_solution",
    "logistic_blowup_time",
    "modal_diffusion_factor",
    "ManufacturedCase",
    "manufactured_run",
    "MANUFACTURED_PRESETS",
]


@dataclass(frozen=True)
class LogisticBlowup:
    """Explicit blow-up marker: the solution has left existence by `time`."""

    time: float


def logistic_blowup_time(c0: float, kappa: float) -> float:
    """Blow-up instant ln(c0 / (c0 - 1)) / kappa of a uniform state c0 > 1."""
    if kappa <= 0:
        raise ValueError("kappa must be positive")
    if c0 <= 1.0:
        raise ValueError(f"uniform states with c0 <= 1 do not blow up, got {c0}")
    return math.log(c0 / (c0 - 1.0)) / kappa


def logistic_solution(c0: float, kappa: float, t: float):
    """Uniform-state solution c0 / (c0 - (c0 - 1) e^(kappa t)).

    For c0 > 1 and t at or beyond the blow-up instant the result is a
    LogisticBlowup marker rather than a number.
    """
    if kappa <= 0:
        raise ValueError("kappa must be positive")
    if c0 > 1.0:
        t_star = logistic_blowup_time(c0, kappa)
        if t >= t_star:
            return LogisticBlowup(t_star)
    return c0 / (c0 - (c0 - 1.0) * math.exp(kappa * t))


def modal_diffusion_factor(mode, d: float, t: float, Lx: float, Ly: float) -> float:
    """Exact amplitude factor exp(-d lam t) of cosine mode (j, k)."""
    j, k = mode
    if j < 0 or k < 0:
        raise ValueError(f"invalid mode {mode!r}")
    lam = (j * np.pi / Lx) ** 2 + (k * np.pi / Ly) ** 2
    return math.exp(-d * lam * t)


# ---------------------------------------------------------------------------
# Manufactured solutions
# ---------------------------------------------------------------------------


class _CosMode:
    """Raw cosine product cos(a pi x/Lx) cos(b pi y/Ly) with derivatives."""

    def __init__(self, a: int, b: int):
        self.a = a
        self.b = b

    def grids(self, domain: Domain):
        g = domain.grid
        ax = self.a * np.pi / domain.spec.Lx
        by = self.b * np.pi / domain.spec.Ly
        cx = np.cos(ax * g.x)[:, None]
        sx = np.sin(ax * g.x)[:, None]
        cy = np.cos(by * g.y)[None, :]
        sy = np.sin(by * g.y)[None, :]
        val = cx * cy
        ddx = -ax * sx * cy
        ddy = -by * cx * sy
        lap = -(ax**2 + by**2) * val
        return val, ddx, ddy, lap


@dataclass(frozen=True, eq=False)
class ManufacturedCase:
    """Exact fields plus the forcings that make them solve the system."""

    name: str
    scalar_modes: tuple  # ((a, b, amplitude_fn), ...) raw cosine products
    scalar_offset: float
    stream_mode: tuple  # (j, k) of the single streamfunction
    stream_amplitude: object  # amplitude_fn(t), and ._dt(t) derivative
    max_scalar_degree: int

    def exact_C(self, domain: Domain, t: float) -> ScalarField:
        """Exact concentration projected ONTO the domain's resolved band."""
        s = domain.scalar
        B = np.zeros((s.Ns, s.Ns))
        B[0, 0] = self.scalar_offset / s.norm_00
        for a, b, amp in self.scalar_modes:
            if a < s.Ns and b < s.Ns:
                B[a, b] += amp(t) / (s.norm_x[a] * s.norm_y[b])
        return ScalarField(domain, B)

    def exact_u(self, domain: Domain, t: float) -> VelocityField:
        Nv = domain.spec.Nv
        j, k = self.stream_mode
        if not (1 <= j <= Nv and 1 <= k <= Nv):
            raise ValueError(f"stream mode {self.stream_mode} not representable at Nv={Nv}")
        A = np.zeros((Nv, Nv))
        A[j - 1, k - 1] = self.stream_amplitude(t)
        return VelocityField(domain, A)

    def exact_C_grids(self, domain: Domain, t: float):
        """Analytic nodal values and derivatives, independent of Ns."""
        M = domain.grid.M
        val = np.full((M, M), self.scalar_offset)
        ddx = np.zeros((M, M))
        ddy = np.zeros((M, M))
        lap = np.zeros((M, M))
        dval_dt = np.zeros((M, M))
        for a, b, amp in self.scalar_modes:
            v, vx, vy, vl = _CosMode(a, b).grids(domain)
            c = amp(t)
            val += c * v
            ddx += c * vx
            ddy += c * vy
            lap += c * vl
            dval_dt += amp._dt(t) * v
        return val, ddx, ddy, lap, dval_dt

    def exact_u_grids(self, domain: Domain, t: float):
        g = domain.grid
        j, k = self.stream_mode
        amp = self.stream_amplitude(t)
        wx = np.outer(g.phx[:, j - 1], g.phyd[:, k - 1])
        wy = -np.outer(g.phxd[:, j - 1], g.phy[:, k - 1])
        return amp * wx, amp * wy

    def error_norms(self, domain: Domain, t: float, C: ScalarField, u: VelocityField):
        """Quadrature L2 errors against the analytic fields."""
        cg = domain.scalar_values(C.coeffs)
        val, _, _, _, _ = self.exact_C_grids(domain, t)
        err_c = math.sqrt(domain.grid.integrate((cg - val) ** 2))
        ux, uy = domain.velocity_values(u.coeffs)
        ex, ey = self.exact_u_grids(domain, t)
        err_u = math.sqrt(domain.grid.integrate((ux - ex) ** 2 + (uy - ey) ** 2))
        return err_c, err_u

    def transport_source(self, params):
        """Nodal S(t) = dC*/dt + u*.grad C* - d lap C* + kappa C*(1-C*)."""

        def source(domain: Domain, t: float):
            val, ddx, ddy, lap, dval_dt = self.exact_C_grids(domain, t)
            ux, uy = self.exact_u_grids(domain, t)
            return dval_dt + ux * ddx + uy * ddy - params.d * lap + params.kappa * val * (1.0 - val)

        return source

    def momentum_forcing(self, params) -> ForcingSpec:
        """Body force keeping the exact velocity on the momentum balance.

        f = du*/dt + F(C*) u* - mu_e lap u* - div T(C*), with the pressure
        gauge chosen as zero.
        """
        dh = params.korteweg.delta_hat
        gamma = params.korteweg.gamma

        def force(domain: Domain, t: float):
            g = domain.grid
            j, k = self.stream_mode
            amp = self.stream_amplitude(t)
            damp = self.stream_amplitude._dt(t)
            wx = np.outer(g.phx[:, j - 1], g.phyd[:, k - 1])
            wy = -np.outer(g.phxd[:, j - 1], g.phy[:, k - 1])
            lap_wx = np.outer(g.phxdd[:, j - 1], g.phyd[:, k - 1]) + np.outer(
                g.phx[:, j - 1], g.phyddd[:, k - 1]
            )
            lap_wy = -(
                np.outer(g.phxddd[:, j - 1], g.phy[:, k - 1])
                + np.outer(g.phxd[:, j - 1], g.phydd[:, k - 1])
            )
            val, ddx, ddy, lap, _ = self.exact_C_grids(domain, t)
            fgrid = mobility_values(params.mobility, val)
            fx = damp * wx + fgrid * amp * wx - params.mu_e * amp * lap_wx
            fy = damp * wy + fgrid * amp * wy - params.mu_e * amp * lap_wy
            if dh != 0.0 or gamma != 0.0:
                div_x, div_y = _div_full_tensor_grids(self, domain, t, dh, gamma)
                fx -= div_x
                fy -= div_y
            return fx, fy

        return ForcingSpec.from_function(force)


def _div_full_tensor_grids(case: ManufacturedCase, domain: Domain, t, dh, gamma):
    """div T of the effective Korteweg tensor from the analytic modes."""
    g = domain.grid
    M = g.M
    ddx = np.zeros((M, M))
    ddy = np.zeros((M, M))
    lap = np.zeros((M, M))
    dxx = np.zeros((M, M))
    dxy = np.zeros((M, M))
    dyy = np.zeros((M, M))
    lap_x = np.zeros((M, M))
    lap_y = np.zeros((M, M))
    for a, b, amp in case.scalar_modes:
        ax = a * np.pi / domain.spec.Lx
        by = b * np.pi / domain.spec.Ly
        cx = np.cos(ax * g.x)[:, None]
        sx = np.sin(ax * g.x)[:, None]
        cy = np.cos(by * g.y)[None, :]
        sy = np.sin(by * g.y)[None, :]
        c = amp(t)
        lam = ax**2 + by**2
        ddx += c * (-ax * sx * cy)
        ddy += c * (-by * cx * sy)
        lap += c * (-lam * cx * cy)
        dxx += c * (-(ax**2) * cx * cy)
        dxy += c * (ax * by * sx * sy)
        dyy += c * (-(by**2) * cx * cy)
        lap_x += c * (lam * ax * sx * cy)
        lap_y += c * (lam * by * cx * sy)
    hx = ddx * dxx + ddy * dxy
    hy = ddx * dxy + ddy * dyy
    div_x = -(5.0 * dh / 3.0) * hx + (2.0 * gamma / 3.0) * lap_x - dh * lap * ddx
    div_y = -(5.0 * dh / 3.0) * hy + (2.0 * gamma / 3.0) * lap_y - dh * lap * ddy
    return div_x, div_y


class _Amplitude:
    """Smooth scalar amplitude with an attached time derivative."""

    def __init__(self, fn, dfn):
        self._fn = fn
        self._dt = dfn

    def __call__(self, t):
        return self._fn(t)


def _build_rest() -> ManufacturedCase:
    steady = _Amplitude(lambda t: 0.25, lambda t: 0.0)
    return ManufacturedCase(
        name="rest",
        scalar_modes=((1, 1, steady),),
        scalar_offset=0.5,
        stream_mode=(1, 1),
        stream_amplitude=_Amplitude(lambda t: 0.0, lambda t: 0.0),
        max_scalar_degree=1,
    )


def _build_swirl() -> ManufacturedCase:
    low = _Amplitude(lambda t: 0.3 * math.cos(t), lambda t: -0.3 * math.sin(t))
    high = _Amplitude(
        lambda t: 0.02 * (1.0 + 0.5 * math.sin(2.0 * t)),
        lambda t: 0.02 * math.cos(2.0 * t),
    )
    amp = _Amplitude(
        lambda t: 0.2 * (1.0 + 0.5 * math.sin(t)), lambda t: 0.1 * math.cos(t)
    )
    return ManufacturedCase(
        name="swirl",
        scalar_modes=((1, 1, low), (11, 9, high)),
        scalar_offset=0.5,
        stream_mode=(1, 1),
        stream_amplitude=amp,
        max_scalar_degree=11,
    )


MANUFACTURED_PRESETS = {"rest": _build_rest, "swirl": _build_swirl}


def manufactured_run(preset: str) -> ManufacturedCase:
    """Look up a manufactured case by name; unknown names are rejected."""
    try:
        builder = MANUFACTURED_PRESETS[preset]
    except KeyError:
        raise ValueError(
            f"unknown manufactured preset {preset!r}; available: {sorted(MANUFACTURED_PRESETS)}"
        ) from None
    return builder()
