import math

import numpy as np
import pytest

from poromix import (
    DomainSpec,
    ResolutionMismatchError,
    ScalarField,
    advect,
    build_domain,
    gradient,
    grid_to_scalar,
    laplacian,
    reaction,
    scalar_to_grid,
)

from conftest import make_scalar, make_velocity, random_scalar


def test_laplacian_eigenfunction(pi_domain):
    C = make_scalar(pi_domain, [(1, 0, 1.0)])  # cos(x)
    lap = laplacian(C)
    assert np.abs(lap.coeffs + C.coeffs).max() <= 1e-14  # lap cos x = -cos x


def test_laplacian_constant_and_gradient_zero(pi_domain):
    C = make_scalar(pi_domain, [], offset=3.0)
    assert np.abs(laplacian(C).coeffs).max() == 0.0
    gx, gy = gradient(C)
    assert np.abs(gx).max() <= 1e-13 and np.abs(gy).max() <= 1e-13


def test_laplacian_mixed_mode(pi_domain):
    C = make_scalar(pi_domain, [(2, 1, 1.0)])  # cos(2x) cos(y): lam = 4 + 1
    lap = laplacian(C)
    assert np.abs(lap.coeffs + 5.0 * C.coeffs).max() <= 1e-13


def test_gradient_matches_analytic(pi_domain):
    C = make_scalar(pi_domain, [(1, 0, 1.0)])
    gx, gy = gradient(C)
    x = pi_domain.grid.x
    assert np.abs(gx - (-np.sin(x))[:, None]).max() <= 1e-13
    assert np.abs(gy).max() <= 1e-13


def test_advect_zero_velocity_and_constant_scalar(pi_domain):
    u0 = make_velocity(pi_domain, [])
    C = random_scalar(pi_domain, seed=1)
    assert np.abs(advect(u0, C).coeffs).max() == 0.0
    u = make_velocity(pi_domain, [(1, 1, 0.7)])
    const = make_scalar(pi_domain, [], offset=2.0)
    assert np.abs(advect(u, const).coeffs).max() <= 1e-13


def test_advect_matches_oversampled_quadrature(pi_domain):
    spec = pi_domain.spec
    fine = build_domain(DomainSpec(spec.Lx, spec.Ly, spec.Ns, spec.Nv, M=4 * pi_domain.grid.M))
    u_modes = [(1, 1, 1.0)]
    c_modes = [(1, 0, 1.0)]
    coarse_res = advect(make_velocity(pi_domain, u_modes), make_scalar(pi_domain, c_modes))
    fine_res = advect(make_velocity(fine, u_modes), make_scalar(fine, c_modes))
    assert np.abs(coarse_res.coeffs - fine_res.coeffs).max() <= 1e-10


def test_advect_linearity(pi_domain):
    u = make_velocity(pi_domain, [(1, 2, 0.4), (2, 1, -0.3)])
    C1 = random_scalar(pi_domain, seed=11)
    C2 = random_scalar(pi_domain, seed=12)
    a, b = 1.7, -0.6
    lhs = advect(u, ScalarField(pi_domain, a * C1.coeffs + b * C2.coeffs))
    rhs = a * advect(u, C1).coeffs + b * advect(u, C2).coeffs
    assert np.abs(lhs.coeffs - rhs).max() <= 1e-12


def test_advect_skew_symmetry_and_mean_annihilation(pi_domain):
    for seed in range(4):
        u = make_velocity(pi_domain, [(1, 1, 0.8), (2, 2, -0.5), (1, 2, 0.3)])
        C = random_scalar(pi_domain, seed=seed, decay=False)
        adv = advect(u, C)
        scale = max(1.0, float(np.abs(C.coeffs).max()))
        # (u . grad C, C) = 0 by the divergence theorem with no-penetration.
        assert abs(float(np.sum(adv.coeffs * C.coeffs))) <= 1e-10 * scale**2
        assert abs(adv.coeffs[0, 0]) <= 1e-12 * scale


def test_reaction_roots_and_uniform_algebra(pi_domain):
    zero = make_scalar(pi_domain, [])
    one = make_scalar(pi_domain, [], offset=1.0)
    assert np.abs(reaction(zero, 1.0).coeffs).max() == 0.0
    assert np.abs(reaction(one, 1.0).coeffs).max() <= 1e-13
    two = make_scalar(pi_domain, [], offset=2.0)
    r = reaction(two, 1.0)
    assert abs(r.mean_value - (-2.0)) <= 1e-13  # C(1-C) = -2 uniformly


def test_reaction_cosine_expansion(pi_domain):
    # C = cos x: C(1 - C) = cos x - 1/2 - cos(2x)/2.
    C = make_scalar(pi_domain, [(1, 0, 1.0)])
    expected = make_scalar(pi_domain, [(1, 0, 1.0), (2, 0, -0.5)], offset=-0.5)
    r = reaction(C, 1.0)
    assert np.abs(r.coeffs - expected.coeffs).max() <= 1e-12


def test_reaction_rejects_negative_rate(pi_domain):
    with pytest.raises(ValueError, match="nonnegative"):
        reaction(make_scalar(pi_domain, []), -1.0)


def test_resolution_mismatch_rejected(pi_domain, rect_domain):
    u = make_velocity(rect_domain, [(1, 1, 1.0)])
    C = random_scalar(pi_domain, seed=5)
    with pytest.raises(ResolutionMismatchError):
        advect(u, C)
    with pytest.raises(ResolutionMismatchError):
        grid_to_scalar(pi_domain, np.zeros((3, 3)))


def test_nonfinite_coefficients_rejected(pi_domain):
    B = np.zeros((6, 6))
    B[2, 2] = math.nan
    with pytest.raises(ValueError, match="non-finite"):
        ScalarField(pi_domain, B)


def test_pressure_field_mean_pinned(pi_domain):
    from poromix import PressureField

    B = np.ones((6, 6))
    p = PressureField(pi_domain, B)
    assert p.coeffs[0, 0] == 0.0
    assert p.mean_value == 0.0


def test_mass_and_mean_match_quadrature(pi_domain):
    C = random_scalar(pi_domain, seed=9)
    grid_mass = pi_domain.grid.integrate(scalar_to_grid(C))
    assert abs(C.mass - grid_mass) <= 1e-12 * max(1.0, abs(grid_mass))
    area = pi_domain.spec.Lx * pi_domain.spec.Ly
    assert abs(C.mean_value - grid_mass / area) <= 1e-13
