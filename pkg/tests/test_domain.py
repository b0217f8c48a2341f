import math

import numpy as np
import pytest

from poromix import (
    DomainError,
    DomainSpec,
    ScalarField,
    build_domain,
    grid_to_scalar,
    required_quadrature_points,
    scalar_to_grid,
)

from conftest import random_scalar


def test_eigenvalues_pi_square_ns2():
    dom = build_domain(DomainSpec(Lx=math.pi, Ly=math.pi, Ns=2, Nv=1))
    lam = dom.scalar.eigenvalues
    assert lam[0, 0] == 0.0
    assert np.allclose(lam, [[0.0, 1.0], [1.0, 2.0]], atol=1e-14)


def test_eigenvalues_nondecreasing_along_indices(rect_domain):
    lam = rect_domain.scalar.eigenvalues
    assert np.all(np.diff(lam, axis=0) >= 0)
    assert np.all(np.diff(lam, axis=1) >= 0)


def test_ns1_single_constant_mode():
    dom = build_domain(DomainSpec(Lx=math.pi, Ly=math.pi, Ns=1, Nv=1))
    assert dom.scalar.eigenvalues.shape == (1, 1)
    assert dom.scalar.eigenvalues[0, 0] == 0.0
    # The constant mode evaluates to 1/sqrt(area) everywhere.
    vals = dom.scalar_values(np.array([[1.0]]))
    assert np.allclose(vals, 1.0 / math.pi, atol=1e-14)


def test_gram_nv1_matches_hand_expansion():
    # psi = sin^2 x sin^2 y on (0, pi)^2:
    #   int |w|^2 = 2 * int sin^2(2x) dx * int sin^4 y dy = 2 (pi/2)(3 pi/8)
    dom = build_domain(DomainSpec(Lx=math.pi, Ly=math.pi, Ns=2, Nv=1))
    expected = 3.0 * math.pi**2 / 8.0
    assert dom.velocity.gram.shape == (1, 1)
    assert abs(dom.velocity.gram[0, 0] - expected) <= 1e-10
    # Cross-check against an oversampled rule.
    fine = build_domain(DomainSpec(Lx=math.pi, Ly=math.pi, Ns=2, Nv=1, M=4 * dom.grid.M))
    assert abs(fine.velocity.gram[0, 0] - dom.velocity.gram[0, 0]) <= 1e-10


def test_scalar_basis_orthonormal(pi_domain):
    g = pi_domain.grid
    gram_x = g.zx.T @ (g.wx[:, None] * g.zx)
    gram_y = g.zy.T @ (g.wy[:, None] * g.zy)
    Ns = pi_domain.spec.Ns
    gram_2d = np.einsum("jl,km->jklm", gram_x, gram_y).reshape(Ns * Ns, Ns * Ns)
    assert np.abs(gram_2d - np.eye(Ns * Ns)).max() <= 1e-12


def test_quadrature_integrates_constants(rect_domain):
    area = rect_domain.spec.Lx * rect_domain.spec.Ly
    assert abs(rect_domain.grid.area - area) <= 1e-13 * area
    ones = np.ones((rect_domain.grid.M, rect_domain.grid.M))
    assert abs(rect_domain.grid.integrate(ones) - area) <= 1e-13 * area


def test_velocity_divergence_free_on_grid(rect_domain):
    Nv = rect_domain.spec.Nv
    for j in range(Nv):
        for k in range(Nv):
            A = np.zeros((Nv, Nv))
            A[j, k] = 1.0
            dux_dx, _, _, duy_dy = rect_domain.velocity_gradient_values(A)
            assert np.abs(dux_dx + duy_dy).max() <= 1e-12


def test_velocity_no_slip_and_scalar_neumann_on_boundary(rect_domain):
    from poromix.domain import _scalar_factors, _stream_factors

    spec = rect_domain.spec
    for L, n in ((spec.Lx, spec.Ns), (spec.Ly, spec.Ns)):
        ends = np.array([0.0, L])
        _, _, zd, _ = _scalar_factors(ends, L, n)
        assert np.abs(zd).max() <= 1e-12  # d z / d normal = 0 at the walls
    for L, n in ((spec.Lx, spec.Nv), (spec.Ly, spec.Nv)):
        ends = np.array([0.0, L])
        v, d, _, _ = _stream_factors(ends, L, n)
        assert np.abs(v).max() <= 1e-12  # phi = 0: both velocity components vanish
        assert np.abs(d).max() <= 1e-12  # phi' = 0


def test_gram_and_stiffness_symmetric_spd(rect_domain):
    G = rect_domain.velocity.gram
    S = rect_domain.velocity.stiffness
    assert np.abs(G - G.T).max() == 0.0
    assert np.abs(S - S.T).max() == 0.0
    assert np.linalg.eigvalsh(G).min() > 0


def test_build_rejects_bad_specs():
    with pytest.raises(DomainError, match="Lx"):
        build_domain(DomainSpec(Lx=-1.0, Ly=1.0, Ns=4, Nv=1))
    with pytest.raises(DomainError, match="exactness threshold"):
        build_domain(DomainSpec(Lx=1.0, Ly=1.0, Ns=8, Nv=2, M=10))
    with pytest.raises(DomainError, match="Ns"):
        build_domain(DomainSpec(Lx=1.0, Ly=1.0, Ns=0, Nv=1))


def test_required_points_cover_spec_floor():
    assert required_quadrature_points(8, 2) >= 2 * max(8, 2 * 2 + 2)
    assert required_quadrature_points(1, 1) >= 8


def test_build_is_deterministic():
    a = build_domain(DomainSpec(Lx=1.5, Ly=0.5, Ns=4, Nv=2))
    b = build_domain(DomainSpec(Lx=1.5, Ly=0.5, Ns=4, Nv=2))
    assert np.array_equal(a.grid.x, b.grid.x)
    assert np.array_equal(a.velocity.gram, b.velocity.gram)
    assert np.array_equal(a.scalar.eigenvalues, b.scalar.eigenvalues)


def test_scalar_to_grid_constant(pi_domain):
    C = ScalarField(pi_domain, np.zeros((6, 6)))
    C = ScalarField(pi_domain, _set(C.coeffs, (0, 0), 1.0 / pi_domain.scalar.norm_00))
    assert np.allclose(scalar_to_grid(C), 1.0, atol=1e-13)


def test_scalar_to_grid_single_mode(pi_domain):
    s = pi_domain.scalar
    B = np.zeros((6, 6))
    B[1, 0] = 1.0 / (s.norm_x[1] * s.norm_y[0])
    vals = scalar_to_grid(ScalarField(pi_domain, B))
    expected = np.cos(pi_domain.grid.x)[:, None] * np.ones_like(pi_domain.grid.y)[None, :]
    assert np.abs(vals - expected).max() <= 1e-13


def test_grid_roundtrip_random(pi_domain):
    C = random_scalar(pi_domain, seed=3, decay=False)
    back = grid_to_scalar(pi_domain, scalar_to_grid(C))
    assert np.abs(back.coeffs - C.coeffs).max() <= 1e-12


def _set(arr, idx, value):
    out = arr.copy()
    out[idx] = value
    return out
