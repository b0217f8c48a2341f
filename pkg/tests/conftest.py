import math

import numpy as np
import pytest

from poromix import DomainSpec, ScalarField, VelocityField, build_domain


@pytest.fixture(scope="session")
def pi_domain():
    """(0, pi)^2 with a mid-size scalar band and two velocity modes."""
    return build_domain(DomainSpec(Lx=math.pi, Ly=math.pi, Ns=6, Nv=2))


@pytest.fixture(scope="session")
def rect_domain():
    """Non-square rectangle to catch Lx/Ly mixups."""
    return build_domain(DomainSpec(Lx=2.0, Ly=1.0, Ns=5, Nv=2))


def make_scalar(domain, modes, offset=0.0):
    """ScalarField from raw cosine amplitudes: value = offset + sum a cos cos."""
    s = domain.scalar
    B = np.zeros((s.Ns, s.Ns))
    B[0, 0] = offset / s.norm_00
    for j, k, amp in modes:
        B[j, k] += amp / (s.norm_x[j] * s.norm_y[k])
    return ScalarField(domain, B)


def make_velocity(domain, modes):
    A = np.zeros((domain.spec.Nv, domain.spec.Nv))
    for j, k, amp in modes:
        A[j - 1, k - 1] += amp
    return VelocityField(domain, A)


def random_scalar(domain, seed, scale=1.0, decay=True):
    rng = np.random.default_rng(seed)
    B = rng.standard_normal((domain.spec.Ns, domain.spec.Ns)) * scale
    if decay:
        B = B / (1.0 + domain.scalar.eigenvalues)
    return ScalarField(domain, B)
