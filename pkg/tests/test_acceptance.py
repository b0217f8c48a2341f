"""
Acceptance gate: every criterion of the deliverable, one test each, with a
printed pass/fail line per check.

 1. modal diffusion against the exact decay factor
 2. logistic value and finite-time blow-up detection
 3. concentration energy identity residual within 10x integrator tolerance
 4. momentum energy identity residual within 10x integrator tolerance
    (run has gradient-stress coupling on and nonzero forcing)
 5. mass conservation without reaction
 6. exponential decay to the mean: envelope at all ledger times plus the
    single-mode equality case
 7. velocity decay: constant-mobility envelope and monotone dissipation
 8. positivity with refinement trend
 9. quadratic perturbation scaling (uniqueness shadow)
10. full-tensor versus reduced Korteweg pairing
11. manufactured-solution spectral error drop for C and u
12. mobility families: bounded stable difference quotients and the
    exponential(0) == constant(1) trajectory identity

Each criterion runs in seconds at the configured resolutions; the suite
implementations live in poromix.verify so the CLI exposes the same checks.
"""

from functools import lru_cache

from poromix.verify import run_suite


@lru_cache(maxsize=None)
def _suite(name):
    return tuple(run_suite(name))


def _assert_all(checks):
    for check in checks:
        print(check.line())
    assert all(c.passed for c in checks), "; ".join(
        c.line() for c in checks if not c.passed
    )


def test_criterion_01_modal_diffusion():
    _assert_all(_suite("diffusion"))


def test_criterion_02_logistic_reaction_and_blowup():
    _assert_all(_suite("logistic"))


def test_criterion_03_concentration_energy_identity():
    _assert_all([c for c in _suite("energy") if c.name.endswith("_C")])


def test_criterion_04_momentum_energy_identity():
    _assert_all([c for c in _suite("energy") if c.name.endswith("_u")])


def test_criterion_05_mass_conservation():
    _assert_all(_suite("mass"))


def test_criterion_06_exponential_decay_to_mean():
    _assert_all(_suite("decay"))


def test_criterion_07_velocity_decay():
    _assert_all(_suite("velocity-decay"))


def test_criterion_08_positivity():
    _assert_all(_suite("positivity"))


def test_criterion_09_uniqueness_shadow():
    _assert_all(_suite("perturbation"))


def test_criterion_10_korteweg_reduction():
    _assert_all(_suite("korteweg-reduction"))


def test_criterion_11_mms_spectral_convergence():
    _assert_all(_suite("mms"))


def test_criterion_12_mobility_corollaries():
    _assert_all(_suite("lipschitz"))
