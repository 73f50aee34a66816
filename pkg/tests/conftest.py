import numpy as np
import pytest
from hypothesis import settings

from satsec.channel import AttenuationProfile, sample_channel
from satsec.powerctl import InterferenceCoefficients, Variant

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")


def isolated_coeffs(rng, K, gamma=1.0, sigma2=1.0, leak=0.05, eaves=0.05, variant=Variant.FIXED_BF):
    """Random gains with strong beam isolation: Theta_kk ~ 1, cross and eavesdropper gains small."""
    T = rng.uniform(0.0, leak, (K, K))
    np.fill_diagonal(T, rng.uniform(0.5, 1.5, K))
    te = rng.uniform(0.0, eaves, K)
    return InterferenceCoefficients.from_gains(T, te, gamma, sigma2, variant)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def chan85():
    return sample_channel(11, 8, 5, AttenuationProfile.uniform(5, 0.8, 0.8), 1e-4)


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if results:
        terminalreporter.section("acceptance criteria")
        for n in sorted(results):
            terminalreporter.write_line(results[n])
