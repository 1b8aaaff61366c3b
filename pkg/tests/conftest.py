import pytest

from chansense import NoiseProfile

# Reference receiver noise profile: k = 10^-20.5, gamma = 2, no
# thermal floor (sensitivity -101.5 dBm minus 15 dB at 1 uW).
K_REF = 10.0**-20.5


@pytest.fixture(scope="session")
def profile() -> NoiseProfile:
    return NoiseProfile(k=K_REF, gamma=2.0, sigma_t_sq=0.0)
