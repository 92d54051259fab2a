import numpy as np
import pytest

from ghostsim import LensSystem, SourceParams

# Reference geometries used throughout: the fringe measurement runs without a
# lens at s2 = 1 m, the imaging runs put the lens at u = s1 + s2 = 2.83 m.
INTERFEROMETER = dict(wavelength=810e-9, sigma=3e-3, s1=1.33, s2=1.0)
IMAGER = dict(wavelength=810e-9, sigma=3e-3, s1=1.33, s2=1.5)


@pytest.fixture(scope="session")
def fringe_params() -> SourceParams:
    return SourceParams(**INTERFEROMETER)


@pytest.fixture(scope="session")
def imaging_params() -> SourceParams:
    return SourceParams(**IMAGER)


@pytest.fixture(scope="session")
def imaging_lens() -> LensSystem:
    return LensSystem(f=1.5, u=2.83)


@pytest.fixture(scope="session")
def rng() -> np.random.Generator:
    return np.random.default_rng(20260823)
