import math

import numpy as np
import pytest

from django.conf import settings

from klein_systolic.geometry import FlatSphericalProfile
from klein_systolic.geometry import GridMetric
from klein_systolic.settings import systolic_settings


@pytest.fixture
def override_settings():
    """Return a function replacing the `KLEIN_SYSTOLIC` user settings."""
    def override(**values):
        settings.KLEIN_SYSTOLIC = values
        systolic_settings.reload()

    yield override
    settings.KLEIN_SYSTOLIC = {}
    systolic_settings.reload()


@pytest.fixture
def flat_grid():
    """The flat metric du² + dv² on a 65 × 65 lattice, β = 1."""
    return GridMetric(1.0, np.ones((65, 65)))


@pytest.fixture
def flat_spherical():
    """G_b of the sigma-v family at ω = 1.3, b = tan ω - ω."""
    return FlatSphericalProfile(1.3, math.tan(1.3) - 1.3)
