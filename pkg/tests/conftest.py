import numpy as np
import pytest

from softpack.bodies import ConvexBody


@pytest.fixture(scope="session")
def disk():
    return ConvexBody.disk()


@pytest.fixture(scope="session")
def square_body():
    return ConvexBody.square(1.0, 0.05)


@pytest.fixture(scope="session")
def hex_body():
    return ConvexBody.regular_polygon(6, 1.0, 0.05)


@pytest.fixture(scope="session")
def ellipse_body():
    th = np.linspace(0, 2 * np.pi, 4096, endpoint=False)
    h = np.sqrt((1.3 * np.cos(th)) ** 2 + (0.8 * np.sin(th)) ** 2)
    return ConvexBody.from_support_samples(th, h)


def hexagon_cap_area(rho: float) -> float:
    """area(H ∩ rho B) for the regular hexagon H with inradius 1."""
    if rho <= 1.0:
        return np.pi * rho * rho
    if rho >= 2.0 / np.sqrt(3.0):
        return 2.0 * np.sqrt(3.0)
    seg = rho * rho * np.arccos(1.0 / rho) - np.sqrt(rho * rho - 1.0)
    return np.pi * rho * rho - 6.0 * seg
