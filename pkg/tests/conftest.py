import pytest

from glslab import GaussianMeasureSpec, build_grid


@pytest.fixture(scope="session")
def grid1():
    return build_grid(GaussianMeasureSpec(d=1), 64)


@pytest.fixture(scope="session")
def grid2():
    return build_grid(GaussianMeasureSpec(d=2), 64)


@pytest.fixture(scope="session")
def grid3():
    return build_grid(GaussianMeasureSpec(d=3), 64)


@pytest.fixture(scope="session")
def grid1_small():
    return build_grid(GaussianMeasureSpec(d=1), 32)
