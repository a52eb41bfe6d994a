import pytest

from nearfield import ArrayConfig


@pytest.fixture(scope="session")
def cfg300():
    return ArrayConfig(carrier_freq=300e9, n_elements=64)


@pytest.fixture(scope="session")
def cfg10_5():
    return ArrayConfig(carrier_freq=10e9, n_elements=5)


@pytest.fixture(scope="session")
def cfg1_2():
    return ArrayConfig(carrier_freq=1e9, n_elements=2)


@pytest.fixture(scope="session")
def grid_configs():
    """The 3x3 frequency/element grid the bundled presets sweep."""
    return [
        ArrayConfig(carrier_freq=f * 1e9, n_elements=n)
        for f in (1, 10, 300)
        for n in (2, 5, 64)
    ]
