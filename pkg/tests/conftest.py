import pytest

from cyins import _backend


@pytest.fixture(params=_backend.available_backends())
def backend(request):
    """Run the test once per available kernel backend."""
    with _backend.use_backend(request.param):
        yield request.param


@pytest.fixture
def both_backends():
    """The two kernel modules, or a skip where only one is built."""
    names = _backend.available_backends()
    if len(names) < 2:
        pytest.skip("compiled backend not built; nothing to compare against")
    return tuple(_backend._BACKENDS[name] for name in names)
