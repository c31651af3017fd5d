import pytest

from atlasrender.softbackend import warm_up


@pytest.fixture(scope="session", autouse=True)
def _compile_kernels():
    warm_up()
