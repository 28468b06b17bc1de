import pytest

from ganspectra import kernels


@pytest.fixture(scope="session", autouse=True)
def _warm_kernels():
    # JIT compile outside any timed section
    kernels.warmup()
