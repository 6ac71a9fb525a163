import importlib

import numpy as np
import pytest

from sagnacbell import _kernels_py


def _compiled():
    try:
        return importlib.import_module("sagnacbell._kernels")
    except ImportError:
        return None


COMPILED = _compiled()
BACKENDS = [pytest.param(_kernels_py, id="python")]
if COMPILED is not None:
    BACKENDS.append(pytest.param(COMPILED, id="cython"))


@pytest.fixture(params=BACKENDS)
def backend(request):
    return request.param


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_terminal_summary(terminalreporter):
    from . import test_acceptance

    if test_acceptance.RESULTS:
        terminalreporter.section("acceptance criteria")
        for n in sorted(test_acceptance.RESULTS):
            terminalreporter.write_line(test_acceptance.RESULTS[n])
