import os
import subprocess
import sys

import pytest

from fracplaque import kernels

PROBE = "from fracplaque import kernels; print(kernels.BACKEND)"


def backend_with(value):
    env = dict(os.environ)
    env.pop("FRACPLAQUE_PURE_PYTHON", None)
    if value is not None:
        env["FRACPLAQUE_PURE_PYTHON"] = value
    return subprocess.run([sys.executable, "-c", PROBE], env=env, capture_output=True, text=True, check=True).stdout.strip()


def test_fallback_forced_by_environment():
    assert backend_with("1") == "python"


@pytest.mark.skipif("cython" not in kernels.backends(), reason="compiled extension not built")
def test_compiled_backend_preferred():
    assert backend_with(None) == "cython"
    assert backend_with("0") == "cython"


def test_selected_functions_come_from_one_backend():
    mod = kernels.backends()[kernels.BACKEND]
    assert kernels.l1_memory is mod.l1_memory
    assert kernels.convection_local is mod.convection_local
    assert kernels.locate_points is mod.locate_points
