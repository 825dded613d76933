import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dsge_select import kernels
from dsge_select import _kernels_py as py

needs_cython = pytest.mark.skipif(kernels.BACKEND != "cython", reason="compiled core not built")


def _system(rng, n_s, n_j, k, horizon):
    return (rng.normal(size=(n_s, n_s)) * 0.3, rng.normal(size=(n_s, k)),
            rng.normal(size=(n_j, n_s)), rng.normal(size=(n_j, k)),
            rng.normal(size=n_s), rng.normal(size=n_j),
            rng.normal(size=(horizon, k)), rng.normal(size=n_s))


@needs_cython
@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2 ** 32 - 1), st.integers(0, 4), st.integers(0, 3), st.integers(1, 3),
       st.integers(0, 50))
def test_simulate_backends_match(seed, n_s, n_j, k, horizon):
    args = _system(np.random.default_rng(seed), n_s, n_j, k, horizon)
    a = kernels.simulate_lss(*args, impl="cython")
    b = kernels.simulate_lss(*args, impl="python")
    np.testing.assert_allclose(a, b, rtol=1e-12, atol=1e-12)


@needs_cython
@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2 ** 32 - 1), st.integers(0, 3), st.integers(1, 5), st.integers(0, 30))
def test_forward_affine_backends_match(seed, n_s, n, horizon):
    n = max(n, n_s)
    rng = np.random.default_rng(seed)
    f = rng.normal(size=(horizon, n, n_s)) * 0.3
    h = rng.normal(size=(horizon, n))
    s0 = rng.normal(size=n_s)
    np.testing.assert_allclose(kernels.forward_affine(f, h, s0, impl="cython"),
                               kernels.forward_affine(f, h, s0, impl="python"),
                               rtol=1e-12, atol=1e-12)


def test_python_simulate_by_hand():
    r, q = np.array([[0.5]]), np.array([[1.0]])
    p, g = np.array([[2.0]]), np.array([[3.0]])
    eps = np.array([[1.0], [0.0], [0.0]])
    out = py.simulate_lss(r, q, p, g, np.zeros(1), np.zeros(1), eps, np.zeros(1))
    # state column first, then the jump
    np.testing.assert_allclose(out[:, 0], [0.0, 1.0, 0.5])
    np.testing.assert_allclose(out[:, 1], [3.0, 2.0, 1.0])


def test_backend_env_override():
    import subprocess
    import sys

    code = "import dsge_select.kernels as k; print(k.BACKEND)"
    env = {"DSGE_SELECT_PURE_PYTHON": "1", "PATH": "/usr/bin:/bin"}
    out = subprocess.run([sys.executable, "-c", code], capture_output=True, text=True, env=env)
    assert out.stdout.strip() == "python"


def test_unknown_backend():
    with pytest.raises(ValueError):
        kernels.forward_affine(np.zeros((1, 1, 0)), np.zeros((1, 1)), np.zeros(0), impl="fortran")
