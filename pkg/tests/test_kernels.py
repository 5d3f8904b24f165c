"""Backend twins must agree, and the env flag must really switch paths.

The loop and numpy variants of the pointwise kernels execute the same
float operations in the same order per output element, so they are
required to agree exactly.  The panel kernel sums 32 products per panel
in different orders (serial loop vs dot product), so it gets a rounding
allowance instead.  A subprocess checks that QMOMENTS_DISABLE_NUMBA is
honored at import time and that a full verified integral round-trips
across backends.
"""

import os
import subprocess
import sys

import numpy as np
import pytest

from qmoments import _kernels


def _gl():
    return np.polynomial.legendre.leggauss(32)


def panel_setup(kind):
    rng = np.random.default_rng(53 + kind)
    centers = np.linspace(-4.0, 4.0, 37)
    nodes, weights = _gl()
    phase0 = rng.uniform(0.0, 2.0 * np.pi, centers.size)
    return dict(
        centers=centers,
        half=4.0 / 36.0,
        nodes=nodes,
        weights=weights,
        ksq=0.81,
        c0=1.5e-14,
        c1=-2.0e-13,
        phase0=phase0,
        omega=9.7,
        kind=kind,
    )


@pytest.mark.parametrize("kind", [0, 1, 2])
def test_gauss_panels_twins_agree(kind):
    args = panel_setup(kind)
    a = _kernels._gauss_panels_loops(**args)
    b = _kernels._gauss_panels_numpy(**args)
    scale = np.max(np.abs(a))
    assert np.max(np.abs(a - b)) <= 2e-15 * scale
    if _kernels.USE_NUMBA:
        c = _kernels.gauss_panels(**args)
        assert np.max(np.abs(a - c)) <= 2e-15 * scale


def test_trig_sum_twins_agree_exactly():
    u = np.random.default_rng(11).uniform(-3.0, 3.0, 257)
    amps = np.array([0.5, -0.3, 0.2])
    harmonics = np.array([1.0, 4.0, 9.0])
    kinds = np.array([1, 0, 1], dtype=np.int64)
    a = _kernels._trig_sum_u_loops(u, amps, harmonics, kinds)
    b = _kernels._trig_sum_u_numpy(u, amps, harmonics, kinds)
    assert np.array_equal(a, b)
    if _kernels.USE_NUMBA:
        assert np.array_equal(a, _kernels.trig_sum_u(u, amps, harmonics, kinds))


def test_weier_sum_twins_agree_exactly():
    u = np.random.default_rng(12).uniform(0.0, 1.0, 257)
    a = _kernels._weier_sum_u_loops(u, 0.5, 3.0, 25, 1)
    b = _kernels._weier_sum_u_numpy(u, 0.5, 3.0, 25, 1)
    assert np.array_equal(a, b)
    if _kernels.USE_NUMBA:
        assert np.array_equal(a, _kernels.weier_sum_u(u, 0.5, 3.0, 25, 1))


def _run_probe(env_value):
    code = (
        "from qmoments import _kernels\n"
        "from qmoments.measures import LogNormalWeight\n"
        "from qmoments.quadrature import integrate_moment\n"
        "r = integrate_moment(LogNormalWeight(0.7), 4)\n"
        "print(_kernels.backend_name())\n"
        "print(repr(r.value.ln_abs))\n"
    )
    env = dict(os.environ)
    if env_value is None:
        env.pop("QMOMENTS_DISABLE_NUMBA", None)
    else:
        env["QMOMENTS_DISABLE_NUMBA"] = env_value
    out = subprocess.run(
        [sys.executable, "-c", code],
        capture_output=True,
        text=True,
        check=True,
        env=env,
    )
    backend, ln_abs = out.stdout.strip().splitlines()
    return backend, float(ln_abs)


def test_env_flag_selects_backend_and_results_match():
    backend_off, ln_off = _run_probe("1")
    assert backend_off == "numpy"
    backend_on, ln_on = _run_probe("0")
    assert backend_on == _kernels.backend_name()
    # sigma = 25/1.96; backends agree to rounding in the log value
    assert abs(ln_off - ln_on) <= 1e-13 * abs(ln_on)
    frozen = 12.755102040816318
    assert abs(ln_on - frozen) <= 1e-10
