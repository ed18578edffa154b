"""Backend parity: the compiled kernels mirror the pure-Python reference."""

import numpy as np
import pytest

from tws import backend
from tws import _kernels_py as pure

compiled = backend.implementations().get("compiled")

RATIOS = np.array([0.25, 0.5, 1.0, 2.0, 4.0])
EMPTY = np.zeros(0)


def _random_inputs(r, n=32, natoms=3):
    edges = np.sort(r.choice(np.arange(0, 4096), size=2 * n, replace=False)) / 512.0
    sl = np.ascontiguousarray(edges[0::2])
    sr = np.ascontiguousarray(edges[1::2])
    w = np.ascontiguousarray(r.integers(1, 200, n) / 16.0)
    ax = np.ascontiguousarray(
        np.sort(r.choice(np.arange(1, 4000), natoms, replace=False)) / 512.0
        + 2.0**-11
    )
    am = np.ascontiguousarray(r.integers(1, 50, natoms) / 16.0)
    return sl, sr, w, ax, am


def test_python_backend_always_available():
    impls = backend.implementations()
    assert "python" in impls
    assert backend.BACKEND in impls


@pytest.mark.skipif(compiled is None, reason="compiled kernels not built")
class TestParity:
    def test_trunc_and_power(self, rng):
        for _ in range(20):
            sl, sr, w, ax, am = _random_inputs(rng)
            x = float(rng.uniform(-1, 9))
            e2 = float(rng.uniform(0.01, 1.0))
            e1 = e2 * float(rng.uniform(0.25, 4.0))
            cap = max(e1, e2) * float(rng.uniform(1.1, 20.0))
            a = compiled.trunc_value(sl, sr, w, ax, am, x, e1, e2, cap)
            b = pure.trunc_value(sl, sr, w, ax, am, x, e1, e2, cap)
            assert a == pytest.approx(b, rel=1e-12, abs=1e-13)
            pa = compiled.power_tail_segments(sl, sr, w, x, 0.5, 2.0, 1e-9)
            pb = pure.power_tail_segments(sl, sr, w, x, 0.5, 2.0, 1e-9)
            assert pa[0] == pytest.approx(pb[0], rel=1e-12)

    def test_sup_search(self, rng):
        for _ in range(10):
            sl, sr, w, ax, am = _random_inputs(rng)
            x = float(rng.uniform(-1, 9))
            ra = compiled.sup_search(
                sl, sr, w, ax, am, x, 0.001, 20.0, 21, RATIOS, 10, EMPTY, True
            )
            rb = pure.sup_search(
                sl, sr, w, ax, am, x, 0.001, 20.0, 21, RATIOS, 10, EMPTY, True
            )
            assert ra[0] == pytest.approx(rb[0], rel=1e-12)
            assert ra[1:] == pytest.approx(rb[1:], rel=1e-12)

    def test_maximal(self, rng):
        for _ in range(20):
            sl, sr, w, ax, am = _random_inputs(rng)
            x = float(rng.uniform(-1, 9))
            a = compiled.maximal_value(sl, sr, w, ax, am, x)
            b = pure.maximal_value(sl, sr, w, ax, am, x)
            assert a == pytest.approx(b, rel=1e-12)

    def test_cutoff_pointwise(self):
        for t in np.linspace(0.0, 3.0, 301):
            assert compiled.zeta(t) == pure.zeta(t)
            assert compiled.eta(t) == pure.eta(t)
