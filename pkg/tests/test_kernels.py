import numpy as np
import pytest

from versealign import kernels


@pytest.mark.skipif(
    kernels.transport_simplex_nb is None, reason="numba not installed"
)
class TestBackendParity:
    def test_transport_bitwise_identical(self):
        rng = np.random.default_rng(1)
        for trial in range(150):
            m, n = rng.integers(1, 7, 2)
            wa = rng.random(m) + 0.05
            wa /= wa.sum()
            wb = rng.random(n) + 0.05
            wb /= wb.sum()
            cost = rng.random((m, n))
            compiled = kernels.transport_simplex_nb(wa, wb, cost)
            fallback = kernels.transport_simplex_py(wa, wb, cost)
            assert np.array_equal(compiled, fallback), trial

    def test_cooccurrence_bitwise_identical(self):
        rng = np.random.default_rng(2)
        for _ in range(30):
            n_tokens = int(rng.integers(5, 60))
            tokens = rng.integers(0, 8, n_tokens).astype(np.int64)
            cuts = np.unique(rng.integers(0, n_tokens, 4))
            offsets = np.concatenate([[0], cuts, [n_tokens]]).astype(np.int64)
            window = int(rng.integers(1, 5))
            out_nb = np.zeros((8, 8))
            out_py = np.zeros((8, 8))
            kernels.accumulate_cooccurrence_nb(tokens, offsets, window, out_nb)
            kernels.accumulate_cooccurrence_py(tokens, offsets, window, out_py)
            assert np.array_equal(out_nb, out_py)


class TestSimplexProperties:
    def test_degenerate_ties_are_deterministic(self):
        # equal weights and a cost matrix full of ties force degenerate pivots
        wa = np.full(4, 0.25)
        wb = np.full(4, 0.25)
        cost = np.ones((4, 4))
        np.fill_diagonal(cost, 0.0)
        first = kernels.transport_simplex(wa, wb, cost)
        second = kernels.transport_simplex(wa, wb, cost)
        assert np.array_equal(first, second)
        assert float((first * cost).sum()) == 0.0

    def test_one_by_n(self):
        wa = np.array([1.0])
        wb = np.array([0.2, 0.3, 0.5])
        cost = np.array([[3.0, 1.0, 2.0]])
        flow = kernels.transport_simplex(wa, wb, cost)
        assert np.allclose(flow, wb[None, :])

    def test_positive_support_is_vertex_sized(self):
        rng = np.random.default_rng(3)
        for _ in range(100):
            m, n = rng.integers(1, 6, 2)
            wa = rng.random(m) + 0.01
            wa /= wa.sum()
            wb = rng.random(n) + 0.01
            wb /= wb.sum()
            flow = kernels.transport_simplex(wa, wb, rng.random((m, n)))
            assert int((flow > 0).sum()) <= m + n - 1
