"""Calibrated sliding-window scenarios."""

import numpy as np
import pytest

from seqbound import (
    CalibrationError,
    build_calibrated_window,
    causal_resolvent,
    column_sum_alpha,
    interdependence_matrix,
    kernel_at,
    variance_proxy,
    window_point_symbol,
)
from seqbound.window import WINDOW_INFLUENCE_DECAY, _mixture_window_spec

CALIB_TOL = 1e-3
EXACT_TOL = 1e-12


# ============================================================
# Hash layer
# ============================================================


class TestPointSymbol:
    def test_injective_in_symbol(self):
        for size in (2, 3, 5):
            for step in (1, 4, 9):
                for distance in (1, 2, 5):
                    images = {window_point_symbol(step, distance, s, size) for s in range(size)}
                    assert len(images) == size

    def test_range(self):
        for step in range(1, 20):
            sym = window_point_symbol(step, 1, 0, 3)
            assert 0 <= sym < 3

    def test_deterministic(self):
        assert window_point_symbol(7, 2, 1, 4) == window_point_symbol(7, 2, 1, 4)


# ============================================================
# Calibration
# ============================================================


class TestCalibration:
    def test_hits_target_exactly(self):
        for size in (2, 3):
            spec = build_calibrated_window(12, size, 5, 0.8)
            h = interdependence_matrix(spec)
            assert abs(column_sum_alpha(h) - 0.8) < CALIB_TOL
            assert abs(spec.meta["achieved_alpha"] - 0.8) < CALIB_TOL
            assert spec.meta["target_alpha"] == 0.8

    def test_influence_band_is_geometric(self):
        spec = build_calibrated_window(12, 2, 5, 0.8)
        h = interdependence_matrix(spec)
        beta = spec.meta["beta"]
        for d in range(1, 6):
            diag = np.diagonal(h.entries, offset=d)[d:]  # skip partial-window columns
            expected = beta * WINDOW_INFLUENCE_DECAY ** (d - 1)
            assert np.max(np.abs(diag - expected)) < EXACT_TOL
        assert np.all(np.triu(h.entries, k=6) == 0.0)

    def test_zero_target(self):
        spec = build_calibrated_window(6, 2, 3, 0.0)
        h = interdependence_matrix(spec)
        assert np.all(h.entries == 0.0)

    def test_rejects_bad_targets(self):
        with pytest.raises(CalibrationError):
            build_calibrated_window(6, 2, 3, 1.0)
        with pytest.raises(CalibrationError):
            build_calibrated_window(6, 2, 3, -0.2)

    def test_no_context_is_uncalibratable(self):
        with pytest.raises(CalibrationError):
            build_calibrated_window(1, 2, 5, 0.8)

    def test_deterministic_construction(self):
        a = build_calibrated_window(8, 2, 4, 0.5)
        b = build_calibrated_window(8, 2, 4, 0.5)
        assert a.meta["beta"] == b.meta["beta"]
        hist = (1, 0, 1, 1, 0)
        assert np.array_equal(kernel_at(a, 6, hist), kernel_at(b, 6, hist))

    def test_mixture_weight_validation(self):
        with pytest.raises(ValueError):
            _mixture_window_spec(6, 2, 3, beta=0.95)  # 0.95 * (1 + 0.2 + 0.04) > 1


# ============================================================
# Horizon stability of the terminal-target proxy
# ============================================================


class TestHorizonStability:
    def test_proxy_flat_across_horizons(self):
        proxies = []
        for n in (10, 40):
            spec = build_calibrated_window(n, 2, 5, 0.8)
            gamma = causal_resolvent(interdependence_matrix(spec))
            c = np.zeros(n)
            c[-1] = 1.0
            proxies.append(variance_proxy(gamma, c))
        spread = (max(proxies) - min(proxies)) / min(proxies)
        assert spread < 0.05
        assert max(proxies) <= 25.0

    def test_kernel_reads_whole_window(self):
        # Changing the oldest in-window symbol must move the kernel.
        spec = build_calibrated_window(10, 2, 5, 0.8)
        base = kernel_at(spec, 8, (0, 0, 0, 0, 0, 0, 0))
        moved = kernel_at(spec, 8, (0, 0, 1, 0, 0, 0, 0))  # distance 5 from step 8
        assert not np.array_equal(base, moved)
