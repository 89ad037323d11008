"""Tests for the differential relay."""

import math

import numpy as np
import pytest

from lcdr.errors import InsufficientDataError, ParameterError, ShapeError
from lcdr.models import MeasurementWindow, PhasorSet, RelaySettings, ScenarioKind, ScenarioSpec
from lcdr.services.relay_service import (
    differential_currents,
    estimate_phasor,
    estimate_phasors,
    operating_current,
    trip_check,
)
from lcdr.services.waveform_service import add_noise, apply_fdia, synth_normal, synthesize


class TestOperatingCurrent:
    """Dual-slope characteristic with 0.05 kA, 0.585 kA, 0.2, 0.4."""

    def test_hand_values(self, relay_settings):
        """Test i_r of 0, 0.4 and 0.6 kA give 0.05, 0.13 and 0.173 kA."""
        assert operating_current(0.0, relay_settings) == pytest.approx(0.05, abs=1e-12)
        assert operating_current(0.4, relay_settings) == pytest.approx(0.13, abs=1e-12)
        assert operating_current(0.6, relay_settings) == pytest.approx(0.173, abs=1e-12)

    def test_continuous_and_monotone(self, relay_settings):
        """Test both branches agree at i_b and the curve never decreases."""
        i_b = relay_settings.i_b
        lower = relay_settings.i_d0 + relay_settings.m1 * i_b
        assert operating_current(i_b, relay_settings) == lower
        assert operating_current(np.nextafter(i_b, 1.0), relay_settings) == pytest.approx(lower, abs=1e-12)

        grid = np.linspace(0.0, 5.0, 2001)
        assert np.all(np.diff(operating_current(grid, relay_settings)) >= 0)

    def test_negative_restraint_rejected(self, relay_settings):
        """Test a negative restraining current is a parameter error."""
        with pytest.raises(ParameterError):
            operating_current(-0.1, relay_settings)

    def test_settings_validation(self):
        """Test slopes must satisfy 0 < m1 < m2."""
        with pytest.raises(ValueError):
            RelaySettings(m1=0.4, m2=0.2)
        with pytest.raises(ValueError):
            RelaySettings(i_d0=0.0)


class TestDifferentialCurrents:
    def test_opposite_currents(self):
        """Test i2 = -i1 gives zero differential and twice the magnitude as restraint."""
        i1 = PhasorSet.from_polar([0.3, 0.3, 0.3], [0.0, -2.0, 2.0])
        i_d, i_r = differential_currents(i1, -i1)
        assert np.all(np.abs(i_d) == 0.0)
        assert np.allclose(i_r, 0.6)

    def test_in_phase_and_quadrature(self):
        """Test hand-computed magnitudes for in-phase and quadrature remote currents."""
        i1 = PhasorSet.from_polar([0.3] * 3, [0.0] * 3)

        i_d, i_r = differential_currents(i1, PhasorSet.from_polar([0.3] * 3, [0.0] * 3))
        assert np.allclose(np.abs(i_d), 0.6) and np.allclose(i_r, 0.6)

        i_d, i_r = differential_currents(i1, PhasorSet.from_polar([0.3] * 3, [math.pi / 2] * 3))
        assert np.allclose(np.abs(i_d), 0.3 * math.sqrt(2.0)) and np.allclose(i_r, 0.6)


class TestPhasorEstimation:
    def test_sinusoid_magnitude(self):
        """Test a 0.3 kA RMS sinusoid is estimated exactly at 16.67 and 16 samples per cycle."""
        for samples_per_cycle in (1000.0 / 60.0, 16.0):
            n = np.arange(66)
            channel = 0.3 * math.sqrt(2.0) * np.cos(2 * math.pi * n / samples_per_cycle)
            phasor = estimate_phasor(channel, 40, samples_per_cycle)
            assert abs(phasor) == pytest.approx(0.3, abs=1e-6)
            assert np.angle(phasor) == pytest.approx(0.0, abs=1e-9)

    def test_integer_cycle_matches_dft(self):
        """Test the estimator equals the full-cycle DFT for 16 samples per cycle."""
        rng = np.random.default_rng(4)
        channel = rng.normal(size=40)
        end = 30
        block = channel[end - 15:end + 1]
        k = np.arange(end - 15, end + 1)
        dft = math.sqrt(2.0) / 16 * np.sum(block * np.exp(-2j * math.pi * k / 16))
        assert estimate_phasor(channel, end, 16.0) == pytest.approx(dft, abs=1e-12)

    def test_dc_and_zero_channels(self):
        """Test a constant channel has no fundamental and a zero channel a zero phasor."""
        assert abs(estimate_phasor(np.full(66, 2.5), 40, 1000.0 / 60.0)) < 1e-9
        assert abs(estimate_phasor(np.full(32, 2.5), 20, 16.0)) < 1e-9
        assert estimate_phasor(np.zeros(66), 40, 1000.0 / 60.0) == 0

    def test_short_history_rejected(self):
        """Test end indices with less than one cycle of history are rejected."""
        with pytest.raises(InsufficientDataError):
            estimate_phasor(np.zeros(66), 10, 1000.0 / 60.0)
        with pytest.raises(InsufficientDataError):
            estimate_phasors(np.zeros((6, 12)), 1000.0 / 60.0)

    def test_sliding_matches_single(self):
        """Test the vectorized estimator agrees with the single-index estimator."""
        rng = np.random.default_rng(8)
        samples = rng.normal(size=(6, 66))
        indices, phasors = estimate_phasors(samples, 1000.0 / 60.0)

        assert indices[0] == 17 and indices[-1] == 65
        for position in (0, 20, len(indices) - 1):
            single = estimate_phasor(samples[4], int(indices[position]), 1000.0 / 60.0)
            assert phasors[4, position] == pytest.approx(single, abs=1e-12)


class TestTripCheck:
    def test_normal_windows_never_trip(self, system, window_spec, relay_settings):
        """Test noisy normal windows across loads and SNRs do not trip."""
        rng = np.random.default_rng(1)
        for k in range(300):
            spec = ScenarioSpec(
                kind=ScenarioKind.NORMAL,
                load_pu=float(rng.uniform(0.2, 1.0)),
                snr_db=float(rng.uniform(35.0, 60.0)),
                wave_phase_rad=float(rng.uniform(-math.pi, math.pi)),
                seed=k,
            )
            decision = trip_check(synthesize(spec, system, window_spec), relay_settings, 4)
            assert not decision.tripped
            assert decision.trip_index is None

    def test_reversal_trace(self, reversal_fdia_spec, system, window_spec, relay_settings):
        """Test alpha = -1 at 0.3 kA trips with (i_d, i_r, i_op) = (0.6, 0.6, 0.173) kA."""
        spec = reversal_fdia_spec.model_copy(update={"snr_db": None})
        decision = trip_check(synthesize(spec, system, window_spec), relay_settings, 4)

        assert decision.tripped
        assert 33 <= decision.trip_index <= 33 + 17 + 4
        # First estimate fully after the onset
        i_d, i_r, i_op = decision.at(33 + 16)
        assert np.allclose(i_d, 0.6, rtol=0.02)
        assert np.allclose(i_r, 0.6, rtol=0.02)
        assert np.allclose(i_op, 0.173, rtol=0.02)

    def test_trace_shape_and_triangle_inequality(self, bolted_abc_spec, system, window_spec, relay_settings):
        """Test one trace entry per evaluated index and i_r >= |i_d| everywhere."""
        decision = trip_check(synthesize(bolted_abc_spec, system, window_spec), relay_settings, 4)

        assert decision.tripped
        assert decision.i_d.shape == decision.i_r.shape == decision.i_op.shape == (3, len(decision.indices))
        assert len(decision.per_phase_trace(0)) == len(decision.indices)
        assert np.all(decision.i_r >= decision.i_d - 1e-12)

    def test_pickup_requires_consecutive_indices(self, relay_settings):
        """Test a single operating index does not trip with pickup 4 but does with pickup 1."""
        n = np.arange(66)
        local = 0.3 * math.sqrt(2.0) * np.cos(2 * math.pi * n / (1000.0 / 60.0))
        samples = np.vstack([np.tile(local, (3, 1)), -np.tile(local, (3, 1))])
        # A spike on the last remote sample only affects the final estimate
        samples[3, -1] += 10.0
        window = MeasurementWindow(samples=samples)

        assert not trip_check(window, relay_settings, 4).tripped
        single = trip_check(window, relay_settings, 1)
        assert single.tripped and single.trip_index == 65

    def test_bolted_fault_noise_invariance(self, bolted_abc_spec, system, window_spec, relay_settings):
        """Test 60 dB noise never flips a bolted-fault trip."""
        clean = synthesize(bolted_abc_spec.model_copy(update={"snr_db": None}), system, window_spec)
        for seed in range(200):
            noisy = add_noise(clean, 60.0, np.random.default_rng(seed))
            assert trip_check(noisy, relay_settings, 4).tripped

    def test_scaling_reversal_family_keeps_trip(self, system, window_spec, relay_settings):
        """Test scaling both ends of an alpha = -1 window by c > 1 keeps the trip."""
        base = synth_normal(ScenarioSpec(kind=ScenarioKind.NORMAL, load_pu=0.5), system, window_spec)
        attacked = apply_fdia(base, -1.0 + 0j, 33)
        assert trip_check(attacked, relay_settings, 4).tripped
        for c in (1.5, 2.0, 4.0):
            scaled = attacked.with_samples(attacked.samples * c)
            assert trip_check(scaled, relay_settings, 4).tripped

    def test_malformed_window_rejected(self, relay_settings):
        """Test raw arrays and wrong shapes are shape errors."""
        with pytest.raises(ShapeError):
            trip_check(np.zeros((6, 66)), relay_settings, 4)
        with pytest.raises(ShapeError):
            MeasurementWindow(samples=np.zeros((5, 66)))
