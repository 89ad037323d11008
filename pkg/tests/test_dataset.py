"""Tests for dataset generation, splitting, scaling and storage."""

import json

import numpy as np
import pandas as pd
import pytest

from lcdr.errors import DataIntegrityError, ParameterError, ScalerError, StratificationError
from lcdr.models import (
    CHANNELS,
    LABEL_FAULT,
    LABEL_FDIA,
    Dataset,
    FaultType,
    GenerationConfig,
    LabeledSample,
    MeasurementWindow,
    ProtectionConfig,
    ScenarioKind,
    WindowSpec,
)
from lcdr.services.dataset_service import DatasetService, apply_scaler, fit_scaler
from lcdr.services.relay_service import trip_check
from lcdr.storage.dataset_store import LABELS_FILE, MANIFEST_FILE, SAMPLES_FILE, export_csv, load_dataset, save_dataset


def _tiny_generation(**overrides) -> GenerationConfig:
    """One fault and three FDIA draws."""
    params = dict(
        fault_types=[FaultType.AG],
        fault_impedances_ohm=[50.0],
        fault_locations=[0.5],
        inception_angles_ms=[4],
        fault_loads_pu=[1.0],
        fdia_alpha_draws=3,
        fdia_onsets=[33],
        fdia_loads_pu=[0.5],
    )
    params.update(overrides)
    return GenerationConfig(**params)


def _flat_dataset(n_fault: int, n_fdia: int) -> Dataset:
    """Dataset sharing one window, for split arithmetic without synthesis."""
    t = np.arange(66)
    window = MeasurementWindow(samples=np.tile(np.sin(t / 3.0), (6, 1)))
    samples = [LabeledSample(window=window, label=LABEL_FAULT) for _ in range(n_fault)]
    samples += [LabeledSample(window=window, label=LABEL_FDIA) for _ in range(n_fdia)]
    return Dataset.from_samples(samples)


class TestGeneration:
    def test_default_grid_counts(self):
        """Test the desk grid yields 2,200 faults and 2,000 FDIAs."""
        config = GenerationConfig()
        assert config.fault_count == 11 * 5 * 5 * 4 * 2 == 2200
        assert config.fdia_count == 500 * 2 * 2 == 2000

    def test_small_dataset_counts(self, small_dataset):
        """Test class counts match the grid and faults come first."""
        assert len(small_dataset) == 176
        assert small_dataset.manifest.count == 176
        assert small_dataset.manifest.class_counts == {"fault": 88, "fdia": 88}
        labels = small_dataset.labels()
        assert np.all(labels[:88] == LABEL_FAULT)
        assert np.all(labels[88:] == LABEL_FDIA)

    def test_every_window_trips(self, small_dataset, relay_settings):
        """Test no generated window fails the relay check."""
        for sample in small_dataset.samples:
            assert trip_check(sample.window, relay_settings, 4).tripped

    def test_windows_at_storage_precision(self, small_dataset):
        """Test windows are exactly representable as float32."""
        windows = small_dataset.windows()
        assert windows.shape == (176, 6, 66)
        np.testing.assert_array_equal(windows.astype(np.float32).astype(np.float64), windows)

    def test_provenance_matches_labels(self, small_dataset):
        """Test every sample records its scenario and the label agrees with its kind."""
        for i, sample in enumerate(small_dataset.samples):
            scenario = sample.provenance.scenario
            assert sample.provenance.origin == "generated"
            assert sample.provenance.source_index == i
            expected = ScenarioKind.FDIA if sample.label == LABEL_FDIA else ScenarioKind.FAULT
            assert scenario.kind == expected

    def test_fdia_scenarios_use_configured_onsets(self, small_dataset):
        """Test FDIA onsets come from the grid and alphas stay within magnitude 5."""
        for sample in small_dataset.samples:
            fdia = sample.provenance.scenario.fdia
            if fdia is not None:
                assert fdia.onset_index in (33, 37)
                assert abs(fdia.alpha) <= 5.0 + 1e-12

    def test_same_seed_same_windows(self, dataset_service):
        """Test generation is deterministic in the seed."""
        first = dataset_service.generate_dataset(_tiny_generation(), seed=3)
        second = dataset_service.generate_dataset(_tiny_generation(), seed=3)
        np.testing.assert_array_equal(first.windows(), second.windows())

    def test_different_seed_changes_fdias(self, dataset_service):
        """Test another seed draws other alphas."""
        first = dataset_service.generate_dataset(_tiny_generation(), seed=3)
        second = dataset_service.generate_dataset(_tiny_generation(), seed=4)
        assert not np.array_equal(first.windows()[1:], second.windows()[1:])

    def test_workers_preserve_order(self, dataset_service):
        """Test thread-pool generation returns the serial result."""
        serial = dataset_service.generate_dataset(_tiny_generation(), seed=5)
        parallel = dataset_service.generate_dataset(_tiny_generation(workers=3), seed=5)
        np.testing.assert_array_equal(serial.windows(), parallel.windows())
        np.testing.assert_array_equal(serial.labels(), parallel.labels())

    def test_invalid_impedance_rejected(self):
        """Test out-of-range grid values fail validation before generation."""
        with pytest.raises(ValueError):
            GenerationConfig(fault_impedances_ohm=[0.0, 150.0])


class TestSplit:
    def test_desk_split_arithmetic(self, dataset_service):
        """Test 2,200 faults + 2,000 FDIAs at 0.2 put 440 faults and 400 FDIAs in test."""
        train, test = dataset_service.split(_flat_dataset(2200, 2000), 0.2, seed=1)
        assert test.manifest.class_counts == {"fault": 440, "fdia": 400}
        assert train.manifest.class_counts == {"fault": 1760, "fdia": 1600}

    def test_small_split_is_stratified_and_disjoint(self, small_dataset, small_split):
        """Test the small split keeps class balance and every sample lands once."""
        train, test = small_split
        assert test.manifest.class_counts == {"fault": 22, "fdia": 22}
        assert len(train) + len(test) == len(small_dataset)
        indices = [s.provenance.source_index for s in train.samples + test.samples]
        assert sorted(indices) == list(range(len(small_dataset)))

    def test_split_deterministic(self, dataset_service, small_dataset):
        """Test the same seed shuffles identically."""
        _, first = dataset_service.split(small_dataset, 0.25, seed=2)
        _, second = dataset_service.split(small_dataset, 0.25, seed=2)
        assert [s.provenance.source_index for s in first.samples] == [s.provenance.source_index for s in second.samples]

    def test_single_member_class(self, dataset_service):
        """Test a class with one sample cannot be stratified."""
        with pytest.raises(StratificationError):
            dataset_service.split(_flat_dataset(10, 1), 0.2, seed=0)

    def test_empty_dataset(self, dataset_service):
        with pytest.raises(StratificationError):
            dataset_service.split(Dataset.from_samples([]), 0.2, seed=0)

    @pytest.mark.parametrize("fraction", [0.0, 1.0, -0.1])
    def test_bad_fraction(self, dataset_service, fraction):
        with pytest.raises(ParameterError):
            dataset_service.split(_flat_dataset(10, 10), fraction, seed=0)


class TestScaler:
    def test_training_set_standardized(self, small_split):
        """Test the fitted scaler centers and normalizes each training channel."""
        train, _ = small_split
        scaler = fit_scaler(train)
        scaled = (train.windows() - scaler.mean[None, :, None]) / scaler.std[None, :, None]
        np.testing.assert_allclose(scaled.mean(axis=(0, 2)), 0.0, atol=1e-10)
        np.testing.assert_allclose(scaled.std(axis=(0, 2)), 1.0, rtol=1e-10)

    def test_apply_scaler_inverts(self, small_split, small_scaler):
        """Test scaling then inverse scaling returns the physical window."""
        window = small_split[1].samples[0].window
        x = apply_scaler(small_scaler, window)
        assert tuple(x.shape) == (6, 66)
        np.testing.assert_allclose(small_scaler.inverse_transform(x.numpy()), window.samples, atol=1e-12)

    def test_zero_variance_channel(self):
        """Test a constant channel cannot be scaled."""
        samples = np.ones((6, 66))
        samples[:5] = np.sin(np.arange(66))
        dataset = Dataset.from_samples([LabeledSample(window=MeasurementWindow(samples=samples), label=LABEL_FAULT)])
        with pytest.raises(ScalerError, match="5"):
            fit_scaler(dataset)

    def test_empty(self):
        with pytest.raises(ScalerError):
            fit_scaler(Dataset.from_samples([]))


class TestStore:
    def test_round_trip_is_exact(self, small_dataset, tmp_path):
        """Test saving and loading returns identical windows, labels and manifest."""
        save_dataset(small_dataset, tmp_path / "ds")
        loaded = load_dataset(tmp_path / "ds")
        np.testing.assert_array_equal(loaded.windows(), small_dataset.windows())
        np.testing.assert_array_equal(loaded.labels(), small_dataset.labels())
        assert loaded.manifest.model_dump() == small_dataset.manifest.model_dump()

    def test_save_is_byte_deterministic(self, small_dataset, tmp_path):
        """Test two saves of one dataset produce identical files."""
        save_dataset(small_dataset, tmp_path / "a")
        save_dataset(small_dataset, tmp_path / "b")
        for name in (MANIFEST_FILE, SAMPLES_FILE, LABELS_FILE):
            assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()

    def test_verify_trip_on_load(self, small_dataset, tmp_path):
        save_dataset(small_dataset, tmp_path / "ds")
        loaded = load_dataset(tmp_path / "ds", verify_trip=ProtectionConfig())
        assert len(loaded) == len(small_dataset)

    def test_non_tripping_window_rejected(self, tmp_path):
        """Test verification catches a window the relay ignores."""
        quiet = MeasurementWindow(samples=np.zeros((6, 66)))
        save_dataset(Dataset.from_samples([LabeledSample(window=quiet, label=LABEL_FAULT)]), tmp_path / "ds")
        with pytest.raises(DataIntegrityError, match="trip"):
            load_dataset(tmp_path / "ds", verify_trip=ProtectionConfig())

    def test_truncated_samples(self, small_dataset, tmp_path):
        path = save_dataset(small_dataset, tmp_path / "ds")
        raw = (path / SAMPLES_FILE).read_bytes()
        (path / SAMPLES_FILE).write_bytes(raw[:-4])
        with pytest.raises(DataIntegrityError, match="bytes"):
            load_dataset(path)

    def test_version_mismatch(self, small_dataset, tmp_path):
        path = save_dataset(small_dataset, tmp_path / "ds")
        manifest = json.loads((path / MANIFEST_FILE).read_text())
        manifest["format_version"] = 2
        (path / MANIFEST_FILE).write_text(json.dumps(manifest))
        with pytest.raises(DataIntegrityError, match="version"):
            load_dataset(path)

    def test_class_count_disagreement(self, small_dataset, tmp_path):
        """Test flipped labels no longer match the manifest counts."""
        path = save_dataset(small_dataset, tmp_path / "ds")
        labels = bytearray((path / LABELS_FILE).read_bytes())
        labels[0] = 1
        (path / LABELS_FILE).write_bytes(bytes(labels))
        with pytest.raises(DataIntegrityError, match="class counts"):
            load_dataset(path)

    def test_missing_files(self, small_dataset, tmp_path):
        path = save_dataset(small_dataset, tmp_path / "ds")
        (path / LABELS_FILE).unlink()
        with pytest.raises(DataIntegrityError, match="incomplete"):
            load_dataset(path)

    def test_missing_directory(self, tmp_path):
        with pytest.raises(DataIntegrityError, match="not found"):
            load_dataset(tmp_path / "nowhere")

    def test_export_csv(self, small_split, tmp_path):
        """Test the CSV export has one row per sample and one column per channel sample."""
        _, test = small_split
        path = export_csv(test, tmp_path / "test.csv")
        frame = pd.read_csv(path)
        assert frame.shape == (len(test), 1 + len(CHANNELS) * 66)
        assert list(frame.columns[:3]) == ["label", "local_a_t0", "local_a_t1"]
        np.testing.assert_array_equal(frame["label"].to_numpy(), test.labels())
        np.testing.assert_allclose(frame["remote_c_t65"].to_numpy(), test.windows()[:, 5, 65], rtol=0, atol=0)


class TestWindowLayout:
    @pytest.fixture(scope="class")
    def six_cycle_dataset(self, system):
        service = DatasetService(system=system, window=WindowSpec(cycles=6, pre_event_cycles=3), protection=ProtectionConfig())
        generation = _tiny_generation(fault_types=[FaultType.AG, FaultType.BG, FaultType.CG], fdia_onsets=[50])
        return service, service.generate_dataset(generation, seed=4)

    def test_layout_kept_by_split_subset_and_concat(self, six_cycle_dataset):
        """Test derived datasets keep the generated window length and trigger."""
        service, dataset = six_cycle_dataset
        assert (dataset.manifest.length, dataset.manifest.trigger_index) == (100, 50)
        train, test = service.split(dataset, test_fraction=0.5, seed=4)
        for derived in (train, test, train.subset([0]), train.concat(test)):
            assert (derived.manifest.length, derived.manifest.trigger_index) == (100, 50)
            assert derived.window_spec == WindowSpec(cycles=6, pre_event_cycles=3)

    def test_layout_kept_on_reload(self, six_cycle_dataset, tmp_path):
        _, dataset = six_cycle_dataset
        loaded = load_dataset(save_dataset(dataset, tmp_path / "ds"), verify_trip=ProtectionConfig())
        assert (loaded.manifest.cycles, loaded.manifest.pre_event_cycles) == (6, 3)
        assert all(s.window.trigger_index == 50 and s.window.length == 100 for s in loaded.samples)
        assert loaded.subset(range(2)).manifest.trigger_index == 50

    def test_inconsistent_layout_rejected(self, six_cycle_dataset, tmp_path):
        """Test a manifest whose cycle counts disagree with its length is refused."""
        _, dataset = six_cycle_dataset
        path = save_dataset(dataset, tmp_path / "ds")
        manifest = json.loads((path / MANIFEST_FILE).read_text())
        manifest["cycles"] = 4
        (path / MANIFEST_FILE).write_text(json.dumps(manifest))
        with pytest.raises(DataIntegrityError, match="cycles"):
            load_dataset(path)
