"""Analytic three-phase current synthesis for normal load, internal faults and FDIAs.

Phasors are RMS. A phasor X on a channel becomes the samples
x[n] = sqrt(2) * Re(X * exp(j * psi[n])), where psi[n] is the phase-A voltage
angle at sample n. psi equals ``wave_phase`` at the trigger index.
"""

import logging
import math

import numpy as np

from lcdr.errors import InfeasibleError, ParameterError
from lcdr.models import (
    FaultParams,
    FaultType,
    MeasurementWindow,
    PhasorSet,
    RelaySettings,
    ScenarioKind,
    ScenarioSpec,
    SystemModel,
    WindowSpec,
)
from lcdr.services.relay_service import operating_current

logger = logging.getLogger(__name__)

PHASE_SHIFTS = np.array([0.0, -2.0 * math.pi / 3.0, 2.0 * math.pi / 3.0])
ALPHA_MAX = 5.0
MAX_ALPHA_DRAWS = 10_000
FDIA_TRIP_MARGIN = 0.2


def wrap_angle(angle: float) -> float:
    """Wrap an angle to (-pi, pi]."""
    wrapped = math.remainder(angle, 2.0 * math.pi)
    return math.pi if wrapped <= -math.pi else wrapped


def inception_phase(inception_angle_ms: int, window: WindowSpec) -> float:
    return wrap_angle(window.omega * inception_angle_ms * 1e-3)


def voltage_phasors(model: SystemModel) -> np.ndarray:
    """Phase-to-neutral source voltages in kV RMS."""
    return model.phase_voltage_kv * np.exp(1j * PHASE_SHIFTS)


def load_phasors(spec: ScenarioSpec, model: SystemModel) -> tuple[PhasorSet, PhasorSet]:
    """Local and remote load-current phasors (i1, i2 = -i1)."""
    _check_load(spec.load_pu)
    magnitude = spec.load_pu * model.nominal_load_current_ka
    lag = math.acos(model.load_power_factor)
    i1 = PhasorSet.from_polar(np.full(3, magnitude), PHASE_SHIFTS - lag)
    return i1, -i1


def fault_current(fault: FaultParams, model: SystemModel) -> tuple[np.ndarray, complex]:
    """Superimposed fault phasor per phase (kA RMS) and the fault-loop impedance.

    The fault is fed from both sources through the line sections on either
    side of it. The phasor of every faulted phase is capped at the
    fault-current-limiter rating.
    """
    fault_type = _fault_type(fault)
    f = fault.location_frac
    zs, zl = model.source_impedance, model.line_impedance
    z_local, z_remote = zs + f * zl, zs + (1.0 - f) * zl
    z_eq = z_local * z_remote / (z_local + z_remote)
    voltages = voltage_phasors(model)

    current = np.zeros(3, dtype=np.complex128)
    phases = fault_type.phases
    if len(phases) == 2 and not fault_type.grounded:
        a, b = phases
        z_loop = 2.0 * z_eq + fault.impedance_ohm
        current[a] = (voltages[a] - voltages[b]) / z_loop
        current[b] = -current[a]
    else:
        z_loop = z_eq + fault.impedance_ohm
        for p in phases:
            current[p] = voltages[p] / z_loop

    cap = model.fault_current_cap_ka
    magnitude = np.abs(current)
    limited = magnitude > cap
    current[limited] *= cap / magnitude[limited]
    return current, complex(z_loop)


def dc_time_constant(z_loop: complex, model: SystemModel, window: WindowSpec) -> float:
    """Decay time constant of the DC offset, never longer than the loop's L/R."""
    return min(model.dc_decay_time_constant_s, z_loop.imag / (window.omega * z_loop.real))


def instantaneous(phasors: np.ndarray, window: WindowSpec, wave_phase: float) -> np.ndarray:
    """Sample each phasor in ``phasors`` over the window, one row per phasor."""
    n = np.arange(window.length)
    psi = window.omega * (n - window.trigger_index) / window.sample_rate_hz + wave_phase
    return math.sqrt(2.0) * np.real(np.asarray(phasors)[:, None] * np.exp(1j * psi)[None, :])


def synth_normal(
    spec: ScenarioSpec,
    model: SystemModel | None = None,
    window: WindowSpec | None = None,
    rng: np.random.Generator | None = None,
) -> MeasurementWindow:
    """Balanced load window with i2 = -i1, plus noise when ``spec.snr_db`` is set."""
    if spec.kind != ScenarioKind.NORMAL:
        raise ParameterError(f"synth_normal needs a normal scenario, got {spec.kind.value}")
    model, window = model or SystemModel(), window or WindowSpec()
    clean = _normal_window(spec.load_pu, spec.wave_phase_rad, model, window)
    return add_noise(clean, spec.snr_db, rng or np.random.default_rng(spec.seed))


def synth_fault(
    spec: ScenarioSpec,
    model: SystemModel | None = None,
    window: WindowSpec | None = None,
    rng: np.random.Generator | None = None,
) -> MeasurementWindow:
    """Internal fault starting at the trigger index.

    Before the trigger the window is the normal window with the wave phase set
    by the inception angle. From the trigger on, each end carries its share of
    the fault current: (1 - location) locally, location remotely. Each share
    starts at zero through a decaying DC offset.
    """
    if spec.kind != ScenarioKind.FAULT or spec.fault is None:
        raise ParameterError("synth_fault needs a fault scenario")
    model, window = model or SystemModel(), window or WindowSpec()
    fault = spec.fault
    theta = inception_phase(fault.inception_angle_ms, window)
    samples = np.array(_normal_window(spec.load_pu, theta, model, window).samples)

    current, z_loop = fault_current(fault, model)
    tau = dc_time_constant(z_loop, model, window)
    trigger = window.trigger_index
    elapsed = (np.arange(window.length) - trigger) / window.sample_rate_hz
    post = elapsed >= 0
    decay = np.exp(-np.where(post, elapsed, 0.0) / tau)

    for rows, share in ((slice(0, 3), 1.0 - fault.location_frac), (slice(3, 6), fault.location_frac)):
        ac = instantaneous(share * current, window, theta)
        offset = -ac[:, trigger][:, None] * decay[None, :]
        samples[rows] += np.where(post[None, :], ac + offset, 0.0)

    clean = _as_window(samples, window)
    return add_noise(clean, spec.snr_db, rng or np.random.default_rng(spec.seed))


def sample_fdia_alpha(
    settings: RelaySettings,
    i2: PhasorSet,
    rng: np.random.Generator,
    i1: PhasorSet | None = None,
    trip_margin: float = FDIA_TRIP_MARGIN,
    max_draws: int = MAX_ALPHA_DRAWS,
) -> complex:
    """Rejection-sample an FDIA multiplier from the trip locus.

    Candidates are uniform over |alpha| <= 5, arg alpha in (-pi, pi]. A
    candidate is accepted when replacing i2 with alpha * i2 makes every phase
    satisfy |i_d| >= (1 + trip_margin) * i_op. Without ``i1`` the local
    phasors are taken as -i2 (normal load).

    Raises:
        InfeasibleError: no candidate accepted within ``max_draws`` draws.
    """
    remote = i2.phasors
    local = -remote if i1 is None else i1.phasors
    drawn = 0
    while drawn < max_draws:
        count = min(1000, max_draws - drawn)
        magnitude = rng.uniform(0.0, ALPHA_MAX, count)
        angle = rng.uniform(-math.pi, math.pi, count)
        angle = np.where(angle <= -math.pi, math.pi, angle)
        alpha = magnitude * np.exp(1j * angle)

        manipulated = alpha[:, None] * remote[None, :]
        i_d = np.abs(local[None, :] + manipulated)
        i_r = np.abs(local)[None, :] + np.abs(manipulated)
        accepted = np.all(i_d >= (1.0 + trip_margin) * operating_current(i_r, settings), axis=1)
        if accepted.any():
            return complex(alpha[int(np.argmax(accepted))])
        drawn += count
    raise InfeasibleError(
        f"no FDIA multiplier in the trip locus after {max_draws} draws "
        f"(|i2| = {np.round(i2.magnitudes, 4).tolist()} kA)"
    )


def apply_fdia(window: MeasurementWindow, alpha: complex, onset_index: int) -> MeasurementWindow:
    """Multiply the remote phasors by ``alpha`` from ``onset_index`` on.

    Each remote row is extended to its analytic signal x + j*h, with h the
    quadrature of a least-squares phasor fit over the row, and replaced by
    Re(alpha * (x + j*h)) from the onset. Local rows are untouched.
    """
    if not 0 <= onset_index < window.length:
        raise ParameterError(f"onset index {onset_index} outside window of {window.length} samples")
    alpha = complex(alpha)
    samples = np.array(window.samples)
    remote = samples[3:].copy()
    quadrature = _quadrature(remote, window)
    tail = slice(onset_index, None)
    samples[3:, tail] = alpha.real * remote[:, tail] - alpha.imag * quadrature[:, tail]
    return window.with_samples(samples)


def add_noise(window: MeasurementWindow, snr_db: float | None, rng: np.random.Generator) -> MeasurementWindow:
    """Add white Gaussian noise per channel at ``snr_db`` relative to the channel RMS.

    ``snr_db=None`` disables noise and returns the window unchanged.
    """
    if snr_db is None:
        return window
    if not math.isfinite(snr_db) or not 35.0 <= snr_db <= 60.0:
        raise ParameterError(f"snr_db must be finite and within [35, 60] dB, got {snr_db}")
    rms = np.sqrt(np.mean(window.samples**2, axis=1))
    sigma = rms / 10.0 ** (snr_db / 20.0)
    noise = rng.standard_normal(window.samples.shape) * sigma[:, None]
    return window.with_samples(window.samples + noise)


def synthesize(
    spec: ScenarioSpec,
    model: SystemModel | None = None,
    window: WindowSpec | None = None,
) -> MeasurementWindow:
    """Synthesize any scenario kind; noise is drawn from ``spec.seed``."""
    model, window = model or SystemModel(), window or WindowSpec()
    rng = np.random.default_rng(spec.seed)
    if spec.kind == ScenarioKind.NORMAL:
        return synth_normal(spec, model, window, rng)
    if spec.kind == ScenarioKind.FAULT:
        return synth_fault(spec, model, window, rng)
    if spec.fdia is None:
        raise ParameterError("fdia scenario without fdia parameters")
    clean = _normal_window(spec.load_pu, spec.wave_phase_rad, model, window)
    attacked = apply_fdia(clean, spec.fdia.alpha, spec.fdia.onset_index)
    return add_noise(attacked, spec.snr_db, rng)


class WaveformService:
    """Scenario synthesis bound to one system model and window layout."""

    def __init__(self, system: SystemModel | None = None, window: WindowSpec | None = None):
        self.system = system or SystemModel()
        self.window = window or WindowSpec()

    def synthesize(self, spec: ScenarioSpec) -> MeasurementWindow:
        return synthesize(spec, self.system, self.window)

    def sample_alpha(self, settings: RelaySettings, load_pu: float, rng: np.random.Generator) -> complex:
        """FDIA multiplier for a normal-load window at ``load_pu``."""
        steady = ScenarioSpec(kind=ScenarioKind.NORMAL, load_pu=load_pu)
        _, i2 = load_phasors(steady, self.system)
        return sample_fdia_alpha(settings, i2, rng)


def _check_load(load_pu: float) -> None:
    if not (math.isfinite(load_pu) and 0.2 <= load_pu <= 1.0):
        raise ParameterError(f"load_pu must lie in [0.2, 1.0], got {load_pu}")


def _fault_type(fault: FaultParams) -> FaultType:
    try:
        return FaultType(fault.fault_type)
    except ValueError as e:
        raise ParameterError(f"unknown fault type {fault.fault_type!r}") from e


def _normal_window(load_pu: float, wave_phase: float, model: SystemModel, window: WindowSpec) -> MeasurementWindow:
    _check_load(load_pu)
    spec = ScenarioSpec.model_construct(kind=ScenarioKind.NORMAL, load_pu=load_pu)
    i1, _ = load_phasors(spec, model)
    local = instantaneous(i1.phasors, window, wave_phase)
    return _as_window(np.vstack([local, -local]), window)


def _as_window(samples: np.ndarray, window: WindowSpec) -> MeasurementWindow:
    return MeasurementWindow(
        samples=samples,
        sample_rate_hz=window.sample_rate_hz,
        base_frequency_hz=window.base_frequency_hz,
        trigger_index=window.trigger_index,
    )


def _quadrature(rows: np.ndarray, window: MeasurementWindow) -> np.ndarray:
    """Quadrature component of the fundamental fitted over each whole row."""
    omega = 2.0 * math.pi * window.base_frequency_hz
    phase = omega * window.time
    basis = np.column_stack([math.sqrt(2.0) * np.cos(phase), -math.sqrt(2.0) * np.sin(phase), np.ones_like(phase)])
    coefficients = rows @ np.linalg.pinv(basis).T
    real, imag = coefficients[:, 0:1], coefficients[:, 1:2]
    return math.sqrt(2.0) * (real * np.sin(phase) + imag * np.cos(phase))
