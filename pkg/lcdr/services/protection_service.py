"""Relay and detector as one protection scheme.

The differential element decides whether something happened on the line;
only then is the detector asked whether the event is a genuine fault or an
injected one. A detected FDIA raises an alarm and blocks the trip.
"""

import logging

import numpy as np

from lcdr.errors import InsufficientDataError
from lcdr.models import LABEL_FDIA, Dataset, MeasurementWindow, ProtectionDecision
from lcdr.nn.detector import DECISION_THRESHOLD, Detector
from lcdr.services.relay_service import RelayContext, trip_check

logger = logging.getLogger(__name__)


def evaluate_event(detector: Detector, window: MeasurementWindow, relay_ctx: RelayContext) -> ProtectionDecision:
    decision = trip_check(window, relay_ctx.settings, relay_ctx.pickup_count)
    if not decision.tripped:
        return ProtectionDecision(fault_detected=False)
    probability = float(detector.probabilities(detector.to_model_space(window))[0])
    is_fdia = probability >= DECISION_THRESHOLD
    return ProtectionDecision(
        fault_detected=True,
        fdia_alarm=is_fdia,
        trip_command=not is_fdia,
        probability=probability,
        trip_index=decision.trip_index,
    )


def false_trip_rate(detector: Detector, dataset: Dataset, relay_ctx: RelayContext) -> float:
    """Fraction of FDIA samples for which the protected relay still trips.

    Raises:
        InsufficientDataError: the dataset holds no FDIA samples.
    """
    fdias = [s for s in dataset.samples if s.label == LABEL_FDIA]
    if not fdias:
        raise InsufficientDataError("false-trip rate needs at least one FDIA sample")
    tripped = [s.window for s in fdias if relay_ctx.trips(s.window)]
    if not tripped:
        return 0.0
    predictions = detector.predict(detector.to_model_space(np.stack([w.samples for w in tripped])))
    return float(np.sum(predictions != LABEL_FDIA)) / len(fdias)


class ProtectionService:
    """Protected relay: one detector behind one differential element."""

    def __init__(self, detector: Detector, relay_ctx: RelayContext):
        self.detector = detector
        self.relay_ctx = relay_ctx

    def evaluate(self, window: MeasurementWindow) -> ProtectionDecision:
        return evaluate_event(self.detector, window, self.relay_ctx)

    def false_trip_rate(self, dataset: Dataset) -> float:
        rate = false_trip_rate(self.detector, dataset, self.relay_ctx)
        logger.info(f"{self.detector.model_id} false-trip rate {rate:.4f} on {dataset.manifest.description or 'dataset'}")
        return rate
