"""
LCDR adversarial lab - attack and defense of deep-learning FDIA detectors
in line current differential relays.

The package synthesizes three-phase local/remote current windows for
internal faults and false data injection attacks (FDIAs), evaluates the
dual-slope differential characteristic on them, trains time-series
detectors that tell the two apart, attacks those detectors with a masked
iterative FGSM that must also trip the relay, and hardens them with
adversarial training.
"""

__version__ = "1.0.0"
