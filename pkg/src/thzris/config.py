"""Run-level knobs shared by the tracer, the selection sweep and the CLI."""
from __future__ import annotations

from dataclasses import dataclass

POLARIZATIONS = ("avg", "te", "tm")
CONVENTIONS = ("raw", "budget")
FIELD_RULES = ("either", "both")


@dataclass(frozen=True)
class SimulationConfig:
    """Defaults mirror the scenario-file defaulting rules.

    ``convention`` selects whether reported path losses exclude (raw) or
    include (budget) the TX/RX antenna gains; SNR gains are identical in
    both. ``field_rule`` controls the near/far classification: ``either``
    flags far field when one endpoint is beyond the Fraunhofer distance,
    ``both`` only when both are.
    """

    polarization: str = "avg"
    reflection_order: int = 1
    convention: str = "raw"
    phase_bits: int = 0
    field_rule: str = "either"

    def __post_init__(self):
        if self.polarization not in POLARIZATIONS:
            raise ValueError(f"polarization must be one of {POLARIZATIONS}")
        if self.reflection_order not in (1, 2):
            raise ValueError("reflection_order must be 1 or 2")
        if self.convention not in CONVENTIONS:
            raise ValueError(f"convention must be one of {CONVENTIONS}")
        if self.phase_bits < 0:
            raise ValueError("phase_bits must be >= 0")
        if self.field_rule not in FIELD_RULES:
            raise ValueError(f"field_rule must be one of {FIELD_RULES}")
