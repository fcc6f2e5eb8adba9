"""
Area-adjusted figure of merit: FM = f_CR * 2^ENOB / (A * P_SUP)
with f_CR in MS/s, A in mm^2 and P_SUP in mW.
"""

from dataclasses import dataclass

from converter.exceptions import MetricsError


@dataclass(frozen=True)
class FomInputs:
    f_cr: float  # MS/s
    enob: float  # bits
    area: float  # mm^2
    power: float  # mW

    def __post_init__(self):
        for name in ('f_cr', 'enob', 'area', 'power'):
            value = getattr(self, name)
            if not value > 0:
                raise MetricsError(f"figure of merit input {name} must be positive, got {value}")


def figure_of_merit(inputs: FomInputs) -> float:
    return inputs.f_cr * 2 ** inputs.enob / (inputs.area * inputs.power)
