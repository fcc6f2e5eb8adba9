"""
Simulation errors

Every failure carries the module that raised it so the harness can
report it without inspecting the exception type.
"""


class SimulationError(Exception):
    """Base error for the converter, metrology and harness services"""

    module = 'simulation'

    def __init__(self, message: str, module: str = None):
        if module:
            self.module = module
        self.message = message
        super().__init__(f"[{self.module}] {message}")


class StimulusError(SimulationError):
    module = 'signals'


class PipelineError(SimulationError):
    module = 'pipeline'


class CorrectionError(SimulationError):
    module = 'correction'


class BiasError(SimulationError):
    module = 'bias'


class MetricsError(SimulationError):
    module = 'metrics'


class ConfigurationError(SimulationError):
    module = 'harness'


class CalibrationError(SimulationError):
    """Raised when a calibration interval does not bracket its target"""

    module = 'harness'

    def __init__(self, message: str, knob: str = '', bracket=None, bracket_values=None):
        self.knob = knob
        self.bracket = bracket
        self.bracket_values = bracket_values
        super().__init__(message)
