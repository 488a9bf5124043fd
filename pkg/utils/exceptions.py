"""
Exception hierarchy shared by the library and the management commands
"""


class ThermalQASError(Exception):
    """Base class for every error raised by the project"""


class InvalidArgumentError(ThermalQASError, ValueError):
    """An argument is outside its documented domain"""


class MalformedTensorError(InvalidArgumentError):
    """A circuit tensor violates the encoding rules"""


class CapacityError(ThermalQASError):
    """The request exceeds what dense simulation or a fixed-size encoding can hold"""


class TrainingInterrupted(ThermalQASError):
    """Training stopped early; a checkpoint was written to ``checkpoint_dir``"""

    def __init__(self, message, checkpoint_dir=None):
        super().__init__(message)
        self.checkpoint_dir = checkpoint_dir


class StateError(ThermalQASError):
    """An operation was called before the state it depends on exists"""
