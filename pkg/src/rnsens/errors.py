"""Exception types raised by rnsens."""


class ModelError(Exception):
    """A reaction network, parameter set or model file is unusable."""


class InvalidPropensity(ModelError):
    """A propensity evaluated to a negative or non-finite value."""


class StateUnderflow(ModelError):
    """A state update would drive a species count below zero."""


class ModelFileError(ModelError):
    """A model file violates the schema."""


class InvalidRate(ValueError):
    """A rate or distribution mean is outside its admissible range."""


class AbsorbingState(Exception):
    """The total propensity is zero; the process cannot leave the state."""


class SampleError(RuntimeError):
    """A Monte Carlo sample failed; ``index`` identifies which one."""

    def __init__(self, index, cause):
        super().__init__(f"sample {index} failed: {cause}")
        self.index = index
        self.cause = cause
