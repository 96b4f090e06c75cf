"""Unbiased parameter sensitivities for stochastic reaction networks."""
from .backend import COMPILED, NAME as BACKEND
from .errors import (AbsorbingState, InvalidPropensity, InvalidRate, ModelError,
                     ModelFileError, SampleError, StateUnderflow)
from .estimators import (EstimatorConfig, coupled_sens_difference, sample_fd_second_order,
                         sample_first_order, sample_second_order)
from .model import (Custom, MassActionPoly, Model, OutputFunction, Parameters, ReactionNetwork,
                    load_model)
from .montecarlo import EstimateResult, run_estimator
from .rng import Stream, StreamKey
from .simulate import coupled_output_difference, simulate_coupled_pair, simulate_path

__version__ = "0.1.0"
