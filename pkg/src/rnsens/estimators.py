"""Sensitivity estimators for reaction networks.

* :func:`sample_second_order`: unbiased estimator of d2 E f(X(t)) / dtheta_i dtheta_j.
  Along an SSA path each holding interval gets an exponential probe; when
  the probe lands before the horizon, Poisson-thinned coupled sub-simulations
  estimate the differences of first-order sensitivities and of expectations
  between neighbouring states.
* :func:`sample_first_order`: the Poisson-path first-order estimator, used
  stand-alone and nested inside the second-order one.
* :func:`sample_fd_second_order`: biased four-point finite-difference baseline.

Each ``sample_*`` function evaluates one realization; the matching
``*Sampler`` classes bind a configuration for :func:`rnsens.montecarlo.run_estimator`.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

from . import _pure
from .backend import Kernel
from .errors import InvalidPropensity, InvalidRate, ModelError
from .model import OutputFunction, ReactionNetwork, as_theta, shifted
from .rng import StreamKey


@dataclass(frozen=True)
class EstimatorConfig:
    t: float
    i: int
    j: int
    c: float = 1.0
    n_samples: int = 1000

    def __post_init__(self):
        if not self.t >= 0:
            raise ValueError(f"horizon t must be >= 0, got {self.t}")
        if not self.c > 0:
            raise ValueError(f"normalizing constant c must be > 0, got {self.c}")
        if self.i < 0 or self.j < 0:
            raise ValueError("parameter indices must be non-negative")
        if self.n_samples < 1:
            raise ValueError("n_samples must be positive")


def gamma_indicator(gamma: float, sigma_l: float, t: float) -> int:
    """1 if the exponential probe falls inside the remaining horizon, else 0."""
    return 1 if gamma < t - sigma_l else 0


def poisson_channel_mean(c: float, lambda0: float, deriv_abs: float) -> float:
    """Mean number of sub-simulation launches on one derivative channel."""
    if not lambda0 > 0:
        raise InvalidRate("channel mean needs a positive total propensity")
    return c * deriv_abs / lambda0


def _check_param(net: ReactionNetwork, q: int):
    if not 0 <= q < net.param_count:
        raise IndexError(f"parameter index {q} out of range for {net.param_count} parameters")


def _check_rates(kin):
    if kin.mass_action:
        for k, g in enumerate(kin.g):
            if not g >= 0 or math.isinf(g):
                raise InvalidPropensity(f"reaction {k}: rate polynomial evaluates to {g}")


class _Sampler:
    """Callable on a :class:`StreamKey`; ``block`` evaluates a run of sample indices."""

    kernel: Kernel

    def __call__(self, key: StreamKey) -> float:
        return self.kernel.one(key)

    def block(self, root_seed: int, start: int, stop: int):
        return self.kernel.block(root_seed, start, stop)

    @property
    def backend(self) -> str:
        return self.kernel.backend


class MeanSampler(_Sampler):
    def __init__(self, net, x0, f, theta, t, backend=None):
        if t < 0:
            raise ValueError("horizon must be non-negative")
        kin = _pure.Kinetics(net, as_theta(net, theta))
        _check_rates(kin)
        self.kernel = Kernel(_pure.MEAN, [kin], f, x0, t=t, backend=backend)


class FirstOrderSampler(_Sampler):
    def __init__(self, net, x0, f, theta, q, t, c=1.0, backend=None):
        _check_param(net, q)
        EstimatorConfig(t, q, q, c)
        kin = _pure.Kinetics(net, as_theta(net, theta), q, q)
        _check_rates(kin)
        self.kernel = Kernel(_pure.SENS1, [kin], f, x0, t=t, c=c, backend=backend)


class SecondOrderSampler(_Sampler):
    def __init__(self, net, x0, f, theta, config: EstimatorConfig, backend=None):
        _check_param(net, config.i)
        _check_param(net, config.j)
        kin = _pure.Kinetics(net, as_theta(net, theta), config.i, config.j)
        _check_rates(kin)
        self.kernel = Kernel(_pure.SENS2, [kin], f, x0, t=config.t, c=config.c, backend=backend)


class FDSecondOrderSampler(_Sampler):
    """Four-point difference with paths driven by shared per-reaction unit Poisson streams."""

    def __init__(self, net, x0, f, theta, i, j, t, eps, backend=None):
        _check_param(net, i)
        _check_param(net, j)
        if not eps > 0:
            raise ValueError("eps must be positive")
        if t < 0:
            raise ValueError("horizon must be non-negative")
        theta = as_theta(net, theta)
        kins = []
        for di, dj in ((1, 1), (1, 0), (0, 1), (0, 0)):
            th = list(theta)
            th[i] += di * eps
            th[j] += dj * eps
            kin = _pure.Kinetics(net, th)
            _check_rates(kin)
            kins.append(kin)
        self.kernel = Kernel(_pure.FD2, kins, f, x0, t=t, eps=eps, backend=backend)


class CoupledSensSampler(_Sampler):
    def __init__(self, net, x_base, zeta, theta, q, duration, c, f, backend=None):
        _check_param(net, q)
        if duration < 0:
            raise ValueError("duration must be non-negative")
        shifted(x_base, zeta)
        kin = _pure.Kinetics(net, as_theta(net, theta), q, q)
        _check_rates(kin)
        self.kernel = Kernel(_pure.SHAT, [kin], f, x_base, t=duration, c=c, zeta=zeta,
                             backend=backend)


def sample_second_order(net: ReactionNetwork, x0: Sequence[int], f: OutputFunction, theta,
                        config: EstimatorConfig, stream: StreamKey,
                        backend: Optional[str] = None) -> float:
    """One realization of the unbiased second-order sensitivity estimator."""
    return SecondOrderSampler(net, x0, f, theta, config, backend)(stream)


def sample_first_order(net: ReactionNetwork, x0: Sequence[int], f: OutputFunction, theta,
                       q: int, t: float, c: float, stream: StreamKey,
                       backend: Optional[str] = None) -> float:
    """One realization of the Poisson-path first-order estimator for theta_q."""
    return FirstOrderSampler(net, x0, f, theta, q, t, c, backend)(stream)


def coupled_sens_difference(net: ReactionNetwork, x_base: Sequence[int], zeta: Sequence[int],
                            theta, q: int, duration: float, c: float, f: OutputFunction,
                            stream: StreamKey, backend: Optional[str] = None) -> float:
    """First-order estimate from ``x_base + zeta`` minus that from ``x_base``.

    The two first-order estimators follow the two chains of one split-coupled
    pair, so the difference has small variance.
    """
    return CoupledSensSampler(net, x_base, zeta, theta, q, duration, c, f, backend)(stream)


def sample_fd_second_order(net: ReactionNetwork, x0: Sequence[int], f: OutputFunction, theta,
                           i: int, j: int, t: float, eps: float, stream: StreamKey,
                           backend: Optional[str] = None) -> float:
    """``[f(X1) - f(X2) - f(X3) + f(X4)] / eps**2`` at the four perturbed parameters."""
    return FDSecondOrderSampler(net, x0, f, theta, i, j, t, eps, backend)(stream)


__all__ = [
    "EstimatorConfig", "gamma_indicator", "poisson_channel_mean",
    "sample_second_order", "sample_first_order", "coupled_sens_difference",
    "sample_fd_second_order", "MeanSampler", "FirstOrderSampler", "SecondOrderSampler",
    "FDSecondOrderSampler", "CoupledSensSampler", "ModelError",
]
