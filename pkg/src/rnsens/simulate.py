"""Exact path simulation: single SSA paths and split-coupled pairs."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, List, Optional, Sequence, Tuple

from . import _pure
from .backend import Kernel
from .errors import AbsorbingState, ModelError
from .model import OutputFunction, ReactionNetwork, as_theta, shifted
from .rng import Stream, StreamKey


@dataclass(frozen=True)
class JumpRecord:
    """State entered at ``sigma`` and the reaction that ended the interval.

    The last record of a path has ``reaction_fired = None``: its interval is
    cut off by the horizon.
    """

    sigma: float
    state_before: Tuple[int, ...]
    lambda0: float
    reaction_fired: Optional[int]


@dataclass(frozen=True)
class CoupledPair:
    z1: Tuple[int, ...]
    z2: Tuple[int, ...]
    clock: float


def _kinetics(net, theta, i=None, j=None):
    return _pure.Kinetics(net, as_theta(net, theta), i, j)


def ssa_step(net: ReactionNetwork, x: Sequence[int], theta, stream: Stream) -> Tuple[float, int]:
    """Next waiting time and (zero-based) reaction index by the direct method.

    Raises :class:`AbsorbingState` if no reaction can fire from ``x``.
    """
    dt, k, _, lam0 = _pure.ssa_step(_kinetics(net, theta), list(x), stream)
    if lam0 <= 0.0:
        raise AbsorbingState(f"total propensity is zero at state {tuple(x)}")
    return dt, k


def simulate_path(net: ReactionNetwork, x0: Sequence[int], theta, t: float,
                  stream: Stream) -> List[JumpRecord]:
    """Jump records of one SSA path on ``[0, t]``.

    An absorbing state ends the path with a final record held until ``t``.
    """
    if t < 0:
        raise ValueError("horizon must be non-negative")
    kin = _kinetics(net, theta)
    x = list(x0)
    if any(v < 0 for v in x):
        raise ModelError("initial state must be non-negative")
    s = 0.0
    records = []
    while True:
        if t <= 0.0:
            _, lam0 = kin.rates(x)
            records.append(JumpRecord(s, tuple(x), lam0, None))
            return records
        dt, k, _, lam0 = _pure.ssa_step(kin, x, stream)
        if dt >= t - s:
            records.append(JumpRecord(s, tuple(x), lam0, None))
            return records
        records.append(JumpRecord(s, tuple(x), lam0, k))
        s += dt
        x = _pure.apply(x, net.stoich[k])


def simulate_coupled_pair(net: ReactionNetwork, z1_0: Sequence[int], z2_0: Sequence[int], theta,
                          duration: float, stream: Stream,
                          on_step: Optional[Callable] = None) -> CoupledPair:
    """Run the split-coupled pair for ``duration``.

    Per reaction, a shared channel at rate ``min(l1, l2)`` moves both chains
    and two residual channels move one chain each. ``on_step(z1, z2, rates)``
    is called before every step with the per-reaction ``(shared, res1, res2)``
    rates; it exists for invariant checks.
    """
    if duration < 0:
        raise ValueError("duration must be non-negative")
    kin = _kinetics(net, theta)
    z1, z2 = list(z1_0), list(z2_0)
    if any(v < 0 for v in z1 + z2):
        raise ModelError("initial states must be non-negative")
    s = 0.0
    while duration > 0.0:
        if on_step is not None:
            on_step(tuple(z1), tuple(z2), _pure.split_rates(kin.rates(z1)[0], kin.rates(z2)[0]))
        dt, k, which = _pure.coupled_step(kin, z1, z2, stream)
        if dt >= duration - s:
            break
        s += dt
        if which != 2:
            z1 = _pure.apply(z1, net.stoich[k])
        if which != 1:
            z2 = _pure.apply(z2, net.stoich[k])
    return CoupledPair(tuple(z1), tuple(z2), float(duration))


def coupled_output_difference(net: ReactionNetwork, x_base: Sequence[int], zeta: Sequence[int],
                              theta, duration: float, f: OutputFunction, stream: StreamKey,
                              backend: Optional[str] = None) -> float:
    """One realization of ``f(Z1(duration)) - f(Z2(duration))``, Z1 from ``x_base + zeta``."""
    if duration < 0:
        raise ValueError("duration must be non-negative")
    shifted(x_base, zeta)
    kern = Kernel(_pure.DHAT, [_kinetics(net, theta)], f, x_base, t=duration, zeta=zeta,
                  backend=backend)
    return kern.one(stream)


def mean_sample(net: ReactionNetwork, x0: Sequence[int], theta, t: float, f: OutputFunction,
                stream: StreamKey, backend: Optional[str] = None) -> float:
    """``f(X(t))`` for one SSA path; same draws as :func:`simulate_path` on ``stream.stream()``."""
    kern = Kernel(_pure.MEAN, [_kinetics(net, theta)], f, x0, t=t, backend=backend)
    return kern.one(stream)
