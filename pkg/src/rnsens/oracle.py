"""Closed-form means and sensitivities of linear birth-death networks.

For immigration at rate ``th1`` and linear death at rate ``th2 * x`` the mean
solves ``dm/dt = th1 - th2 m`` exactly, so every parameter derivative is
available in closed form. These values are ground truth for the
estimators; nothing here touches the simulators.
"""
from __future__ import annotations

import math
from typing import Callable, Sequence, Tuple

from .errors import InvalidRate


def _check(th2):
    if not th2 > 0:
        raise InvalidRate(f"death rate must be positive, got {th2}")


def immigration_mean(x0: float, th1: float, t: float) -> float:
    """Mean of the pure immigration process (no death)."""
    return x0 + th1 * t


def linear_bd_mean(x0: float, th1: float, th2: float, t: float) -> float:
    _check(th2)
    e = math.exp(-th2 * t)
    return x0 * e + (th1 / th2) * (1.0 - e)


_WRT = {"th1": 1, "th2": 2}


def linear_bd_sens(x0: float, th1: float, th2: float, t: float, wrt: Sequence[str]) -> float:
    """Partial derivative of :func:`linear_bd_mean` with respect to ``wrt``.

    ``wrt`` lists one or two names from ``{"th1", "th2"}``, e.g. ``("th1", "th2")``.
    """
    _check(th2)
    try:
        order = tuple(sorted(_WRT[w] for w in wrt))
    except KeyError as exc:
        raise ValueError(f"unknown parameter {exc.args[0]!r}") from None
    a, b = th1, th2
    e = math.exp(-b * t)
    if order == ():
        return linear_bd_mean(x0, a, b, t)
    if order == (1,):
        return (1.0 - e) / b
    if order == (2,):
        return -x0 * t * e + a * (b * t * e - (1.0 - e)) / b**2
    if order == (1, 1):
        return 0.0
    if order == (1, 2):
        return (b * t * e - (1.0 - e)) / b**2
    if order == (2, 2):
        return x0 * t * t * e + a * (2.0 * (1.0 - e) - 2.0 * b * t * e - b * b * t * t * e) / b**3
    raise ValueError(f"unsupported derivative order {wrt!r}")


def product_bd_mean(x0: float, th: Sequence[float], t: float) -> float:
    """Mean for birth at rate ``th1 * th2`` and death at rate ``th3 * x``."""
    th1, th2, th3 = th
    return linear_bd_mean(x0, th1 * th2, th3, t)


def product_bd_mixed12(th: Sequence[float], t: float) -> float:
    """d2/dth1 dth2 of :func:`product_bd_mean`; equals (1 - exp(-th3 t)) / th3."""
    _check(th[2])
    return (1.0 - math.exp(-th[2] * t)) / th[2]


def fd_on_oracle(i: int, j: int, eps: float, mean_fn: Callable[[Tuple[float, ...]], float],
                 theta: Sequence[float]) -> float:
    """Four-point finite difference of ``mean_fn`` at ``theta`` (zero-based indices).

    This is the exact expectation of the finite-difference baseline when
    ``mean_fn`` is the true mean.
    """
    if not eps > 0:
        raise ValueError("eps must be positive")

    def at(di, dj):
        th = list(theta)
        th[i] += di * eps
        th[j] += dj * eps
        return mean_fn(tuple(th))

    return (at(1, 1) - at(1, 0) - at(0, 1) + at(0, 0)) / (eps * eps)
