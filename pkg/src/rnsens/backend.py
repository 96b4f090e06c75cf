"""Backend selection and block evaluation of samplers.

The compiled core is used when it imported and the network is pure mass
action; everything else goes through :mod:`rnsens._pure`. Set
``RNSENS_BACKEND=python`` to force the fallback.
"""
from __future__ import annotations

import logging
import os

import numpy as np

from . import _pure
from .errors import InvalidPropensity, ModelError, SampleError, StateUnderflow
from .rng import Stream, StreamKey, child_key, root_key

log = logging.getLogger(__name__)

try:
    from . import _core
except ImportError:  # pragma: no cover - depends on the build
    _core = None

if os.environ.get("RNSENS_BACKEND", "").lower() == "python":
    _core = None

COMPILED = _core is not None
NAME = "cython" if COMPILED else "python"

_ERRORS = {
    1: InvalidPropensity("negative or non-finite propensity encountered"),
    2: StateUnderflow("a reaction drove a species count below zero"),
    3: MemoryError("allocation failed in the compiled core"),
}


class Kernel:
    """A sampler kind bound to a model, ready to evaluate keyed samples."""

    def __init__(self, kind, kins, f, x0, t=0.0, c=1.0, eps=1.0, zeta=None, backend=None):
        self.kind = kind
        self.kins = list(kins)
        self.f = f
        self.x0 = tuple(int(v) for v in x0)
        self.t = float(t)
        self.c = float(c)
        self.eps = float(eps)
        self.zeta = tuple(zeta) if zeta is not None else (0,) * len(self.x0)
        mass_action = all(k.mass_action for k in self.kins)
        if backend is None:
            backend = "cython" if (COMPILED and mass_action) else "python"
        if backend == "cython" and not (COMPILED and mass_action):
            raise ModelError("compiled backend unavailable for this model")
        self.backend = backend
        if backend == "cython":
            self._pack()

    def _pack(self):
        kin = self.kins[0]
        d, K = kin.d, kin.K
        self._stoich = np.array(kin.stoich, dtype=np.int64).reshape(K, d)
        self._orders = np.array(kin.orders, dtype=np.int64).reshape(K, d)
        terms = self.f.terms
        self._out_coeff = np.array([c for c, _ in terms], dtype=float)
        self._out_pow = np.array([p for _, p in terms], dtype=np.int64).reshape(len(terms), d)
        if self.kind == _pure.FD2:
            rows = [k.g for k in self.kins]
        elif self.kind in (_pure.SENS1, _pure.SHAT):
            rows = [kin.g, kin.gi]
        elif self.kind == _pure.SENS2:
            rows = [kin.g, kin.gi, kin.gj, kin.gij]
        else:
            rows = [kin.g]
        self._gmat = np.array(rows, dtype=float).reshape(len(rows), K)
        self._x0 = np.array(self.x0, dtype=np.int64)
        self._zeta = np.array(self.zeta, dtype=np.int64)

    def _run(self, key, start, stop, direct):
        out = np.empty(stop - start)
        err, fail = _core.run_block(
            self.kind, self._stoich, self._orders, self._out_coeff, self._out_pow,
            self._gmat, self._x0, self._zeta, self.t, self.c, self.eps,
            key, start, stop, direct, out,
        )
        if err:
            exc = _ERRORS.get(err, RuntimeError(f"compiled core error {err}"))
            if direct:
                raise type(exc)(*exc.args)
            raise SampleError(int(fail), exc)
        return out

    def one(self, key: StreamKey) -> float:
        k = key.key
        if self.backend == "cython":
            return float(self._run(k, 0, 1, True)[0])
        return _pure.run_one(self.kind, self.kins, self.f, self.x0, self.t, self.c, self.eps,
                             k, self.zeta)

    def block(self, root_seed: int, start: int, stop: int) -> np.ndarray:
        """Samples ``start..stop-1``, sample ``m`` keyed by ``StreamKey(root_seed, (m,))``."""
        rk = root_key(root_seed)
        if self.backend == "cython":
            return self._run(rk, start, stop, False)
        out = np.empty(stop - start)
        for m in range(start, stop):
            try:
                out[m - start] = _pure.run_one(
                    self.kind, self.kins, self.f, self.x0, self.t, self.c, self.eps,
                    child_key(rk, m), self.zeta,
                )
            except (ModelError, ArithmeticError, ValueError) as exc:
                raise SampleError(m, exc) from exc
        return out


__all__ = ["Kernel", "COMPILED", "NAME", "Stream", "StreamKey"]
