"""Pure-Python simulation and estimator kernels.

This is the fallback backend and the readable reference for ``_core.pyx``.
Both implement the same arithmetic in the same order and draw from the
same keyed streams, so for mass-action models they return bit-identical
samples. Custom (callable) propensities only run here.

Stream layout for one sample with key ``K``:

* ``child(K, 0)``: sequential SSA draws for the main path.
* ``child(K, 1)`` = ``A``; ``child(A, l)`` = ``J_l``: the exponential probe
  and the Poisson channel counts at jump ``l``, drawn in reaction order.
* ``child(J_l, k + 1)``: the coupled sub-simulation launched from jump
  ``l`` for reaction ``k``.

A coupled sub-simulation with key ``P`` uses ``child(P, 0)`` for the pair,
``child(P, 1)`` and ``child(P, 2)`` as the auxiliary roots of the two
first-order estimators run along it. Those are keyed by the coupled event
index at which a chain entered its state, so both chains use the same
auxiliary draws for a shared jump.
"""
from __future__ import annotations

import math

from .errors import InvalidPropensity, StateUnderflow
from .model import MassActionPoly, ReactionNetwork
from .rng import Stream, child_key

MEAN, SENS1, SENS2, FD2, DHAT, SHAT = range(6)
INF = math.inf


class Kinetics:
    """Propensities of ``net`` at a fixed theta, plus derivatives in theta_i, theta_j."""

    def __init__(self, net: ReactionNetwork, theta, i=None, j=None):
        self.K = net.K
        self.d = net.d
        self.stoich = net.stoich
        self.theta = tuple(theta)
        self.mass_action = net.is_mass_action
        self._specs = net.propensities
        self._i, self._j = i, j
        if self.mass_action:
            self.orders = [s.reactant_orders for s in net.propensities]
            self.g = [s.rate(self.theta) for s in net.propensities]
            self.gi = self.gj = self.gij = None
            if i is not None:
                self.gi = [s.rate_grad(self.theta, i) for s in net.propensities]
            if j is not None:
                self.gj = [s.rate_grad(self.theta, j) for s in net.propensities]
            if i is not None and j is not None:
                a, b = min(i, j), max(i, j)
                self.gij = [s.rate_hess(self.theta, a, b) for s in net.propensities]

    def factors(self, x):
        out = []
        for nu in self.orders:
            h = 1.0
            for xs, o in zip(x, nu):
                for m in range(o):
                    h *= xs - m
            out.append(h)
        return out

    def rates(self, x):
        """Return ``(rates, lambda0)``; raises on a negative propensity."""
        if self.mass_action:
            h = self.factors(x)
            lam = [g * hk for g, hk in zip(self.g, h)]
        else:
            lam = [float(s.value(tuple(x), self.theta)) for s in self._specs]
        lam0 = 0.0
        for k, v in enumerate(lam):
            if not v >= 0.0 or v == INF:
                raise InvalidPropensity(f"reaction {k}: propensity {v} at state {tuple(x)}")
            lam0 += v
        return lam, lam0

    def derivs(self, x):
        """Return ``(d/dtheta_i, d/dtheta_j, d2/dtheta_i dtheta_j)`` lists at ``x``."""
        if self.mass_action:
            h = self.factors(x)
            di = [a * b for a, b in zip(self.gi, h)] if self.gi is not None else None
            dj = [a * b for a, b in zip(self.gj, h)] if self.gj is not None else None
            dij = [a * b for a, b in zip(self.gij, h)] if self.gij is not None else None
            return di, dj, dij
        xt = tuple(x)
        i, j = self._i, self._j
        di = [float(s.grad(xt, self.theta, i)) for s in self._specs] if i is not None else None
        dj = [float(s.grad(xt, self.theta, j)) for s in self._specs] if j is not None else None
        dij = None
        if i is not None and j is not None:
            a, b = min(i, j), max(i, j)
            dij = [float(s.hess(xt, self.theta, a, b)) for s in self._specs]
        return di, dj, dij


def apply(x, zeta):
    y = [a + b for a, b in zip(x, zeta)]
    for v in y:
        if v < 0:
            raise StateUnderflow(f"state {tuple(x)} + {tuple(zeta)} has a negative component")
    return y


def sign(v):
    return 1.0 if v > 0 else (-1.0 if v < 0 else 0.0)


def select(weights, total, r):
    """Smallest index whose cumulative normalized weight reaches ``r``."""
    acc = 0.0
    n = len(weights)
    k = -1
    while acc < r and k < n - 1:
        k += 1
        acc += weights[k] / total
    # Rounding can leave acc just below r; fall back to the last live channel.
    while k > 0 and weights[k] <= 0.0:
        k -= 1
    return k


def ssa_step(kin, x, stream):
    """One direct-method step; returns ``(dt, k, rates, lambda0)``.

    With ``lambda0 == 0`` no randomness is consumed and ``dt`` is infinite.
    """
    lam, lam0 = kin.rates(x)
    if lam0 <= 0.0:
        return INF, -1, lam, lam0
    r1 = stream.uniform()
    r2 = stream.uniform()
    dt = -math.log(r1) / lam0
    return dt, select(lam, lam0, r2), lam, lam0


def split_rates(l1, l2):
    """Per-reaction (shared, residual-1, residual-2) rates of the split coupling."""
    out = []
    for a, b in zip(l1, l2):
        m = a if a < b else b
        out.append((m, a - m, b - m))
    return out


def coupled_step(kin, z1, z2, stream):
    """One step of the split-coupled pair.

    Returns ``(dt, k, which)`` where ``which`` is 0 for the shared channel
    (both chains move), 1 or 2 for a residual channel; ``k = -1`` when all
    channel rates vanish.
    """
    l1, _ = kin.rates(z1)
    l2, _ = kin.rates(z2)
    w = []
    for m, r1, r2 in split_rates(l1, l2):
        w.append(m)
        w.append(r1)
        w.append(r2)
    total = 0.0
    for v in w:
        total += v
    if total <= 0.0:
        return INF, -1, 0
    u1 = stream.uniform()
    u2 = stream.uniform()
    dt = -math.log(u1) / total
    c = select(w, total, u2)
    return dt, c // 3, c % 3


def final_state(kin, x0, t, stream):
    x = list(x0)
    s = 0.0
    if t <= 0.0:
        return x
    while True:
        dt, k, _, _ = ssa_step(kin, x, stream)
        if dt >= t - s:
            return x
        s += dt
        x = apply(x, kin.stoich[k])


def coupled_final(kin, z1, z2, duration, stream, stop_when_equal=True):
    z1, z2 = list(z1), list(z2)
    s = 0.0
    if duration <= 0.0:
        return z1, z2
    while not (stop_when_equal and z1 == z2):
        dt, k, which = coupled_step(kin, z1, z2, stream)
        if dt >= duration - s:
            break
        s += dt
        zeta = kin.stoich[k]
        if which != 2:
            z1 = apply(z1, zeta)
        if which != 1:
            z2 = apply(z2, zeta)
    return z1, z2


def coupled_diff(kin, f, z1, z2, duration, key):
    """One realization of ``f(Z1(duration)) - f(Z2(duration))``."""
    a, b = coupled_final(kin, z1, z2, duration, Stream(key))
    return f.eval(a) - f.eval(b)


def _first_order_interval(kin, f, x, lam, lam0, dq, dt, rem, c, jkey):
    """Contribution of one holding interval to a first-order estimate."""
    J = Stream(jkey)
    gam = False
    gamma = INF
    if lam0 > 0.0:
        gamma = J.exponential(lam0)
        gam = gamma < rem
    w = dt - 1.0 / lam0 if gam else dt
    S = 0.0
    for k in range(kin.K):
        if dq[k] != 0.0:
            S += dq[k] * f.delta(x, kin.stoich[k]) * w
    if gam:
        dur = rem - gamma
        for k in range(kin.K):
            if dq[k] == 0.0:
                continue
            n = J.poisson(c * abs(dq[k]) / lam0)
            if n > 0:
                z1 = apply(x, kin.stoich[k])
                D = coupled_diff(kin, f, z1, x, dur, child_key(jkey, k + 1))
                S += sign(dq[k]) * n * D / c
    return S


def first_order(kin, f, x0, t, c, key, slot=0):
    """One first-order sample along an SSA path; ``slot`` selects theta_i (0) or theta_j (1)."""
    if t <= 0.0:
        return 0.0
    main = Stream(child_key(key, 0))
    aux = child_key(key, 1)
    x = list(x0)
    s = 0.0
    S = 0.0
    l = 0
    while True:
        dt_next, k0, lam, lam0 = ssa_step(kin, x, main)
        rem = t - s
        last = dt_next >= rem
        dt = rem if last else dt_next
        dq = kin.derivs(x)[slot]
        S += _first_order_interval(kin, f, x, lam, lam0, dq, dt, rem, c, child_key(aux, l))
        if last:
            return S
        s += dt_next
        x = apply(x, kin.stoich[k0])
        l += 1


class _ChainEstimator:
    """First-order accumulator following one chain of a coupled pair."""

    def __init__(self, kin, f, x, slot, horizon, c, aux):
        self.kin, self.f, self.slot, self.horizon, self.c, self.aux = kin, f, slot, horizon, c, aux
        self.x = list(x)
        self.sigma = 0.0
        self.event = 0
        self.total = 0.0

    def close(self, now):
        kin = self.kin
        lam, lam0 = kin.rates(self.x)
        dq = kin.derivs(self.x)[self.slot]
        self.total += _first_order_interval(
            kin, self.f, self.x, lam, lam0, dq, now - self.sigma,
            self.horizon - self.sigma, self.c, child_key(self.aux, self.event),
        )

    def jump(self, now, event, new_x):
        self.close(now)
        self.x = new_x
        self.sigma = now
        self.event = event


def pair_estimates(kin, f, z1, z2, duration, c, key, need_i, need_j):
    """Simulate one coupled pair and evaluate D-hat and the requested S-hat's on it.

    Returns ``(S_i, S_j, D)``; an unrequested S-hat is returned as 0.
    """
    if not (need_i or need_j):
        return 0.0, 0.0, coupled_diff(kin, f, z1, z2, duration, child_key(key, 0))
    stream = Stream(child_key(key, 0))
    chains = []
    for slot, need in ((0, need_i), (1, need_j)):
        if need:
            aux = child_key(key, 1 + slot)
            chains.append(
                (slot,
                 _ChainEstimator(kin, f, z1, slot, duration, c, aux),
                 _ChainEstimator(kin, f, z2, slot, duration, c, aux))
            )
    z1, z2 = list(z1), list(z2)
    s = 0.0
    event = 0
    if duration > 0.0:
        while True:
            dt, k, which = coupled_step(kin, z1, z2, stream)
            if dt >= duration - s:
                break
            s += dt
            event += 1
            zeta = kin.stoich[k]
            if which != 2:
                z1 = apply(z1, zeta)
                for _, a, _b in chains:
                    a.jump(s, event, z1)
            if which != 1:
                z2 = apply(z2, zeta)
                for _, _a, b in chains:
                    b.jump(s, event, z2)
        for _, a, b in chains:
            a.close(duration)
            b.close(duration)
    S = [0.0, 0.0]
    for slot, a, b in chains:
        S[slot] = a.total - b.total
    return S[0], S[1], f.eval(z1) - f.eval(z2)


def second_order(kin, f, x0, t, c, key):
    """One realization of the unbiased second-order estimator."""
    if t <= 0.0:
        return 0.0
    main = Stream(child_key(key, 0))
    aux = child_key(key, 1)
    x = list(x0)
    s = 0.0
    S = 0.0
    l = 0
    K = kin.K
    while True:
        dt_next, k0, lam, lam0 = ssa_step(kin, x, main)
        rem = t - s
        last = dt_next >= rem
        dt = rem if last else dt_next
        jkey = child_key(aux, l)
        J = Stream(jkey)
        gam = False
        gamma = INF
        if lam0 > 0.0:
            gamma = J.exponential(lam0)
            gam = gamma < rem
        w = dt - 1.0 / lam0 if gam else dt
        di, dj, dij = kin.derivs(x)
        for k in range(K):
            if dij[k] != 0.0:
                S += dij[k] * f.delta(x, kin.stoich[k]) * w
        if gam:
            dur = rem - gamma
            for k in range(K):
                ni = J.poisson(c * abs(di[k]) / lam0) if di[k] != 0.0 else 0
                nj = J.poisson(c * abs(dj[k]) / lam0) if dj[k] != 0.0 else 0
                nij = J.poisson(c * abs(dij[k]) / lam0) if dij[k] != 0.0 else 0
                if ni == 0 and nj == 0 and nij == 0:
                    continue
                z1 = apply(x, kin.stoich[k])
                # The theta_i channel carries the theta_j sensitivity difference and vice versa.
                Si, Sj, D = pair_estimates(
                    kin, f, z1, x, dur, c, child_key(jkey, k + 1), nj > 0, ni > 0
                )
                if ni > 0:
                    S += sign(di[k]) * ni * Sj / c
                if nj > 0:
                    S += sign(dj[k]) * nj * Si / c
                if nij > 0:
                    S += sign(dij[k]) * nij * D / c
        if last:
            return S
        s += dt_next
        x = apply(x, kin.stoich[k0])
        l += 1


def rtc_final(kin, x0, t, key):
    """Final state via the random time change with one unit-rate Poisson stream per reaction."""
    K = kin.K
    streams = [Stream(child_key(key, k)) for k in range(K)]
    internal = [0.0] * K
    nxt = [-math.log(st.uniform()) for st in streams]
    x = list(x0)
    s = 0.0
    if t <= 0.0:
        return x
    while True:
        lam, _ = kin.rates(x)
        best = INF
        mu = -1
        for k in range(K):
            if lam[k] > 0.0:
                dk = (nxt[k] - internal[k]) / lam[k]
                if dk < 0.0:
                    dk = 0.0
                if dk < best:
                    best = dk
                    mu = k
        if mu < 0 or best >= t - s:
            return x
        s += best
        for k in range(K):
            internal[k] += lam[k] * best
        internal[mu] = nxt[mu]
        nxt[mu] += -math.log(streams[mu].uniform())
        x = apply(x, kin.stoich[mu])


def fd_second_order(kins, f, x0, t, eps, key):
    """Four-point difference over paths coupled through shared per-reaction streams."""
    v = [f.eval(rtc_final(kin, x0, t, key)) for kin in kins]
    return (v[0] - v[1] - v[2] + v[3]) / (eps * eps)


def run_one(kind, kins, f, x0, t, c, eps, key, zeta=None):
    kin = kins[0]
    if kind == MEAN:
        return f.eval(final_state(kin, x0, t, Stream(key)))
    if kind == SENS1:
        return first_order(kin, f, x0, t, c, key)
    if kind == SENS2:
        return second_order(kin, f, x0, t, c, key)
    if kind == FD2:
        return fd_second_order(kins, f, x0, t, eps, key)
    if kind == DHAT:
        return coupled_diff(kin, f, apply(x0, zeta), list(x0), t, key)
    if kind == SHAT:
        return pair_estimates(kin, f, apply(x0, zeta), list(x0), t, c, key, True, False)[0]
    raise ValueError(f"unknown sampler kind {kind}")
