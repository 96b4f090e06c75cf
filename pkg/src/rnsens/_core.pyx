# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled kernels for mass-action networks.

Line-for-line counterpart of ``_pure.py``: same stream layout, same
floating-point operation order, so both backends return identical samples.
Kernels run without the GIL so blocks of samples can be spread over threads.
"""
from libc.math cimport log, exp, fabs, INFINITY
from libc.stdlib cimport malloc, free
from libc.stdint cimport uint64_t, int64_t

import numpy as np

cdef enum:
    K_MEAN = 0
    K_SENS1 = 1
    K_SENS2 = 2
    K_FD2 = 3
    K_DHAT = 4
    K_SHAT = 5

cdef enum:
    ERR_NONE = 0
    ERR_PROPENSITY = 1
    ERR_UNDERFLOW = 2
    ERR_MEMORY = 3

cdef uint64_t GOLDEN = 0x9E3779B97F4A7C15ULL
cdef uint64_t ROOT_SALT = 0x5851F42D4C957F2DULL
cdef double TWO_M53 = 1.0 / 9007199254740992.0
cdef double POISSON_CHUNK = 30.0


cdef struct Net:
    int d
    int K
    int M
    const int64_t* stoich
    const int64_t* orders
    const double* out_coeff
    const int64_t* out_pow
    const double* g
    const double* gi
    const double* gj
    const double* gij


# ---------------------------------------------------------------- streams

cdef inline uint64_t mix64(uint64_t z) noexcept nogil:
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL
    return z ^ (z >> 31)


cdef inline uint64_t child_key(uint64_t key, uint64_t index) noexcept nogil:
    return mix64(mix64(key) ^ ((index + 1) * GOLDEN))


cdef inline double uniform(uint64_t* st) noexcept nogil:
    st[0] = st[0] + GOLDEN
    return <double>((mix64(st[0]) >> 11) + 1) * TWO_M53


cdef inline double exponential(uint64_t* st, double rate) noexcept nogil:
    return -log(uniform(st)) / rate


cdef inline int64_t poisson_inversion(uint64_t* st, double mean) noexcept nogil:
    cdef double u = uniform(st)
    cdef double p = exp(-mean)
    cdef double cdf = p
    cdef int64_t k = 0
    while u > cdf and p > 0.0:
        k += 1
        p = p * mean / <double>k
        cdf += p
    return k


cdef inline int64_t poisson(uint64_t* st, double mean) noexcept nogil:
    cdef int64_t n = 0
    while mean > POISSON_CHUNK:
        n += poisson_inversion(st, POISSON_CHUNK)
        mean -= POISSON_CHUNK
    if mean > 0:
        n += poisson_inversion(st, mean)
    return n


def py_root_key(uint64_t seed):
    return mix64(seed ^ ROOT_SALT)


def py_child_key(uint64_t key, uint64_t index):
    return child_key(key, index)


def py_uniforms(uint64_t key, int n):
    cdef uint64_t st = key
    out = np.empty(n)
    cdef double[::1] o = out
    cdef int m
    for m in range(n):
        o[m] = uniform(&st)
    return out


def py_poissons(uint64_t key, double mean, int n):
    cdef uint64_t st = key
    out = np.empty(n, dtype=np.int64)
    cdef int64_t[::1] o = out
    cdef int m
    for m in range(n):
        o[m] = poisson(&st, mean)
    return out


# ---------------------------------------------------------------- model

cdef inline double rates(const Net* n, const int64_t* x, double* lam, double* h, int* err) noexcept nogil:
    cdef int k, s
    cdef int64_t m
    cdef double hk, v, lam0 = 0.0
    for k in range(n.K):
        hk = 1.0
        for s in range(n.d):
            for m in range(n.orders[k * n.d + s]):
                hk *= <double>(x[s] - m)
        h[k] = hk
        lam[k] = n.g[k] * hk
    for k in range(n.K):
        v = lam[k]
        if not (v >= 0.0) or v == INFINITY:
            err[0] = ERR_PROPENSITY
            return 0.0
        lam0 += v
    return lam0


cdef inline double feval(const Net* n, const int64_t* x) noexcept nogil:
    cdef int m, s
    cdef int64_t e
    cdef double term, v = 0.0
    for m in range(n.M):
        term = n.out_coeff[m]
        for s in range(n.d):
            for e in range(n.out_pow[m * n.d + s]):
                term *= <double>x[s]
        v += term
    return v


cdef inline int shift(const Net* n, const int64_t* x, int k, int64_t* y, int* err) noexcept nogil:
    cdef int s
    for s in range(n.d):
        y[s] = x[s] + n.stoich[k * n.d + s]
    for s in range(n.d):
        if y[s] < 0:
            err[0] = ERR_UNDERFLOW
            return 1
    return 0


cdef inline int shift_vec(int d, const int64_t* x, const int64_t* zeta, int64_t* y, int* err) noexcept nogil:
    cdef int s
    for s in range(d):
        y[s] = x[s] + zeta[s]
    for s in range(d):
        if y[s] < 0:
            err[0] = ERR_UNDERFLOW
            return 1
    return 0


cdef inline double fdelta(const Net* n, const int64_t* x, int k, int64_t* tmp, int* err) noexcept nogil:
    if shift(n, x, k, tmp, err):
        return 0.0
    return feval(n, tmp) - feval(n, x)


cdef inline void copy_state(int d, const int64_t* a, int64_t* b) noexcept nogil:
    cdef int s
    for s in range(d):
        b[s] = a[s]


cdef inline bint same_state(int d, const int64_t* a, const int64_t* b) noexcept nogil:
    cdef int s
    for s in range(d):
        if a[s] != b[s]:
            return False
    return True


cdef inline double sign(double v) noexcept nogil:
    if v > 0:
        return 1.0
    if v < 0:
        return -1.0
    return 0.0


cdef inline int select(const double* w, int nw, double total, double r) noexcept nogil:
    cdef double acc = 0.0
    cdef int k = -1
    while acc < r and k < nw - 1:
        k += 1
        acc += w[k] / total
    while k > 0 and w[k] <= 0.0:
        k -= 1
    return k


# ---------------------------------------------------------------- simulation

cdef double ssa_step(const Net* n, const int64_t* x, uint64_t* st, double* lam, double* h,
                     double* lam0_out, int* k_out, int* err) noexcept nogil:
    cdef double lam0 = rates(n, x, lam, h, err)
    lam0_out[0] = lam0
    k_out[0] = -1
    if err[0] or lam0 <= 0.0:
        return INFINITY
    cdef double r1 = uniform(st)
    cdef double r2 = uniform(st)
    cdef double dt = -log(r1) / lam0
    k_out[0] = select(lam, n.K, lam0, r2)
    return dt


cdef double coupled_step(const Net* n, const int64_t* z1, const int64_t* z2, uint64_t* st,
                         double* work, int* k_out, int* which_out, int* err) noexcept nogil:
    # work holds 5K doubles: l1, l2, h, and 3K channel weights share the tail.
    cdef int K = n.K
    cdef double* l1 = work
    cdef double* l2 = work + K
    cdef double* h = work + 2 * K
    cdef double* w = work + 3 * K
    cdef int k, c
    cdef double a, b, m, total = 0.0
    rates(n, z1, l1, h, err)
    if err[0]:
        return INFINITY
    rates(n, z2, l2, h, err)
    if err[0]:
        return INFINITY
    for k in range(K):
        a = l1[k]
        b = l2[k]
        m = a if a < b else b
        w[3 * k] = m
        w[3 * k + 1] = a - m
        w[3 * k + 2] = b - m
    for c in range(3 * K):
        total += w[c]
    k_out[0] = -1
    which_out[0] = 0
    if total <= 0.0:
        return INFINITY
    cdef double u1 = uniform(st)
    cdef double u2 = uniform(st)
    cdef double dt = -log(u1) / total
    c = select(w, 3 * K, total, u2)
    k_out[0] = c // 3
    which_out[0] = c % 3
    return dt


cdef void final_state(const Net* n, int64_t* x, double t, uint64_t* st, int* err) noexcept nogil:
    # Advances x in place to time t.
    cdef double* lam = <double*>malloc(2 * n.K * sizeof(double) + 8)
    cdef int64_t* y = <int64_t*>malloc(n.d * sizeof(int64_t) + 8)
    cdef double s = 0.0, dt, lam0
    cdef int k
    if lam == NULL or y == NULL:
        err[0] = ERR_MEMORY
    elif t > 0.0:
        while True:
            dt = ssa_step(n, x, st, lam, lam + n.K, &lam0, &k, err)
            if err[0] or dt >= t - s:
                break
            s += dt
            if shift(n, x, k, y, err):
                break
            copy_state(n.d, y, x)
    free(lam)
    free(y)


cdef void coupled_final(const Net* n, int64_t* z1, int64_t* z2, double duration, uint64_t* st,
                        int* err) noexcept nogil:
    cdef double* work = <double*>malloc(6 * n.K * sizeof(double) + 8)
    cdef int64_t* y = <int64_t*>malloc(n.d * sizeof(int64_t) + 8)
    cdef double s = 0.0, dt
    cdef int k, which
    if work == NULL or y == NULL:
        err[0] = ERR_MEMORY
    elif duration > 0.0:
        while not same_state(n.d, z1, z2):
            dt = coupled_step(n, z1, z2, st, work, &k, &which, err)
            if err[0] or dt >= duration - s:
                break
            s += dt
            if which != 2:
                if shift(n, z1, k, y, err):
                    break
                copy_state(n.d, y, z1)
            if which != 1:
                if shift(n, z2, k, y, err):
                    break
                copy_state(n.d, y, z2)
    free(work)
    free(y)


cdef double coupled_diff(const Net* n, const int64_t* z1, const int64_t* z2, double duration,
                         uint64_t key, int* err) noexcept nogil:
    cdef int64_t* a = <int64_t*>malloc(2 * n.d * sizeof(int64_t) + 8)
    cdef int64_t* b
    cdef uint64_t st = key
    cdef double out = 0.0
    if a == NULL:
        err[0] = ERR_MEMORY
        return 0.0
    b = a + n.d
    copy_state(n.d, z1, a)
    copy_state(n.d, z2, b)
    coupled_final(n, a, b, duration, &st, err)
    if not err[0]:
        out = feval(n, a) - feval(n, b)
    free(a)
    return out


cdef double first_order_interval(const Net* n, const int64_t* x, double lam0, const double* dq,
                                 double dt, double rem, double c, uint64_t jkey,
                                 int64_t* tmp, int* err) noexcept nogil:
    cdef uint64_t J = jkey
    cdef bint gam = False
    cdef double gamma = INFINITY, w, dur, D, S = 0.0
    cdef int k
    cdef int64_t cnt
    if lam0 > 0.0:
        gamma = exponential(&J, lam0)
        gam = gamma < rem
    w = dt - 1.0 / lam0 if gam else dt
    for k in range(n.K):
        if dq[k] != 0.0:
            S += dq[k] * fdelta(n, x, k, tmp, err) * w
            if err[0]:
                return 0.0
    if gam:
        dur = rem - gamma
        for k in range(n.K):
            if dq[k] == 0.0:
                continue
            cnt = poisson(&J, c * fabs(dq[k]) / lam0)
            if cnt > 0:
                if shift(n, x, k, tmp, err):
                    return 0.0
                D = coupled_diff(n, tmp, x, dur, child_key(jkey, k + 1), err)
                if err[0]:
                    return 0.0
                S += sign(dq[k]) * <double>cnt * D / c
    return S


cdef double first_order(const Net* n, const int64_t* x0, double t, double c, uint64_t key,
                        int* err) noexcept nogil:
    if t <= 0.0:
        return 0.0
    cdef uint64_t main = child_key(key, 0)
    cdef uint64_t aux = child_key(key, 1)
    cdef double* lam = <double*>malloc(3 * n.K * sizeof(double) + 8)
    cdef int64_t* x = <int64_t*>malloc(3 * n.d * sizeof(int64_t) + 8)
    cdef double* h
    cdef double* dq
    cdef int64_t* tmp
    cdef int64_t* y
    cdef double s = 0.0, S = 0.0, dt_next, dt, rem, lam0
    cdef int k0, k
    cdef uint64_t l = 0
    cdef bint last
    if lam == NULL or x == NULL:
        err[0] = ERR_MEMORY
        free(lam)
        free(x)
        return 0.0
    h = lam + n.K
    dq = lam + 2 * n.K
    tmp = x + n.d
    y = x + 2 * n.d
    copy_state(n.d, x0, x)
    while True:
        dt_next = ssa_step(n, x, &main, lam, h, &lam0, &k0, err)
        if err[0]:
            break
        rem = t - s
        last = dt_next >= rem
        dt = rem if last else dt_next
        for k in range(n.K):
            dq[k] = n.gi[k] * h[k]
        S += first_order_interval(n, x, lam0, dq, dt, rem, c, child_key(aux, l), tmp, err)
        if err[0] or last:
            break
        s += dt_next
        if shift(n, x, k0, y, err):
            break
        copy_state(n.d, y, x)
        l += 1
    free(lam)
    free(x)
    return S


cdef struct Chain:
    int64_t* x
    double sigma
    uint64_t event
    double total
    const double* g
    uint64_t aux


cdef void chain_close(const Net* n, Chain* ch, double now, double horizon, double c,
                      double* lam, double* h, double* dq, int64_t* tmp, int* err) noexcept nogil:
    cdef double lam0 = rates(n, ch.x, lam, h, err)
    cdef int k
    if err[0]:
        return
    for k in range(n.K):
        dq[k] = ch.g[k] * h[k]
    ch.total += first_order_interval(n, ch.x, lam0, dq, now - ch.sigma, horizon - ch.sigma, c,
                                     child_key(ch.aux, ch.event), tmp, err)


cdef void pair_estimates(const Net* n, const int64_t* z1_0, const int64_t* z2_0, double duration,
                         double c, uint64_t key, bint need_i, bint need_j,
                         double* Si, double* Sj, double* D, int* err) noexcept nogil:
    Si[0] = 0.0
    Sj[0] = 0.0
    if not (need_i or need_j):
        D[0] = coupled_diff(n, z1_0, z2_0, duration, child_key(key, 0), err)
        return
    cdef int d = n.d, K = n.K
    cdef uint64_t st = child_key(key, 0)
    # states: z1, z2, y, tmp, then up to 4 chain states
    cdef int64_t* ibuf = <int64_t*>malloc(8 * d * sizeof(int64_t) + 8)
    cdef double* dbuf = <double*>malloc(9 * K * sizeof(double) + 8)
    cdef Chain chains[4]
    cdef int nch = 0, q, slot, k, which
    cdef double s = 0.0, dt
    cdef uint64_t event = 0
    cdef int64_t* z1
    cdef int64_t* z2
    cdef int64_t* y
    cdef int64_t* tmp
    cdef double* lam
    cdef double* h
    cdef double* dq
    cdef double* work
    if ibuf == NULL or dbuf == NULL:
        err[0] = ERR_MEMORY
        free(ibuf)
        free(dbuf)
        return
    z1 = ibuf
    z2 = ibuf + d
    y = ibuf + 2 * d
    tmp = ibuf + 3 * d
    lam = dbuf
    h = dbuf + K
    dq = dbuf + 2 * K
    work = dbuf + 3 * K
    copy_state(d, z1_0, z1)
    copy_state(d, z2_0, z2)
    for slot in range(2):
        if (slot == 0 and need_i) or (slot == 1 and need_j):
            for q in range(2):
                chains[nch].x = ibuf + (4 + nch) * d
                copy_state(d, z1 if q == 0 else z2, chains[nch].x)
                chains[nch].sigma = 0.0
                chains[nch].event = 0
                chains[nch].total = 0.0
                chains[nch].g = n.gi if slot == 0 else n.gj
                chains[nch].aux = child_key(key, 1 + slot)
                nch += 1
    if duration > 0.0:
        while True:
            dt = coupled_step(n, z1, z2, &st, work, &k, &which, err)
            if err[0] or dt >= duration - s:
                break
            s += dt
            event += 1
            if which != 2:
                if shift(n, z1, k, y, err):
                    break
                copy_state(d, y, z1)
                for q in range(0, nch, 2):
                    chain_close(n, &chains[q], s, duration, c, lam, h, dq, tmp, err)
                    copy_state(d, z1, chains[q].x)
                    chains[q].sigma = s
                    chains[q].event = event
            if err[0]:
                break
            if which != 1:
                if shift(n, z2, k, y, err):
                    break
                copy_state(d, y, z2)
                for q in range(1, nch, 2):
                    chain_close(n, &chains[q], s, duration, c, lam, h, dq, tmp, err)
                    copy_state(d, z2, chains[q].x)
                    chains[q].sigma = s
                    chains[q].event = event
            if err[0]:
                break
        if not err[0]:
            for q in range(nch):
                chain_close(n, &chains[q], duration, duration, c, lam, h, dq, tmp, err)
    if not err[0]:
        q = 0
        for slot in range(2):
            if (slot == 0 and need_i) or (slot == 1 and need_j):
                if slot == 0:
                    Si[0] = chains[q].total - chains[q + 1].total
                else:
                    Sj[0] = chains[q].total - chains[q + 1].total
                q += 2
        D[0] = feval(n, z1) - feval(n, z2)
    free(ibuf)
    free(dbuf)


cdef double second_order(const Net* n, const int64_t* x0, double t, double c, uint64_t key,
                         int* err) noexcept nogil:
    if t <= 0.0:
        return 0.0
    cdef int d = n.d, K = n.K
    cdef uint64_t main = child_key(key, 0)
    cdef uint64_t aux = child_key(key, 1)
    cdef uint64_t jkey, J
    cdef double* lam = <double*>malloc(2 * K * sizeof(double) + 8)
    cdef int64_t* x = <int64_t*>malloc(3 * d * sizeof(int64_t) + 8)
    cdef double* h
    cdef int64_t* tmp
    cdef int64_t* y
    cdef double s = 0.0, S = 0.0, dt_next, dt, rem, lam0, gamma, w, dur
    cdef double di, dj, dij, Si, Sj, D
    cdef int64_t ni, nj, nij
    cdef int k0, k
    cdef uint64_t l = 0
    cdef bint last, gam
    if lam == NULL or x == NULL:
        err[0] = ERR_MEMORY
        free(lam)
        free(x)
        return 0.0
    h = lam + K
    tmp = x + d
    y = x + 2 * d
    copy_state(d, x0, x)
    while True:
        dt_next = ssa_step(n, x, &main, lam, h, &lam0, &k0, err)
        if err[0]:
            break
        rem = t - s
        last = dt_next >= rem
        dt = rem if last else dt_next
        jkey = child_key(aux, l)
        J = jkey
        gam = False
        gamma = INFINITY
        if lam0 > 0.0:
            gamma = exponential(&J, lam0)
            gam = gamma < rem
        w = dt - 1.0 / lam0 if gam else dt
        for k in range(K):
            dij = n.gij[k] * h[k]
            if dij != 0.0:
                S += dij * fdelta(n, x, k, tmp, err) * w
                if err[0]:
                    break
        if err[0]:
            break
        if gam:
            dur = rem - gamma
            for k in range(K):
                di = n.gi[k] * h[k]
                dj = n.gj[k] * h[k]
                dij = n.gij[k] * h[k]
                ni = poisson(&J, c * fabs(di) / lam0) if di != 0.0 else 0
                nj = poisson(&J, c * fabs(dj) / lam0) if dj != 0.0 else 0
                nij = poisson(&J, c * fabs(dij) / lam0) if dij != 0.0 else 0
                if ni == 0 and nj == 0 and nij == 0:
                    continue
                if shift(n, x, k, tmp, err):
                    break
                # The theta_i channel carries the theta_j sensitivity difference and vice versa.
                pair_estimates(n, tmp, x, dur, c, child_key(jkey, k + 1), nj > 0, ni > 0,
                               &Si, &Sj, &D, err)
                if err[0]:
                    break
                if ni > 0:
                    S += sign(di) * <double>ni * Sj / c
                if nj > 0:
                    S += sign(dj) * <double>nj * Si / c
                if nij > 0:
                    S += sign(dij) * <double>nij * D / c
            if err[0]:
                break
        if last:
            break
        s += dt_next
        if shift(n, x, k0, y, err):
            break
        copy_state(d, y, x)
        l += 1
    free(lam)
    free(x)
    return S


cdef void rtc_final(const Net* n, int64_t* x, double t, uint64_t key, int* err) noexcept nogil:
    cdef int K = n.K, k, mu
    cdef uint64_t* streams = <uint64_t*>malloc(K * sizeof(uint64_t) + 8)
    cdef double* buf = <double*>malloc(4 * K * sizeof(double) + 8)
    cdef int64_t* y = <int64_t*>malloc(n.d * sizeof(int64_t) + 8)
    cdef double* internal
    cdef double* nxt
    cdef double* lam
    cdef double* h
    cdef double s = 0.0, best, dk
    if streams == NULL or buf == NULL or y == NULL:
        err[0] = ERR_MEMORY
        free(streams)
        free(buf)
        free(y)
        return
    internal = buf
    nxt = buf + K
    lam = buf + 2 * K
    h = buf + 3 * K
    for k in range(K):
        streams[k] = child_key(key, k)
        internal[k] = 0.0
        nxt[k] = -log(uniform(&streams[k]))
    if t > 0.0:
        while True:
            rates(n, x, lam, h, err)
            if err[0]:
                break
            best = INFINITY
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
                break
            s += best
            for k in range(K):
                internal[k] += lam[k] * best
            internal[mu] = nxt[mu]
            nxt[mu] += -log(uniform(&streams[mu]))
            if shift(n, x, mu, y, err):
                break
            copy_state(n.d, y, x)
    free(streams)
    free(buf)
    free(y)


# ---------------------------------------------------------------- driver

cdef double run_one(int kind, Net* nets, const int64_t* x0, const int64_t* zeta, double t,
                    double c, double eps, uint64_t key, int64_t* scratch, int* err) noexcept nogil:
    cdef int d = nets[0].d, m
    cdef uint64_t st
    cdef double v[4]
    cdef double Si, Sj, D
    if kind == K_MEAN:
        copy_state(d, x0, scratch)
        st = key
        final_state(&nets[0], scratch, t, &st, err)
        return feval(&nets[0], scratch)
    if kind == K_SENS1:
        return first_order(&nets[0], x0, t, c, key, err)
    if kind == K_SENS2:
        return second_order(&nets[0], x0, t, c, key, err)
    if kind == K_FD2:
        for m in range(4):
            copy_state(d, x0, scratch)
            rtc_final(&nets[m], scratch, t, key, err)
            if err[0]:
                return 0.0
            v[m] = feval(&nets[m], scratch)
        return (v[0] - v[1] - v[2] + v[3]) / (eps * eps)
    if kind == K_DHAT:
        if shift_vec(d, x0, zeta, scratch, err):
            return 0.0
        return coupled_diff(&nets[0], scratch, x0, t, key, err)
    if kind == K_SHAT:
        if shift_vec(d, x0, zeta, scratch, err):
            return 0.0
        pair_estimates(&nets[0], scratch, x0, t, c, key, True, False, &Si, &Sj, &D, err)
        return Si
    return 0.0


def run_block(int kind, int64_t[:, ::1] stoich, int64_t[:, ::1] orders,
              double[::1] out_coeff, int64_t[:, ::1] out_pow, double[:, ::1] gmat,
              int64_t[::1] x0, int64_t[::1] zeta, double t, double c, double eps,
              uint64_t key, int64_t start, int64_t stop, bint direct, double[::1] out):
    """Fill ``out[m]`` with sample ``start + m``.

    ``gmat`` rows: MEAN/DHAT ``[g]``; SENS1/SHAT ``[g, dg_q]``; SENS2
    ``[g, dg_i, dg_j, d2g_ij]``; FD2 the four perturbed ``g`` vectors.
    With ``direct`` the single sample uses ``key`` itself rather than
    ``child(key, index)``. Returns ``(error_code, failing_index)``.
    """
    cdef Net nets[4]
    cdef int m, nnet = 4 if kind == K_FD2 else 1
    cdef int err = 0
    cdef int64_t idx, fail = -1
    cdef int64_t* scratch
    cdef uint64_t skey
    for m in range(nnet):
        nets[m].d = stoich.shape[1]
        nets[m].K = stoich.shape[0]
        nets[m].M = out_coeff.shape[0]
        nets[m].stoich = &stoich[0, 0] if stoich.shape[0] > 0 else NULL
        nets[m].orders = &orders[0, 0] if orders.shape[0] > 0 else NULL
        nets[m].out_coeff = &out_coeff[0] if out_coeff.shape[0] > 0 else NULL
        nets[m].out_pow = &out_pow[0, 0] if out_pow.shape[0] > 0 else NULL
        nets[m].g = &gmat[m, 0] if gmat.shape[1] > 0 else NULL
        nets[m].gi = nets[m].g
        nets[m].gj = nets[m].g
        nets[m].gij = nets[m].g
    if kind == K_SENS1 or kind == K_SHAT:
        nets[0].gi = &gmat[1, 0] if gmat.shape[1] > 0 else NULL
        nets[0].gj = nets[0].gi
    elif kind == K_SENS2:
        nets[0].gi = &gmat[1, 0] if gmat.shape[1] > 0 else NULL
        nets[0].gj = &gmat[2, 0] if gmat.shape[1] > 0 else NULL
        nets[0].gij = &gmat[3, 0] if gmat.shape[1] > 0 else NULL
    with nogil:
        scratch = <int64_t*>malloc(nets[0].d * sizeof(int64_t) + 8)
        if scratch == NULL:
            err = ERR_MEMORY
        else:
            for idx in range(start, stop):
                skey = key if direct else child_key(key, <uint64_t>idx)
                out[idx - start] = run_one(kind, nets, &x0[0], &zeta[0], t, c, eps, skey,
                                           scratch, &err)
                if err:
                    fail = idx
                    break
            free(scratch)
    return err, fail
