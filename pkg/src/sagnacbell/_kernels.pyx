# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled numerical kernels.

Mirrors ``_kernels_py`` function by function.  Poisson draws are
bit-identical to the pure-Python path; keep the floating-point expressions
in the same order when editing either file.
"""

import numpy as np

from libc.math cimport cos, sin, exp, log, sqrt, floor, fabs, INFINITY
from libc.stdint cimport uint64_t, int64_t

cdef uint64_t GOLDEN = 0x9E3779B97F4A7C15ULL
cdef uint64_t MIX1 = 0xBF58476D1CE4E5B9ULL
cdef uint64_t MIX2 = 0x94D049BB133111EBULL
cdef uint64_t INDEX_MULT = 0xD1B54A32D192ED03ULL
cdef double TWO_M53 = 1.0 / 9007199254740992.0
cdef double LOG_2PI = 1.8378770664093453
cdef double INVERSION_LIMIT = 30.0

cdef double LOGGAM_COEF[10]
LOGGAM_COEF[:] = [
    8.333333333333333e-02, -2.777777777777778e-03,
    7.936507936507937e-04, -5.952380952380952e-04,
    8.417508417508418e-04, -1.917526917526918e-03,
    6.410256410256410e-03, -2.955065359477124e-02,
    1.796443723688307e-01, -1.39243221690590e+00,
]

KIND_SIN2 = 0
KIND_COS2 = 1
KIND_COSINE = 2


ctypedef struct rng_t:
    uint64_t s0
    uint64_t s1
    uint64_t s2
    uint64_t s3


cdef inline uint64_t _fmix64(uint64_t z) nogil:
    z = (z ^ (z >> 30)) * MIX1
    z = (z ^ (z >> 27)) * MIX2
    return z ^ (z >> 31)


cdef inline uint64_t _derive(uint64_t seed, uint64_t stream, uint64_t index) nogil:
    cdef uint64_t z = _fmix64(seed + GOLDEN * (stream + 1))
    return _fmix64(z ^ ((index + 1) * INDEX_MULT))


cdef inline uint64_t _rotl(uint64_t x, int k) nogil:
    return (x << k) | (x >> (64 - k))


cdef inline void _seed(rng_t *st, uint64_t seed) nogil:
    cdef uint64_t x = seed
    x += GOLDEN
    st.s0 = _fmix64(x)
    x += GOLDEN
    st.s1 = _fmix64(x)
    x += GOLDEN
    st.s2 = _fmix64(x)
    x += GOLDEN
    st.s3 = _fmix64(x)


cdef inline uint64_t _next(rng_t *st) nogil:
    cdef uint64_t result = _rotl(st.s1 * 5, 7) * 9
    cdef uint64_t t = st.s1 << 17
    st.s2 ^= st.s0
    st.s3 ^= st.s1
    st.s1 ^= st.s2
    st.s0 ^= st.s3
    st.s2 ^= t
    st.s3 = _rotl(st.s3, 45)
    return result


cdef inline double _next_double(rng_t *st) nogil:
    return <double>(_next(st) >> 11) * TWO_M53


cdef double _loggam(double x) nogil:
    cdef double x0, x2, gl, gl0
    cdef int64_t k, n
    if x == 1.0 or x == 2.0:
        return 0.0
    if x < 7.0:
        n = <int64_t>(7 - x)
    else:
        n = 0
    x0 = x + n
    x2 = (1.0 / x0) * (1.0 / x0)
    gl0 = LOGGAM_COEF[9]
    for k in range(8, -1, -1):
        gl0 *= x2
        gl0 += LOGGAM_COEF[k]
    gl = gl0 / x0 + 0.5 * LOG_2PI + (x0 - 0.5) * log(x0) - x0
    if x < 7.0:
        for k in range(n):
            gl -= log(x0 - 1.0)
            x0 -= 1.0
    return gl


cdef int64_t _poisson_inversion(rng_t *st, double mean) nogil:
    cdef double u = _next_double(st)
    cdef int64_t k = 0
    cdef double p = exp(-mean)
    cdef double cdf = p
    while u > cdf and p > 0.0:
        k += 1
        p *= mean / k
        cdf += p
    return k


cdef int64_t _poisson_ptrs(rng_t *st, double lam) nogil:
    cdef double slam = sqrt(lam)
    cdef double loglam = log(lam)
    cdef double b = 0.931 + 2.53 * slam
    cdef double a = -0.059 + 0.02483 * b
    cdef double invalpha = 1.1239 + 1.1328 / (b - 3.4)
    cdef double vr = 0.9277 - 3.6224 / (b - 2.0)
    cdef double u, v, us, logv
    cdef int64_t k
    while True:
        u = _next_double(st) - 0.5
        v = _next_double(st)
        us = 0.5 - fabs(u)
        if us == 0.0:
            continue
        k = <int64_t>floor((2.0 * a / us + b) * u + lam + 0.43)
        if us >= 0.07 and v <= vr:
            return k
        if k < 0 or (us < 0.013 and v > us):
            continue
        if v > 0.0:
            logv = log(v)
        else:
            logv = -INFINITY
        if (logv + log(invalpha) - log(a / (us * us) + b)
                <= -lam + k * loglam - _loggam(k + 1.0)):
            return k


cdef inline int64_t _poisson(rng_t *st, double mean) nogil:
    if mean == 0.0:
        return 0
    if mean < INVERSION_LIMIT:
        return _poisson_inversion(st, mean)
    return _poisson_ptrs(st, mean)


def fmix64(z):
    return _fmix64(<uint64_t>z)


def derive_seed(seed, stream, index):
    """Sub-seed for element ``index`` of ``stream`` under a master seed."""
    return _derive(<uint64_t>(seed & 0xFFFFFFFFFFFFFFFF), <uint64_t>stream, <uint64_t>index)


def loggam(double x):
    return _loggam(x)


cdef class Xoshiro256:
    """xoshiro256** generator seeded through SplitMix64."""

    cdef rng_t st

    def __init__(self, seed):
        _seed(&self.st, <uint64_t>(seed & 0xFFFFFFFFFFFFFFFF))

    def next_u64(self):
        return _next(&self.st)

    def next_double(self):
        return _next_double(&self.st)

    def poisson(self, double mean):
        if mean < 0.0 or mean != mean:
            raise ValueError(f"Poisson mean must be non-negative, got {mean}")
        return _poisson(&self.st, mean)


def poisson_draw(Xoshiro256 rng, double mean):
    return rng.poisson(mean)


def poisson_array(means, seed, stream):
    """One Poisson draw per element, each from its own derived generator."""
    cdef double[::1] m = np.ascontiguousarray(means, dtype=np.float64)
    cdef Py_ssize_t n = m.shape[0]
    cdef Py_ssize_t i
    out = np.empty(n, dtype=np.int64)
    cdef int64_t[::1] o = out
    cdef uint64_t s = <uint64_t>(seed & 0xFFFFFFFFFFFFFFFF)
    cdef uint64_t strm = <uint64_t>stream
    cdef rng_t st
    for i in range(n):
        if m[i] < 0.0 or m[i] != m[i]:
            raise ValueError(f"Poisson mean must be non-negative, got {m[i]}")
    with nogil:
        for i in range(n):
            _seed(&st, _derive(s, strm, <uint64_t>i))
            o[i] = _poisson(&st, m[i])
    return out


def fringe_eval(int kind, params, omega):
    """Model values and Jacobian (n x 4, columns A, S_T, o, D)."""
    cdef double amp = params[0]
    cdef double scale = params[1]
    cdef double offset = params[2]
    cdef double bg = params[3]
    cdef double[::1] w = np.ascontiguousarray(omega, dtype=np.float64)
    cdef Py_ssize_t n = w.shape[0]
    cdef Py_ssize_t i
    cdef double x, c, s, base, s2x, sign
    model = np.empty(n)
    jac = np.empty((n, 4))
    cdef double[::1] f = model
    cdef double[:, ::1] j = jac
    sign = 1.0 if kind == 0 else -1.0
    with nogil:
        for i in range(n):
            j[i, 3] = 1.0
            if kind == 2:
                x = 2.0 * scale * w[i] + offset
                c = cos(x)
                s = sin(x)
                f[i] = amp * c + bg
                j[i, 0] = c
                j[i, 1] = -2.0 * amp * s * w[i]
                j[i, 2] = -amp * s
            else:
                x = scale * w[i] + offset
                s2x = sin(2.0 * x)
                if kind == 0:
                    base = sin(x)
                else:
                    base = cos(x)
                base = base * base
                f[i] = amp * base + bg
                j[i, 0] = base
                j[i, 1] = sign * amp * s2x * w[i]
                j[i, 2] = sign * amp * s2x
    return model, jac


def periodogram(omega, y, weights, scales):
    """Weighted least-squares sinusoid power at angular frequency 2*scale."""
    cdef double[::1] w = np.ascontiguousarray(omega, dtype=np.float64)
    cdef double[::1] yy = np.ascontiguousarray(y, dtype=np.float64)
    cdef double[::1] wt = np.ascontiguousarray(weights, dtype=np.float64)
    cdef double[::1] sc = np.ascontiguousarray(scales, dtype=np.float64)
    cdef Py_ssize_t n = w.shape[0]
    cdef Py_ssize_t nf = sc.shape[0]
    cdef Py_ssize_t i, f
    cdef double sw = 0.0, swy = 0.0, ybar, chi2_const = 0.0, yc
    cdef double sc_, ss_, scc, scs, sss, rc, rs, arg, cv, sv
    cdef double a00, a01, a02, a11, a12, a22, det, i11, i12, i22, pw
    power = np.zeros(nf)
    cdef double[::1] p = power
    for i in range(n):
        sw += wt[i]
        swy += wt[i] * yy[i]
    ybar = swy / sw
    for i in range(n):
        yc = yy[i] - ybar
        chi2_const += wt[i] * yc * yc
    with nogil:
        for f in range(nf):
            sc_ = 0.0; ss_ = 0.0; scc = 0.0; scs = 0.0; sss = 0.0; rc = 0.0; rs = 0.0
            for i in range(n):
                arg = 2.0 * sc[f] * w[i]
                cv = cos(arg)
                sv = sin(arg)
                yc = yy[i] - ybar
                sc_ += wt[i] * cv
                ss_ += wt[i] * sv
                scc += wt[i] * cv * cv
                scs += wt[i] * cv * sv
                sss += wt[i] * sv * sv
                rc += wt[i] * cv * yc
                rs += wt[i] * sv * yc
            a00 = sw; a01 = sc_; a02 = ss_; a11 = scc; a12 = scs; a22 = sss
            det = (a00 * (a11 * a22 - a12 * a12)
                   - a01 * (a01 * a22 - a12 * a02)
                   + a02 * (a01 * a12 - a11 * a02))
            if fabs(det) <= 1e-300:
                continue
            # rhs is (0, rc, rs): only the lower-right cofactors are needed
            i11 = (a00 * a22 - a02 * a02) / det
            i12 = -(a00 * a12 - a01 * a02) / det
            i22 = (a00 * a11 - a01 * a01) / det
            pw = rc * (i11 * rc + i12 * rs) + rs * (i12 * rc + i22 * rs)
            if pw > chi2_const:
                pw = chi2_const
            p[f] = pw
    return power
