"""Pure-Python reference implementation of the numerical kernels.

Every function here has a twin in ``_kernels.pyx``.  The random-number
routines must stay bit-identical between the two: both only use integer
arithmetic on 64-bit words plus ``log``/``exp``/``sqrt``/``floor`` from the
platform libm, evaluated in the same order.
"""

import math

import numpy as np

MASK64 = 0xFFFFFFFFFFFFFFFF
GOLDEN = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB
_INDEX_MULT = 0xD1B54A32D192ED03
_TWO_M53 = 1.0 / 9007199254740992.0

# Stirling-series coefficients for log-gamma (used by the PTRS acceptance test)
_LOGGAM_COEF = (
    8.333333333333333e-02, -2.777777777777778e-03,
    7.936507936507937e-04, -5.952380952380952e-04,
    8.417508417508418e-04, -1.917526917526918e-03,
    6.410256410256410e-03, -2.955065359477124e-02,
    1.796443723688307e-01, -1.39243221690590e+00,
)
_LOG_2PI = 1.8378770664093453

INVERSION_LIMIT = 30.0

KIND_SIN2 = 0
KIND_COS2 = 1
KIND_COSINE = 2


def fmix64(z):
    z = ((z ^ (z >> 30)) * _MIX1) & MASK64
    z = ((z ^ (z >> 27)) * _MIX2) & MASK64
    return z ^ (z >> 31)


def derive_seed(seed, stream, index):
    """Sub-seed for element ``index`` of ``stream`` under a master seed."""
    z = fmix64((seed + GOLDEN * (stream + 1)) & MASK64)
    return fmix64(z ^ (((index + 1) * _INDEX_MULT) & MASK64))


def _rotl(x, k):
    return ((x << k) | (x >> (64 - k))) & MASK64


class Xoshiro256:
    """xoshiro256** generator seeded through SplitMix64."""

    __slots__ = ("s0", "s1", "s2", "s3")

    def __init__(self, seed):
        x = seed & MASK64
        words = []
        for _ in range(4):
            x = (x + GOLDEN) & MASK64
            words.append(fmix64(x))
        self.s0, self.s1, self.s2, self.s3 = words

    def next_u64(self):
        s0, s1, s2, s3 = self.s0, self.s1, self.s2, self.s3
        result = (_rotl((s1 * 5) & MASK64, 7) * 9) & MASK64
        t = (s1 << 17) & MASK64
        s2 ^= s0
        s3 ^= s1
        s1 ^= s2
        s0 ^= s3
        s2 ^= t
        s3 = _rotl(s3, 45)
        self.s0, self.s1, self.s2, self.s3 = s0, s1, s2, s3
        return result

    def next_double(self):
        return (self.next_u64() >> 11) * _TWO_M53

    def poisson(self, mean):
        return poisson_draw(self, mean)


def loggam(x):
    if x == 1.0 or x == 2.0:
        return 0.0
    n = int(7 - x) if x < 7.0 else 0
    x0 = x + n
    x2 = (1.0 / x0) * (1.0 / x0)
    gl0 = _LOGGAM_COEF[9]
    for k in range(8, -1, -1):
        gl0 *= x2
        gl0 += _LOGGAM_COEF[k]
    gl = gl0 / x0 + 0.5 * _LOG_2PI + (x0 - 0.5) * math.log(x0) - x0
    if x < 7.0:
        for _ in range(n):
            gl -= math.log(x0 - 1.0)
            x0 -= 1.0
    return gl


def _poisson_inversion(rng, mean):
    u = rng.next_double()
    k = 0
    p = math.exp(-mean)
    cdf = p
    while u > cdf and p > 0.0:
        k += 1
        p *= mean / k
        cdf += p
    return k


def _poisson_ptrs(rng, lam):
    # Hormann (1993) transformed rejection with squeeze
    slam = math.sqrt(lam)
    loglam = math.log(lam)
    b = 0.931 + 2.53 * slam
    a = -0.059 + 0.02483 * b
    invalpha = 1.1239 + 1.1328 / (b - 3.4)
    vr = 0.9277 - 3.6224 / (b - 2.0)
    while True:
        u = rng.next_double() - 0.5
        v = rng.next_double()
        us = 0.5 - abs(u)
        if us == 0.0:
            continue
        k = math.floor((2.0 * a / us + b) * u + lam + 0.43)
        if us >= 0.07 and v <= vr:
            return k
        if k < 0 or (us < 0.013 and v > us):
            continue
        logv = math.log(v) if v > 0.0 else -math.inf
        if (logv + math.log(invalpha) - math.log(a / (us * us) + b)
                <= -lam + k * loglam - loggam(k + 1.0)):
            return k


def poisson_draw(rng, mean):
    if mean < 0.0 or mean != mean:
        raise ValueError(f"Poisson mean must be non-negative, got {mean}")
    if mean == 0.0:
        return 0
    if mean < INVERSION_LIMIT:
        return _poisson_inversion(rng, mean)
    return _poisson_ptrs(rng, mean)


def poisson_array(means, seed, stream):
    """One Poisson draw per element, each from its own derived generator."""
    means = np.ascontiguousarray(means, dtype=np.float64)
    out = np.empty(means.shape[0], dtype=np.int64)
    seed &= MASK64
    for i in range(means.shape[0]):
        rng = Xoshiro256(derive_seed(seed, stream, i))
        out[i] = poisson_draw(rng, float(means[i]))
    return out


def fringe_eval(kind, params, omega):
    """Model values and Jacobian (n x 4, columns A, S_T, o, D)."""
    amp, scale, offset, _ = params
    omega = np.asarray(omega, dtype=np.float64)
    jac = np.empty((omega.shape[0], 4))
    jac[:, 3] = 1.0
    if kind == KIND_COSINE:
        x = 2.0 * scale * omega + offset
        c = np.cos(x)
        s = np.sin(x)
        model = amp * c + params[3]
        jac[:, 0] = c
        jac[:, 1] = -2.0 * amp * s * omega
        jac[:, 2] = -amp * s
        return model, jac
    x = scale * omega + offset
    s2x = np.sin(2.0 * x)
    if kind == KIND_SIN2:
        base = np.sin(x) ** 2
        sign = 1.0
    else:
        base = np.cos(x) ** 2
        sign = -1.0
    model = amp * base + params[3]
    jac[:, 0] = base
    jac[:, 1] = sign * amp * s2x * omega
    jac[:, 2] = sign * amp * s2x
    return model, jac


def periodogram(omega, y, weights, scales):
    """Weighted least-squares sinusoid power at angular frequency 2*scale.

    For every trial scale, fits ``c0 + c1 cos(2 s w) + c2 sin(2 s w)`` and
    returns the chi-square reduction relative to a constant fit.
    """
    omega = np.asarray(omega, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    w = np.asarray(weights, dtype=np.float64)
    scales = np.asarray(scales, dtype=np.float64)

    sw = w.sum()
    ybar = (w * y).sum() / sw
    yc = y - ybar
    chi2_const = (w * yc * yc).sum()

    arg = 2.0 * np.outer(scales, omega)
    c = np.cos(arg)
    s = np.sin(arg)
    # normal equations of the centred problem in the basis (1, c, s)
    m = np.empty((scales.shape[0], 3, 3))
    m[:, 0, 0] = sw
    m[:, 0, 1] = m[:, 1, 0] = c @ w
    m[:, 0, 2] = m[:, 2, 0] = s @ w
    m[:, 1, 1] = (c * c) @ w
    m[:, 1, 2] = m[:, 2, 1] = (c * s) @ w
    m[:, 2, 2] = (s * s) @ w
    rhs = np.empty((scales.shape[0], 3))
    rhs[:, 0] = 0.0
    rhs[:, 1] = c @ (w * yc)
    rhs[:, 2] = s @ (w * yc)
    power = np.zeros(scales.shape[0])
    det = np.linalg.det(m)
    ok = np.abs(det) > 1e-300
    if ok.any():
        coef = np.linalg.solve(m[ok], rhs[ok][..., None])[..., 0]
        power[ok] = np.einsum("ij,ij->i", coef, rhs[ok])
    return np.minimum(power, chi2_const)
