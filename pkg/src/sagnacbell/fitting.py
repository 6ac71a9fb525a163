"""Weighted least-squares fits of interference fringes.

Three models share the parameter vector (A, S_T, o, D):

    sin2    A sin^2(S_T W + o) + D
    cos2    A cos^2(S_T W + o) + D
    cosine  A cos(2 S_T W + o) + D      (normalized visibility curve)

Weights are absolute Poisson variances (sigma = sqrt(count), at least 1),
so the parameter covariance is (J^T W J)^-1 without reduced-chi-square
rescaling.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import ConvergenceError, DomainError, UnidentifiableFrequencyError

KINDS = {"sin2": kernels.KIND_SIN2, "cos2": kernels.KIND_COS2, "cosine": kernels.KIND_COSINE}
PARAM_NAMES = ("A", "S_T", "o", "D")

MIN_POINTS = 8
SCAN_RANGE = (0.1, 5.0)
SCAN_POINTS = 2000
PHASE_POINTS = 720
MAX_ITER = 200
XTOL = 1e-10

# default model per channel, following the detector wiring of the simulator
CHANNEL_KIND = {
    "C12": "cos2", "C34": "cos2", "C23": "sin2", "C14": "sin2",
    "D1": "cos2", "D4": "cos2", "D2": "sin2", "D3": "sin2",
}


def _check_kind(kind):
    if kind not in KINDS:
        raise DomainError(f"unknown fringe model {kind!r}; expected one of {sorted(KINDS)}")
    return KINDS[kind]


def _wrap(x, half_period):
    return x - 2.0 * half_period * math.ceil((x - half_period) / (2.0 * half_period))


@dataclass(frozen=True)
class FringeModel:
    kind: str
    amplitude: float
    scale_factor: float
    offset: float
    background: float

    @classmethod
    def from_params(cls, kind, params):
        return cls(kind, *(float(p) for p in params))

    @property
    def params(self):
        return np.array([self.amplitude, self.scale_factor, self.offset, self.background])

    def __call__(self, omega):
        return kernels.fringe_eval(_check_kind(self.kind), self.params, np.atleast_1d(omega))[0]

    def canonical(self, covariance=None):
        """Equivalent parameters with A > 0, S_T >= 0 and o in the principal range.

        Returns the canonical model, and the transformed covariance when one
        is given.
        """
        a, s, o, d = self.params
        m = np.eye(4)
        if s < 0:
            s, o = -s, -o
            m = np.diag([1.0, -1.0, -1.0, 1.0]) @ m
        if a < 0:
            if self.kind == "cosine":
                o += math.pi
                flip = np.diag([-1.0, 1.0, 1.0, 1.0])
            else:
                # A sin^2 x + D == -A sin^2(x + pi/2) + (D + A)
                o += math.pi / 2
                d += a
                flip = np.array([[-1.0, 0, 0, 0], [0, 1, 0, 0], [0, 0, 1, 0], [1.0, 0, 0, 1]])
            a = -a
            m = flip @ m
        o = _wrap(o, math.pi if self.kind == "cosine" else math.pi / 2)
        model = FringeModel(self.kind, float(a), float(s), float(o), float(d))
        if covariance is None:
            return model
        return model, m @ covariance @ m.T


@dataclass
class FringeFitReport:
    model: FringeModel
    standard_errors: np.ndarray
    covariance: np.ndarray
    visibility: float
    visibility_sigma: float
    chi_square: float
    reduced_chi_square: float
    n_points: int
    iterations: int
    gradient_norm: float
    initial_gradient_norm: float

    def to_dict(self):
        m = self.model
        return {
            "kind": m.kind,
            "parameters": dict(zip(PARAM_NAMES, map(float, m.params))),
            "standard_errors": dict(zip(PARAM_NAMES, map(float, self.standard_errors))),
            "covariance": self.covariance.tolist(),
            "visibility": self.visibility,
            "visibility_sigma": self.visibility_sigma,
            "chi_square": self.chi_square,
            "reduced_chi_square": self.reduced_chi_square,
            "n_points": self.n_points,
            "iterations": self.iterations,
        }


def poisson_sigma(counts):
    return np.sqrt(np.maximum(np.asarray(counts, dtype=float), 1.0))


def _prepare(omega, y, sigma):
    omega = np.asarray(omega, dtype=float)
    y = np.asarray(y, dtype=float)
    if omega.shape != y.shape or omega.ndim != 1:
        raise DomainError("omega and data must be 1-D arrays of equal length")
    if omega.shape[0] < MIN_POINTS:
        raise DomainError(f"need at least {MIN_POINTS} points, got {omega.shape[0]}")
    sigma = poisson_sigma(y) if sigma is None else np.asarray(sigma, dtype=float)
    if sigma.shape != y.shape or np.any(~(sigma > 0)):
        raise DomainError("uncertainties must be positive and match the data")
    return omega, y, sigma


def initial_guess(omega, y, kind, sigma=None):
    """Starting parameters from a periodogram scan and a phase scan."""
    code = _check_kind(kind)
    omega, y, sigma = _prepare(omega, y, sigma)
    lo, hi = float(y.min()), float(y.max())
    if hi - lo <= 1e-12 * max(abs(hi), abs(lo), 1.0):
        raise UnidentifiableFrequencyError()
    w = 1.0 / sigma**2
    scales = np.linspace(*SCAN_RANGE, SCAN_POINTS)
    power = kernels.periodogram(omega, y, w, scales)
    if not np.max(power) > 0:
        raise UnidentifiableFrequencyError()
    scale0 = float(scales[int(np.argmax(power))])

    if kind == "cosine":
        amp0, bg0, half = 0.5 * (hi - lo), 0.5 * (hi + lo), math.pi
    else:
        amp0, bg0, half = hi - lo, lo, math.pi / 2
    phases = np.linspace(-half, half, PHASE_POINTS, endpoint=False)
    chi2 = [np.sum(w * (y - kernels.fringe_eval(code, (amp0, scale0, o, bg0), omega)[0]) ** 2)
            for o in phases]
    return np.array([amp0, scale0, float(phases[int(np.argmin(chi2))]), bg0])


def _levenberg_marquardt(code, omega, y, sigma, p0, max_iter, xtol):
    inv_sigma = 1.0 / sigma

    def evaluate(p):
        f, jac = kernels.fringe_eval(code, p, omega)
        return (y - f) * inv_sigma, jac * inv_sigma[:, None]

    p = np.asarray(p0, dtype=float).copy()
    r, jac = evaluate(p)
    chi2 = float(r @ r)
    g0 = float(np.linalg.norm(jac.T @ r))
    lam = 1e-3
    for it in range(1, max_iter + 1):
        normal = jac.T @ jac
        grad = jac.T @ r
        damp = np.diag(np.maximum(np.diag(normal), 1e-300))
        try:
            step = np.linalg.solve(normal + lam * damp, grad)
        except np.linalg.LinAlgError:
            lam *= 10.0
            continue
        # relative step, floored at each parameter's statistical resolution so
        # that a parameter sitting at zero can still converge
        resolution = np.sqrt(np.abs(np.diag(np.linalg.pinv(normal))))
        small = bool(np.all(np.abs(step) <= xtol * np.maximum(np.abs(p), resolution)))
        p_new = p + step
        r_new, jac_new = evaluate(p_new)
        chi2_new = float(r_new @ r_new)
        if chi2_new <= chi2:
            p, r, jac, chi2 = p_new, r_new, jac_new, chi2_new
            lam = max(lam * 0.1, 1e-12)
            if small:
                return p, r, jac, chi2, it, g0
        else:
            lam *= 10.0
            if small or lam > 1e16:
                return p, r, jac, chi2, it, g0
    raise ConvergenceError(
        f"no convergence after {max_iter} iterations", params=p,
        diagnostic=f"iteration budget exhausted; chi2={chi2:.6g}, damping={lam:.3g}")


def fit_fringe(omega, y, kind, sigma=None, p0=None, max_iter=MAX_ITER, xtol=XTOL):
    """Fit one fringe model to a count (or visibility) series.

    ``sigma`` defaults to Poisson errors of ``y``.  Raises
    :class:`UnidentifiableFrequencyError` for flat data and
    :class:`ConvergenceError` when the iteration budget runs out.
    """
    code = _check_kind(kind)
    omega, y, sigma = _prepare(omega, y, sigma)
    if p0 is None:
        p0 = initial_guess(omega, y, kind, sigma)
    p, r, jac, chi2, iterations, g0 = _levenberg_marquardt(code, omega, y, sigma, p0, max_iter, xtol)
    try:
        cov = np.linalg.inv(jac.T @ jac)
    except np.linalg.LinAlgError:
        raise UnidentifiableFrequencyError("singular normal matrix at the solution") from None
    cov = 0.5 * (cov + cov.T)
    model, cov = FringeModel.from_params(kind, p).canonical(cov)
    n = y.shape[0]
    report = FringeFitReport(
        model=model,
        standard_errors=np.sqrt(np.maximum(np.diag(cov), 0.0)),
        covariance=cov,
        visibility=math.nan,
        visibility_sigma=math.nan,
        chi_square=chi2,
        reduced_chi_square=chi2 / (n - 4) if n > 4 else math.nan,
        n_points=n,
        iterations=iterations,
        gradient_norm=float(np.linalg.norm(jac.T @ r)),
        initial_gradient_norm=g0,
    )
    report.visibility, report.visibility_sigma = visibility_from_fit(report)
    return report


def fit_channel(dataset, channel, kind=None):
    """Fit one channel of a :class:`~sagnacbell.simulator.SweepDataset`."""
    if channel not in dataset.counts:
        raise DomainError(f"dataset has no channel {channel!r}; available: {dataset.channels}")
    kind = kind or CHANNEL_KIND[channel]
    return fit_fringe(dataset.omega_mean, dataset.counts[channel], kind)


def visibility_from_params(amplitude, background, cov_ad=None):
    """V = A / (A + 2D) with first-order error from the (A, D) covariance."""
    denom = amplitude + 2.0 * background
    if denom <= 0:
        raise DomainError(f"A + 2D must be positive, got {denom}")
    v = amplitude / denom
    if cov_ad is None:
        return v, 0.0
    grad = np.array([2.0 * background, -2.0 * amplitude]) / denom**2
    return v, float(math.sqrt(max(grad @ np.asarray(cov_ad) @ grad, 0.0)))


def visibility_from_fit(report):
    """Fringe visibility of a fit; for the cosine model it is the amplitude."""
    m = report.model
    cov = report.covariance
    if m.kind == "cosine":
        return m.amplitude, float(math.sqrt(max(cov[0, 0], 0.0)))
    block = cov[np.ix_([0, 3], [0, 3])]
    return visibility_from_params(m.amplitude, m.background, block)


def visibility_series(c_dd, c_aa, c_da, c_ad):
    """Pointwise (C_DD + C_AA - C_DA - C_AD) / sum with Poisson errors.

    Returns ``(V, sigma_V, valid)``; points where all four counts vanish are
    NaN and flagged invalid.  Zero counts carry an uncertainty of one.
    """
    c = np.vstack([np.asarray(x, dtype=float) for x in (c_dd, c_aa, c_da, c_ad)])
    if np.any(c < 0):
        raise DomainError("counts must be non-negative")
    total = c.sum(axis=0)
    valid = total > 0
    safe = np.where(valid, total, 1.0)
    v = (c[0] + c[1] - c[2] - c[3]) / safe
    var = np.maximum(c, 1.0)
    sig2 = ((1 - v) ** 2 * (var[0] + var[1]) + (1 + v) ** 2 * (var[2] + var[3])) / safe**2
    v = np.where(valid, v, np.nan)
    sigma = np.where(valid, np.sqrt(sig2), np.nan)
    return v, sigma, valid


def dataset_visibility(dataset):
    """Visibility curve of a pair sweep.

    The orthogonal-polarization channels C12 and C34 enter with a plus sign,
    so the curve follows cos(2(S_T W + o)) and peaks in the phi- state.
    """
    return visibility_series(dataset.counts["C12"], dataset.counts["C34"],
                             dataset.counts["C23"], dataset.counts["C14"])
