"""Bounded density matrices from CHSH count grids.

Basis order 0..3 = HH, HV, VH, VV.  The diagonal comes from a weighted
linear inversion of all 16 cells; every off-diagonal element is bounded by
Cauchy-Schwarz; the real part of rho_0011 is pinned by the measured CHSH
value.  The upper-bound matrix puts every off-diagonal element at its
Cauchy-Schwarz maximum and is in general not positive semi-definite, so the
upper purity is a bound, not the purity of some state.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .bell import chsh
from .errors import DomainError, InconsistentBoundsError

ASSUMPTIONS = (
    "phi-family: single-photon coherences (rho_0001-type) vanish; "
    "rho_0110 set to zero in the CHSH inversion, bounded by Cauchy-Schwarz in the upper matrix"
)
_ZZ = np.array([1.0, -1.0, -1.0, 1.0])


@dataclass
class DiagonalEstimate:
    values: np.ndarray
    sigmas: np.ndarray
    covariance: np.ndarray

    def pairs(self):
        return list(zip(self.values.tolist(), self.sigmas.tolist()))


def _design(alice_angles, bob_angles):
    rows = []
    for a in alice_angles:
        ca, sa = math.cos(a) ** 2, math.sin(a) ** 2
        for b in bob_angles:
            cb, sb = math.cos(b) ** 2, math.sin(b) ** 2
            rows.append([ca * cb, ca * sb, sa * cb, sa * sb,
                         0.5 * math.sin(2 * a) * math.sin(2 * b)])
    return np.array(rows)


def estimate_diagonals(grid):
    """Populations of HH, HV, VH, VV from a CHSH grid.

    Weighted least squares (weights 1/count, at least 1) of the cell counts
    against the projector overlaps, with a free coherence column
    Re(rho_0011 + rho_0110) that the canonical angles cannot separate.
    Negative populations are clamped and the trace renormalized.
    """
    counts = np.asarray(grid.counts, dtype=float).ravel()
    x = _design(grid.alice_angles, grid.bob_angles)
    w = 1.0 / np.maximum(counts, 1.0)
    if np.linalg.matrix_rank(x[:, :4] * np.sqrt(w)[:, None], tol=1e-10) < 4:
        raise DomainError("settings do not span diagonal")
    if np.linalg.matrix_rank(x * np.sqrt(w)[:, None], tol=1e-10) < 5:
        x = x[:, :4]
    normal = x.T @ (w[:, None] * x)
    cov_n = np.linalg.inv(normal)
    n = cov_n @ (x.T @ (w * counts))
    n, cov_n = n[:4], cov_n[:4, :4]
    trace = n.sum()
    if not trace > 0:
        raise DomainError("grid carries no coincidences")
    jac = (np.eye(4) * trace - n[:, None]) / trace**2
    cov = jac @ cov_n @ jac.T
    values = np.clip(n / trace, 0.0, None)
    values /= values.sum()
    return DiagonalEstimate(values, np.sqrt(np.maximum(np.diag(cov), 0.0)), cov)


def _diag_array(diagonal):
    d = np.asarray(getattr(diagonal, "values", diagonal), dtype=float)
    if d.shape != (4,):
        raise DomainError(f"need 4 diagonal elements, got shape {d.shape}")
    if np.any(d < 0):
        raise DomainError(f"diagonal elements must be non-negative, got {d.tolist()}")
    return d


def cauchy_schwarz_bounds(diagonal):
    """|rho_ij| <= sqrt(rho_ii rho_jj) for i != j (zeros on the diagonal)."""
    d = _diag_array(diagonal)
    bounds = np.sqrt(np.outer(d, d))
    np.fill_diagonal(bounds, 0.0)
    return bounds


@dataclass
class PinnedCoherence:
    value: float
    sigma: float
    bound: float
    clipped: bool = False

    def __float__(self):
        return self.value


def antidiagonal_from_chsh(diagonal, S_exp, target, sigma_S=0.0, diagonal_cov=None, clip_sigmas=0.0):
    """Re rho_0011 from S = sqrt(2) (<ZZ> -/+ <XX>), minus for phi-, plus for phi+.

    With inner coherences set to zero, <XX> = 2 Re rho_0011.  A result
    beyond the Cauchy-Schwarz bound raises :class:`InconsistentBoundsError`,
    unless the excess is within ``clip_sigmas`` standard errors, in which
    case the value is clipped to the bound and flagged.
    """
    d = _diag_array(diagonal)
    zz = float(_ZZ @ d)
    if target == "phi_minus":
        value = 0.5 * (zz - S_exp / math.sqrt(2))
    elif target == "phi_plus":
        value = 0.5 * (S_exp / math.sqrt(2) - zz)
    else:
        raise DomainError(f"unknown target {target!r}")
    var = (sigma_S / (2 * math.sqrt(2))) ** 2
    if diagonal_cov is not None:
        var += 0.25 * float(_ZZ @ np.asarray(diagonal_cov) @ _ZZ)
    sigma = math.sqrt(var)
    bound = math.sqrt(d[0] * d[3])
    excess = abs(value) - bound
    if excess > 1e-9:
        if clip_sigmas > 0 and excess <= clip_sigmas * sigma:
            return PinnedCoherence(math.copysign(bound, value), sigma, bound, clipped=True)
        raise InconsistentBoundsError(value, bound)
    return PinnedCoherence(value, sigma, bound)


@dataclass
class BoundedDensityMatrix:
    diagonal: np.ndarray
    diagonal_sigma: np.ndarray
    antidiagonal: PinnedCoherence
    target: str = "phi_minus"

    def __post_init__(self):
        self.diagonal = _diag_array(self.diagonal)
        self.diagonal_sigma = np.asarray(self.diagonal_sigma, dtype=float)
        if abs(self.diagonal.sum() - 1.0) > 1e-9:
            raise DomainError(f"diagonal must have unit trace, got {self.diagonal.sum()}")
        if abs(self.antidiagonal.value) > math.sqrt(self.diagonal[0] * self.diagonal[3]) + 1e-9:
            raise InconsistentBoundsError(self.antidiagonal.value,
                                          math.sqrt(self.diagonal[0] * self.diagonal[3]))

    @property
    def antidiagonal_real(self):
        return self.antidiagonal.value

    @property
    def antidiagonal_bounds(self):
        """(lower, upper) magnitude of rho_0011: pinned real part, Cauchy-Schwarz."""
        return abs(self.antidiagonal.value), math.sqrt(self.diagonal[0] * self.diagonal[3])

    @property
    def offdiag_upper(self):
        return cauchy_schwarz_bounds(self.diagonal)

    def lower_matrix(self):
        """Element magnitudes: diagonal plus the pinned anti-diagonal only."""
        m = np.diag(self.diagonal)
        m[0, 3] = m[3, 0] = abs(self.antidiagonal.value)
        return m

    def upper_matrix(self):
        """Element magnitudes with every coherence at its Cauchy-Schwarz maximum.

        The imaginary part of rho_0011 is allowed up to
        sqrt(rho00 rho11 - Re^2), which brings its modulus to the bound.
        """
        m = self.offdiag_upper + np.diag(self.diagonal)
        re = self.antidiagonal.value
        im = math.sqrt(max(0.0, self.diagonal[0] * self.diagonal[3] - re * re))
        m[0, 3] = m[3, 0] = math.hypot(re, im)
        return m

    def purity_range(self):
        return purity_range(self)

    def to_dict(self):
        lo, hi = self.purity_range()
        return {
            "target": self.target,
            "basis": ["HH", "HV", "VH", "VV"],
            "diagonal": self.diagonal.tolist(),
            "diagonal_sigma": self.diagonal_sigma.tolist(),
            "antidiagonal_real": self.antidiagonal.value,
            "antidiagonal_sigma": self.antidiagonal.sigma,
            "antidiagonal_clipped": self.antidiagonal.clipped,
            "antidiagonal_bounds": list(self.antidiagonal_bounds),
            "upper_bound_matrix": self.upper_matrix().tolist(),
            "lower_bound_matrix": self.lower_matrix().tolist(),
            "purity_range": [lo, hi],
            "assumptions": ASSUMPTIONS,
        }


def _purity(magnitudes):
    return float(np.sum(np.asarray(magnitudes) ** 2))


def purity_range(matrix):
    """Tr(rho^2) evaluated on the lower- and upper-bound matrices, upper clipped at 1."""
    lo = _purity(matrix.lower_matrix())
    hi = min(_purity(matrix.upper_matrix()), 1.0)
    return lo, hi


def partial_tomography(grid, target=None, clip_sigmas=3.0):
    """Full chain: diagonals, CHSH value, pinned coherence, bounded matrix."""
    target = target or getattr(grid, "target", None) or "phi_minus"
    diag = estimate_diagonals(grid)
    report = chsh(grid)
    pinned = antidiagonal_from_chsh(diag, report.S, target, sigma_S=report.sigma_S,
                                    diagonal_cov=diag.covariance, clip_sigmas=clip_sigmas)
    return BoundedDensityMatrix(diag.values, diag.sigmas, pinned, target)
