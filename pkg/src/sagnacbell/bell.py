"""Correlation functions and the CHSH parameter from a 16-cell count grid.

Grid layout: rows are Alice's settings (alpha, alpha_bar, alpha', alpha'_bar),
columns Bob's (beta, beta_bar, beta', beta'_bar), where the barred setting is
the reflected port of the same analyzer.  Each correlation function uses its
own 2x2 block, so the four correlations share no counts and their errors
add in quadrature exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Literal

import numpy as np

from .errors import DomainError, UndefinedCorrelationError

Target = Literal["phi_minus", "phi_plus"]
TARGETS = ("phi_minus", "phi_plus")


@dataclass(frozen=True)
class ChshSettings:
    alice: tuple[float, float]
    bob: tuple[float, float]
    target: Target = "phi_minus"

    def alice_angles(self):
        """(alpha, alpha_bar, alpha', alpha'_bar) in radians."""
        a, a2 = self.alice
        return np.array([a, a + math.pi / 2, a2, a2 + math.pi / 2])

    def bob_angles(self):
        b, b2 = self.bob
        return np.array([b, b + math.pi / 2, b2, b2 + math.pi / 2])


def canonical_settings(target):
    """Analyzer angles giving maximal violation for the target Bell state."""
    if target == "phi_minus":
        bob = (math.radians(22.5), math.radians(67.5))
    elif target == "phi_plus":
        bob = (math.radians(-22.5), math.radians(-67.5))
    else:
        raise DomainError(f"unknown target {target!r}; expected one of {TARGETS}")
    return ChshSettings(alice=(0.0, math.radians(-45.0)), bob=bob, target=target)


def correlation(counts):
    """E = (C1 + C2 - C3 - C4) / sum, with Poisson error propagation.

    ``counts`` is (C(a,b), C(a_bar,b_bar), C(a,b_bar), C(a_bar,b)).  Zero
    counts are given an uncertainty of one count.
    """
    c = np.asarray(counts, dtype=float)
    if c.shape != (4,):
        raise DomainError(f"correlation needs 4 counts, got shape {c.shape}")
    if np.any(c < 0):
        raise DomainError("counts must be non-negative")
    total = c.sum()
    if total <= 0:
        raise UndefinedCorrelationError("correlation undefined: all four counts are zero")
    e = (c[0] + c[1] - c[2] - c[3]) / total
    var_c = np.maximum(c, 1.0)
    grad = np.array([1 - e, 1 - e, -(1 + e), -(1 + e)]) / total
    return float(e), float(math.sqrt(np.sum(grad**2 * var_c)))


# (alice index, bob index) of E(a,b), E(a,b'), E(a',b), E(a',b')
PAIRS = ((0, 0), (0, 1), (1, 0), (1, 1))
PAIR_LABELS = ("alpha,beta", "alpha,beta'", "alpha',beta", "alpha',beta'")


def correlation_cells(grid_counts, i, j):
    c = np.asarray(grid_counts, dtype=float)
    r, k = 2 * i, 2 * j
    return np.array([c[r, k], c[r + 1, k + 1], c[r, k + 1], c[r + 1, k]])


@dataclass
class ChshReport:
    correlations: list[tuple[float, float]]
    S: float
    sigma_S: float
    standard_deviations_above_2: float
    target: str = "phi_minus"
    labels: tuple[str, ...] = field(default=PAIR_LABELS)

    def to_dict(self):
        return {
            "target": self.target,
            "correlations": [
                {"pair": lab, "E": e, "sigma_E": s}
                for lab, (e, s) in zip(self.labels, self.correlations)
            ],
            "S": self.S,
            "sigma_S": self.sigma_S,
            "standard_deviations_above_2": self.standard_deviations_above_2,
        }


def sigmas_above_classical(S, sigma_S):
    return (S - 2.0) / sigma_S


def chsh(grid, settings=None):
    """S = |E(a,b) - E(a,b')| + |E(a',b) + E(a',b')|.

    If ``settings`` is given, the grid's analyzer angles must match it.
    """
    counts = np.asarray(grid.counts, dtype=float)
    if counts.shape != (4, 4):
        raise DomainError(f"CHSH grid must be 4x4, got {counts.shape}")
    target = getattr(grid, "target", None) or "phi_minus"
    if settings is not None:
        target = settings.target
        if not (np.allclose(grid.alice_angles, settings.alice_angles(), atol=1e-9)
                and np.allclose(grid.bob_angles, settings.bob_angles(), atol=1e-9)):
            raise DomainError("grid analyzer angles do not match the requested settings")
    corr = []
    for (i, j), label in zip(PAIRS, PAIR_LABELS):
        try:
            corr.append(correlation(correlation_cells(counts, i, j)))
        except UndefinedCorrelationError as exc:
            raise UndefinedCorrelationError(f"setting pair ({label}): {exc}") from None
    (e_ab, s_ab), (e_abp, s_abp), (e_apb, s_apb), (e_apbp, s_apbp) = corr
    S = abs(e_ab - e_abp) + abs(e_apb + e_apbp)
    sigma_S = math.sqrt(s_ab**2 + s_abp**2 + s_apb**2 + s_apbp**2)
    return ChshReport(
        correlations=corr,
        S=S,
        sigma_S=sigma_S,
        standard_deviations_above_2=sigmas_above_classical(S, sigma_S),
        target=target,
    )
