"""Noiseless polarization model of the photon pair and single photon.

Two-photon amplitudes are ordered (HH, HV, VH, VV); the first label is the
photon that ends up with Alice, the second the one with Bob.  Analyzer
angles are linear-polarization angles in radians measured from H.  The
detection half-wave plates at 22.5 degrees that precede the polarizing
beamsplitters in the fringe measurements are folded into the analyzer angle:
their transmitted port projects onto D (45 degrees).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal

import numpy as np

from .errors import ContractError, DomainError

NORM_TOL = 1e-12
CONTRACT_TOL = 1e-9

Port = Literal["transmitted", "reflected"]


def _checked_unit(amplitudes, size):
    amps = np.asarray(amplitudes, dtype=complex).reshape(-1)
    if amps.shape != (size,):
        raise DomainError(f"expected {size} amplitudes, got {amps.shape[0]}")
    norm = np.vdot(amps, amps).real
    if abs(norm - 1.0) > NORM_TOL:
        raise ContractError(f"state norm {norm!r} differs from 1")
    return amps


@dataclass(frozen=True)
class TwoPhotonState:
    amplitudes: np.ndarray
    photons: int = 2

    def __post_init__(self):
        object.__setattr__(self, "amplitudes", _checked_unit(self.amplitudes, 4))

    @classmethod
    def from_unnormalized(cls, amplitudes):
        amps = np.asarray(amplitudes, dtype=complex)
        norm = np.linalg.norm(amps)
        if norm == 0.0:
            raise DomainError("zero vector is not a state")
        return cls(amps / norm)

    @classmethod
    def product(cls, alice, bob):
        """Product state of two single-photon Jones vectors."""
        return cls.from_unnormalized(np.kron(np.asarray(alice, complex), np.asarray(bob, complex)))

    def overlap(self, other):
        """|<self|other>|, the global-phase-free comparison."""
        return abs(np.vdot(self.amplitudes, other.amplitudes))

    def density_matrix(self):
        return np.outer(self.amplitudes, self.amplitudes.conj())


@dataclass(frozen=True)
class SinglePhotonState:
    amplitudes: np.ndarray
    photons: int = 1

    def __post_init__(self):
        object.__setattr__(self, "amplitudes", _checked_unit(self.amplitudes, 2))

    def overlap(self, other):
        return abs(np.vdot(self.amplitudes, other.amplitudes))


@dataclass(frozen=True)
class AnalyzerSetting:
    angle: float
    port: Port = "transmitted"

    def __post_init__(self):
        if self.port not in ("transmitted", "reflected"):
            raise DomainError(f"unknown analyzer port {self.port!r}")

    @property
    def projection_angle(self):
        """Angle of the polarization actually detected at this port."""
        if self.port == "reflected":
            return self.angle + math.pi / 2
        return self.angle

    def jones(self):
        a = self.projection_angle
        return np.array([math.cos(a), math.sin(a)], dtype=complex)

    def flipped(self):
        return AnalyzerSetting(self.angle, "reflected" if self.port == "transmitted" else "transmitted")


H = np.array([1.0, 0.0], dtype=complex)
V = np.array([0.0, 1.0], dtype=complex)
D = np.array([1.0, 1.0], dtype=complex) / math.sqrt(2)
A = np.array([1.0, -1.0], dtype=complex) / math.sqrt(2)

# effective analyzers behind a 22.5 degree detection half-wave plate
D_PORT = AnalyzerSetting(math.pi / 4, "transmitted")
A_PORT = AnalyzerSetting(math.pi / 4, "reflected")


def make_phi_state(rho00, phase):
    """sqrt(rho00)|HH> - sqrt(1 - rho00) e^{i phase} |VV>."""
    if not 0.0 <= rho00 <= 1.0:
        raise DomainError(f"rho00 must lie in [0, 1], got {rho00}")
    amps = np.zeros(4, dtype=complex)
    amps[0] = math.sqrt(rho00)
    amps[3] = -math.sqrt(1.0 - rho00) * np.exp(1j * phase)
    return TwoPhotonState.from_unnormalized(amps)


def hwp_matrix(angle):
    """Jones matrix of a half-wave plate with its fast axis at ``angle``.

    Reflection about the axis; at 22.5 degrees it sends H to D and V to A.
    """
    c, s = math.cos(2 * angle), math.sin(2 * angle)
    return np.array([[c, s], [s, -c]], dtype=complex)


_SWAP = np.eye(4)[[0, 2, 1, 3]]


def symmetrize(state):
    """Project onto the exchange-symmetric subspace and renormalize.

    Both source photons share one spatial mode, so the pair is a bosonic
    Fock state: |HV> and |VH> denote the same state |1_H, 1_V>.
    """
    amps = state.amplitudes if isinstance(state, TwoPhotonState) else np.asarray(state, complex)
    return TwoPhotonState.from_unnormalized(0.5 * (amps + _SWAP @ amps))


def apply_hwp_source(pair, hwp_angle):
    """Rotate a same-mode photon pair with one half-wave plate."""
    sym = symmetrize(pair)
    u = hwp_matrix(hwp_angle)
    return TwoPhotonState.from_unnormalized(np.kron(u, u) @ sym.amplitudes)


_V_COUNT_TWO = np.array([0, 1, 1, 2])
_V_COUNT_ONE = np.array([0, 1])


def apply_sagnac(state, phi_s, offset_o, N):
    """Phase each V photon (reflected, counter-propagating) by phi_s + o.

    ``N`` is the photon number of the state; the VV component of a pair
    picks up e^{iN(phi_s + o)} with N = 2, a single V photon e^{i(phi_s + o)}.
    """
    if N not in (1, 2):
        raise DomainError(f"photon number N must be 1 or 2, got {N}")
    if N != state.photons:
        raise DomainError(f"N = {N} does not match a {state.photons}-photon state")
    counts = _V_COUNT_TWO if N == 2 else _V_COUNT_ONE
    phases = np.exp(1j * counts * (phi_s + offset_o))
    return type(state)(state.amplitudes * phases)


def post_select(state):
    """Renormalize onto the Alice-Bob coincidence subspace.

    Splitting the pair at the 50:50 beamsplitter leaves the polarization
    amplitudes unchanged; only the norm is restored.
    """
    return TwoPhotonState.from_unnormalized(state.amplitudes)


def coincidence_probability(state, alice, bob):
    """|<a, b|psi>|^2 for product linear-polarization projectors."""
    norm = np.vdot(state.amplitudes, state.amplitudes).real
    if abs(norm - 1.0) > CONTRACT_TOL:
        raise ContractError(f"state norm {norm!r} deviates from 1")
    bra = np.kron(alice.jones(), bob.jones())
    return float(abs(np.vdot(bra, state.amplitudes)) ** 2)


def bell_channel_probabilities(phi_s, offset_o):
    """(P_phi-, P_phi+) = (cos^2(phi_s + o), sin^2(phi_s + o))."""
    x = phi_s + offset_o
    p_minus = math.cos(x) ** 2
    return p_minus, 1.0 - p_minus


def single_photon_port_probability(phi_s, offset_o, analyzer):
    """Detection probability of |D> after the interferometer, single photon."""
    psi = apply_sagnac(SinglePhotonState(D), phi_s, offset_o, 1)
    return float(abs(np.vdot(analyzer.jones(), psi.amplitudes)) ** 2)


def evolved_pair(rho00, phi_s, offset_o):
    """Post-selected pair state behind the interferometer."""
    return post_select(apply_sagnac(make_phi_state(rho00, 0.0), phi_s, offset_o, 2))
