"""Synthetic count data from the exact polarization model.

Detector wiring (Alice: D1 transmitted, D3 reflected; Bob: D4 transmitted,
D2 reflected).  Behind the 22.5 degree detection plates the transmitted
ports see D and the reflected ports see A, so

    C12 = D_A A_B and C34 = A_A D_B   (orthogonal, follow cos^2(S_T W + o))
    C23 = A_A A_B and C14 = D_A D_B   (parallel,   follow sin^2(S_T W + o))

Every Poisson draw comes from its own xoshiro256** generator whose seed is
derived from (rng_seed, stream, index), so datasets do not depend on the
order in which points are evaluated.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .bell import canonical_settings
from .errors import DomainError
from .geometry import REFERENCE_GEOMETRY, SagnacGeometry
from .polarization import (
    A_PORT, D_PORT, AnalyzerSetting, coincidence_probability, evolved_pair,
    single_photon_port_probability,
)

PAIR_CHANNELS = ("C12", "C34", "C23", "C14")
SINGLES_CHANNELS = ("D1", "D2", "D3", "D4")

# channel -> (Alice analyzer, Bob analyzer, detector indices)
_PAIR_WIRING = {
    "C12": (D_PORT, A_PORT, (0, 1)),
    "C34": (A_PORT, D_PORT, (2, 3)),
    "C23": (A_PORT, A_PORT, (2, 1)),
    "C14": (D_PORT, D_PORT, (0, 3)),
}
_SINGLES_WIRING = {
    "D1": (D_PORT, 0),
    "D2": (A_PORT, 1),
    "D3": (A_PORT, 2),
    "D4": (D_PORT, 3),
}
# detector index behind each analyzer port
_ALICE_DETECTOR = {"transmitted": 0, "reflected": 2}
_BOB_DETECTOR = {"transmitted": 3, "reflected": 1}

CHSH_STREAM = 16

DEFAULT_OMEGA_GRID = tuple(np.linspace(0.0, 7.0, 40))


@dataclass
class SimulationConfig:
    """Source, detector and sweep parameters.

    ``pair_rate`` is the coincidence rate at unit channel probability (for
    singles it is the photon rate into the interferometer).  The default of
    100/s puts the peak of a symmetric-state fringe near 2000 counts per 40 s
    bin; the value is otherwise arbitrary.
    """

    geometry: SagnacGeometry = REFERENCE_GEOMETRY
    rho00: float = 0.5
    offset_o: float = 0.0
    pair_rate: float = 100.0
    background_rate: float = 0.0
    integration_time: float = 40.0
    detector_efficiencies: tuple[float, float, float, float] = (1.0, 1.0, 1.0, 1.0)
    rng_seed: int = 0
    omega_grid: tuple[float, ...] = DEFAULT_OMEGA_GRID
    omega_jitter: float = 0.0
    noiseless: bool = False

    def __post_init__(self):
        self.omega_grid = tuple(float(w) for w in self.omega_grid)
        self.detector_efficiencies = tuple(float(e) for e in self.detector_efficiencies)
        self.validate()

    def validate(self):
        if not self.integration_time > 0:
            raise DomainError(f"integration_time must be positive, got {self.integration_time}")
        if self.pair_rate < 0 or self.background_rate < 0:
            raise DomainError("rates must be non-negative")
        if len(self.detector_efficiencies) != 4:
            raise DomainError("need exactly 4 detector efficiencies")
        if any(not 0.0 < e <= 1.0 for e in self.detector_efficiencies):
            raise DomainError(f"efficiencies must lie in (0, 1], got {self.detector_efficiencies}")
        if not 0.0 <= self.rho00 <= 1.0:
            raise DomainError(f"rho00 must lie in [0, 1], got {self.rho00}")
        if self.omega_jitter < 0:
            raise DomainError("omega_jitter must be non-negative")
        if not 0 <= int(self.rng_seed) < 2**64:
            raise DomainError("rng_seed must be a 64-bit unsigned integer")


@dataclass
class SweepDataset:
    omega_mean: np.ndarray
    omega_min: np.ndarray
    omega_max: np.ndarray
    integration_time: np.ndarray
    counts: dict[str, np.ndarray] = field(default_factory=dict)

    def __post_init__(self):
        self.omega_mean = np.asarray(self.omega_mean, dtype=float)
        self.omega_min = np.asarray(self.omega_min, dtype=float)
        self.omega_max = np.asarray(self.omega_max, dtype=float)
        self.integration_time = np.broadcast_to(
            np.asarray(self.integration_time, dtype=float), self.omega_mean.shape).copy()
        n = self.omega_mean.shape[0]
        for arr in (self.omega_min, self.omega_max):
            if arr.shape != (n,):
                raise DomainError("omega columns must have equal length")
        bad = np.nonzero((self.omega_min > self.omega_mean) | (self.omega_mean > self.omega_max))[0]
        if bad.size:
            raise DomainError(f"row {int(bad[0])}: omega_min <= omega_mean <= omega_max violated")
        for label, c in self.counts.items():
            c = np.asarray(c)
            if c.shape != (n,):
                raise DomainError(f"channel {label} has {c.shape[0]} rows, expected {n}")
            if np.any(c < 0):
                raise DomainError(f"channel {label} has negative counts")
            self.counts[label] = c

    @property
    def mode(self):
        return "singles" if set(self.counts) == set(SINGLES_CHANNELS) else "pairs"

    @property
    def channels(self):
        order = SINGLES_CHANNELS if self.mode == "singles" else PAIR_CHANNELS
        return [c for c in order if c in self.counts]

    def __len__(self):
        return self.omega_mean.shape[0]

    def __eq__(self, other):
        if not isinstance(other, SweepDataset) or set(self.counts) != set(other.counts):
            return False
        cols = ("omega_mean", "omega_min", "omega_max", "integration_time")
        return (all(np.array_equal(getattr(self, c), getattr(other, c)) for c in cols)
                and all(np.array_equal(self.counts[k], other.counts[k]) for k in self.counts))


@dataclass
class ChshCountGrid:
    counts: np.ndarray
    alice_angles: np.ndarray
    bob_angles: np.ndarray
    integration_time: float
    target: str | None = None
    omega: float | None = None

    def __post_init__(self):
        self.counts = np.asarray(self.counts)
        self.alice_angles = np.asarray(self.alice_angles, dtype=float)
        self.bob_angles = np.asarray(self.bob_angles, dtype=float)
        if self.counts.shape != (4, 4):
            raise DomainError(f"CHSH grid needs all 16 cells, got shape {self.counts.shape}")
        if self.alice_angles.shape != (4,) or self.bob_angles.shape != (4,):
            raise DomainError("need 4 Alice and 4 Bob analyzer angles")
        if np.any(self.counts < 0):
            raise DomainError("CHSH counts must be non-negative")

    def scaled(self, factor):
        return ChshCountGrid(self.counts * factor, self.alice_angles, self.bob_angles,
                             self.integration_time, self.target, self.omega)

    def __eq__(self, other):
        return (isinstance(other, ChshCountGrid)
                and np.array_equal(self.counts, other.counts)
                # angles travel through degrees in files
                and np.allclose(self.alice_angles, other.alice_angles, rtol=0, atol=1e-12)
                and np.allclose(self.bob_angles, other.bob_angles, rtol=0, atol=1e-12)
                and self.integration_time == other.integration_time
                and self.target == other.target and self.omega == other.omega)


def sample_poisson(mean, rng):
    """One Poisson variate from a ``kernels.Xoshiro256`` generator.

    Inverse transform below a mean of 30, Hormann's PTRS rejection method
    above; mean 0 returns 0 without consuming randomness.
    """
    if not mean >= 0.0:
        raise DomainError(f"Poisson mean must be non-negative, got {mean}")
    return int(rng.poisson(float(mean)))


def _draw(means, config, stream):
    means = np.asarray(means, dtype=float)
    if config.noiseless:
        return means
    return kernels.poisson_array(means, int(config.rng_seed), stream)


def _omega_rows(config):
    grid = np.asarray(config.omega_grid, dtype=float)
    if grid.size == 0:
        raise DomainError("omega_grid is empty")
    lo = grid * (1.0 - config.omega_jitter)
    hi = grid * (1.0 + config.omega_jitter)
    return grid, np.minimum(lo, hi), np.maximum(lo, hi)


def pair_channel_probability(channel, rho00, phi_s, offset_o):
    alice, bob, _ = _PAIR_WIRING[channel]
    return coincidence_probability(evolved_pair(rho00, phi_s, offset_o), alice, bob)


def singles_port_probability(detector, phi_s, offset_o):
    """Per-photon detection probability, including the 50:50 split."""
    analyzer, _ = _SINGLES_WIRING[detector]
    return 0.5 * single_photon_port_probability(phi_s, offset_o, analyzer)


def expected_sweep_counts(config, mode="pairs"):
    """Mean counts per channel on the omega grid (no noise)."""
    omega, _, _ = _omega_rows(config)
    scale = config.geometry.scale_factor
    eff = config.detector_efficiencies
    t = config.integration_time
    means = {}
    if mode == "pairs":
        for ch in PAIR_CHANNELS:
            i, j = _PAIR_WIRING[ch][2]
            p = np.array([pair_channel_probability(ch, config.rho00, scale * w, config.offset_o)
                          for w in omega])
            means[ch] = t * (config.pair_rate * p * eff[i] * eff[j] + config.background_rate)
    elif mode == "singles":
        for det in SINGLES_CHANNELS:
            i = _SINGLES_WIRING[det][1]
            p = np.array([singles_port_probability(det, scale * w, config.offset_o) for w in omega])
            means[det] = t * (config.pair_rate * p * eff[i] + config.background_rate)
    else:
        raise DomainError(f"unknown sweep mode {mode!r}")
    return means


def simulate_sweep(config, mode="pairs"):
    """Counts versus angular velocity for the four pair or singles channels."""
    omega, lo, hi = _omega_rows(config)
    means = expected_sweep_counts(config, mode)
    counts = {label: _draw(m, config, stream) for stream, (label, m) in enumerate(means.items())}
    return SweepDataset(omega, lo, hi, config.integration_time, counts)


def expected_chsh_counts(config, target, omega, settings=None):
    settings = settings or canonical_settings(target)
    state = evolved_pair(config.rho00, config.geometry.scale_factor * omega, config.offset_o)
    eff = config.detector_efficiencies
    t = config.integration_time
    means = np.empty((4, 4))
    ports = ("transmitted", "reflected")
    for r in range(4):
        alice = AnalyzerSetting(settings.alice[r // 2], ports[r % 2])
        for c in range(4):
            bob = AnalyzerSetting(settings.bob[c // 2], ports[c % 2])
            p = coincidence_probability(state, alice, bob)
            e = eff[_ALICE_DETECTOR[alice.port]] * eff[_BOB_DETECTOR[bob.port]]
            means[r, c] = t * (config.pair_rate * p * e + config.background_rate)
    return means, settings


def simulate_chsh(config, target, omega, settings=None):
    """16-cell CHSH count grid at angular velocity ``omega``."""
    means, settings = expected_chsh_counts(config, target, omega, settings)
    counts = _draw(means.ravel(), config, CHSH_STREAM).reshape(4, 4)
    return ChshCountGrid(counts, settings.alice_angles(), settings.bob_angles(),
                         config.integration_time, target=settings.target, omega=float(omega))


def rates_for_visibility(peak_counts, visibility, integration_time, rho00=0.5, efficiency=1.0):
    """(pair_rate, background_rate) giving a pair fringe of given peak and contrast.

    The orthogonal channels follow (1 + v_s cos 2x) / 4 with state contrast
    v_s = 2 sqrt(rho00 rho11); a flat background lowers it to ``visibility``.
    """
    v_state = 2.0 * math.sqrt(rho00 * (1.0 - rho00))
    if not 0.0 < visibility <= v_state:
        raise DomainError(
            f"visibility {visibility} not reachable with rho00={rho00} (state contrast {v_state:.4g})")
    a = peak_counts / (v_state * (1.0 + 1.0 / visibility))
    pair_rate = 4.0 * a / (integration_time * efficiency)
    background = a * (v_state / visibility - 1.0) / integration_time
    return pair_rate, max(background, 0.0)
