import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sagnacbell.errors import ContractError, DomainError
from sagnacbell.polarization import (
    A, A_PORT, D, D_PORT, H, V, AnalyzerSetting, SinglePhotonState, TwoPhotonState,
    apply_hwp_source, apply_sagnac, bell_channel_probabilities, coincidence_probability,
    evolved_pair, hwp_matrix, make_phi_state, post_select, single_photon_port_probability,
    symmetrize,
)

R2 = math.sqrt(2)
PHI_MINUS = TwoPhotonState(np.array([1, 0, 0, -1]) / R2)
PHI_PLUS = TwoPhotonState(np.array([1, 0, 0, 1]) / R2)
HV = TwoPhotonState.product(H, V)
angles = st.floats(-2 * math.pi, 2 * math.pi, allow_nan=False)


def random_state(rng):
    z = rng.normal(size=4) + 1j * rng.normal(size=4)
    return TwoPhotonState.from_unnormalized(z)


class TestStates:
    def test_norm_enforced(self):
        with pytest.raises(ContractError):
            TwoPhotonState(np.array([1, 1, 0, 0], dtype=complex))
        with pytest.raises(DomainError):
            TwoPhotonState(np.ones(3) / math.sqrt(3))

    def test_phi_minus(self):
        assert make_phi_state(0.5, 0.0).overlap(PHI_MINUS) == pytest.approx(1, abs=1e-15)

    def test_phi_plus_from_pi_phase(self):
        assert make_phi_state(0.5, math.pi).overlap(PHI_PLUS) == pytest.approx(1, abs=1e-15)

    def test_asymmetric_weights(self):
        s = make_phi_state(1 / 3, 0.0)
        assert np.allclose(s.amplitudes, [math.sqrt(1 / 3), 0, 0, -math.sqrt(2 / 3)], atol=1e-15)
        assert np.vdot(s.amplitudes, s.amplitudes).real == pytest.approx(1, abs=1e-12)

    def test_rho00_range(self):
        with pytest.raises(DomainError):
            make_phi_state(1.2, 0)

    def test_analyzer_reflected_port_is_orthogonal(self):
        a = AnalyzerSetting(0.3, "transmitted")
        assert abs(np.vdot(a.jones(), a.flipped().jones())) < 1e-15
        assert a.flipped().projection_angle == pytest.approx(0.3 + math.pi / 2)
        with pytest.raises(DomainError):
            AnalyzerSetting(0.0, "sideways")


class TestHalfWavePlate:
    def test_hwp_is_reflection(self):
        for t in (0.0, 0.3, math.pi / 8):
            u = hwp_matrix(t)
            assert np.allclose(u @ u, np.eye(2))
            assert np.linalg.det(u).real == pytest.approx(-1)

    def test_hwp_225_gives_phi_minus(self):
        out = apply_hwp_source(HV, math.radians(22.5))
        assert out.overlap(PHI_MINUS) == pytest.approx(1, abs=1e-12)
        # sign check beyond global phase: HH and VV carry opposite signs
        assert (out.amplitudes[0] / out.amplitudes[3]).real == pytest.approx(-1)

    def test_hwp_0_keeps_one_h_one_v(self):
        # the same-mode pair |1_H, 1_V> is the symmetric combination of HV and VH
        out = apply_hwp_source(HV, 0.0)
        assert out.overlap(symmetrize(HV)) == pytest.approx(1, abs=1e-12)
        assert abs(out.amplitudes[0]) < 1e-15 and abs(out.amplitudes[3]) < 1e-15

    def test_hwp_45_swaps_h_and_v(self):
        out = apply_hwp_source(HV, math.pi / 4)
        vh = TwoPhotonState.product(V, H)
        assert out.overlap(symmetrize(vh)) == pytest.approx(1, abs=1e-12)
        assert symmetrize(vh).overlap(symmetrize(HV)) == pytest.approx(1, abs=1e-12)


class TestSagnac:
    def test_identity_at_zero_phase(self):
        out = apply_sagnac(PHI_MINUS, 0.0, 0.0, 2)
        assert np.allclose(out.amplitudes, PHI_MINUS.amplitudes)

    def test_quarter_turn_makes_phi_plus(self):
        src = apply_hwp_source(HV, math.radians(22.5))
        out = apply_sagnac(src, math.pi / 2, 0.0, 2)
        assert out.overlap(PHI_PLUS) == pytest.approx(1, abs=1e-12)

    def test_single_photon_phase(self):
        out = apply_sagnac(SinglePhotonState(D), math.pi / 2, 0.0, 1)
        expected = SinglePhotonState(np.array([1, 1j]) / R2)
        assert out.overlap(expected) == pytest.approx(1, abs=1e-15)

    def test_photon_number_must_match(self):
        with pytest.raises(DomainError):
            apply_sagnac(PHI_MINUS, 0.1, 0.0, 1)
        with pytest.raises(DomainError):
            apply_sagnac(PHI_MINUS, 0.1, 0.0, 3)

    def test_post_select_keeps_state(self):
        assert post_select(PHI_MINUS).overlap(PHI_MINUS) == pytest.approx(1)


class TestProbabilities:
    def test_phi_minus_has_no_hv(self):
        p = coincidence_probability(PHI_MINUS, AnalyzerSetting(0.0), AnalyzerSetting(math.pi / 2))
        assert p == pytest.approx(0, abs=1e-15)

    def test_phi_minus_da(self):
        # <DA|phi-> = (1/2)(1 - (-1)) / sqrt2
        p = coincidence_probability(PHI_MINUS, AnalyzerSetting(math.pi / 4),
                                    AnalyzerSetting(3 * math.pi / 4))
        assert p == pytest.approx(0.5, abs=1e-15)

    def test_bell_channel_sum_at_pi_over_six(self):
        x = math.pi / 6
        state = evolved_pair(0.5, x, 0.0)
        total = coincidence_probability(state, D_PORT, A_PORT) + coincidence_probability(state, A_PORT, D_PORT)
        assert total == pytest.approx(0.75, abs=1e-12)
        assert bell_channel_probabilities(x, 0.0)[0] == pytest.approx(0.75, abs=1e-15)

    def test_bell_channel_examples(self):
        assert bell_channel_probabilities(0, 0) == pytest.approx((1, 0), abs=1e-15)
        assert bell_channel_probabilities(math.pi / 2, 0) == pytest.approx((0, 1), abs=1e-15)
        x = 1.015 * 1.764 - 0.2111
        p = bell_channel_probabilities(1.015 * 1.764, -0.2111)
        assert p[0] == pytest.approx(math.cos(x) ** 2, rel=1e-12)
        assert p[0] < 1e-4 and p[1] > 0.9999

    def test_rejects_unnormalized(self):
        class Fake:
            amplitudes = np.array([1, 0, 0, 1], dtype=complex)

        with pytest.raises(ContractError):
            coincidence_probability(Fake(), D_PORT, A_PORT)

    def test_single_photon_ports(self):
        assert single_photon_port_probability(0, 0, D_PORT) == pytest.approx(1, abs=1e-15)
        assert single_photon_port_probability(math.pi, 0, D_PORT) == pytest.approx(0, abs=1e-15)
        assert single_photon_port_probability(math.pi, 0, A_PORT) == pytest.approx(1, abs=1e-15)
        assert abs(np.vdot(A_PORT.jones(), A)) == pytest.approx(1, abs=1e-15)


class TestInvariants:
    def test_completeness_random_states(self, rng):
        for _ in range(100):
            s = random_state(rng)
            a, b = AnalyzerSetting(rng.uniform(0, math.pi)), AnalyzerSetting(rng.uniform(0, math.pi))
            total = sum(coincidence_probability(s, x, y) for x in (a, a.flipped()) for y in (b, b.flipped()))
            assert total == pytest.approx(1, abs=1e-12)

    def test_norm_preserved_by_operators(self, rng):
        for _ in range(50):
            s = random_state(rng)
            for out in (apply_sagnac(s, *rng.uniform(-5, 5, 2), 2), apply_hwp_source(s, rng.uniform(0, 3))):
                assert np.vdot(out.amplitudes, out.amplitudes).real == pytest.approx(1, abs=1e-12)

    @given(angles, angles)
    def test_channels_sum_to_one(self, phi, o):
        pm, pp = bell_channel_probabilities(phi, o)
        assert pm + pp == pytest.approx(1, abs=1e-15)

    @given(angles)
    def test_photon_number_doubling(self, phi):
        pm = bell_channel_probabilities(phi, 0.0)[0]
        assert pm == pytest.approx(single_photon_port_probability(2 * phi, 0.0, D_PORT), abs=1e-12)

    def test_brute_force_projector_sums(self, rng):
        for _ in range(100):
            phi, o = rng.uniform(-4, 4, 2)
            state = evolved_pair(0.5, phi, o)
            ortho = coincidence_probability(state, D_PORT, A_PORT) + coincidence_probability(state, A_PORT, D_PORT)
            same = coincidence_probability(state, D_PORT, D_PORT) + coincidence_probability(state, A_PORT, A_PORT)
            pm, pp = bell_channel_probabilities(phi, o)
            assert ortho == pytest.approx(pm, abs=1e-12)
            assert same == pytest.approx(pp, abs=1e-12)

    @settings(max_examples=50)
    @given(st.floats(0, 1), angles)
    def test_phi_family_norm(self, rho00, phase):
        s = make_phi_state(rho00, phase)
        assert np.sum(np.abs(s.amplitudes) ** 2) == pytest.approx(1, abs=1e-12)
