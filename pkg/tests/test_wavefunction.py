"""Grid-based wavefunction oracle: packets, interaction maps, Fourier.

Covers:
- Axis/axis_for geometry and reciprocal-axis arithmetic
- Wavefunction1D/JointWavefunction construction invariants
- Gaussian packets: position and momentum moments, carrier wavenumber,
  grid-room guard
- apply_interaction: unitarity, output marginal variances, exact
  analytic momentum-space structure of the post-interaction state
- transform_joint: inverse map round trip on the original axes
- momentum/position representations: Parseval and exact inversion
- momentum marginals: analytic moments, displaced carrier, and the
  reflected-density signature of a flipped kernel sign
- explicit-output-axes truncation guard
- binary joint-state serialization (bit-exact round trip, corrupt input)
"""

import math

import numpy as np
import pytest

from linmeas import (
    Axis,
    GridTooNarrow,
    JointWavefunction,
    Wavefunction1D,
    apply_interaction,
    axis_for,
    gaussian_packet,
    hbar,
    inverse_coefficients,
    load_joint,
    marginals,
    momentum_marginals,
    momentum_representation,
    momentum_wavefunction,
    moments,
    new_params,
    position_representation,
    product_joint,
    reciprocal_axis,
    save_joint,
    transform_joint,
)

_IDEAL = new_params(1.0, 1.0, 0.0, 1.0)


def _packets(points=256, mean_k=0.0):
    psi = gaussian_packet(0.0, 1.0, 0.0, axis_for(0.0, 1.0, points=points))
    Phi = gaussian_packet(0.0, 0.8, mean_k,
                          axis_for(0.0, 0.8, points=points))
    return psi, Phi


def _abs_momentum_gaussian(s, sigma_x, center=0.0):
    """|momentum amplitude| of a Gaussian packet of position spread
    sigma_x whose momentum mean is ``center``."""
    sigma_p = hbar() / (2.0 * sigma_x)
    return (2.0 * math.pi * sigma_p ** 2) ** (-0.25) \
        * np.exp(-((s - center) ** 2) / (4.0 * sigma_p ** 2))


# === axes ===

class TestAxes:
    def test_axis_for_centers_the_mean(self):
        axis = axis_for(1.5, 0.5, points=128, span_sigmas=10.0)
        lo, hi = axis.span()
        assert lo == pytest.approx(1.5 - 5.0)
        assert hi == pytest.approx(1.5 + 5.0)
        assert axis.count == 128

    def test_axis_for_widen_only_stretches(self):
        narrow = axis_for(0.0, 1.0, points=64, widen=0.25)
        plain = axis_for(0.0, 1.0, points=64)
        assert narrow == plain                       # widen < 1 is clamped
        wide = axis_for(0.0, 1.0, points=64, widen=2.0)
        assert wide.span()[1] == pytest.approx(2.0 * plain.span()[1])

    def test_coordinates_match_origin_and_step(self):
        axis = Axis(-1.0, 0.25, 16)
        x = axis.coordinates()
        assert x[0] == -1.0
        assert x[-1] == pytest.approx(-1.0 + 0.25 * 15)

    def test_reciprocal_axis_closes_the_fourier_relation(self):
        axis = Axis(-10.0, 0.125, 160)
        rec = reciprocal_axis(axis)
        assert rec.count == axis.count
        assert rec.step * axis.step * axis.count \
            == pytest.approx(2.0 * math.pi * hbar(), rel=1e-15)
        assert rec.origin == -(axis.count // 2) * rec.step


# === state containers ===

class TestContainers:
    def test_unnormalized_wavefunction_rejected(self):
        with pytest.raises(ValueError):
            Wavefunction1D(0.0, 1.0, np.ones(32, dtype=complex))

    def test_density_has_unit_mass(self):
        psi, _ = _packets()
        assert psi.density().mass() == pytest.approx(1.0, abs=1e-12)

    def test_joint_shape_is_validated(self):
        with pytest.raises(ValueError):
            JointWavefunction(Axis(0.0, 1.0, 4), Axis(0.0, 1.0, 8),
                              np.zeros((8, 4), dtype=complex))

    def test_product_joint_norm(self):
        psi, Phi = _packets()
        assert product_joint(psi, Phi).norm() == pytest.approx(1.0, abs=1e-12)


# === Gaussian packets ===

class TestGaussianPacket:
    def test_position_moments(self):
        psi = gaussian_packet(0.3, 1.0, 0.7, axis_for(0.3, 1.0, points=1024))
        m = moments(psi.density())
        assert m.mean == pytest.approx(0.3, abs=1e-9)
        assert m.sigma == pytest.approx(1.0, rel=1e-9)

    def test_momentum_moments_track_the_carrier(self):
        psi = gaussian_packet(0.3, 1.0, 0.7, axis_for(0.3, 1.0, points=1024))
        m = moments(momentum_wavefunction(psi, pad_factor=4).density())
        assert m.mean == pytest.approx(0.7 * hbar(), abs=1e-6)
        assert m.sigma == pytest.approx(0.5 * hbar(), rel=1e-6)

    def test_insufficient_room_rejected(self):
        axis = axis_for(0.0, 1.0, points=256, span_sigmas=10.0)
        with pytest.raises(GridTooNarrow):
            gaussian_packet(3.0, 1.0, 0.0, axis)   # only 7 sigma on the right

    def test_flipped_kernel_reflects_momentum_density(self):
        psi = gaussian_packet(0.0, 1.0, 0.9, axis_for(0.0, 1.0, points=512))
        m = moments(momentum_wavefunction(psi, kernel_sign=+1.0).density())
        assert m.mean == pytest.approx(-0.9 * hbar(), abs=1e-6)


# === the interaction as a coordinate map ===

class TestApplyInteraction:
    def test_norm_preserved(self):
        psi, Phi = _packets(points=512)
        joint = apply_interaction(_IDEAL, psi, Phi)
        assert joint.norm() == pytest.approx(1.0, abs=1e-7)

    def test_readout_collects_both_variances(self):
        psi, Phi = _packets(points=512)
        joint = apply_interaction(_IDEAL, psi, Phi)
        obj_pos, readout = marginals(joint)
        # q' = q: the object marginal is untouched
        assert moments(obj_pos).variance == pytest.approx(1.0, rel=1e-6)
        # Q' = q + Q: readout variance is the sum 1 + 0.8^2
        assert moments(readout).variance == pytest.approx(1.64, rel=1e-6)

    def test_momentum_space_structure_is_analytic(self):
        # for the identity-feedback interaction, p' = p - P and P' = P,
        # so |out(p, P)| = |psi~(p + P)| * |Phi~(P)| exactly; a displaced
        # carrier on the meter also pins the kernel-sign convention
        psi, Phi = _packets(points=1024, mean_k=0.9)
        joint = apply_interaction(_IDEAL, psi, Phi)
        mom = momentum_representation(joint)
        p = mom.q_axis.coordinates()[:, None]
        P = mom.Q_axis.coordinates()[None, :]
        want = _abs_momentum_gaussian(p + P, 1.0) \
            * _abs_momentum_gaussian(P, 0.8, center=0.9 * hbar())
        assert np.max(np.abs(np.abs(mom.amplitudes) - want)) <= 1e-9

    def test_raw_tuple_coefficients_accepted(self):
        psi, Phi = _packets(points=256)
        joint = apply_interaction((1.0, 1.0, 0.0, 1.0), psi, Phi)
        assert joint.norm() == pytest.approx(1.0, abs=1e-7)

    def test_narrow_output_axes_rejected(self):
        psi, Phi = _packets(points=256)
        tight = Axis(-0.5, 0.01, 100)   # covers half a sigma
        with pytest.raises(GridTooNarrow):
            apply_interaction(_IDEAL, psi, Phi, out_axes=(tight, tight))


class TestTransformJoint:
    def test_inverse_map_round_trip(self):
        psi, Phi = _packets(points=128)
        params = new_params(1.0, 1.0, 0.0, 1.0)
        fwd = apply_interaction(params, psi, Phi)
        back = transform_joint(inverse_coefficients(params), fwd,
                               out_axes=(psi.axis, Phi.axis))
        orig = product_joint(psi, Phi)
        assert np.max(np.abs(back.amplitudes - orig.amplitudes)) <= 1e-6

    def test_memory_guard(self):
        psi, Phi = _packets(points=1024)
        joint = product_joint(psi, Phi)
        with pytest.raises(GridTooNarrow):
            transform_joint(_IDEAL, joint, refine_factor=32)


# === Fourier representations ===

class TestRepresentations:
    def test_parseval(self):
        psi, Phi = _packets(points=128)
        joint = product_joint(psi, Phi)
        mom = momentum_representation(joint)
        assert mom.norm() == pytest.approx(joint.norm(), abs=1e-12)

    def test_position_representation_inverts_exactly(self):
        psi, Phi = _packets(points=128)
        joint = product_joint(psi, Phi)
        back = position_representation(momentum_representation(joint),
                                       out_axes=(joint.q_axis, joint.Q_axis))
        assert np.max(np.abs(back.amplitudes - joint.amplitudes)) <= 1e-12

    def test_mismatched_axis_count_rejected(self):
        psi, Phi = _packets(points=128)
        joint = product_joint(psi, Phi)
        bad = Axis(0.0, 1.0, 64)
        with pytest.raises(ValueError):
            position_representation(joint, out_axes=(bad, bad))


# === momentum marginals ===

class TestMomentumMarginals:
    def test_product_state_moments(self):
        psi, Phi = _packets(points=512, mean_k=0.7)
        joint = product_joint(psi, Phi)
        obj_mom, meter_mom = momentum_marginals(joint)
        assert obj_mom.mass() == pytest.approx(1.0, abs=1e-9)
        assert moments(obj_mom).mean == pytest.approx(0.0, abs=1e-9)
        assert moments(obj_mom).sigma == pytest.approx(0.5 * hbar(), rel=1e-6)
        assert moments(meter_mom).mean == pytest.approx(0.7 * hbar(),
                                                        abs=1e-6)
        assert moments(meter_mom).sigma == pytest.approx(
            hbar() / 1.6, rel=1e-6)

    def test_flipped_kernel_reflects_the_marginal(self):
        psi, Phi = _packets(points=512, mean_k=0.7)
        joint = product_joint(psi, Phi)
        _, meter_mom = momentum_marginals(joint, kernel_sign=+1.0)
        assert moments(meter_mom).mean == pytest.approx(-0.7 * hbar(),
                                                        abs=1e-6)

    def test_pad_factor_refines_the_grid(self):
        psi, Phi = _packets(points=256)
        joint = product_joint(psi, Phi)
        coarse, _ = momentum_marginals(joint, pad_factor=1)
        fine, _ = momentum_marginals(joint, pad_factor=4)
        assert fine.step < coarse.step
        assert fine.mass() == pytest.approx(coarse.mass(), abs=1e-12)


# === serialization ===

class TestJointSerialization:
    def test_round_trip_is_bit_exact(self, tmp_path):
        psi, Phi = _packets(points=64)
        joint = apply_interaction(_IDEAL, psi, Phi)
        path = tmp_path / "joint.qmo"
        save_joint(path, joint)
        back = load_joint(path)
        assert back.q_axis == joint.q_axis
        assert back.Q_axis == joint.Q_axis
        assert np.array_equal(back.amplitudes, joint.amplitudes)

    def test_bad_magic_rejected(self, tmp_path):
        path = tmp_path / "junk.qmo"
        path.write_bytes(b"NOPE" + b"\x00" * 64)
        with pytest.raises(ValueError):
            load_joint(path)

    def test_truncated_payload_rejected(self, tmp_path):
        psi, Phi = _packets(points=64)
        joint = product_joint(psi, Phi)
        path = tmp_path / "short.qmo"
        save_joint(path, joint)
        data = path.read_bytes()
        path.write_bytes(data[:-16])
        with pytest.raises(ValueError):
            load_joint(path)
