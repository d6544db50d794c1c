import numpy as np
import pytest

from kraussphere.channels import apply_channel
from kraussphere.geometry import (
    completeness_gram,
    identity_frame,
    symplectic_form,
    symplectic_products,
)
from kraussphere.linalg import matrix_exp_series
from kraussphere.transforms import (
    angle_count,
    apply_angles,
    channel_from_angles,
    compose_transforms,
    finite_transform,
    generator_basis,
)

from conftest import random_density

THETAS = [0.1, 1.0, np.pi, 5.0]


class TestGeneratorBasis:
    @pytest.mark.parametrize("dim,count", [(4, 3), (8, 15), (16, 63)])
    def test_basis_size(self, dim, count):
        assert len(generator_basis(dim)) == count

    @pytest.mark.parametrize("d,m", [(2, 1), (2, 2), (2, 4), (4, 1)])
    def test_count_matches_ansatz(self, d, m):
        assert len(generator_basis(2 * m * d)) == angle_count(d, m) == (m * d) ** 2 - 1

    @pytest.mark.parametrize("dim", [4, 8, 16])
    def test_generator_algebra(self, dim):
        s = symplectic_form(dim)
        for gen in generator_basis(dim):
            j = gen.matrix
            assert np.array_equal(j.T, -j)
            assert np.max(np.abs(s @ j - j @ s)) <= 1e-12
            assert abs(np.trace(s.T @ j)) <= 1e-12
            assert np.max(np.abs(j @ j @ j + j)) <= 1e-10
            p = gen.projector
            assert np.array_equal(p, -(j @ j))
            assert np.max(np.abs(p @ p - p)) <= 1e-10

    @pytest.mark.parametrize("dim", [4, 16])
    def test_linear_independence(self, dim):
        flat = np.stack([g.matrix.ravel() for g in generator_basis(dim)])
        assert np.linalg.matrix_rank(flat) == len(flat)

    def test_rejects_trivial_dims(self):
        with pytest.raises(ValueError):
            generator_basis(2)
        with pytest.raises(ValueError):
            generator_basis(6 + 1)

    @pytest.mark.parametrize("dim", [4, 16])
    def test_bracket_stays_in_centralizer(self, dim):
        s = symplectic_form(dim)
        basis = generator_basis(dim)
        for a in range(len(basis)):
            for b in range(a + 1, len(basis)):
                ja, jb = basis[a].matrix, basis[b].matrix
                bracket = ja @ jb - jb @ ja
                assert np.max(np.abs(s @ bracket - bracket @ s)) <= 1e-10


class TestFiniteTransform:
    def test_zero_angle_is_identity(self, basis_16):
        for gen in basis_16:
            assert np.array_equal(finite_transform(gen, 0.0), np.eye(16))

    def test_full_turn(self, basis_16):
        for gen in basis_16[:5]:
            m = finite_transform(gen, 2 * np.pi)
            assert np.max(np.abs(m - np.eye(16))) <= 1e-12

    @pytest.mark.parametrize("dim", [4, 16])
    def test_matches_exponential_series(self, dim):
        for gen in generator_basis(dim):
            for theta in THETAS:
                closed = finite_transform(gen, theta)
                series = matrix_exp_series(gen.matrix, theta)
                assert np.max(np.abs(closed - series)) <= 1e-10

    @pytest.mark.parametrize("dim", [4, 16])
    def test_orthogonal_and_symplectic(self, dim):
        s = symplectic_form(dim)
        rng = np.random.default_rng(20)
        for gen in generator_basis(dim):
            theta = rng.uniform(-np.pi, np.pi)
            m = finite_transform(gen, theta)
            assert np.max(np.abs(m.T @ m - np.eye(dim))) <= 1e-10
            assert np.max(np.abs(m.T @ s @ m - s)) <= 1e-10

    def test_one_parameter_subgroup(self, basis_16):
        gen = basis_16[7]
        lhs = finite_transform(gen, 0.6) @ finite_transform(gen, 1.7)
        rhs = finite_transform(gen, 2.3)
        assert np.max(np.abs(lhs - rhs)) <= 1e-10


class TestApplyAngles:
    def test_zero_angles_bit_exact(self, basis_16):
        frame = identity_frame(2, 4)
        out = apply_angles(basis_16, np.zeros(63), frame)
        assert np.array_equal(out.vectors, frame.vectors)

    def test_single_angle_preserves_gram(self, basis_16):
        frame = identity_frame(2, 4)
        for index in (0, 17, 45, 62):
            angles = np.zeros(63)
            angles[index] = 0.83
            out = apply_angles(basis_16, angles, frame)
            assert np.max(np.abs(completeness_gram(out) - np.eye(2))) <= 1e-8

    def test_composition_order_is_ascending(self, basis_4):
        # generators 0 and 2 embed i(E01+E10) and i(E00-E11); their finite
        # transformations act on the m=1 operator as A0 = cos t I + i sin t X
        # and A2 = diag(exp(it), exp(-it)), applied lowest index first
        t0, t2 = 0.4, 1.1
        angles = np.array([t0, 0.0, t2])
        out = apply_angles(basis_4, angles, identity_frame(2, 1))
        a0 = np.cos(t0) * np.eye(2) + 1j * np.sin(t0) * np.array([[0, 1], [1, 0]])
        a2 = np.diag([np.exp(1j * t2), np.exp(-1j * t2)])
        expected = a2 @ a0
        columns = out.vectors[:, 0::2] + 1j * out.vectors[:, 1::2]
        assert np.max(np.abs(columns.T - expected)) <= 1e-12

    def test_x_rotation_gives_flip_channel(self, basis_4):
        angles = np.zeros(3)
        angles[0] = np.pi / 2  # i(E01+E10) direction, a quarter turn
        frame = apply_angles(basis_4, angles, identity_frame(2, 1))
        channel = channel_from_angles(2, 1, angles, basis=basis_4)
        zero = np.diag([1.0, 0.0]).astype(complex)
        one = np.diag([0.0, 1.0]).astype(complex)
        assert np.max(np.abs(apply_channel(channel, zero) - one)) <= 1e-12
        assert np.max(np.abs(completeness_gram(frame) - np.eye(2))) <= 1e-12

    @pytest.mark.parametrize("d,m", [(2, 1), (2, 4), (4, 1)])
    def test_invariants_preserved_100_random(self, d, m):
        rng = np.random.default_rng(21)
        basis = generator_basis(2 * m * d)
        frame = identity_frame(d, m)
        for _ in range(100):
            angles = rng.normal(0.0, 1.0, len(basis))
            out = apply_angles(basis, angles, frame)
            norms = np.sum(out.vectors**2, axis=1)
            assert np.max(np.abs(norms - 1.0)) <= 1e-8
            euclid = out.vectors @ out.vectors.T - np.eye(d)
            assert np.max(np.abs(euclid)) <= 1e-8
            assert np.max(np.abs(symplectic_products(out))) <= 1e-8
            assert np.max(np.abs(completeness_gram(out) - np.eye(d))) <= 1e-8
            frame = out  # chain transformations to accumulate error

    def test_length_mismatch(self, basis_4):
        with pytest.raises(ValueError, match="angle count"):
            apply_angles(basis_4, np.zeros(2), identity_frame(2, 1))


class TestChannelFromAngles:
    def test_zero_angles_identity_channel(self):
        channel = channel_from_angles(2, 4, np.zeros(63))
        assert np.array_equal(channel.operators[0], np.eye(2))
        for op in channel.operators[1:]:
            assert np.array_equal(op, np.zeros((2, 2)))

    def test_random_angles_complete(self, basis_16):
        rng = np.random.default_rng(22)
        for _ in range(100):
            angles = rng.normal(0.0, 1.2, 63)
            channel = channel_from_angles(2, 4, angles, basis=basis_16)
            assert channel.completeness_deviation() <= 1e-6

    def test_trace_preserved_on_random_states(self, basis_16):
        rng = np.random.default_rng(23)
        for _ in range(20):
            channel = channel_from_angles(2, 4, rng.normal(0, 1, 63), basis=basis_16)
            for _ in range(10):
                rho = random_density(rng, 2)
                out = apply_channel(channel, rho)
                assert abs(np.trace(out).real - 1.0) <= 1e-8

    def test_angle_count_check(self):
        with pytest.raises(ValueError, match="expected 63 angles"):
            channel_from_angles(2, 4, np.zeros(10))


class TestComposeTransforms:
    def test_skips_zero_angles(self, basis_16):
        angles = np.zeros(63)
        assert np.array_equal(compose_transforms(basis_16, angles), np.eye(16))

    def test_rejects_non_finite(self, basis_4):
        with pytest.raises(ValueError, match="finite"):
            compose_transforms(basis_4, np.array([0.0, np.nan, 0.0]))
