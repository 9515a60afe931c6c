import json
import math

import numpy as np
import pytest

from entropiclab import (
    OnsagerSystem,
    entropy_rate,
    forces,
    harmonic_hamiltonian,
    reciprocity_check,
    relax,
    wick_map,
)


def random_spd_system(rng, n):
    a = rng.standard_normal((n, n))
    b = rng.standard_normal((n, n))
    return OnsagerSystem(
        a @ a.T + 0.5 * np.eye(n),
        b @ b.T + 0.5 * np.eye(n),
        rng.standard_normal(n),
    )


class TestForces:
    def test_identity_hessian(self):
        system = OnsagerSystem(np.eye(2), np.eye(2), [1.0, 0.0])
        np.testing.assert_allclose(forces(system, [1.0, 0.0]), [-1.0, 0.0])

    def test_equilibrium(self):
        system = OnsagerSystem(np.eye(2), np.eye(2), [0.0, 0.0])
        np.testing.assert_allclose(forces(system, [0.0, 0.0]), [0.0, 0.0])

    def test_diagonal_gradient(self):
        system = OnsagerSystem(np.eye(2), np.diag([2.0, 3.0]), [1.0, 1.0])
        np.testing.assert_allclose(forces(system, [1.0, 1.0]), [-2.0, -3.0])


class TestRelax:
    def test_scalar_decay(self):
        system = OnsagerSystem([[1.0]], [[1.0]], [1.0])
        grid = np.linspace(0.0, 3.0, 7)
        trajectory = relax(system, grid)
        np.testing.assert_allclose(trajectory.ys[:, 0], np.exp(-grid), atol=1e-12)

    def test_two_mode_decay_rates(self):
        # eigenmodes of [[2,1],[1,2]] are (1,1)/sqrt2 at rate 3 and (1,-1)/sqrt2 at rate 1
        system = OnsagerSystem([[2.0, 1.0], [1.0, 2.0]], np.eye(2), [1.0, 0.0])
        grid = np.linspace(0.0, 2.0, 5)
        trajectory = relax(system, grid)
        sym = 0.5 * np.exp(-3.0 * grid)
        anti = 0.5 * np.exp(-1.0 * grid)
        np.testing.assert_allclose(trajectory.ys[:, 0], sym + anti, atol=1e-12)
        np.testing.assert_allclose(trajectory.ys[:, 1], sym - anti, atol=1e-12)

    def test_asymmetric_kinetic_matrix_is_flagged_but_integrates(self):
        kinetic = np.array([[2.0, 1.0], [0.5, 2.0]])
        report = reciprocity_check(kinetic)
        assert not report.symmetric
        system = OnsagerSystem(kinetic, np.eye(2), [1.0, -0.5])
        trajectory = relax(system, np.linspace(0.0, 2.0, 5))
        assert np.all(np.isfinite(trajectory.ys))
        assert np.linalg.norm(trajectory.ys[-1]) < np.linalg.norm(system.y0)

    def test_decay_to_equilibrium(self):
        rng = np.random.default_rng(2)
        system = random_spd_system(rng, 5)
        trajectory = relax(system, [0.0, 50.0])
        assert np.linalg.norm(trajectory.ys[-1]) <= 1e-6 * np.linalg.norm(system.y0)

    def test_entropy_monotone_along_relaxation(self):
        rng = np.random.default_rng(3)
        for _ in range(10):
            system = random_spd_system(rng, int(rng.integers(2, 7)))
            trajectory = relax(system, np.linspace(0.0, 3.0, 13))
            entropies = [system.entropy_offset(y) for y in trajectory.ys]
            assert np.all(np.diff(entropies) >= -1e-12)
            assert np.all(trajectory.entropy_rates >= -1e-12)

    def test_lyapunov_decay_bound(self):
        rng = np.random.default_rng(4)
        system = random_spd_system(rng, 4)
        product = system.kinetic @ system.entropy_hessian
        slowest = float(np.linalg.eigvalsh((product + product.T) / 2.0)[0])
        grid = np.linspace(0.0, 2.0, 9)
        trajectory = relax(system, grid)
        bound = np.linalg.norm(system.y0) * np.exp(-slowest * grid)
        assert np.all(np.linalg.norm(trajectory.ys, axis=1) <= bound * (1.0 + 1e-10))


class TestEntropyRate:
    def test_equilibrium_rates_vanish(self):
        system = OnsagerSystem(np.eye(3), np.eye(3), np.zeros(3))
        rate = entropy_rate(system, np.zeros(3))
        assert rate.via_velocities == 0.0
        assert rate.via_forces == 0.0

    def test_scalar_algebra(self):
        # L = 2, G = 1, y = 1: ydot = -2, R = 1/2, both forms equal 2
        system = OnsagerSystem([[2.0]], [[1.0]], [1.0])
        rate = entropy_rate(system, [1.0])
        assert abs(rate.via_velocities - 2.0) <= 1e-14
        assert abs(rate.via_forces - 2.0) <= 1e-14

    def test_forms_agree_on_random_systems(self):
        rng = np.random.default_rng(5)
        for _ in range(30):
            system = random_spd_system(rng, 5)
            y = rng.standard_normal(5)
            rate = entropy_rate(system, y)
            scale = max(abs(rate.via_velocities), abs(rate.via_forces))
            assert abs(rate.via_velocities - rate.via_forces) <= 1e-12 * scale


class TestHarmonicHamiltonian:
    def test_equilibrium(self):
        system = OnsagerSystem(np.eye(2), np.eye(2), np.zeros(2))
        assert harmonic_hamiltonian(system, np.zeros(2)) == 0.0

    def test_scalar_case(self):
        system = OnsagerSystem([[2.0]], [[1.0]], [1.0])
        assert abs(harmonic_hamiltonian(system, [1.0]) - 2.0) <= 1e-14

    def test_positive_away_from_equilibrium(self):
        rng = np.random.default_rng(6)
        system = random_spd_system(rng, 6)
        for _ in range(20):
            y = rng.standard_normal(6)
            assert harmonic_hamiltonian(system, y) > 0.0


class TestReciprocity:
    def test_symmetric_matrix(self):
        report = reciprocity_check(np.array([[2.0, 0.5], [0.5, 1.0]]))
        assert report.symmetric
        assert report.asymmetry_norm == 0.0

    def test_upper_triangular_asymmetry(self):
        kinetic = np.array([[1.0, 1.0], [0.0, 1.0]])
        report = reciprocity_check(kinetic)
        assert not report.symmetric
        assert abs(report.asymmetry_norm - math.sqrt(2.0) / np.linalg.norm(kinetic)) <= 1e-14

    def test_spd_construction_is_symmetric(self):
        rng = np.random.default_rng(7)
        a = rng.standard_normal((4, 4))
        report = reciprocity_check(a @ a.T + 0.5 * np.eye(4))
        assert report.symmetric

    def test_non_square_rejected(self):
        with pytest.raises(ValueError):
            reciprocity_check(np.ones((2, 3)))


class TestWickMap:
    def test_values(self):
        assert wick_map(0.0) == 0.0
        assert wick_map(1.0) == 1j
        assert wick_map(-2.0) == -2j


class TestSystemValidation:
    def test_singular_kinetic_matrix_rejected(self):
        with pytest.raises(ValueError, match="singular"):
            OnsagerSystem([[1.0, 1.0], [1.0, 1.0]], np.eye(2), [0.0, 0.0])

    def test_ill_conditioned_rejected(self):
        with pytest.raises(ValueError, match="ill-conditioned"):
            OnsagerSystem(np.diag([1.0, 1e-13]), np.eye(2), [0.0, 0.0])

    def test_hessian_must_be_symmetric_positive(self):
        with pytest.raises(ValueError, match="symmetric"):
            OnsagerSystem(np.eye(2), [[1.0, 0.3], [0.0, 1.0]], [0.0, 0.0])
        with pytest.raises(ValueError, match="positive definite"):
            OnsagerSystem(np.eye(2), np.diag([1.0, -1.0]), [0.0, 0.0])

    def test_resistance_is_the_inverse(self):
        rng = np.random.default_rng(8)
        system = random_spd_system(rng, 4)
        np.testing.assert_allclose(
            system.resistance @ system.kinetic, np.eye(4), atol=1e-10
        )

    def test_json_descriptor(self, tmp_path):
        path = tmp_path / "system.json"
        path.write_text(json.dumps({
            "N": 2,
            "L": [2.0, 1.0, 1.0, 2.0],
            "G": [[1.0, 0.0], [0.0, 1.0]],
            "y0": [1.0, 0.0],
        }))
        system = OnsagerSystem.from_json(path)
        np.testing.assert_allclose(system.kinetic, [[2.0, 1.0], [1.0, 2.0]])
        with pytest.raises(ValueError, match="descriptor"):
            OnsagerSystem.from_dict({"N": 2, "L": [1.0], "G": [], "y0": []})
