import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from coulombgas.model import (
    CoincidentParticlesError,
    Coulomb,
    GasModel,
    Log1D,
    Quadratic,
    Quartic,
    RadialPower,
    Weak,
    confinement_grad,
    confinement_value,
    default_beta,
    hamiltonian,
    hamiltonian_grad,
    interaction_energy,
    interaction_kernel,
)

from helpers import finite_difference_grad, relative_error, separated_configuration


def quad_gas(d=2, n=2, beta=None):
    return GasModel(d, n, beta if beta is not None else default_beta(n), Quadratic(), Coulomb())


class TestInteractionKernel:
    def test_unit_distance_planar(self):
        assert interaction_kernel(1.0, Coulomb(), 2) == 0.0

    def test_three_dimensional(self):
        assert interaction_kernel(2.0, Coulomb(), 3) == 0.5

    def test_planar_log(self):
        assert interaction_kernel(0.5, Coulomb(), 2) == pytest.approx(math.log(2.0))

    def test_log1d(self):
        assert interaction_kernel(math.e, Log1D(), 1) == pytest.approx(-1.0)

    def test_nonpositive_separation_rejected(self):
        with pytest.raises(ValueError):
            interaction_kernel(0.0, Coulomb(), 2)
        with pytest.raises(ValueError):
            interaction_kernel(-1.0, Coulomb(), 3)

    def test_far_field_signs(self):
        # decays to zero from above for d >= 3, diverges to -inf for d = 2
        assert 0.0 < interaction_kernel(1e3, Coulomb(), 3) < 1e-2
        assert 0.0 < interaction_kernel(1e3, Coulomb(), 5) < 1e-8
        assert interaction_kernel(1e3, Coulomb(), 2) < -6.0


class TestConfinement:
    def test_quadratic(self):
        assert confinement_value(np.array([1.0, 0.0]), Quadratic()) == 1.0

    def test_quartic(self):
        assert confinement_value(np.array([1.0, 1.0]), Quartic()) == pytest.approx(1.0)

    def test_weak(self):
        assert confinement_value(np.array([4.0, 0.0]), Weak()) == pytest.approx(16.0 / 3.0)

    def test_radial_power_matches_weak(self):
        x = np.array([0.3, -1.2])
        assert confinement_value(x, RadialPower(2.0 / 3.0, 1.5)) == pytest.approx(
            confinement_value(x, Weak())
        )

    def test_weak_gradient_zero_at_origin(self):
        assert np.array_equal(confinement_grad(np.zeros(2), Weak()), np.zeros(2))

    def test_radial_power_validation(self):
        with pytest.raises(ValueError):
            RadialPower(a=0.0, q=2.0)
        with pytest.raises(ValueError):
            RadialPower(a=1.0, q=1.0)

    @pytest.mark.parametrize("spec", [Quadratic(), Quartic(), Weak(), RadialPower(0.7, 2.5)])
    def test_gradient_matches_finite_differences(self, spec):
        rng = np.random.default_rng(11)
        for _ in range(20):
            x = rng.uniform(0.2, 1.5, size=3) * rng.choice([-1.0, 1.0], size=3)
            fd = finite_difference_grad(lambda p: float(confinement_value(p[0], spec)), x[None, :])
            assert relative_error(confinement_grad(x, spec), fd[0]) < 1e-6


class TestGasModelValidation:
    def test_rejects_single_particle(self):
        with pytest.raises(ValueError, match="n >= 2"):
            GasModel(2, 1, 1.0, Quadratic(), Coulomb())

    def test_rejects_nonpositive_temperature(self):
        with pytest.raises(ValueError, match="positive"):
            GasModel(2, 3, 0.0, Quadratic(), Coulomb())

    def test_rejects_planar_kernel_on_the_line(self):
        with pytest.raises(ValueError, match="d >= 2"):
            GasModel(1, 3, 1.0, Quadratic(), Coulomb())

    def test_rejects_log1d_off_the_line(self):
        with pytest.raises(ValueError, match="d = 1"):
            GasModel(2, 3, 1.0, Quadratic(), Log1D())


class TestHamiltonian:
    def test_two_particle_planar_value(self):
        x = np.array([[1.0, 0.0], [-1.0, 0.0]])
        assert hamiltonian(x, quad_gas()) == pytest.approx(1.0 - math.log(2.0) / 2.0)

    def test_two_particle_3d_value(self):
        x = np.array([[0.0, 0.0, 0.0], [1.0, 0.0, 0.0]])
        assert hamiltonian(x, quad_gas(d=3)) == pytest.approx(1.0)

    def test_coincident_particles_give_infinity(self):
        x = np.array([[0.2, 0.3], [0.2, 0.3], [1.0, 1.0]])
        assert hamiltonian(x, quad_gas(n=3)) == math.inf

    @settings(max_examples=25, deadline=None)
    @given(st.integers(min_value=0, max_value=10_000))
    def test_permutation_invariance(self, seed):
        rng = np.random.default_rng(seed)
        model = quad_gas(n=5)
        x = rng.uniform(-1.0, 1.0, size=(5, 2))
        perm = rng.permutation(5)
        assert hamiltonian(x[perm], model) == pytest.approx(hamiltonian(x, model), rel=1e-12)

    def test_pair_term_exactly_translation_invariant(self):
        # quantized coordinates and a dyadic shift keep every difference exact
        rng = np.random.default_rng(5)
        model = quad_gas(n=8)
        x = np.round(rng.uniform(-1.0, 1.0, size=(8, 2)) * 2**20) / 2**20
        shift = np.array([0.5, -0.25])
        assert interaction_energy(x + shift, model) == interaction_energy(x, model)


class TestHamiltonianGrad:
    def test_two_particle_planar_value(self):
        x = np.array([[1.0, 0.0], [-1.0, 0.0]])
        grad = hamiltonian_grad(x, quad_gas())
        assert np.allclose(grad, [[0.75, 0.0], [-0.75, 0.0]])

    def test_antisymmetric_under_central_flip(self):
        rng = np.random.default_rng(3)
        model = quad_gas(n=6)
        x = rng.uniform(-1.0, 1.0, size=(6, 2))
        assert np.allclose(hamiltonian_grad(-x, model), -hamiltonian_grad(x, model))

    def test_coincident_particles_raise(self):
        x = np.array([[0.1, 0.1], [0.1, 0.1]])
        with pytest.raises(CoincidentParticlesError):
            hamiltonian_grad(x, quad_gas())

    @pytest.mark.parametrize(
        "model",
        [quad_gas(n=6), quad_gas(d=3, n=4), GasModel(1, 6, 36.0, Quadratic(), Log1D()),
         GasModel(2, 5, 25.0, Quartic(), Coulomb())],
        ids=["planar", "3d", "log-gas", "quartic"],
    )
    def test_matches_finite_differences(self, model):
        # min_gap keeps the central-difference oracle inside its accuracy range
        rng = np.random.default_rng(7)
        trials = 100 if model.d == 2 and isinstance(model.confinement, Quadratic) else 10
        for _ in range(trials):
            x = separated_configuration(rng, model.n, model.d, min_gap=0.05)
            grad = hamiltonian_grad(x, model)
            fd = finite_difference_grad(lambda p: hamiltonian(p, model), x)
            assert relative_error(grad, fd) < 1e-6
