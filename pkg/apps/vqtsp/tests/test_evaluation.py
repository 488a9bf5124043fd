import math

import numpy as np
from django.test import SimpleTestCase

from apps.quantum.backend import density_matrix_violations
from apps.quantum.gates import GateOp
from apps.quantum.noise import NoiseModel
from apps.syk.hamiltonian import SykInstance
from apps.syk.pauli import PauliString, PauliSum
from apps.syk.thermal import exact_thermal
from utils.exceptions import InvalidArgumentError

from ..ansatz import Pqc1Config, Pqc2Circuit
from ..evaluation import entropy_of_pqc1, evaluate, evolve_mixture


def random_circuit(rng, n, length):
    gates = []
    for _ in range(length):
        if n > 1 and rng.random() < 0.35:
            control, target = rng.choice(n, size=2, replace=False)
            gates.append(GateOp.cnot(control, target))
        else:
            kind = ('RX', 'RY', 'RZ')[rng.integers(3)]
            gates.append(GateOp(kind, (int(rng.integers(n)),), rng.uniform(0, 2 * np.pi)))
    return Pqc2Circuit(n, tuple(gates))


def gibbs_theta_for_z(beta):
    """PQC1 angles whose single-qubit distribution is the Gibbs distribution of H = Z"""
    p0 = math.exp(-beta) / (2 * math.cosh(beta))
    return np.array([0.0, 2 * math.acos(math.sqrt(p0)), 0.0])


class Pqc1TestCase(SimpleTestCase):
    def test_zero_angles_give_zero_entropy(self):
        p, entropy = entropy_of_pqc1(np.zeros(12), Pqc1Config(4))
        np.testing.assert_allclose(p, np.eye(16)[0], atol=1e-15)
        self.assertEqual(entropy, 0.0)

    def test_equal_superposition(self):
        theta = np.zeros(12)
        theta[1::3] = np.pi / 2
        p, entropy = entropy_of_pqc1(theta, Pqc1Config(4))
        np.testing.assert_allclose(p, np.full(16, 1 / 16), atol=1e-12)
        self.assertAlmostEqual(entropy, math.log(16), places=10)

    def test_entropy_bounds(self):
        rng = np.random.default_rng(0)
        for entangler in ('ring', 'all_to_all'):
            pqc1 = Pqc1Config(4, entangler)
            for _ in range(20):
                _, entropy = entropy_of_pqc1(rng.uniform(0, 2 * np.pi, 12), pqc1)
                self.assertGreaterEqual(entropy, 0.0)
                self.assertLessEqual(entropy, 4 * math.log(2) + 1e-12)

    def test_entangler_layout(self):
        self.assertEqual(Pqc1Config(3).entangling_pairs(), [(0, 1), (1, 2), (2, 0)])
        self.assertEqual(Pqc1Config(3, 'all_to_all').entangling_pairs(), [(0, 1), (0, 2), (1, 2)])
        self.assertEqual(Pqc1Config(1).entangling_pairs(), [])
        with self.assertRaises(InvalidArgumentError):
            Pqc1Config(3).gates(np.zeros(8))

    def test_noise_never_lowers_entropy(self):
        rng = np.random.default_rng(12)
        pqc1 = Pqc1Config(4)
        noise = NoiseModel.hardware_default()
        for _ in range(100):
            theta = rng.uniform(0, 2 * np.pi, 12)
            _, clean = entropy_of_pqc1(theta, pqc1)
            _, noisy = entropy_of_pqc1(theta, pqc1, noise=noise)
            self.assertGreaterEqual(noisy, clean - 1e-9)

    def test_shot_sampling_needs_generator(self):
        with self.assertRaises(InvalidArgumentError):
            entropy_of_pqc1(np.zeros(3), Pqc1Config(1), shots=100)
        p, _ = entropy_of_pqc1(gibbs_theta_for_z(1.0), Pqc1Config(1), shots=1000, rng=np.random.default_rng(0))
        self.assertAlmostEqual(p.sum(), 1.0)


class EvaluateTestCase(SimpleTestCase):
    def setUp(self):
        self.instance = SykInstance.generate(8, seed=7)
        self.hamiltonian = self.instance.hamiltonian(prefactor=1.0)
        self.reference = exact_thermal(self.hamiltonian, 5.2)

    def test_identity_circuits_measure_ground_basis_state(self):
        result = evaluate(np.zeros(12), Pqc2Circuit(4), 5.2, self.hamiltonian, self.reference)
        self.assertAlmostEqual(result.energy, self.hamiltonian.matrix[0, 0].real, places=12)
        self.assertEqual(result.entropy, 0.0)
        self.assertEqual(result.free_energy, result.energy)

    def test_single_qubit_gibbs_state_is_exact(self):
        hamiltonian = PauliSum.single('Z')
        reference = exact_thermal(hamiltonian, 1.0)
        result = evaluate(gibbs_theta_for_z(1.0), Pqc2Circuit(1), 1.0, hamiltonian, reference)
        self.assertAlmostEqual(result.free_energy, -math.log(2 * math.cosh(1.0)), places=12)
        self.assertAlmostEqual(result.fidelity, 1.0, places=9)
        self.assertAlmostEqual(result.free_energy, result.energy - result.entropy, places=12)

    def test_maximally_mixed_state_near_infinite_temperature(self):
        rng = np.random.default_rng(3)
        beta = 1e-9
        reference = exact_thermal(self.hamiltonian, beta)
        theta = np.zeros(12)
        theta[1::3] = np.pi / 2
        result = evaluate(theta, random_circuit(rng, 4, 15), beta, self.hamiltonian, reference)
        self.assertAlmostEqual(result.fidelity, 1.0, places=6)

    def test_variational_bound(self):
        rng = np.random.default_rng(2024)
        for _ in range(100):
            theta = rng.uniform(0, 2 * np.pi, 12)
            circuit = random_circuit(rng, 4, int(rng.integers(0, 12)))
            result = evaluate(theta, circuit, 5.2, self.hamiltonian, self.reference)
            self.assertGreaterEqual(result.free_energy, self.reference.free_energy - 1e-9)
            self.assertGreaterEqual(result.fidelity, 0.0)
            self.assertLessEqual(result.fidelity, 1.0)

    def test_entropy_depends_on_theta_only(self):
        rng = np.random.default_rng(8)
        theta = rng.uniform(0, 2 * np.pi, 12)
        entropies = {
            evaluate(theta, random_circuit(rng, 4, 10), 5.2, self.hamiltonian, self.reference).entropy
            for _ in range(5)
        }
        self.assertEqual(len(entropies), 1)

    def test_relative_entropy_identity(self):
        """beta F(rho) - beta F(rho_beta) = D(rho || rho_beta) for rho = U diag(p) U^dagger"""
        rng = np.random.default_rng(5)
        letters = [a + b for a in 'IXYZ' for b in 'IXYZ'][1:]
        hamiltonian = PauliSum.from_terms(PauliString(rng.normal(), word) for word in letters)
        beta = 1.3
        reference = exact_thermal(hamiltonian, beta)
        log_gibbs = (reference.eigenvectors * np.log(reference.populations)) @ reference.eigenvectors.conj().T
        pqc1 = Pqc1Config(2)
        for _ in range(20):
            theta = rng.uniform(0, 2 * np.pi, 6)
            circuit = random_circuit(rng, 2, 8)
            result = evaluate(theta, circuit, beta, hamiltonian, reference, pqc1=pqc1)
            p, _ = entropy_of_pqc1(theta, pqc1)
            rho = evolve_mixture(p, circuit)
            nonzero = p[p > 0]
            divergence = float(np.sum(nonzero * np.log(nonzero))) - float(np.real(np.trace(rho @ log_gibbs)))
            self.assertAlmostEqual(beta * (result.free_energy - reference.free_energy), divergence, delta=1e-8)

    def test_noisy_states_stay_valid(self):
        rng = np.random.default_rng(4)
        noise = NoiseModel.hardware_default()
        circuit = random_circuit(rng, 4, 25)
        p, _ = entropy_of_pqc1(rng.uniform(0, 2 * np.pi, 12), Pqc1Config(4), noise=noise)
        rho = evolve_mixture(p, circuit, noise)
        self.assertEqual(density_matrix_violations(rho), [])

    def test_invalid_beta(self):
        with self.assertRaises(InvalidArgumentError):
            evaluate(np.zeros(12), Pqc2Circuit(4), 0.0, self.hamiltonian)
        with self.assertRaises(InvalidArgumentError):
            evaluate(np.zeros(12), Pqc2Circuit(4), 18.0, self.hamiltonian, self.reference)

    def test_errors_against_reference(self):
        result = evaluate(np.zeros(12), Pqc2Circuit(4), 5.2, self.hamiltonian, self.reference)
        errors = result.errors(self.reference)
        self.assertAlmostEqual(errors['delta_free_energy'], abs(result.free_energy - self.reference.free_energy))
        self.assertAlmostEqual(errors['delta_entropy'], self.reference.entropy)
