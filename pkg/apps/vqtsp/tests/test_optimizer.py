import json
import math
import tempfile
from io import StringIO
from pathlib import Path

import numpy as np
from django.core.management import call_command
from django.test import SimpleTestCase

from apps.quantum.gates import GateOp
from apps.syk.hamiltonian import SykInstance
from apps.syk.pauli import PauliSum
from apps.syk.thermal import exact_thermal
from utils.exceptions import InvalidArgumentError

from ..ansatz import Pqc2Circuit
from ..circuit_io import format_circuit, parse_circuit, read_circuit, write_circuit
from ..evaluation import evaluate
from ..optimizer import FreeEnergyObjective, OptimizerConfig, minimize_free_energy


class SingleQubitConvergenceTestCase(SimpleTestCase):
    def test_reaches_closed_form_gibbs_state(self):
        hamiltonian = PauliSum.single('Z')
        for beta in (0.5, 1.0, 2.0):
            reference = exact_thermal(hamiltonian, beta)
            target = -math.log(2 * math.cosh(beta)) / beta
            for seed in range(5):
                result = minimize_free_energy(
                    Pqc2Circuit(1), beta, hamiltonian, reference,
                    config=OptimizerConfig(max_evaluations=1000, seed=seed),
                )
                self.assertLessEqual(abs(result.evaluation.free_energy - target), 1e-3)
                self.assertGreaterEqual(result.evaluation.fidelity, 0.999)
                self.assertLessEqual(result.evaluations, 1000)


class OptimizerContractTestCase(SimpleTestCase):
    def setUp(self):
        self.hamiltonian = SykInstance.generate(8, seed=7).hamiltonian(prefactor=1.0)
        self.reference = exact_thermal(self.hamiltonian, 5.2)
        self.circuit = Pqc2Circuit(4, (GateOp.ry(0), GateOp.cnot(0, 1), GateOp.rx(2)))

    def test_zero_budget_rejected(self):
        with self.assertRaises(InvalidArgumentError):
            OptimizerConfig(max_evaluations=0)

    def test_budget_is_hard(self):
        for budget in (1, 5, 37):
            result = minimize_free_energy(
                self.circuit, 5.2, self.hamiltonian, self.reference, OptimizerConfig(max_evaluations=budget)
            )
            self.assertEqual(result.evaluations, budget)

    def test_never_worse_than_start(self):
        theta = np.random.default_rng(1).uniform(0, 2 * np.pi, 12)
        start = evaluate(theta, self.circuit, 5.2, self.hamiltonian, self.reference)
        result = minimize_free_energy(
            self.circuit, 5.2, self.hamiltonian, self.reference,
            OptimizerConfig(max_evaluations=80), warm_start=(theta, None),
        )
        self.assertLessEqual(result.evaluation.free_energy, start.free_energy)
        again = minimize_free_energy(
            self.circuit, 5.2, self.hamiltonian, self.reference,
            OptimizerConfig(max_evaluations=80, seed=3), warm_start=(result.theta, result.phi),
        )
        self.assertLessEqual(again.evaluation.free_energy, result.evaluation.free_energy)

    def test_deterministic_for_seed(self):
        config = OptimizerConfig(max_evaluations=120, seed=11)
        first = minimize_free_energy(self.circuit, 5.2, self.hamiltonian, self.reference, config)
        second = minimize_free_energy(self.circuit, 5.2, self.hamiltonian, self.reference, config)
        np.testing.assert_array_equal(first.theta, second.theta)
        np.testing.assert_array_equal(first.phi, second.phi)
        self.assertEqual(first.evaluation, second.evaluation)

    def test_result_circuit_carries_phi(self):
        result = minimize_free_energy(
            self.circuit, 5.2, self.hamiltonian, self.reference, OptimizerConfig(max_evaluations=40)
        )
        np.testing.assert_array_equal(result.circuit.phi, result.phi)
        self.assertEqual(result.circuit.cnot_count, 1)

    def test_objective_counts_and_splits(self):
        objective = FreeEnergyObjective(self.circuit, 5.2, self.hamiltonian, self.reference, max_evaluations=2)
        self.assertEqual(objective.dimension, 14)
        x = np.zeros(14)
        value = objective(x)
        self.assertEqual(objective.evaluations, 1)
        self.assertEqual(value, objective.best_evaluation.free_energy)
        theta, phi = objective.split(x)
        self.assertEqual((theta.size, phi.size), (12, 2))

    def test_warm_start_shape_checked(self):
        with self.assertRaises(InvalidArgumentError):
            minimize_free_energy(
                self.circuit, 5.2, self.hamiltonian, self.reference,
                OptimizerConfig(max_evaluations=5), warm_start=(np.zeros(12), np.zeros(3)),
            )


class CircuitFileTestCase(SimpleTestCase):
    def test_round_trip_is_exact(self):
        rng = np.random.default_rng(0)
        circuit = Pqc2Circuit(4, (
            GateOp.rx(0, rng.normal()),
            GateOp.cnot(2, 3),
            GateOp.rz(3, 1 / 3),
            GateOp.ry(1, -np.pi),
        ))
        text = format_circuit(circuit)
        self.assertIn('CNOT 2 3', text)
        restored = parse_circuit(text)
        self.assertEqual(restored, circuit)
        with tempfile.TemporaryDirectory() as tmp:
            path = write_circuit(circuit, Path(tmp) / 'c.txt')
            self.assertEqual(read_circuit(path), circuit)

    def test_width_inferred_without_header(self):
        circuit = parse_circuit('RX 0 0.5\nCNOT 0 2\n')
        self.assertEqual(circuit.qubit_count, 3)
        self.assertEqual(parse_circuit('', qubit_count=4).gate_count, 0)

    def test_malformed_lines(self):
        for text in ('RX 0\n', 'SWAP 0 1\n', 'CNOT 0 x\n', 'CNOT 1 1\n'):
            with self.assertRaises(InvalidArgumentError):
                parse_circuit(text)


class RunCircuitCommandTestCase(SimpleTestCase):
    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.addCleanup(self.tmp.cleanup)
        root = Path(self.tmp.name)
        self.instance_path = SykInstance.generate(8, seed=7).save(root / 'inst.json')
        self.circuit_path = write_circuit(
            Pqc2Circuit(4, (GateOp.ry(0, 0.2), GateOp.cnot(0, 1))), root / 'circuit.txt'
        )
        self.root = root

    def test_fixed_theta_evaluation(self):
        theta_path = self.root / 'theta.json'
        theta_path.write_text(json.dumps({'theta': [0.0] * 12}))
        output = self.root / 'eval.json'
        call_command(
            'run_circuit', str(self.circuit_path), instance=str(self.instance_path), beta=5.2,
            theta=str(theta_path), output=str(output), stdout=StringIO(),
        )
        document = json.loads(output.read_text())
        self.assertAlmostEqual(document['free_energy'], document['energy'] - document['entropy'] / 5.2, delta=1e-10)
        self.assertEqual(document['cnot_count'], 1)
        self.assertEqual(document['evaluations'], 1)

    def test_optimized_noisy_evaluation(self):
        output = self.root / 'eval.json'
        saved = self.root / 'best.txt'
        call_command(
            'run_circuit', str(self.circuit_path), instance=str(self.instance_path), beta=5.2,
            noise=True, budget=30, output=str(output), save_circuit=str(saved), stdout=StringIO(),
        )
        document = json.loads(output.read_text())
        self.assertTrue(document['noise']['enabled'])
        self.assertLessEqual(document['evaluations'], 30)
        self.assertGreaterEqual(document['free_energy'], document['exact_free_energy'] - 1e-9)
        self.assertEqual(read_circuit(saved).gate_count, 2)
