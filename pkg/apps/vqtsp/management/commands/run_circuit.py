import json
import logging
from pathlib import Path

import numpy as np

from apps.codec.tensor import TENSOR_SUFFIX, decode, read_tensor
from apps.core.commands import ExperimentCommand
from apps.core.rundir import RunDirectory
from apps.quantum.coupling import CouplingMap
from apps.quantum.noise import NoiseModel
from apps.syk.hamiltonian import SykInstance
from apps.syk.thermal import exact_thermal
from apps.vqtsp.ansatz import Pqc1Config
from apps.vqtsp.circuit_io import read_circuit, write_circuit
from apps.vqtsp.evaluation import evaluate
from apps.vqtsp.optimizer import OptimizerConfig, minimize_free_energy
from utils.conf import domain_setting
from utils.exceptions import InvalidArgumentError
from utils.serialization import dump_json

logger = logging.getLogger(__name__)


class Command(ExperimentCommand):
    help = (
        'Evaluate a PQC2 circuit file on an SYK instance at one beta. With --theta the '
        'given PQC1 angles are used as is; otherwise theta and phi are optimized. With --run '
        "the instance, beta, prefactor, entangler, coupling map and noise default to that run's config."
    )

    def add_arguments(self, parser):
        parser.add_argument('circuit', help=f'Circuit file, one gate per line, or a packed tensor ({TENSOR_SUFFIX})')
        parser.add_argument('--instance', help='SYK instance JSON')
        parser.add_argument('--run', help='Run directory whose config the circuit was trained under')
        parser.add_argument('--beta', type=float)
        parser.add_argument('--prefactor', type=float, help='Hamiltonian prefactor (default from settings)')
        parser.add_argument('--theta', help="JSON file with the 3n PQC1 angles (list or {\"theta\": [...]})")
        parser.add_argument('--noise', action='store_true', help='Apply the hardware noise model')
        parser.add_argument('--coupling-map', help='all_to_all (default), a bundled map name or a JSON path')
        parser.add_argument('--entangler', choices=('ring', 'all_to_all'), help='PQC1 entangler (default ring)')
        parser.add_argument('--budget', type=int, default=None, help='Optimizer evaluations (default from settings)')
        parser.add_argument('--seed', type=int, default=0)
        parser.add_argument('--shots', type=int, default=None, help='Sample PQC1 probabilities with this many shots')
        parser.add_argument('--output', help='Evaluation JSON (default: next to the circuit file)')
        parser.add_argument('--save-circuit', help='Write the optimized circuit here')

    def handle(self, *args, **options):
        config, run_beta = self._run_config(options.get('run'))
        section = config.get('instance') or {}
        environment = config.get('environment') or {}
        noise_section = config.get('noise') or {}

        if options.get('instance'):
            instance = SykInstance.load(options['instance'])
        elif section:
            instance = SykInstance.from_section(section)
        else:
            raise InvalidArgumentError('Give --instance or a --run directory')
        prefactor = self._first(options.get('prefactor'), section.get('prefactor'))
        hamiltonian = instance.hamiltonian(prefactor)
        n = instance.qubit_count
        circuit = self._read(options['circuit'], n)
        coupling_map = self._first(options.get('coupling_map'), environment.get('coupling_map'), 'all_to_all')
        circuit.check_coupling(CouplingMap.resolve(coupling_map, n))

        beta = self._first(options.get('beta'), run_beta)
        if beta is None:
            raise InvalidArgumentError('Give --beta or a --run directory that records one')
        reference = exact_thermal(hamiltonian, beta)
        if options['noise']:
            noise = NoiseModel.hardware_default()
        elif noise_section.get('enabled'):
            noise = NoiseModel.from_section(noise_section)
        else:
            noise = NoiseModel.noiseless()
        entangler = self._first(options.get('entangler'), environment.get('entangler'), 'ring')
        pqc1 = Pqc1Config(n, entangler)
        shots = self._first(options.get('shots'), noise_section.get('shots'))

        if options.get('theta'):
            theta = self._read_theta(options['theta'], pqc1.parameter_count)
            rng = np.random.default_rng(options['seed']) if shots else None
            result = evaluate(theta, circuit, beta, hamiltonian, reference, noise, pqc1, shots=shots, rng=rng)
            evaluations = 1
        else:
            budget = options.get('budget') or domain_setting('FINAL_EVALUATIONS', 1000)
            optimized = minimize_free_energy(
                circuit, beta, hamiltonian, reference,
                config=OptimizerConfig(max_evaluations=budget, seed=options['seed']),
                noise=noise, pqc1=pqc1, shots=shots,
            )
            theta, circuit, result, evaluations = optimized.theta, optimized.circuit, optimized.evaluation, optimized.evaluations
            if options.get('save_circuit'):
                write_circuit(circuit, options['save_circuit'])

        document = {
            **result.as_dict(),
            **result.errors(reference),
            'exact_free_energy': reference.free_energy,
            'theta': theta,
            'phi': circuit.phi,
            'cnot_count': circuit.cnot_count,
            'gate_count': circuit.gate_count,
            'evaluations': evaluations,
            'noise': noise.as_dict(),
            'beta': beta,
            'prefactor': domain_setting('HAMILTONIAN_PREFACTOR', 1.0) if prefactor is None else prefactor,
            'entangler': entangler,
            'coupling_map': coupling_map,
        }
        output = Path(options.get('output') or Path(options['circuit']).with_suffix('.evaluation.json'))
        dump_json(document, output)
        self.success(
            f'F={result.free_energy:.8f} (exact {reference.free_energy:.8f}), '
            f'fidelity={result.fidelity:.6f}, {circuit.cnot_count} CNOTs -> {output}'
        )

    @staticmethod
    def _first(*values):
        return next((value for value in values if value is not None), None)

    @staticmethod
    def _run_config(path):
        if not path:
            return {}, None
        run = RunDirectory.open(path)
        manifest = run.manifest
        return manifest.get('config', {}), manifest.get('beta')

    @staticmethod
    def _read(path, qubit_count):
        if Path(path).suffix == TENSOR_SUFFIX:
            return decode(read_tensor(path, qubit_count))
        return read_circuit(path, qubit_count=qubit_count)

    @staticmethod
    def _read_theta(path, expected):
        data = json.loads(Path(path).read_text())
        if isinstance(data, dict):
            data = data.get('theta')
        theta = np.asarray(data, dtype=float)
        if theta.shape != (expected,):
            raise InvalidArgumentError(f'Theta file {path} must hold {expected} angles, got shape {theta.shape}')
        return theta
