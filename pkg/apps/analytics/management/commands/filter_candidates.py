import logging

from apps.analytics.filtering import FilterWeights, filter_best, rank_candidates, weights_from_config
from apps.analytics.reports import summarize_best
from apps.codec.tensor import TENSOR_SUFFIX, circuit_depth, encode, write_tensor
from apps.core.commands import ExperimentCommand
from apps.core.rundir import RunDirectory
from apps.vqtsp.circuit_io import parse_circuit
from utils.exceptions import InvalidArgumentError
from utils.serialization import dump_json

logger = logging.getLogger(__name__)


def resolve_weights(run: RunDirectory, w_a=None, w_b=None) -> FilterWeights:
    manifest = run.manifest
    return weights_from_config(manifest.get('config', {}), manifest.get('majoranas', 0), w_a, w_b)


class Command(ExperimentCommand):
    help = 'Pick the best circuit of a training run by dF + w_a dE + w_b dS'

    def add_arguments(self, parser):
        parser.add_argument('run_dir', help='Run directory written by train_agent')
        parser.add_argument('--w-a', type=float, dest='w_a', help='Energy-error weight')
        parser.add_argument('--w-b', type=float, dest='w_b', help='Entropy-error weight')
        parser.add_argument('--top', type=int, default=10, help='Rows of the ranking echoed to the console')

    def handle(self, *args, **options):
        run = RunDirectory.open(options['run_dir'])
        candidates = run.candidates()
        if not candidates:
            raise InvalidArgumentError(f'{run.path} has no stored candidates')
        weights = resolve_weights(run, options.get('w_a'), options.get('w_b'))
        best = filter_best(candidates, weights)
        ranking = rank_candidates(candidates, weights)

        reports = run.reports_dir
        reports.mkdir(parents=True, exist_ok=True)
        dump_json({**best, 'weights': {'w_a': weights.w_a, 'w_b': weights.w_b}}, reports / 'best_candidate.json')
        (reports / 'best_circuit.txt').write_text(best['circuit'])
        circuit = parse_circuit(best['circuit'])
        depth = max(circuit_depth(circuit.gates, circuit.qubit_count), 1)
        write_tensor(encode(circuit, depth), reports / f'best_circuit{TENSOR_SUFFIX}')
        ranking.to_csv(reports / 'ranked.csv', index=False, float_format='%.17g')
        run.update_manifest(best=summarize_best(best))

        top = max(options['top'], 0)
        if top:
            shown = [c for c in ('episode', 'score', 'delta_free_energy', 'fidelity', 'cnot_count') if c in ranking]
            self.stdout.write(ranking[shown].head(top).to_string(index=False))
        self.success(
            f"Best of {len(candidates)} candidates: episode {best['episode']}, score {best['score']:.6e}, "
            f"dF={best['delta_free_energy']:.3e}, {best['cnot_count']} CNOTs -> {reports}"
        )
