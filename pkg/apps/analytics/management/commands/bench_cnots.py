import logging
from pathlib import Path

import numpy as np
import pandas as pd

from apps.analytics.filtering import filter_best
from apps.analytics.fitting import fit_cubic, fit_exponential
from apps.analytics.reports import improvement_table, write_band_csv, write_table
from apps.analytics.trotter import cnot_improvement, trotter_cnot_count
from apps.core.commands import ExperimentCommand
from apps.core.rundir import RunDirectory
from apps.syk.hamiltonian import SykInstance
from apps.vqtsp.circuit_io import parse_circuit, read_circuit
from utils.exceptions import InvalidArgumentError
from utils.serialization import dump_json, load_json

from .filter_candidates import resolve_weights

logger = logging.getLogger(__name__)

EXTRAPOLATION_QUBITS = 2
BAND_POINTS = 41


class Command(ExperimentCommand):
    help = (
        'Compare RL circuits against the first-order Trotter CNOT count of an SYK instance, '
        'fit a cubic to the RL CNOT counts across sizes and an exponential to the Trotter counts'
    )

    def add_arguments(self, parser):
        parser.add_argument('--instance', required=True, help='SYK instance JSON')
        parser.add_argument('--circuit', action='append', default=[], help='RL circuit file (repeatable)')
        parser.add_argument('--run', action='append', default=[], help='Run directory; its best candidate is used (repeatable)')
        parser.add_argument(
            '--scaling-run', action='append', default=[], dest='scaling_runs',
            help='Run directory of any size whose best circuit joins the RL scaling fit (repeatable)',
        )
        parser.add_argument(
            '--scaling-circuit', action='append', default=[], dest='scaling_circuits',
            help="RL circuit file of any size, sized by its '# qubits n' header (repeatable)",
        )
        parser.add_argument('--layers', type=int, default=1, help='Trotter layers of the baseline')
        parser.add_argument(
            '--sizes', type=int, nargs='*', default=[8, 10, 12, 14, 16],
            help='Majorana counts for the Trotter scaling fit',
        )
        parser.add_argument('--alpha', type=float, default=0.05, help='Confidence band level')
        parser.add_argument('--output', default='.', help='Output directory')

    def handle(self, *args, **options):
        instance = SykInstance.load(options['instance'])
        n = instance.qubit_count
        layers = options['layers']
        trotter = trotter_cnot_count(instance.hamiltonian(), layers)
        output = Path(options['output'])
        output.mkdir(parents=True, exist_ok=True)

        entries = [read_entry(path, n) for path in options['circuit']]
        entries += [run_entry(directory, n) for directory in options['run']]
        if not entries:
            raise InvalidArgumentError('Give at least one --circuit file or --run directory')
        rows = []
        for label, beta, circuit in entries:
            rows.append({
                'label': label,
                'beta': beta,
                'trotter_cnots': trotter,
                'rl_cnots': circuit.cnot_count,
                'improvement': cnot_improvement(trotter, circuit.cnot_count),
            })
        table = improvement_table(rows)
        write_table(table, output / 'improvement.csv')
        self.stdout.write(table.to_string(index=False))

        entries += [read_entry(path) for path in options['scaling_circuits']]
        entries += [run_entry(directory) for directory in options['scaling_runs']]
        rl = rl_scaling(entries)
        write_table(rl, output / 'rl_scaling.csv', digits=0)
        trotter_counts = trotter_scaling(options['sizes'], instance.seed, layers)
        write_table(trotter_counts, output / 'trotter_scaling.csv', digits=0)

        best = rl.groupby('qubits', as_index=False)['rl_cnots'].min()
        series = {
            'rl_cubic': (fit_cubic, best['qubits'], best['rl_cnots']),
            'trotter_exponential': (fit_exponential, trotter_counts['qubits'], trotter_counts['trotter_cnots']),
        }
        xs = np.concatenate([x.to_numpy(dtype=float) for _, x, _ in series.values()])
        grid = np.union1d(xs, np.linspace(xs.min(), xs.max() + EXTRAPOLATION_QUBITS, BAND_POINTS))
        for name, (fitter, x, y) in series.items():
            self._fit(name, fitter, x.to_numpy(dtype=float), y.to_numpy(dtype=float), grid, options['alpha'], output)
        self.success(f'Trotter baseline {trotter} CNOTs ({layers} layer(s)) for N={instance.majorana_count} -> {output}')

    def _fit(self, name, fitter, x, y, grid, alpha, output):
        try:
            fit = fitter(x, y)
        except InvalidArgumentError as exc:
            self.warn(f'Skipping {name} fit: {exc}')
            return
        if fit.degenerate or not fit.converged:
            self.warn(f"{name} fit is {'degenerate' if fit.degenerate else 'not converged'}")
        write_band_csv(fit, output / f'fit_{name}.csv', xs=grid, alpha=alpha)
        dump_json(fit.as_dict(), output / f'fit_{name}.json')
        logger.info(f'{name} fit parameters {np.array2string(fit.parameters, precision=6)}')


def read_entry(path, qubit_count=None):
    circuit = read_circuit(path, qubit_count=qubit_count)
    return Path(path).stem, None, circuit


def run_entry(directory, qubit_count=None):
    """Best circuit of a run: the filter report when present, otherwise filtered here"""
    run = RunDirectory.open(directory)
    report = run.reports_dir / 'best_candidate.json'
    if report.exists():
        best = load_json(report)
    else:
        best = filter_best(run.candidates(), resolve_weights(run))
    if qubit_count is None:
        qubit_count = run.manifest.get('majoranas', 0) // 2 or None
    return run.path.name, best.get('beta'), parse_circuit(best['circuit'], qubit_count)


def rl_scaling(entries) -> pd.DataFrame:
    rows = [
        {'qubits': circuit.qubit_count, 'label': label, 'rl_cnots': circuit.cnot_count}
        for label, _, circuit in entries
    ]
    frame = pd.DataFrame(rows, columns=['qubits', 'label', 'rl_cnots'])
    return frame.sort_values(['qubits', 'label'], kind='stable').reset_index(drop=True)


def trotter_scaling(sizes, seed, layers) -> pd.DataFrame:
    counts = []
    for majoranas in sorted(set(sizes)):
        hamiltonian = SykInstance.generate(majoranas, seed).hamiltonian()
        counts.append({
            'majoranas': majoranas,
            'qubits': majoranas // 2,
            'terms': len(hamiltonian),
            'trotter_cnots': trotter_cnot_count(hamiltonian, layers),
        })
    return pd.DataFrame(counts, columns=['majoranas', 'qubits', 'terms', 'trotter_cnots'])
