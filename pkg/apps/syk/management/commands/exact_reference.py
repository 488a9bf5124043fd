import logging
from pathlib import Path

import pandas as pd

from apps.core.commands import ExperimentCommand
from apps.syk.hamiltonian import SykInstance
from apps.syk.thermal import exact_thermal
from utils.conf import domain_setting
from utils.serialization import dump_json

logger = logging.getLogger(__name__)


class Command(ExperimentCommand):
    help = 'Exact Gibbs-state energy, entropy and free energy of an SYK instance per beta'

    def add_arguments(self, parser):
        parser.add_argument('instance', help='Instance JSON written by generate_instance')
        parser.add_argument('--betas', type=float, nargs='+', help='Inverse temperatures (default from settings)')
        parser.add_argument('--prefactor', type=float, help='Hamiltonian prefactor (default from settings)')
        parser.add_argument('--output', help='Reference JSON path; a CSV is written next to it')

    def handle(self, *args, **options):
        instance = SykInstance.load(options['instance'])
        betas = options.get('betas') or domain_setting('DEFAULT_BETAS', [5.2, 18.0, 35.0])
        hamiltonian = instance.hamiltonian(prefactor=options.get('prefactor'))

        rows = []
        for beta in betas:
            reference = exact_thermal(hamiltonian, beta)
            rows.append(reference.as_dict())
            logger.info(f'beta={beta}: F={reference.free_energy} E={reference.energy:.8f} S={reference.entropy:.8f}')

        output = Path(options.get('output') or Path(options['instance']).with_suffix('.reference.json'))
        dump_json(
            {'N': instance.majorana_count, 'seed': instance.seed, 'qubits': instance.qubit_count, 'references': rows},
            output,
        )
        pd.DataFrame(rows).to_csv(output.with_suffix('.csv'), index=False, float_format='%.17g')
        self.success(f'Wrote exact references for {len(rows)} beta values to {output}')
