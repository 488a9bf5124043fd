from pathlib import Path

from django.conf import settings

from apps.core.commands import ExperimentCommand
from apps.core.serializers import InstanceSerializer
from apps.syk.hamiltonian import SykInstance


class Command(ExperimentCommand):
    help = 'Generate a seeded dense SYK instance and write it as JSON'

    def add_arguments(self, parser):
        parser.add_argument('--majoranas', '-N', type=int, required=True, help='Number of Majorana fermions (even)')
        parser.add_argument('--seed', type=int, required=True, help='Unsigned 64-bit coupling seed')
        parser.add_argument('--output', help='Instance file (default: <output dir>/instances/syk_N<N>_seed<seed>.json)')

    def handle(self, *args, **options):
        serializer = InstanceSerializer(data={'majoranas': options['majoranas'], 'seed': options['seed']})
        serializer.is_valid(raise_exception=True)
        majoranas = serializer.validated_data['majoranas']
        seed = serializer.validated_data['seed']

        output = options.get('output')
        if output is None:
            output = Path(settings.OUTPUT_DIR) / 'instances' / f'syk_N{majoranas}_seed{seed}.json'

        instance = SykInstance.generate(majoranas, seed)
        path = instance.save(output)
        self.success(f'Wrote SYK instance N={majoranas} seed={seed} ({len(instance.couplings)} couplings) to {path}')
