import logging

from apps.agent.runs import experiment_root, train_runs
from apps.analytics.reports import architecture_table, write_table
from apps.core.commands import ExperimentCommand
from apps.core.serializers import ARCHITECTURES, CompareRunConfigSerializer, resolve_run_config

from .train_agent import add_run_arguments, run_overrides

logger = logging.getLogger(__name__)


class Command(ExperimentCommand):
    help = 'Train CNN and FNN agents on the same instance and seeds and tabulate their best circuits'

    def add_arguments(self, parser):
        add_run_arguments(parser)
        parser.add_argument('--architectures', nargs='+', choices=ARCHITECTURES)
        parser.add_argument('--resume', action='store_true')

    def handle(self, *args, **options):
        overrides = run_overrides(options)
        if options.get('architectures'):
            overrides['architectures'] = options['architectures']
        config = resolve_run_config(CompareRunConfigSerializer, options.get('config'), overrides)
        summaries = train_runs(
            config, resume=options['resume'], architectures=config['architectures'], command='compare_architectures'
        )

        root = experiment_root(config)
        table = architecture_table(summaries)
        write_table(table, root / 'architectures.csv', digits=6)
        self.stdout.write(table.to_string(index=False))
        self.success(f"Compared {', '.join(config['architectures'])} over {len(summaries)} run(s) -> {root}")
