"""
Shared base for the experiment management commands
"""
import logging

from django.core.management.base import BaseCommand, CommandError
from rest_framework import serializers

from utils.exceptions import CapacityError, InvalidArgumentError, TrainingInterrupted

logger = logging.getLogger(__name__)

EXIT_VALIDATION = 2
EXIT_CAPACITY = 3
EXIT_INTERRUPTED = 4


def format_validation_error(error: serializers.ValidationError) -> str:
    """Flatten nested DRF error details into 'path: message' lines"""
    lines = []

    def walk(detail, path):
        if isinstance(detail, dict):
            for key, value in detail.items():
                walk(value, f'{path}.{key}' if path else str(key))
        elif isinstance(detail, list):
            for item in detail:
                walk(item, path)
        else:
            lines.append(f"{path or 'config'}: {detail}")

    walk(error.detail, '')
    return '; '.join(lines)


class ExperimentCommand(BaseCommand):
    """
    BaseCommand that maps library errors onto exit codes:
    2 validation, 3 capacity, 4 interrupted with a checkpoint on disk.
    """

    def execute(self, *args, **options):
        try:
            return super().execute(*args, **options)
        except serializers.ValidationError as exc:
            raise CommandError(f'Invalid configuration: {format_validation_error(exc)}', returncode=EXIT_VALIDATION)
        except (InvalidArgumentError, FileNotFoundError) as exc:
            raise CommandError(str(exc), returncode=EXIT_VALIDATION)
        except CapacityError as exc:
            raise CommandError(str(exc), returncode=EXIT_CAPACITY)
        except TrainingInterrupted as exc:
            logger.warning(f'Training interrupted, checkpoint at {exc.checkpoint_dir}')
            raise CommandError(
                f'{exc} (resume from {exc.checkpoint_dir})', returncode=EXIT_INTERRUPTED
            )

    def success(self, message: str) -> None:
        self.stdout.write(self.style.SUCCESS(message))

    def warn(self, message: str) -> None:
        self.stdout.write(self.style.WARNING(message))
