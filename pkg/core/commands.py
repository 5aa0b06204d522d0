"""
Base class for the simulator's management commands.

Adds the shared --seed/--threads flags and turns library errors into
CommandError with the documented exit codes:

- 1: a check ran and failed (detectability)
- 2: user error (bad config, unknown scheme, insufficient data)
- 3: environment error (I/O)
"""
import logging
from functools import wraps

from django.conf import settings
from django.core.management.base import BaseCommand, CommandError
from rest_framework import serializers

from core.exceptions import ConfigurationError, FitError, InputError

logger = logging.getLogger(__name__)

CHECK_FAILED = 1
USER_ERROR = 2
ENVIRONMENT_ERROR = 3


def flatten_error(detail):
    """
    Turn a DRF ValidationError.detail (list, dict or string) into one line.
    """
    if isinstance(detail, dict):
        return "; ".join(f"{k}: {flatten_error(v)}" for k, v in detail.items())
    if isinstance(detail, (list, tuple)):
        return "; ".join(flatten_error(d) for d in detail)
    return str(detail)


def translate_errors(func):
    @wraps(func)
    def wrapper(*args, **kwargs):
        try:
            return func(*args, **kwargs)
        except serializers.ValidationError as exc:
            raise CommandError(flatten_error(exc.detail), returncode=USER_ERROR) from exc
        except (ConfigurationError, InputError, FitError) as exc:
            raise CommandError(str(exc), returncode=USER_ERROR) from exc
        except OSError as exc:
            logger.exception("I/O failure", exc_info=exc)
            raise CommandError(f"I/O error: {exc}", returncode=ENVIRONMENT_ERROR) from exc
    return wrapper


class SimulationCommand(BaseCommand):
    """Every command accepts --seed and --threads; results never depend on --threads."""

    def create_parser(self, prog_name, subcommand, **kwargs):
        parser = super().create_parser(prog_name, subcommand, **kwargs)
        parser.add_argument("--seed", type=int, default=None,
                            help="master seed (default: BCC_DEFAULT_SEED)")
        parser.add_argument("--threads", type=int, default=None,
                            help="worker processes (default: BCC_THREADS)")
        return parser

    def execute(self, *args, **options):
        return translate_errors(super().execute)(*args, **options)

    @staticmethod
    def seed_from(options):
        seed = options.get("seed")
        return settings.BCC_DEFAULT_SEED if seed is None else seed

    @staticmethod
    def threads_from(options):
        threads = options.get("threads")
        threads = settings.BCC_THREADS if threads is None else threads
        if threads < 1:
            raise ConfigurationError("--threads must be at least 1")
        return threads
