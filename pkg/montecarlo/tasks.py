import logging

from celery import shared_task

from core.exceptions import InvariantError
from .engine import run_chunk

logger = logging.getLogger(__name__)


# ------------------------------------------------------------------
#  Trial chunks (one unit of a run_point group)
# ------------------------------------------------------------------
@shared_task(bind=True, max_retries=3, default_retry_delay=10)
def run_trial_chunk(self, payload: dict, start: int, stop: int) -> int:
    """Failure count of trials [start, stop) of the point described by `payload`."""
    try:
        return run_chunk(payload, start, stop)
    except InvariantError:
        logger.exception("decoder invariant broken in trials [%d, %d)", start, stop)
        raise
    except OSError as exc:
        raise self.retry(exc=exc)
