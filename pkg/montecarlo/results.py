"""
Append-only CSV of simulated points, one row per (scheme, model, p, L, boundary).
"""
import logging
from pathlib import Path

import pandas as pd

from core.exceptions import InputError

logger = logging.getLogger(__name__)

COLUMNS = [
    "scheme", "model", "p", "L", "boundary",
    "trials", "failures", "p_L", "ci_low", "ci_high", "master_seed",
]
KEY_COLUMNS = COLUMNS[:5]
FLOAT_FORMAT = "%.10g"
_TEXT = {"scheme": str, "model": str, "boundary": str}


def point_key(scheme, model, p, L, boundary) -> tuple:
    # p goes through the CSV float format so written and re-read keys agree
    return str(scheme), str(model), float(FLOAT_FORMAT % float(p)), int(L), str(boundary)


def load_results(path) -> pd.DataFrame:
    path = Path(path)
    if not path.exists() or path.stat().st_size == 0:
        return pd.DataFrame(columns=COLUMNS)
    frame = pd.read_csv(path, dtype=_TEXT)
    missing = set(COLUMNS) - set(frame.columns)
    if missing:
        raise InputError(f"{path} is missing columns {sorted(missing)}")
    return frame


def completed_points(frame: pd.DataFrame) -> dict:
    """Resume key -> (trials, master_seed) of the stored row; the last row of a key wins."""
    points = {}
    for row in frame[KEY_COLUMNS + ["trials", "master_seed"]].itertuples(index=False):
        points[point_key(*row[:5])] = (int(row.trials), int(row.master_seed))
    return points


def result_row(config, stats) -> dict:
    scheme, model, p, L, boundary = config.key
    return {
        "scheme": scheme,
        "model": model,
        "p": p,
        "L": L,
        "boundary": boundary,
        "trials": stats.trials,
        "failures": stats.failures,
        "p_L": stats.p_L,
        "ci_low": stats.ci_low,
        "ci_high": stats.ci_high,
        "master_seed": config.master_seed,
    }


def append_result(path, row: dict) -> None:
    path = Path(path)
    header = not path.exists() or path.stat().st_size == 0
    path.parent.mkdir(parents=True, exist_ok=True)
    pd.DataFrame([row], columns=COLUMNS).to_csv(
        path, mode="a", header=header, index=False, float_format=FLOAT_FORMAT,
    )
