"""
Exact reduction of fully Z-biased two-qubit noise to phenomenological noise.

Z errors commute with every CZ, so each qubit only collects independent Z
flips: 2p/3 from every gate it takes part in, plus a fixed 4p/3 from
preparation and measurement.  The resulting multiplier of p is the
counting factor of a qubit position.
"""
import logging
from dataclasses import dataclass, field
from typing import Optional, Sequence, Tuple

import numpy as np
from django.conf import settings

from core.exceptions import ConfigurationError
from inner_codes.codes import get_code
from noise_models.models import LocationClass, NoiseModel
from .models import ThresholdSource
from .references import BIASED_THRESHOLDS, reference_threshold

logger = logging.getLogger(__name__)

GATE_Z_RATE = 2.0 / 3.0
# preparation plus measurement, per qubit
SINGLE_QUBIT_Z_RATE = 4.0 / 3.0
DIRECTIONS = 4


def _code(code):
    return get_code(code) if isinstance(code, str) else code


def gates_per_position(code, schedule=None) -> np.ndarray:
    """CZ count per qubit position: the CZ pattern's column sums, once per direction."""
    code = _code(code)
    if schedule is not None:
        return schedule.gates_per_position()
    return DIRECTIONS * code.cz_pattern.sum(axis=0).astype(np.int64)


def biased_factor(code, schedule=None) -> np.ndarray:
    return gates_per_position(code, schedule) * GATE_Z_RATE + SINGLE_QUBIT_Z_RATE


def biased_rates(code, noise, schedule=None) -> np.ndarray:
    """
    Per-position Z-flip rates of the equivalent phenomenological model.

    Contributions are summed, i.e. first order in p; per-location overrides
    replace p for the gate or the single-qubit share.
    """
    gates = gates_per_position(code, schedule)
    return (gates * GATE_Z_RATE * noise.rate_for(LocationClass.CZ)
            + SINGLE_QUBIT_Z_RATE * noise.rate_for(LocationClass.SINGLE_QUBIT))


def is_uniform(factor) -> bool:
    factor = np.asarray(factor, dtype=float)
    return bool(np.allclose(factor, factor[0]))


@dataclass
class BiasedThreshold:
    code: str
    factor: Sequence[float]
    threshold: float
    error: float
    source: str
    method: str
    reference: Optional[Tuple[float, float]] = None
    crossings: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "scheme": self.code,
            "factor": [float(f) for f in self.factor],
            "p_th": self.threshold,
            "error": self.error,
            "source": str(self.source),
            "method": self.method,
            "reference": list(self.reference) if self.reference else None,
        }


def biased_threshold(code, phenomenological: Optional[float] = None, error: float = 0.0, *,
                     sizes=(5, 9), trials=2000, iterations=8, master_seed=None,
                     threads=1) -> BiasedThreshold:
    """
    Biased-noise threshold of one scheme.

    A uniform factor maps the phenomenological threshold exactly.  A
    non-uniform one ([[3,1,1]]_2) is bisected between the two uniform
    extremes on the sign of p_L(large) - p_L(small) of the heterogeneous
    phenomenological simulation.
    """
    code = _code(code)
    name = str(code.name)
    factor = biased_factor(code)
    if phenomenological is None:
        phenomenological, error = reference_threshold(name)
        source = ThresholdSource.REFERENCE
    else:
        source = ThresholdSource.FIT
    if not phenomenological > 0:
        raise ConfigurationError(f"phenomenological threshold for {name} must be positive")

    reference = BIASED_THRESHOLDS.get(name)
    if is_uniform(factor):
        return BiasedThreshold(name, factor.tolist(), phenomenological / factor[0], error / factor[0],
                               source, "exact", reference)

    if len(sizes) != 2 or sizes[0] >= sizes[1]:
        raise ConfigurationError("bisection needs two increasing lattice sizes")
    lo, hi = phenomenological / factor.max(), phenomenological / factor.min()
    seed = settings.BCC_DEFAULT_SEED if master_seed is None else master_seed
    crossings = []
    for step in range(iterations):
        mid = 0.5 * (lo + hi)
        excess = _excess(name, mid, sizes, trials, seed, threads)
        crossings.append((mid, excess))
        logger.info("%s biased bisection %d: p=%.6g, p_L(L=%d) - p_L(L=%d) = %+.4g",
                    name, step + 1, mid, sizes[1], sizes[0], excess)
        if excess < 0:
            lo = mid
        else:
            hi = mid
    return BiasedThreshold(name, factor.tolist(), 0.5 * (lo + hi), 0.5 * (hi - lo),
                           source, "bisection", reference, crossings)


def _excess(code, p, sizes, trials, master_seed, threads) -> float:
    from montecarlo.engine import TrialConfig, run_point
    from noise_models.samplers import NoiseSpec

    stats = [
        run_point(TrialConfig(code, NoiseSpec(NoiseModel.BIASED_Z, p), L, trials=trials,
                              master_seed=master_seed), threads=threads)
        for L in sizes
    ]
    return stats[1].p_L - stats[0].p_L
