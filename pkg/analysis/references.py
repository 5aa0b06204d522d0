"""
Published reference values, stored as (value, uncertainty) pairs.

Thresholds are probabilities (not percentages).  They are the defaults for
the biased-noise reduction and the comparison column of every report.
"""
from types import MappingProxyType

from core.exceptions import ConfigurationError
from inner_codes.models import CodeId
from noise_models.models import NoiseModel


def _table(rows):
    return MappingProxyType({str(code): (value, error) for code, value, error in rows})


PHENOMENOLOGICAL_THRESHOLDS = _table([
    (CodeId.CUBIC, 0.02936, 0.00002),
    (CodeId.C4112, 0.04195, 0.00005),
    (CodeId.C713, 0.04137, 0.00005),
    (CodeId.C211, 0.08034, 0.00003),
    (CodeId.C311_1, 0.1026, 0.0001),
    (CodeId.C311_2, 0.0566, 0.0001),
])

CIRCUIT_LEVEL_THRESHOLDS = _table([
    (CodeId.CUBIC, 0.005692, 0.000001),
    (CodeId.C4112, 0.00701, 0.00001),
    (CodeId.C713, 0.00678, 0.00001),
    (CodeId.C211, 0.00664, 0.00003),
    (CodeId.C311_1, 0.003216, 0.000001),
    (CodeId.C311_2, 0.006947, 0.000002),
])

BIASED_THRESHOLDS = _table([
    (CodeId.CUBIC, 0.00734, 0.00005),
    (CodeId.C4112, 0.0105, 0.0001),
    (CodeId.C713, 0.0103, 0.0002),
    (CodeId.C211, 0.01205, 0.00001),
    (CodeId.C311_1, 0.01090, 0.00005),
    (CodeId.C311_2, 0.0118, 0.0005),
])

# L_c / L at p = 1e-3 and p_L = 1e-6, relative to the cubic scheme
OVERHEAD_RATIOS = MappingProxyType({
    str(CodeId.CUBIC): 1.00,
    str(CodeId.C4112): 1.27,
    str(CodeId.C713): 2.40,
    str(CodeId.C211): 0.68,
    str(CodeId.C311_1): 4.74,
    str(CodeId.C311_2): 1.43,
})

SCALING_EXPONENTS = MappingProxyType({
    str(NoiseModel.PHENOMENOLOGICAL): _table([
        (CodeId.CUBIC, 0.92, 0.01),
        (CodeId.C4112, 1.28, 0.06),
        (CodeId.C713, 1.13, 0.07),
        (CodeId.C211, 1.40, 0.09),
        (CodeId.C311_1, 1.04, 0.03),
        (CodeId.C311_2, 1.21, 0.03),
    ]),
    str(NoiseModel.CIRCUIT_LEVEL): _table([
        (CodeId.CUBIC, 0.88, 0.01),
        (CodeId.C4112, 1.26, 0.03),
        (CodeId.C713, 1.06, 0.02),
        (CodeId.C211, 1.29, 0.07),
        (CodeId.C311_1, 1.04, 0.02),
        (CodeId.C311_2, 1.04, 0.03),
    ]),
})

_THRESHOLDS = {
    str(NoiseModel.PHENOMENOLOGICAL): PHENOMENOLOGICAL_THRESHOLDS,
    str(NoiseModel.CIRCUIT_LEVEL): CIRCUIT_LEVEL_THRESHOLDS,
    str(NoiseModel.BIASED_Z): BIASED_THRESHOLDS,
}


def reference_threshold(code, model=NoiseModel.PHENOMENOLOGICAL):
    """(value, uncertainty) for one scheme under one noise model."""
    table = _THRESHOLDS.get(str(model))
    if table is None or str(code) not in table:
        raise ConfigurationError(f"no reference threshold for {code} under {model}")
    return table[str(code)]
