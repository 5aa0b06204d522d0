import logging
import math

import pandas as pd

from core.commands import SimulationCommand
from core.exceptions import ConfigurationError
from inner_codes.codes import get_code
from inner_codes.models import CodeId
from lattice.models import Boundary
from montecarlo.results import FLOAT_FORMAT, load_results
from noise_models.models import NoiseModel
from analysis.models import PauliRounding
from analysis.overhead import log_overhead_211, log_overhead_bcc
from analysis.references import OVERHEAD_RATIOS
from analysis.scaling import OverheadRatio, SuppressionFit, fit_suppression, overhead_ratio
from analysis.utils import suppression_rows

logger = logging.getLogger(__name__)

COLUMNS = ["scheme", "p", "target_p_L", "L_scheme", "L_reference", "block_size", "ratio",
           "reference_ratio", "extrapolated", "source"]
MAX_ANALYTIC_L = 400


def _analytic_size(scheme, p, target, rounding):
    """Smallest L whose leading-order rate is at most `target`."""
    log_target = math.log(target)
    for L in range(1, MAX_ANALYTIC_L + 1):
        if scheme == CodeId.C211:
            value = log_overhead_211(L, p, rounding).value
        else:
            value = log_overhead_bcc(L, p)
        if value <= log_target:
            return L
    raise ConfigurationError(f"leading-order rate of {scheme} never reaches {target} below L={MAX_ANALYTIC_L}")


class Command(SimulationCommand):
    help = "Spacetime overhead of a scheme relative to the cubic scheme at a target logical error rate."

    def add_arguments(self, parser):
        parser.add_argument("--scheme", required=True, choices=CodeId.values)
        parser.add_argument("--p", type=float, required=True)
        parser.add_argument("--target", type=float, required=True, help="target logical error rate")
        parser.add_argument("--in", dest="in_path", default=None,
                            help="results CSV; without it the leading-order formulas are used (cubic and 211 only)")
        parser.add_argument("--model", default=NoiseModel.CIRCUIT_LEVEL, choices=NoiseModel.values)
        parser.add_argument("--boundary", default=None, choices=Boundary.values)
        parser.add_argument("--pauli-rounding", default=PauliRounding.FLOOR, choices=PauliRounding.values)
        parser.add_argument("--out", default=None, help="CSV path (default: stdout)")

    def handle(self, *args, **options):
        scheme, p, target = options["scheme"], options["p"], options["target"]
        if not 0 < target < 1:
            raise ConfigurationError(f"--target must lie in (0, 1), got {target}")
        code = get_code(scheme)

        if options["in_path"]:
            frame = load_results(options["in_path"])
            fits = {
                name: self._fit(frame, name, options)
                for name in dict.fromkeys([scheme, str(CodeId.CUBIC)])
            }
            result = overhead_ratio(scheme, fits[scheme], fits[str(CodeId.CUBIC)], target, code.s)
            source = "fit"
        else:
            if scheme not in (CodeId.CUBIC, CodeId.C211):
                raise ConfigurationError("leading-order overhead is only available for cubic and 211; pass --in")
            size = _analytic_size(scheme, p, target, options["pauli_rounding"])
            reference = _analytic_size(CodeId.CUBIC, p, target, options["pauli_rounding"])
            result = OverheadRatio(scheme, p, target, size, reference, code.s, code.s * size ** 2 / reference ** 2)
            source = "leading_order"

        row = {**result.to_dict(), "reference_ratio": OVERHEAD_RATIOS.get(scheme), "source": source}
        table = pd.DataFrame([row], columns=COLUMNS)
        if options["out"]:
            table.to_csv(options["out"], index=False, float_format=FLOAT_FORMAT)
            self.stdout.write(f"Overhead written to {options['out']}")
        else:
            self.stdout.write(table.to_csv(index=False, float_format=FLOAT_FORMAT).rstrip("\n"))
        for message in result.warnings:
            self.stdout.write(self.style.WARNING(message))
        self.stdout.write(self.style.SUCCESS(f"{scheme}: overhead ratio {result.ratio:.3g} at p={p:g}, "
                                             f"p_L={target:g}"))

    @staticmethod
    def _fit(frame, scheme, options) -> SuppressionFit:
        rows = suppression_rows(frame, scheme, options["model"], options["p"], options["boundary"])
        logger.info("%s: suppression fit over L=%s", scheme, rows["L"].tolist())
        return fit_suppression(rows["L"], rows["p_L"], p=options["p"])
