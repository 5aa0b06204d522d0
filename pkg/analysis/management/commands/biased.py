from fractions import Fraction

from core.commands import SimulationCommand
from core.exceptions import ConfigurationError
from core.utils import dump_json, load_structured
from inner_codes.models import CodeId
from analysis.biased import biased_threshold
from analysis.serializers import FitReportInputSerializer


def _factor_text(factor):
    values = sorted({str(Fraction(f).limit_denominator(12)) for f in factor})
    return ", ".join(values)


def _percent(value, error=None):
    if value is None:
        return "-"
    text = f"{100 * value:.4g}%"
    return f"{text} ± {100 * error:.2g}" if error else text


class Command(SimulationCommand):
    help = "Thresholds under fully Z-biased noise via the exact mapping to phenomenological noise."

    def add_arguments(self, parser):
        parser.add_argument("--scheme", default=None, choices=CodeId.values,
                            help="one scheme (default: all six)")
        parser.add_argument("--fit-report", default=None,
                            help="phenomenological fit report to use instead of the reference threshold")
        parser.add_argument("--trials", type=int, default=2000,
                            help="trials per point of the non-uniform bisection")
        parser.add_argument("--sizes", type=int, nargs=2, default=(5, 9), metavar=("L_SMALL", "L_LARGE"))
        parser.add_argument("--iterations", type=int, default=8)
        parser.add_argument("--json", dest="json_path", default=None)

    def handle(self, *args, **options):
        schemes = [options["scheme"]] if options["scheme"] else list(CodeId.values)
        phenomenological, error = None, 0.0
        if options["fit_report"]:
            if not options["scheme"]:
                raise ConfigurationError("--fit-report needs --scheme")
            serializer = FitReportInputSerializer(data=load_structured(options["fit_report"]))
            serializer.is_valid(raise_exception=True)
            phenomenological, error = serializer.threshold()

        seed, threads = self.seed_from(options), self.threads_from(options)
        rows = [
            biased_threshold(code, phenomenological, error, sizes=tuple(options["sizes"]),
                             trials=options["trials"], iterations=options["iterations"],
                             master_seed=seed, threads=threads)
            for code in schemes
        ]

        self.stdout.write(f"{'scheme':<8}{'factor':<14}{'p_th':<22}{'reference':<18}method")
        for row in rows:
            reference = _percent(*row.reference) if row.reference else "-"
            self.stdout.write(
                f"{row.code:<8}{_factor_text(row.factor):<14}{_percent(row.threshold, row.error):<22}"
                f"{reference:<18}{row.method}"
            )
        if options["json_path"]:
            dump_json([row.to_dict() for row in rows], options["json_path"])
            self.stdout.write(f"Table written to {options['json_path']}")
        self.stdout.write(self.style.SUCCESS(f"{len(rows)} biased thresholds"))
