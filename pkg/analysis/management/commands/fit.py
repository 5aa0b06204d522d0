import logging

from core.commands import SimulationCommand
from core.exceptions import FitError
from core.utils import dump_json
from inner_codes.models import CodeId
from lattice.models import Boundary
from noise_models.models import NoiseModel
from analysis.scaling import fit_threshold
from analysis.serializers import FitReportSerializer
from analysis.utils import load_threshold_points

logger = logging.getLogger(__name__)


class Command(SimulationCommand):
    help = "Fit threshold and scaling exponent of one scheme from a results CSV."

    def add_arguments(self, parser):
        parser.add_argument("--in", dest="in_path", required=True, help="results CSV written by `simulate`")
        parser.add_argument("--scheme", required=True, choices=CodeId.values)
        parser.add_argument("--model", required=True, choices=NoiseModel.values)
        parser.add_argument("--boundary", default=None, choices=Boundary.values,
                            help="only use rows with this boundary")
        parser.add_argument("--p-min", type=float, default=None)
        parser.add_argument("--p-max", type=float, default=None)
        parser.add_argument("--json", dest="json_path", default=None, help="write the fit report here")
        parser.add_argument("--resamples", type=int, default=None,
                            help="bootstrap resamples (default: BCC_BOOTSTRAP_RESAMPLES)")

    def handle(self, *args, **options):
        points = load_threshold_points(options["in_path"], options["scheme"], options["model"],
                                       options["boundary"])
        if options["p_min"] is not None:
            points = points.loc[points["p"] >= options["p_min"]]
        if options["p_max"] is not None:
            points = points.loc[points["p"] <= options["p_max"]]
        if points.empty:
            raise FitError(f"no rows for {options['scheme']}/{options['model']} in {options['in_path']}")

        result = fit_threshold(points, resamples=options["resamples"], seed=self.seed_from(options),
                               scheme=options["scheme"], model=options["model"])
        report = FitReportSerializer(result).data
        text = dump_json(report, options["json_path"])
        if options["json_path"]:
            self.stdout.write(f"Fit report written to {options['json_path']}")
        elif options["verbosity"] > 1:
            self.stdout.write(text)
        if result.bootstrap_failures:
            logger.warning("%d bootstrap resamples could not be refitted", result.bootstrap_failures)
        self.stdout.write(self.style.SUCCESS(result.summary()))
