from django.core.management.base import CommandError

from core.commands import CHECK_FAILED, SimulationCommand
from inner_codes.codes import get_code
from inner_codes.models import CodeId
from circuit.models import ScheduleVariant
from circuit.propagation import detectability_check
from circuit.tables import as_text, effective_error_table


class Command(SimulationCommand):
    help = "Inject every single- and two-qubit fault into a gate schedule and report which ones convert to erasures."

    def add_arguments(self, parser):
        parser.add_argument("--scheme", required=True, choices=CodeId.values)
        parser.add_argument("--schedule", default=ScheduleVariant.FIG5, choices=ScheduleVariant.values)
        parser.add_argument("--json", dest="json_path", default=None,
                            help="also write the full fault table as JSON to this path")
        parser.add_argument("--all-rows", action="store_true",
                            help="print every fault, not just the failing ones")
        parser.add_argument("--table", action="store_true",
                            help="also print the X_C, X_CZ_D, Z_D effective errors for every gate of C1")
        parser.add_argument("--engine", default=None, help="outer decoder engine override")

    def handle(self, *args, **options):
        code = get_code(options["scheme"])
        report = detectability_check(code, variant=options["schedule"], engine=options["engine"])

        if options["json_path"]:
            report.to_json(options["json_path"])
            self.stdout.write(f"Fault table written to {options['json_path']}")

        if options["table"]:
            rows = effective_error_table(code, variant=options["schedule"], engine=options["engine"])
            self.stdout.write(as_text(str(code.name), rows))

        if options["all_rows"] or not report.passed:
            self.stdout.write(report.as_text(only_failures=not options["all_rows"]))
        elif options["verbosity"] > 1:
            self.stdout.write(f"{report.code} / {report.variant}: {len(report.faults)} faults checked")

        if not report.passed:
            raise CommandError(report.summary(), returncode=CHECK_FAILED)
        self.stdout.write(self.style.SUCCESS(report.summary()))
