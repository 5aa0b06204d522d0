import logging

from core.commands import SimulationCommand
from core.exceptions import ConfigurationError
from core.utils import load_structured
from montecarlo.engine import run_point
from montecarlo.results import append_result, completed_points, load_results, point_key, result_row
from montecarlo.serializers import RunConfigSerializer

logger = logging.getLogger(__name__)


class Command(SimulationCommand):
    help = "Run the Monte Carlo grid of a JSON/YAML run config and append one CSV row per point."

    def add_arguments(self, parser):
        parser.add_argument("--config", required=True, help="run config (JSON or YAML)")
        parser.add_argument("--out", default=None, help="results CSV (default: the config's `output`)")

    def handle(self, *args, **options):
        serializer = RunConfigSerializer(data=load_structured(options["config"]))
        serializer.is_valid(raise_exception=True)
        data = serializer.validated_data

        out = options["out"] or data.get("output")
        if not out:
            raise ConfigurationError("no output path: pass --out or set `output` in the config")
        seed = options["seed"] if options["seed"] is not None else data.get("master_seed")
        seed = self.seed_from({"seed": seed})
        threads = options["threads"] if options["threads"] is not None else data.get("threads")
        threads = self.threads_from({"threads": threads})

        done = completed_points(load_results(out))
        written = skipped = mismatched = 0
        for config in serializer.trial_configs(seed):
            stored = done.get(point_key(*config.key))
            if stored is not None:
                skipped += 1
                if stored != (config.trials, config.master_seed):
                    mismatched += 1
                    logger.warning(
                        "simulate: kept %s (trials=%d, seed=%d); requested trials=%d, seed=%d",
                        config.key, *stored, config.trials, config.master_seed,
                    )
                continue
            stats = run_point(config, threads=threads)
            append_result(out, result_row(config, stats))
            written += 1
            if options["verbosity"] > 1:
                self.stdout.write(
                    f"{config.code:<6} p={config.noise.p:.6g} L={config.L:<3} "
                    f"{stats.failures}/{stats.trials} p_L={stats.p_L:.4g}"
                )

        logger.info("simulate: %d rows written, %d already present in %s", written, skipped, out)
        self.stdout.write(self.style.SUCCESS(f"{written} new rows written to {out} ({skipped} skipped)"))
        if mismatched:
            self.stdout.write(self.style.WARNING(
                f"{mismatched} skipped points were stored with a different trials budget or seed"
            ))
