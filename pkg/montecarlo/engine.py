"""
The trial loop: sample noise on one lattice, read the inner codes, decode
the primal outer code and count logical failures.

Trial t always draws from trial_rng(master_seed, t), so a point's failure
count does not depend on chunking, worker count or backend.
"""
import logging
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional

import numpy as np
from billiard import Pool
from celery import group
from django.conf import settings
from scipy.stats import binomtest

from analysis.biased import SINGLE_QUBIT_Z_RATE, biased_rates
from analysis.rates import effective_rates_211
from circuit.propagation import conjugate_step
from circuit.schedules import schedule_for
from core.exceptions import ConfigurationError
from decoder.pipeline import BlockReadout, decode_and_judge, inner_stage
from inner_codes.codes import get_code
from inner_codes.models import CodeId
from lattice.geometry import build_lattice
from lattice.models import Boundary
from noise_models.models import LocationClass, NoiseModel
from noise_models.rng import trial_rng
from noise_models.samplers import (
    NoiseSpec, PauliFrame, sample_biased_two_qubit, sample_erasure_pauli, sample_phenomenological_flips,
    sample_single_depolarizing, sample_two_qubit_depolarizing, sample_z_flips,
)
from .models import Backend, BiasedPath

logger = logging.getLogger(__name__)

CONFIDENCE = 0.95


# ──────────────────────────────────────────
# Types
# ──────────────────────────────────────────
@dataclass(frozen=True)
class TrialConfig:
    code: str
    noise: NoiseSpec
    L: int
    boundary: str = Boundary.TORUS
    trials: int = 1
    master_seed: int = 0
    biased_path: str = BiasedPath.REDUCED
    engine: Optional[str] = None
    # None: follow BCC_IDLE_NOISE
    idle_noise: Optional[bool] = None

    def __post_init__(self):
        code = get_code(self.code)
        object.__setattr__(self, "code", str(code.name))
        object.__setattr__(self, "L", int(self.L))
        object.__setattr__(self, "trials", int(self.trials))
        object.__setattr__(self, "master_seed", int(self.master_seed))
        if self.trials < 1:
            raise ConfigurationError(f"trials must be at least 1, got {self.trials}")
        if self.L < 2:
            raise ConfigurationError(f"L must be at least 2, got {self.L}")
        if str(self.boundary) not in Boundary.values:
            raise ConfigurationError(f"unknown boundary {self.boundary!r}")
        if str(self.biased_path) not in BiasedPath.values:
            raise ConfigurationError(f"unknown biased path {self.biased_path!r}")
        object.__setattr__(self, "boundary", str(self.boundary))
        object.__setattr__(self, "biased_path", str(self.biased_path))
        if self.noise.model == NoiseModel.ERASURE_PAULI and self.code != CodeId.CUBIC:
            raise ConfigurationError("erasure_pauli noise is only defined for the cubic scheme")

    @property
    def key(self) -> tuple:
        return self.code, str(self.noise.model), self.noise.p, self.L, self.boundary

    def to_dict(self) -> dict:
        return {
            "code": self.code,
            "noise": self.noise.to_dict(),
            "L": self.L,
            "boundary": self.boundary,
            "trials": self.trials,
            "master_seed": self.master_seed,
            "biased_path": self.biased_path,
            "engine": self.engine,
            "idle_noise": self.idle_noise,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "TrialConfig":
        data = dict(data)
        noise = data.pop("noise")
        rates = noise.get("erasure_rates")
        spec = NoiseSpec(
            noise["model"], noise["p"],
            noise.get("per_location_overrides") or None,
            tuple(rates) if rates else None,
        )
        return cls(noise=spec, **data)


def wilson_interval(failures: int, trials: int, confidence: float = CONFIDENCE):
    if trials < 1:
        raise ConfigurationError("an interval needs at least one trial")
    ci = binomtest(int(failures), int(trials)).proportion_ci(confidence_level=confidence, method="wilson")
    rate = failures / trials
    return max(0.0, min(float(ci.low), rate)), min(1.0, max(float(ci.high), rate))


@dataclass(frozen=True)
class TrialStats:
    trials: int
    failures: int
    p_L: float
    ci_low: float
    ci_high: float

    @classmethod
    def from_counts(cls, trials: int, failures: int) -> "TrialStats":
        low, high = wilson_interval(failures, trials)
        return cls(int(trials), int(failures), failures / trials, low, high)


# ──────────────────────────────────────────
# Per-trial sampling
# ──────────────────────────────────────────
@lru_cache(maxsize=32)
def _context(code_name, L, boundary):
    return get_code(code_name), build_lattice(L, boundary)


@lru_cache(maxsize=32)
def _schedule(code_name, L, boundary):
    code, layout = _context(code_name, L, boundary)
    return schedule_for(code, layout)


def _primal_readout(frame, code, layout) -> BlockReadout:
    flips = frame.z.reshape(-1, code.s)[layout.primal_blocks]
    return inner_stage(layout, code, flips)


def _phenomenological(config, code, layout, rng):
    return inner_stage(layout, code, sample_phenomenological_flips(layout, code, config.noise.p, rng))


def _circuit_level(config, code, layout, rng):
    schedule = _schedule(config.code, config.L, config.boundary)
    p = config.noise.p
    idle_noise = settings.BCC_IDLE_NOISE if config.idle_noise is None else config.idle_noise
    everyone = np.arange(schedule.n_qubits)

    frame = PauliFrame.zeros(schedule.n_qubits)
    sample_single_depolarizing(frame, everyone, p, rng)
    for gates, idle in zip(schedule.steps, schedule.idle_qubits):
        conjugate_step(frame, gates)
        sample_two_qubit_depolarizing(frame, gates[:, 0], gates[:, 1], p, rng)
        if idle_noise:
            sample_single_depolarizing(frame, idle, p, rng)
    sample_single_depolarizing(frame, everyone, p, rng)
    return _primal_readout(frame, code, layout)


def _biased(config, code, layout, rng):
    if config.biased_path == BiasedPath.REDUCED:
        rates = biased_rates(code, config.noise)
        return inner_stage(layout, code, sample_phenomenological_flips(layout, code, rates, rng))

    # Z flips commute with every CZ, so nothing needs propagating
    schedule = _schedule(config.code, config.L, config.boundary)
    everyone = np.arange(schedule.n_qubits)
    single = 0.5 * SINGLE_QUBIT_Z_RATE * config.noise.rate_for(LocationClass.SINGLE_QUBIT)
    frame = PauliFrame.zeros(schedule.n_qubits)
    sample_z_flips(frame, everyone, single, rng)
    for gates in schedule.steps:
        sample_biased_two_qubit(frame, gates[:, 0], gates[:, 1], config.noise.rate_for(LocationClass.CZ), rng)
    sample_z_flips(frame, everyone, single, rng)
    return _primal_readout(frame, code, layout)


def _erasure_pauli(config, code, layout, rng):
    p_pauli, p_erasure = config.noise.erasure_rates or effective_rates_211(config.noise.p)
    flips, erased = sample_erasure_pauli(layout, p_pauli, p_erasure, rng)
    return BlockReadout(flips, erased)


_SAMPLERS = {
    NoiseModel.PHENOMENOLOGICAL: _phenomenological,
    NoiseModel.CIRCUIT_LEVEL: _circuit_level,
    NoiseModel.BIASED_Z: _biased,
    NoiseModel.ERASURE_PAULI: _erasure_pauli,
}


def run_trial(config: TrialConfig, trial_index: int) -> bool:
    """One trial; True on a logical failure."""
    code, layout = _context(config.code, config.L, config.boundary)
    rng = trial_rng(config.master_seed, trial_index)
    readout = _SAMPLERS[config.noise.model](config, code, layout, rng)
    return decode_and_judge(layout, readout, engine=config.engine).failure


# ──────────────────────────────────────────
# Aggregation
# ──────────────────────────────────────────
def run_chunk(config, start: int, stop: int) -> int:
    """Failures among trials [start, stop); `config` may be a TrialConfig or its dict."""
    if isinstance(config, dict):
        config = TrialConfig.from_dict(config)
    failures = sum(run_trial(config, t) for t in range(start, stop))
    logger.debug("%s %s p=%.6g L=%d trials [%d, %d): %d failures",
                 config.code, config.noise.model, config.noise.p, config.L, start, stop, failures)
    return int(failures)


def _chunks(trials, size):
    if size < 1:
        raise ConfigurationError(f"chunk size must be at least 1, got {size}")
    return [(start, min(start + size, trials)) for start in range(0, trials, size)]


def run_point(config: TrialConfig, threads: int = 1, backend: Optional[str] = None,
              chunk_size: Optional[int] = None) -> TrialStats:
    chunks = _chunks(config.trials, chunk_size or settings.BCC_CHUNK_SIZE)
    if backend is None:
        if settings.BCC_USE_CELERY:
            backend = Backend.CELERY
        else:
            backend = Backend.POOL if threads > 1 else Backend.SERIAL
    if str(backend) not in Backend.values:
        raise ConfigurationError(f"unknown backend {backend!r}")

    if backend == Backend.CELERY:
        from .tasks import run_trial_chunk
        payload = config.to_dict()
        counts = group([run_trial_chunk.s(payload, start, stop) for start, stop in chunks]).apply_async().get()
    elif backend == Backend.POOL and len(chunks) > 1:
        payload = config.to_dict()
        pool = Pool(processes=max(1, min(threads, len(chunks))))
        try:
            counts = pool.starmap(run_chunk, [(payload, start, stop) for start, stop in chunks])
        finally:
            pool.close()
            pool.join()
    else:
        counts = [run_chunk(config, start, stop) for start, stop in chunks]

    stats = TrialStats.from_counts(config.trials, sum(counts))
    logger.info("%s %s p=%.6g L=%d: %d/%d failures (p_L=%.4g)", config.code, config.noise.model,
                config.noise.p, config.L, stats.failures, stats.trials, stats.p_L)
    return stats
