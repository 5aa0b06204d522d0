"""
Noise samplers in the Pauli-frame (flip) representation.

Every sampler takes the trial's Generator and mutates or returns bit arrays;
nothing here holds state between calls.  The qubit arguments accept a
single index or an array of distinct indices so one call covers a whole
timestep.
"""
import logging
from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Mapping, Optional, Tuple

import numpy as np

from core.exceptions import ConfigurationError, InputError
from .models import LocationClass, NoiseModel

logger = logging.getLogger(__name__)

SINGLE_QUBIT_LIMIT = 2.0 / 3.0
TWO_QUBIT_LIMIT = 15.0 / 16.0
BIASED_LIMIT = 1.0

_MODEL_LIMITS = {
    NoiseModel.PHENOMENOLOGICAL: SINGLE_QUBIT_LIMIT,
    # gates use the 15/16 channel, but prep/idle/measure use the single-qubit one
    NoiseModel.CIRCUIT_LEVEL: SINGLE_QUBIT_LIMIT,
    NoiseModel.BIASED_Z: BIASED_LIMIT,
    NoiseModel.ERASURE_PAULI: 1.0,
}


def _check_rate(p, limit, what):
    rates = np.asarray(p, dtype=float)
    if not np.isfinite(rates).all() or (rates < 0).any() or (rates > limit).any():
        raise ConfigurationError(f"{what} rate must lie in [0, {limit:.6g}], got {p!r}")


# ──────────────────────────────────────────
# Types
# ──────────────────────────────────────────
@dataclass(frozen=True)
class NoiseSpec:
    model: str
    p: float
    # location class -> absolute rate; biased_z only
    per_location_overrides: Optional[Mapping[str, float]] = None
    # (p_P, p_E) for erasure_pauli; derived from p by the caller when absent
    erasure_rates: Optional[Tuple[float, float]] = None

    def __post_init__(self):
        if self.model not in NoiseModel.values:
            raise ConfigurationError(
                f"unknown noise model {self.model!r} (known: {', '.join(NoiseModel.values)})"
            )
        object.__setattr__(self, "model", NoiseModel(self.model))
        object.__setattr__(self, "p", float(self.p))
        _check_rate(self.p, _MODEL_LIMITS[self.model], self.model)

        if self.per_location_overrides:
            if self.model != NoiseModel.BIASED_Z:
                raise ConfigurationError("per-location overrides are only valid for biased_z")
            unknown = set(self.per_location_overrides) - set(LocationClass.values)
            if unknown:
                raise ConfigurationError(f"unknown location classes: {sorted(unknown)}")
            for name, rate in self.per_location_overrides.items():
                _check_rate(rate, BIASED_LIMIT, f"{name} override")
            object.__setattr__(
                self, "per_location_overrides",
                MappingProxyType({str(k): float(v) for k, v in self.per_location_overrides.items()}),
            )

        if self.erasure_rates is not None:
            if self.model != NoiseModel.ERASURE_PAULI:
                raise ConfigurationError("erasure rates are only valid for erasure_pauli")
            if len(self.erasure_rates) != 2:
                raise ConfigurationError("erasure rates must be a (p_P, p_E) pair")
            _check_rate(self.erasure_rates, 1.0, "erasure/Pauli")
            object.__setattr__(self, "erasure_rates", tuple(float(r) for r in self.erasure_rates))

    def rate_for(self, location: str) -> float:
        """Rate at one location class, after overrides."""
        if self.per_location_overrides:
            return self.per_location_overrides.get(str(location), self.p)
        return self.p

    def with_p(self, p: float) -> "NoiseSpec":
        return NoiseSpec(self.model, p, self.per_location_overrides, self.erasure_rates)

    def to_dict(self) -> dict:
        return {
            "model": str(self.model),
            "p": self.p,
            "per_location_overrides": dict(self.per_location_overrides or {}),
            "erasure_rates": list(self.erasure_rates) if self.erasure_rates else None,
        }


@dataclass
class PauliFrame:
    """X and Z flip bits over every physical qubit (or a (qubits, batch) array)."""
    x: np.ndarray
    z: np.ndarray = field(default=None)

    def __post_init__(self):
        self.x = np.asarray(self.x, dtype=np.uint8)
        self.z = np.zeros_like(self.x) if self.z is None else np.asarray(self.z, dtype=np.uint8)
        if self.x.shape != self.z.shape:
            raise InputError(f"frame halves differ in shape: {self.x.shape} vs {self.z.shape}")

    @classmethod
    def zeros(cls, n_qubits: int, batch: Optional[int] = None) -> "PauliFrame":
        shape = (n_qubits,) if batch is None else (n_qubits, batch)
        return cls(np.zeros(shape, dtype=np.uint8), np.zeros(shape, dtype=np.uint8))

    @property
    def n_qubits(self) -> int:
        return self.x.shape[0]

    def copy(self) -> "PauliFrame":
        return PauliFrame(self.x.copy(), self.z.copy())

    def __xor__(self, other: "PauliFrame") -> "PauliFrame":
        return PauliFrame(self.x ^ other.x, self.z ^ other.z)

    def is_identity(self) -> bool:
        return not (self.x.any() or self.z.any())


# ──────────────────────────────────────────
# Circuit-location channels
# ──────────────────────────────────────────
def sample_single_depolarizing(frame: PauliFrame, qubits, p: float, rng: np.random.Generator) -> None:
    """X, Y, Z with probability p/2 each; marginal X and Z rates are both p."""
    _check_rate(p, SINGLE_QUBIT_LIMIT, "single-qubit depolarizing")
    qubits = np.atleast_1d(qubits)
    if p == 0 or qubits.size == 0:
        return
    u = rng.random(qubits.size)
    # [0, p/2) X, [p/2, p) Y, [p, 3p/2) Z
    frame.x[qubits] ^= (u < p).astype(np.uint8)
    frame.z[qubits] ^= ((u >= p / 2) & (u < 1.5 * p)).astype(np.uint8)


def two_qubit_paulis(k: np.ndarray):
    """Decode outcome labels 0..15 into (xa, za, xb, zb) bits; 0 is identity."""
    k = np.asarray(k)
    return tuple(((k >> shift) & 1).astype(np.uint8) for shift in range(4))


def sample_two_qubit_depolarizing(frame: PauliFrame, qubits_a, qubits_b, p: float,
                                  rng: np.random.Generator) -> None:
    """Each of the 15 non-identity two-qubit Paulis with probability p/15."""
    _check_rate(p, TWO_QUBIT_LIMIT, "two-qubit depolarizing")
    a, b = _pair(qubits_a, qubits_b)
    if p == 0 or a.size == 0:
        return
    fire = rng.random(a.size) < p
    k = np.where(fire, rng.integers(1, 16, size=a.size), 0)
    xa, za, xb, zb = two_qubit_paulis(k)
    frame.x[a] ^= xa
    frame.z[a] ^= za
    frame.x[b] ^= xb
    frame.z[b] ^= zb


def sample_biased_two_qubit(frame: PauliFrame, qubits_a, qubits_b, p: float,
                            rng: np.random.Generator) -> None:
    """ZZ, ZI and IZ with probability p/3 each; X bits are never touched."""
    _check_rate(p, BIASED_LIMIT, "biased two-qubit")
    a, b = _pair(qubits_a, qubits_b)
    if p == 0 or a.size == 0:
        return
    u = rng.random(a.size)
    # [0, p/3) ZZ, [p/3, 2p/3) ZI, [2p/3, p) IZ
    frame.z[a] ^= (u < 2 * p / 3).astype(np.uint8)
    frame.z[b] ^= ((u < p / 3) | ((u >= 2 * p / 3) & (u < p))).astype(np.uint8)


def sample_z_flips(frame: PauliFrame, qubits, p: float, rng: np.random.Generator) -> None:
    """Independent Z flips; the single-qubit part of the biased channel."""
    _check_rate(p, BIASED_LIMIT, "Z flip")
    qubits = np.atleast_1d(qubits)
    if p == 0 or qubits.size == 0:
        return
    frame.z[qubits] ^= (rng.random(qubits.size) < p).astype(np.uint8)


def _pair(qubits_a, qubits_b):
    a = np.atleast_1d(qubits_a)
    b = np.atleast_1d(qubits_b)
    if a.shape != b.shape:
        raise InputError("gate endpoint arrays differ in length")
    if (a == b).any():
        raise InputError("a two-qubit channel needs two distinct qubits")
    return a, b


# ──────────────────────────────────────────
# Whole-lattice samplers
# ──────────────────────────────────────────
def sample_phenomenological_flips(layout, code, p, rng: np.random.Generator) -> np.ndarray:
    """
    Z flips on every physical qubit of the primal blocks, as an
    (n_primal, s) uint8 array.

    `p` is a single rate or a length-s vector of per-position rates (the
    heterogeneous form used by the biased reduction).
    """
    rates = np.asarray(p, dtype=float)
    if rates.ndim == 0:
        _check_rate(rates, SINGLE_QUBIT_LIMIT, "phenomenological")
    else:
        if rates.shape != (code.s,):
            raise InputError(f"expected {code.s} per-position rates, got shape {rates.shape}")
        _check_rate(rates, 1.0, "per-position")
    return (rng.random((layout.n_primal, code.s)) < rates).astype(np.uint8)


def sample_erasure_pauli(layout, p_pauli: float, p_erasure: float, rng: np.random.Generator):
    """
    Block-level losses and flips for the cubic scheme.

    Returns (logical_flip, erased) over primal blocks; an erased block's
    reported outcome is a fair coin.
    """
    _check_rate(p_pauli, 1.0, "Pauli")
    _check_rate(p_erasure, 1.0, "erasure")
    n = layout.n_primal
    erased = rng.random(n) < p_erasure
    coin = rng.random(n) < 0.5
    flipped = rng.random(n) < p_pauli
    return np.where(erased, coin, flipped).astype(np.uint8), erased
