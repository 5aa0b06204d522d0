from django.db import models


class NoiseModel(models.TextChoices):
    PHENOMENOLOGICAL = "phenomenological", "i.i.d. depolarizing on a perfect state"
    CIRCUIT_LEVEL = "circuit_level", "depolarizing after every location"
    BIASED_Z = "biased_z", "two-qubit noise with Z terms only"
    # cubic scheme only: explicit losses plus Pauli flips on the outer code
    ERASURE_PAULI = "erasure_pauli", "erasure plus Pauli on the outer code"


class LocationClass(models.TextChoices):
    """Keys of NoiseSpec.per_location_overrides."""
    CZ = "cz", "two-qubit gate"
    SINGLE_QUBIT = "single_qubit", "preparation and measurement"
