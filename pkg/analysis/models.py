from django.db import models


class PauliRounding(models.TextChoices):
    # ⌊(L-N)/2⌋ Pauli errors next to N erasures
    FLOOR = "floor", "floor((L-N)/2)"
    # ⌈(L-N)/2⌉: the count that actually breaks a distance L-N line
    CEIL = "ceil", "ceil((L-N)/2)"


class ThresholdSource(models.TextChoices):
    FIT = "fit", "fitted from simulation results"
    REFERENCE = "reference", "published reference value"
