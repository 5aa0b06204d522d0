from django.db import models


class ScheduleVariant(models.TextChoices):
    FIG5 = "fig5", "shipped C-detectable order"
    # 211 only: straight and crossed pairs of one direction back to back
    NATURAL = "natural", "per-direction order"
    # 311_2 only: bounded search over matching orders
    SEARCH = "search", "first passing searched order"


class Verdict(models.TextChoices):
    CONVERTIBLE = "convertible", "convertible"
    NOT_CONVERTIBLE = "not_convertible", "not convertible"


class FaultKind(models.TextChoices):
    SINGLE = "single", "single-qubit"
    TWO_QUBIT = "two_qubit", "two-qubit"
