from django.db import models


class BiasedPath(models.TextChoices):
    # heterogeneous phenomenological flips with the counting-factor rates
    REDUCED = "reduced", "exact phenomenological reduction"
    # Z-only channels placed on the actual gates, preparation and measurement
    CIRCUIT = "circuit", "Z-only circuit sampling"


class Backend(models.TextChoices):
    SERIAL = "serial", "in-process"
    POOL = "pool", "billiard process pool"
    CELERY = "celery", "Celery group"
