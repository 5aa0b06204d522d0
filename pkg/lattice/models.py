from django.db import models


class Boundary(models.TextChoices):
    TORUS = "torus", "periodic in x, y and z"
    PERIODIC_XY_ROUGH_Z = "periodic_xy_rough_z", "periodic in x and y, rough in z"


class Sublattice(models.TextChoices):
    PRIMAL = "primal", "Primal (faces)"
    DUAL = "dual", "Dual (edges)"


class Direction(models.IntegerChoices):
    """Role of a primal block relative to the dual block it is gated with."""
    W = 0, "W"
    E = 1, "E"
    S = 2, "S"
    N = 3, "N"
