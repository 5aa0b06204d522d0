from django.db import models


class CodeId(models.TextChoices):
    CUBIC = "cubic", "unconcatenated qubit"
    C211 = "211", "[[2,1,1]]"
    C311_1 = "311_1", "[[3,1,1]]_1"
    C311_2 = "311_2", "[[3,1,1]]_2"
    C4112 = "4112", "[[4,1,1,2]]"
    C713 = "713", "[[7,1,3]]"


class CodeFamily(models.TextChoices):
    # transversal logical CZ
    TYPE_I = "I", "Type I"
    # logical CZ needs a scheduled non-transversal circuit
    TYPE_II = "II", "Type II"
