from django.db import models


class DecoderEngine(models.TextChoices):
    PYMATCHING = "pymatching", "PyMatching sparse blossom"
    # explicit defect graph and networkx blossom; slower, exposes the pairing
    BLOSSOM = "blossom", "networkx blossom on the defect graph"
