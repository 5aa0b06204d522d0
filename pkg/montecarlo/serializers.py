import numpy as np
from rest_framework import serializers

from core.exceptions import ConfigurationError
from decoder.models import DecoderEngine
from inner_codes.models import CodeId
from lattice.models import Boundary
from noise_models.models import NoiseModel
from noise_models.samplers import NoiseSpec
from .engine import TrialConfig
from .models import BiasedPath


class RateGridField(serializers.Field):
    """A list of rates, a single rate, or a {min, max, steps} range."""

    default_error_messages = {
        "invalid": "Expected a non-empty list of rates or {{min, max, steps}}.",
        "range": "Expected min <= max and steps >= 1.",
    }

    def to_internal_value(self, data):
        if isinstance(data, dict):
            try:
                lo, hi, steps = float(data["min"]), float(data["max"]), int(data["steps"])
            except (KeyError, TypeError, ValueError):
                self.fail("invalid")
            if steps < 1 or hi < lo:
                self.fail("range")
            return [float(v) for v in np.linspace(lo, hi, steps)]
        if isinstance(data, bool):
            self.fail("invalid")
        if isinstance(data, (int, float)):
            return [float(data)]
        if isinstance(data, (list, tuple)) and data:
            try:
                return [float(v) for v in data]
            except (TypeError, ValueError):
                self.fail("invalid")
        self.fail("invalid")

    def to_representation(self, value):
        return list(value)


# ────────────────────────────────────────────────────────────
#  simulate --config
# ────────────────────────────────────────────────────────────
class RunConfigSerializer(serializers.Serializer):
    scheme = serializers.ChoiceField(choices=CodeId.values, required=False)
    schemes = serializers.ListField(child=serializers.ChoiceField(choices=CodeId.values),
                                    required=False, allow_empty=False)
    model = serializers.ChoiceField(choices=NoiseModel.values)
    p = RateGridField()
    L = serializers.ListField(child=serializers.IntegerField(min_value=2), allow_empty=False)
    boundary = serializers.ChoiceField(choices=Boundary.values, default=Boundary.TORUS)
    trials = serializers.IntegerField(min_value=1)
    master_seed = serializers.IntegerField(min_value=0, required=False)
    output = serializers.CharField(required=False)
    threads = serializers.IntegerField(min_value=1, required=False)
    engine = serializers.ChoiceField(choices=DecoderEngine.values, required=False)
    biased_path = serializers.ChoiceField(choices=BiasedPath.values, default=BiasedPath.REDUCED)
    idle_noise = serializers.BooleanField(required=False, allow_null=True, default=None)
    per_location_overrides = serializers.DictField(child=serializers.FloatField(min_value=0), required=False)
    erasure_rates = serializers.ListField(child=serializers.FloatField(min_value=0, max_value=1),
                                         min_length=2, max_length=2, required=False)

    def validate(self, attrs):
        schemes = list(attrs.pop("schemes", []))
        if "scheme" in attrs:
            schemes.insert(0, attrs.pop("scheme"))
        if not schemes:
            raise serializers.ValidationError({"schemes": "Give `scheme` or a non-empty `schemes` list."})
        attrs["schemes"] = list(dict.fromkeys(schemes))

        if attrs["model"] == NoiseModel.ERASURE_PAULI and attrs["schemes"] != [CodeId.CUBIC]:
            raise serializers.ValidationError({"schemes": "erasure_pauli runs the cubic scheme only."})

        for p in attrs["p"]:
            try:
                self._noise(attrs, p)
            except ConfigurationError as exc:
                raise serializers.ValidationError({"p": str(exc)})
        return attrs

    @staticmethod
    def _noise(attrs, p) -> NoiseSpec:
        rates = attrs.get("erasure_rates")
        return NoiseSpec(attrs["model"], p, attrs.get("per_location_overrides") or None,
                         tuple(rates) if rates else None)

    def trial_configs(self, master_seed):
        """One TrialConfig per (scheme, p, L), in that nesting order."""
        data = self.validated_data
        return [
            TrialConfig(
                code=scheme,
                noise=self._noise(data, p),
                L=L,
                boundary=data["boundary"],
                trials=data["trials"],
                master_seed=master_seed,
                biased_path=data["biased_path"],
                engine=data.get("engine"),
                idle_noise=data.get("idle_noise"),
            )
            for scheme in data["schemes"]
            for p in data["p"]
            for L in data["L"]
        ]
