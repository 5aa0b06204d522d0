import math

from rest_framework import serializers

from core.exceptions import ConfigurationError
from .references import SCALING_EXPONENTS, reference_threshold


class NullableFloatField(serializers.FloatField):
    """NaN (e.g. a bootstrap without enough successful refits) becomes null."""

    def to_representation(self, value):
        value = super().to_representation(value)
        return None if math.isnan(value) else value


class FitErrorsSerializer(serializers.Serializer):
    p_th = NullableFloatField()
    nu = NullableFloatField()
    A = serializers.ListField(child=NullableFloatField())


# ────────────────────────────────────────────────────────────
#  fit --json
# ────────────────────────────────────────────────────────────
class FitReportSerializer(serializers.Serializer):
    scheme = serializers.CharField(allow_null=True)
    model = serializers.CharField(allow_null=True)
    p_th = serializers.FloatField()
    nu = serializers.FloatField()
    A = serializers.ListField(child=serializers.FloatField())
    errors = FitErrorsSerializer()
    n_points = serializers.IntegerField()
    chi2 = serializers.FloatField()
    residual_norm = serializers.FloatField()
    p_range = serializers.ListField(child=serializers.FloatField())
    bootstrap_failures = serializers.IntegerField()
    reference = serializers.SerializerMethodField()

    def get_reference(self, obj):
        if not obj.scheme or not obj.model:
            return None
        try:
            p_th, p_err = reference_threshold(obj.scheme, obj.model)
        except ConfigurationError:
            return None
        nu = SCALING_EXPONENTS.get(str(obj.model), {}).get(str(obj.scheme))
        return {"p_th": p_th, "p_th_error": p_err,
                "nu": nu[0] if nu else None, "nu_error": nu[1] if nu else None}


class FitReportInputSerializer(serializers.Serializer):
    """A previously written fit report, read back by `biased --fit-report`."""

    scheme = serializers.CharField(required=False, allow_null=True)
    model = serializers.CharField(required=False, allow_null=True)
    p_th = serializers.FloatField(min_value=0, max_value=1)
    errors = serializers.DictField(required=False)

    def threshold(self):
        data = self.validated_data
        error = (data.get("errors") or {}).get("p_th")
        return data["p_th"], float(error) if error is not None else 0.0
