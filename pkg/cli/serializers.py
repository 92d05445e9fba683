from rest_framework import serializers

from core.conf import gfix_setting
from rd_opt.optimizer import RATE_PATHS


class LayerSelectionSerializer(serializers.Serializer):
    name = serializers.CharField(max_length=0xFFFF)
    split_axis = serializers.IntegerField(min_value=1, default=1)
    rank = serializers.IntegerField(min_value=1)


class ManifestSerializer(serializers.Serializer):
    layers = LayerSelectionSerializer(many=True, allow_empty=True)
    lambdas = serializers.ListField(
        child=serializers.FloatField(), required=False, allow_empty=False
    )
    grid = serializers.ListField(
        child=serializers.FloatField(), required=False, allow_null=True, allow_empty=False
    )
    seed = serializers.IntegerField(required=False, min_value=0)
    refine = serializers.BooleanField(default=False)
    max_refine_passes = serializers.IntegerField(required=False, min_value=0)
    rate_path = serializers.ChoiceField(choices=RATE_PATHS, default="round")

    def validate_layers(self, layers):
        names = [layer["name"] for layer in layers]
        dupes = sorted({n for n in names if names.count(n) > 1})
        if dupes:
            raise serializers.ValidationError(f"Duplicate layer names: {', '.join(dupes)}.")
        return layers

    def validate_lambdas(self, lambdas):
        if any(not lam > 0 for lam in lambdas):
            raise serializers.ValidationError("Every lambda must be positive.")
        if len(set(lambdas)) != len(lambdas):
            raise serializers.ValidationError("Lambda values must be distinct.")
        return lambdas

    def validate_grid(self, grid):
        if grid is None:
            return None
        if any(not s > 0 for s in grid):
            raise serializers.ValidationError("Grid steps must be positive.")
        if any(b <= a for a, b in zip(grid, grid[1:])):
            raise serializers.ValidationError("Grid steps must be strictly ascending.")
        return grid

    def validate(self, attrs):
        attrs.setdefault("lambdas", list(gfix_setting("DEFAULT_LAMBDAS")))
        attrs.setdefault("seed", int(gfix_setting("SEED")))
        attrs.setdefault("grid", None)
        attrs.setdefault("max_refine_passes", int(gfix_setting("MAX_REFINE_PASSES")))
        return attrs
