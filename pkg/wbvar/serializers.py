# wbvar/serializers.py
from collections import OrderedDict

from rest_framework import serializers

from .backtest import Model, WindowMode
from .conf import engine_setting
from .exceptions import DomainError
from .risk import Convention
from .transport import FixedPointSolver, as_simplex
from .volatility import EwmaInit


def significant(value, digits=None):
    digits = engine_setting('SIGNIFICANT_DIGITS', digits)
    return float(f"{float(value):.{digits}g}")


class SignificantFloatField(serializers.FloatField):
    """
    Float rounded to a fixed number of significant digits on output, so that
    report files are byte-identical across runs.
    """

    def to_representation(self, value):
        return significant(value)


class FloatListField(serializers.Field):
    """Accepts a comma-separated string or a sequence of numbers."""

    default_error_messages = {
        'invalid': 'Expected a comma-separated list of numbers.',
        'empty': 'At least one number is required.',
    }

    def to_internal_value(self, data):
        if isinstance(data, str):
            data = [item for item in data.split(',') if item.strip()]
        try:
            values = [float(item) for item in data]
        except (TypeError, ValueError):
            self.fail('invalid')
        if not values:
            self.fail('empty')
        return values

    def to_representation(self, value):
        return [significant(v) for v in value]


class MatrixField(serializers.Field):
    def to_representation(self, value):
        return [[significant(v) for v in row] for row in value]


class InputsField(serializers.Field):
    """Repeated `SYMBOL=PATH` options, kept in the order given."""

    default_error_messages = {
        'invalid': 'Each input must look like SYMBOL=PATH, got "{item}".',
        'duplicate': 'Symbol "{symbol}" is given more than once.',
    }

    def to_internal_value(self, data):
        if isinstance(data, str):
            data = [data]
        inputs = OrderedDict()
        for item in data:
            symbol, sep, path = str(item).partition('=')
            symbol, path = symbol.strip(), path.strip()
            if not sep or not symbol or not path:
                self.fail('invalid', item=item)
            if symbol in inputs:
                self.fail('duplicate', symbol=symbol)
            inputs[symbol] = path
        return inputs

    def to_representation(self, value):
        return [f"{symbol}={path}" for symbol, path in value.items()]


def _choices(enum):
    return [member.value for member in enum]


class RunConfigSerializer(serializers.Serializer):
    """
    Validates the options shared by every command. Fields a command does not
    use keep their defaults and are echoed unchanged.
    """
    inputs = InputsField(required=False, default=OrderedDict)
    model = serializers.ChoiceField(choices=_choices(Model), default=Model.WB_NORMAL.value)
    window = serializers.IntegerField(min_value=2, required=False, allow_null=True, default=None)
    window_mode = serializers.ChoiceField(choices=_choices(WindowMode), default=WindowMode.ROLLING.value)
    alphas = FloatListField(required=False, allow_null=True, default=None)
    zeta = serializers.FloatField(required=False, allow_null=True, default=None)
    ewma_init = serializers.ChoiceField(choices=_choices(EwmaInit), default=EwmaInit.SAMPLE_SD_OF_WINDOW.value)
    weights = FloatListField(required=False, allow_null=True, default=None)
    barycenter_weights = FloatListField(required=False, allow_null=True, default=None)
    convention = serializers.ChoiceField(choices=_choices(Convention), default=Convention.LOSS.value)
    split = serializers.IntegerField(min_value=1, required=False, allow_null=True, default=None)
    trading_days = serializers.IntegerField(min_value=1, required=False, allow_null=True, default=None)
    out_dir = serializers.CharField(required=False, allow_null=True, default=None)
    format = serializers.ChoiceField(choices=['json', 'csv'], default='json')

    def validate_alphas(self, value):
        if value is None:
            return list(engine_setting('DEFAULT_ALPHAS'))
        for alpha in value:
            if not (0.0 < alpha < 1.0):
                raise serializers.ValidationError(f"alpha must lie strictly inside (0, 1), got {alpha}")
        return value

    def validate_zeta(self, value):
        if value is None:
            return engine_setting('EWMA_ZETA')
        if not (0.0 < value < 1.0):
            raise serializers.ValidationError(f"zeta must lie strictly inside (0, 1), got {value}")
        return value

    def validate_trading_days(self, value):
        return engine_setting('TRADING_DAYS', value)

    def _validate_simplex(self, value, name):
        if value is None:
            return None
        try:
            return [float(w) for w in as_simplex(value, name=name)]
        except DomainError as e:
            raise serializers.ValidationError(str(e))

    def validate_weights(self, value):
        return self._validate_simplex(value, 'weights')

    def validate_barycenter_weights(self, value):
        return self._validate_simplex(value, 'barycenter_weights')

    def validate(self, attrs):
        count = len(attrs.get('inputs') or {})
        for name in ('weights', 'barycenter_weights'):
            weights = attrs.get(name)
            if count and weights is not None and len(weights) != count:
                raise serializers.ValidationError({name: f"{len(weights)} weights for {count} inputs"})
        return attrs


class VarConfigSerializer(RunConfigSerializer):
    """
    Adds the explicit-moment and filtered-scale options of the var command,
    which forecasts nothing and so has no model or window mode.
    """
    model = None
    window_mode = None
    means = FloatListField(required=False, allow_null=True, default=None)
    sds = FloatListField(required=False, allow_null=True, default=None)
    correlation = FloatListField(required=False, allow_null=True, default=None)
    filtered = serializers.BooleanField(default=False)

    def validate(self, attrs):
        attrs = super().validate(attrs)
        means, sds = attrs.get('means'), attrs.get('sds')
        if (means is None) != (sds is None):
            raise serializers.ValidationError("--means and --sds must be given together")
        if means is not None:
            if len(means) != len(sds):
                raise serializers.ValidationError(f"{len(means)} means for {len(sds)} standard deviations")
            if attrs.get('inputs'):
                raise serializers.ValidationError("give either --input files or --means/--sds, not both")
            if attrs.get('filtered'):
                raise serializers.ValidationError("--filtered needs --input files")
        elif attrs.get('correlation') is not None:
            raise serializers.ValidationError("--correlation is only used with --means/--sds")
        return attrs


class BarycenterConfigSerializer(serializers.Serializer):
    means = FloatListField(required=False, allow_null=True, default=None)
    sds = FloatListField(required=False, allow_null=True, default=None)
    weights = FloatListField(required=False, allow_null=True, default=None)
    covariances = serializers.ListField(child=serializers.CharField(), required=False, default=list)
    mean_vectors = serializers.ListField(child=FloatListField(), required=False, default=list)
    solver = serializers.ChoiceField(choices=_choices(FixedPointSolver), default=FixedPointSolver.INTERPOLATION.value)
    tol = serializers.FloatField(required=False, allow_null=True, default=None)
    max_iter = serializers.IntegerField(min_value=0, required=False, allow_null=True, default=None)
    out_dir = serializers.CharField(required=False, allow_null=True, default=None)

    def validate_tol(self, value):
        value = engine_setting('FIXED_POINT_TOL', value)
        if value <= 0.0:
            raise serializers.ValidationError("tol must be positive")
        return value

    def validate_max_iter(self, value):
        return engine_setting('FIXED_POINT_MAX_ITER', value)

    def validate(self, attrs):
        univariate = attrs.get('means') is not None or attrs.get('sds') is not None
        multivariate = bool(attrs.get('covariances'))
        if univariate == multivariate:
            raise serializers.ValidationError("give either --means/--sds or --covariance files, not both or neither")
        if univariate:
            means, sds = attrs.get('means'), attrs.get('sds')
            if means is None or sds is None or len(means) != len(sds):
                raise serializers.ValidationError("--means and --sds must both be given with equal lengths")
            size = len(means)
        else:
            size = len(attrs['covariances'])
            vectors = attrs.get('mean_vectors')
            if vectors and len(vectors) != size:
                raise serializers.ValidationError(f"{len(vectors)} mean vectors for {size} covariance files")
        if attrs.get('weights') is not None and len(attrs['weights']) != size:
            raise serializers.ValidationError({'weights': f"{len(attrs['weights'])} weights for {size} measures"})
        return attrs


# --- Output serializers ---

class DescriptiveStatsSerializer(serializers.Serializer):
    symbol = serializers.CharField()
    period = serializers.CharField()
    start_date = serializers.DateField()
    end_date = serializers.DateField()
    count = serializers.IntegerField()
    mean = SignificantFloatField()
    annualized_mean = SignificantFloatField()
    sd = SignificantFloatField()
    min = SignificantFloatField()
    median = SignificantFloatField()
    max = SignificantFloatField()
    excess_kurtosis = SignificantFloatField(allow_null=True)
    skewness = SignificantFloatField(allow_null=True)


class KupiecResultSerializer(serializers.Serializer):
    m = serializers.IntegerField()
    x = serializers.IntegerField()
    h = SignificantFloatField()
    p = SignificantFloatField()
    lr = SignificantFloatField()
    p_value = SignificantFloatField()
    rejected = serializers.BooleanField()


class AlphaRecordSerializer(serializers.Serializer):
    """One (model, alpha) row of a backtest report."""
    alpha = SignificantFloatField()
    expected_exceptions = SignificantFloatField()
    var_level_last = SignificantFloatField()
    var_level_mean = SignificantFloatField()
    exceptions = serializers.IntegerField()
    lr = SignificantFloatField(source='kupiec.lr')
    p_value = SignificantFloatField(source='kupiec.p_value')
    rejected = serializers.BooleanField(source='kupiec.rejected')
    cvar_level_last = SignificantFloatField(allow_null=True)
    cvar_level_mean = SignificantFloatField(allow_null=True)


class BacktestReportSerializer(serializers.Serializer):
    model = serializers.CharField(source='model.value')
    window = serializers.IntegerField(source='config.window')
    window_mode = serializers.CharField(source='config.window_mode.value')
    symbols = serializers.ListField(child=serializers.CharField())
    weights = FloatListField()
    sample_size = serializers.IntegerField()
    test_size = serializers.IntegerField()
    first_test_date = serializers.SerializerMethodField()
    last_test_date = serializers.SerializerMethodField()
    records = AlphaRecordSerializer(many=True)

    def get_first_test_date(self, report):
        return report.test_dates[0].isoformat() if report.test_dates else None

    def get_last_test_date(self, report):
        return report.test_dates[-1].isoformat() if report.test_dates else None


class AggregatedLevelsSerializer(serializers.Serializer):
    alpha = SignificantFloatField()
    convention = serializers.CharField(source='convention.value')
    wb_var = SignificantFloatField()
    wb_cvar = SignificantFloatField()
    varcov_var = SignificantFloatField(allow_null=True)
    simple_sum_var = SignificantFloatField()


class LocationScaleSerializer(serializers.Serializer):
    profile = serializers.CharField(source='kind.value')
    location = SignificantFloatField()
    scale = SignificantFloatField()


class GaussianMeasureSerializer(serializers.Serializer):
    mean = FloatListField()
    covariance = MatrixField()


class FixedPointReportSerializer(serializers.Serializer):
    residual = SignificantFloatField()
    iterations = serializers.IntegerField()
    solution = MatrixField()
