import dataclasses
import enum
import types
import typing
from typing import Any

from sinr_ldp.errors import ConfigurationError


class BoundaryMode(enum.Enum):
    HARD = "hard"
    TOROIDAL = "toroidal"


class InterferenceMode(enum.Enum):
    LITERAL = "literal"
    """Sum interference over every device except the receiver (transmitter included)."""
    EXCLUDE_SIGNAL = "exclude-signal"
    """Sum interference over every device except the receiver and the transmitter."""


class IntensityKind(enum.Enum):
    UNIFORM = "uniform"
    GAUSSIAN = "gaussian"


class KernelMode(enum.Enum):
    SYNTHETIC = "synthetic"
    INTEGRAL = "integral"


class KernelKind(enum.Enum):
    Q_LAMBDA_D = "q_lambda_D"
    Q_LAMBDA = "Q_lambda"
    LIMIT_Q = "limit_q"


class QuadratureScheme(enum.Enum):
    MIDPOINT_GRID = "midpoint-grid"
    MONTE_CARLO = "monte-carlo"


class EventKind(enum.Enum):
    TV_BALL = "tv_ball"
    HALFSPACE = "halfspace"


class Speed(enum.Enum):
    LIN = "lin"
    """Speed λ."""
    QUAD = "quad"
    """Speed λ²a_λ."""


class PointLaw(enum.Enum):
    POISSON = "poisson"
    FIXED_COUNT = "fixed_count"


class ConditioningMode(enum.Enum):
    QUENCHED = "quenched"
    ANNEALED = "annealed"


class EntropyReference(enum.Enum):
    Q_PI_PI = "q_pi_pi"
    LAMBDA_PI_PI = "lambda_pi_pi"


class AepTarget(enum.Enum):
    LITERAL = "literal"
    SCALED = "scaled"


class TiltTarget(enum.Enum):
    ASYMPTOTIC = "asymptotic"
    CALIBRATED = "calibrated"


class NetworkGenerator(enum.Enum):
    SINR = "sinr"
    """Edges from the two directed SINR threshold tests."""
    Q_DRIVEN = "q_driven"
    """Independent edges with probability Q."""


class KullbackInit(enum.Enum):
    CLOSED_FORM = "closed_form"
    ZERO = "zero"


class ExperimentKind(enum.Enum):
    GENERATE = "generate"
    MEASURES = "measures"
    SCGF = "scgf"
    LDP_DECAY = "ldp-decay"
    AEP = "aep"
    MCMILLAN = "mcmillan"
    LIMIT_CHECK = "limit-check"


def _convert(value: Any, tp: Any, path: str) -> Any:
    origin = typing.get_origin(tp)
    if origin in (typing.Union, types.UnionType):
        args = typing.get_args(tp)
        if value is None and type(None) in args:
            return None
        errors = []
        for arg in args:
            if arg is type(None):
                continue
            try:
                return _convert(value, arg, path)
            except ConfigurationError as e:
                errors.append(str(e))
        raise ConfigurationError(
            f"value {value!r} matches none of {tp}: {'; '.join(errors)}", field=path
        )
    if origin is tuple:
        args = typing.get_args(tp)
        if not isinstance(value, (list, tuple)):
            raise ConfigurationError(f"expected a list, got {value!r}", field=path)
        if len(args) == 2 and args[1] is Ellipsis:
            return tuple(
                _convert(v, args[0], f"{path}[{i}]") for i, v in enumerate(value)
            )
        if len(args) != len(value):
            raise ConfigurationError(
                f"expected {len(args)} entries, got {len(value)}", field=path
            )
        return tuple(
            _convert(v, a, f"{path}[{i}]") for i, (v, a) in enumerate(zip(args, value))
        )
    if isinstance(tp, type) and issubclass(tp, enum.Enum):
        if isinstance(value, tp):
            return value
        try:
            return tp(value)
        except ValueError:
            valid = ", ".join(repr(m.value) for m in tp)
            raise ConfigurationError(
                f"invalid value {value!r}, expected one of {valid}", field=path
            ) from None
    if dataclasses.is_dataclass(tp) and isinstance(tp, type):
        if isinstance(value, tp):
            return value
        if not isinstance(value, dict):
            raise ConfigurationError(f"expected a section, got {value!r}", field=path)
        return from_dict(tp, value, path)
    if tp is float:
        if value in ("inf", "-inf"):
            return float(value)
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigurationError(f"expected a number, got {value!r}", field=path)
        return float(value)
    if tp is int:
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigurationError(f"expected an integer, got {value!r}", field=path)
        return value
    if tp is bool:
        if not isinstance(value, bool):
            raise ConfigurationError(f"expected true/false, got {value!r}", field=path)
        return value
    if tp is str:
        if not isinstance(value, str):
            raise ConfigurationError(f"expected a string, got {value!r}", field=path)
        return value
    return value


def from_dict[T](cls: type[T], data: dict[str, Any], path: str = "") -> T:
    """Build a (nested) frozen config dataclass from parsed TOML/JSON data.

    Raises `ConfigurationError` naming the dotted path of the first unknown,
    missing or mistyped field.
    """
    assert dataclasses.is_dataclass(cls)
    hints = typing.get_type_hints(cls)
    fields = {f.name: f for f in dataclasses.fields(cls) if f.init}
    for key in data:
        if key not in fields:
            raise ConfigurationError(
                "unknown field", field=f"{path}.{key}" if path else key
            )

    kwargs = {}
    for name, f in fields.items():
        field_path = f"{path}.{name}" if path else name
        if name not in data:
            if (
                f.default is dataclasses.MISSING
                and f.default_factory is dataclasses.MISSING
            ):
                raise ConfigurationError("missing required field", field=field_path)
            continue
        kwargs[name] = _convert(data[name], hints[name], field_path)

    try:
        return cls(**kwargs)
    except ConfigurationError as e:
        if e.field is not None and path and not e.field.startswith(path):
            raise ConfigurationError(e.reason, field=f"{path}.{e.field}") from None
        raise


def to_dict(config: Any) -> Any:
    """Inverse of `from_dict`: plain JSON/TOML-serializable data."""
    if dataclasses.is_dataclass(config) and not isinstance(config, type):
        return {
            f.name: to_dict(getattr(config, f.name))
            for f in dataclasses.fields(config)
            if f.init
        }
    if isinstance(config, enum.Enum):
        return config.value
    if isinstance(config, (list, tuple)):
        return [to_dict(v) for v in config]
    return config
