"""Name → model-factory registry used by config files."""

from typing import Any, Callable

from core.exceptions import ArgumentError, ConfigurationError, WongZakaiError
from core.logging import get_logger
from models.base import ModelSpec
from models.burgers import make_burgers
from models.gbm import make_gbm
from models.heat import make_heat
from models.noise_specs import NoiseKind, NoiseSpec
from models.plaplace import make_plaplace
from models.porous import make_porous_media

logger = get_logger(__name__)

GBM_PARAMS = {"mu", "a", "y0"}


def _gbm(params: dict[str, Any], noise: NoiseSpec) -> ModelSpec:
    unknown = sorted(set(params) - GBM_PARAMS)
    if unknown:
        raise ConfigurationError(
            f"Unknown gbm parameters: {', '.join(unknown)}; allowed: {', '.join(sorted(GBM_PARAMS))}"
        )
    if noise.kind not in (NoiseKind.LINEAR, NoiseKind.ZERO):
        raise ConfigurationError("gbm only supports linear or zero noise")
    if noise.kind is NoiseKind.LINEAR and len(noise.coefficients) != 1:
        raise ConfigurationError(f"gbm takes exactly one noise coefficient, got {len(noise.coefficients)}")
    a = noise.coefficients[0] if noise.kind is NoiseKind.LINEAR else 0.0
    if "a" in params and params["a"] != a:
        raise ConfigurationError(f"[model.params].a = {params['a']} disagrees with the noise gain {a}")
    return make_gbm(mu=params.get("mu", 0.0), a=a, y0=params.get("y0", 1.0))


def _spatial(factory: Callable[..., ModelSpec], shape_key: str, default: float) -> Callable[..., ModelSpec]:
    def build(params: dict[str, Any], noise: NoiseSpec) -> ModelSpec:
        extra = {k: v for k, v in params.items() if k not in ("n_modes", "L", shape_key)}
        return factory(
            params.get("n_modes", 16),
            params.get("L", 1.0),
            params.get(shape_key, default),
            noise,
            **extra,
        )
    return build


MODEL_FACTORIES: dict[str, Callable[[dict[str, Any], NoiseSpec], ModelSpec]] = {
    "gbm": _gbm,
    "heat": _spatial(make_heat, "nu", 1.0),
    "burgers": _spatial(make_burgers, "nu", 0.1),
    "plaplace": _spatial(make_plaplace, "p", 3.0),
    "porous": _spatial(make_porous_media, "r", 2.0),
}


def build_model(name: str, params: dict[str, Any], noise: NoiseSpec) -> ModelSpec:
    """Instantiate a registered model, mapping constructor errors to ConfigurationError."""
    factory = MODEL_FACTORIES.get(name)
    if factory is None:
        raise ConfigurationError(f"Unknown model '{name}'; available: {', '.join(sorted(MODEL_FACTORIES))}")
    try:
        model = factory(params, noise)
    except (ConfigurationError, ArgumentError):
        raise
    except (TypeError, ValueError, WongZakaiError) as e:
        raise ConfigurationError(f"Bad parameters for model '{name}': {e}") from e
    logger.debug(f"Built model {name} with n={model.space.n_modes}, noise={noise.kind.value}")
    return model
