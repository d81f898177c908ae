"""Embedded per-layer order-parameter measurements for five public models.

Ships as a static resource so the depth-transition analyses are
reproducible offline. Values are given to two decimals; (model, layer)
pairs are unique. 190 records total.
"""

from dataclasses import dataclass

from .errors import InputError
from .phase import DepthProfile, make_profile

_SERIES = {
    "Qwen-1.5B": (
        0.31, 0.36, 0.39, 0.39, 0.37, 0.43, 0.41, 0.45, 0.41, 0.41,
        0.45, 0.48, 0.52, 0.48, 0.54, 0.46, 0.50, 0.51, 0.53, 0.52,
        0.52, 0.59, 0.54, 0.60, 0.62, 0.60, 0.68, 0.67,
    ),
    "MiroThinker-30B": (
        0.42, 0.45, 0.52, 0.46, 0.45, 0.52, 0.47, 0.51, 0.56, 0.54,
        0.58, 0.54, 0.59, 0.61, 0.64, 0.59, 0.65, 0.62, 0.62, 0.69,
        0.90, 0.86, 0.80, 0.85, 0.81, 0.85, 0.88, 0.91, 0.85, 0.93,
        0.88, 0.86, 0.89, 0.94, 0.93, 0.92, 0.90, 0.95, 0.98, 0.91,
        0.92, 0.92, 0.98, 0.95, 0.90, 0.87, 0.91, 0.85,
    ),
    "Llama-3-8B": (
        0.46, 0.45, 0.45, 0.51, 0.47, 0.56, 0.50, 0.49, 0.52, 0.61,
        0.53, 0.54, 0.60, 0.66, 0.66, 0.61, 0.60, 0.69, 0.68, 0.70,
        0.67, 0.70, 0.71, 0.73, 0.70, 0.81, 0.80, 0.77, 0.79, 0.82,
        0.85, 0.88,
    ),
    "Fimbulvetr-11B": (
        0.49, 0.41, 0.43, 0.46, 0.49, 0.53, 0.50, 0.57, 0.53, 0.59,
        0.57, 0.53, 0.58, 0.59, 0.64, 0.56, 0.66, 0.65, 0.60, 0.63,
        0.81, 0.86, 0.84, 0.87, 0.88, 0.86, 0.88, 0.84, 0.92, 0.85,
        0.92, 0.86, 0.96, 0.91, 0.92, 0.95, 0.91, 0.99, 0.94, 0.98,
        0.93, 0.89, 0.95, 0.97, 0.96, 0.87, 0.90, 0.86,
    ),
    "Gemma-2-2B": (
        0.39, 0.37, 0.33, 0.36, 0.37, 0.36, 0.38, 0.45, 0.43, 0.50,
        0.44, 0.47, 0.50, 0.48, 0.49, 0.57, 0.55, 0.53, 0.55, 0.61,
        0.58, 0.60, 0.58, 0.61, 0.66, 0.61,
    ),
}


@dataclass(frozen=True)
class SignatureRecord:
    model_id: str
    layer: int
    omega: float


def embedded_dataset() -> tuple:
    """All records, grouped by model and ordered by layer."""
    return tuple(
        SignatureRecord(model_id=m, layer=l, omega=v)
        for m, series in _SERIES.items()
        for l, v in enumerate(series)
    )


def embedded_models() -> tuple:
    return tuple(_SERIES)


def embedded_profile(model_id: str) -> DepthProfile:
    """Depth profile of one embedded model (single measurement per layer)."""
    if model_id not in _SERIES:
        raise InputError(
            f"unknown model {model_id!r}; choose from {', '.join(_SERIES)}"
        )
    series = _SERIES[model_id]
    rows = [(l, v, 0.0, 1) for l, v in enumerate(series)]
    return make_profile(model_id, len(series), rows)
