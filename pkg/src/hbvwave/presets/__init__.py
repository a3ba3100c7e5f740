"""Bundled parameter presets.

``table1``    dimensional baseline set (per-day rates).
``reference`` dimensionless set on which the traveling-wave existence
              conditions hold for wave speeds just above 19.6.
``paper-rho`` dimensionless set quoted in the modeling literature for this
              system; it is not reproducible from ``table1`` under the
              declared scaling and is shipped for comparison, with the
              ``table1`` diffusion value carried over.  Neither set is
              labeled correct.
"""

from __future__ import annotations

import json
from importlib import resources

from ..model import DimensionalParams, ScaledParams

_FILES = {
    "table1": "table1.json",
    "reference": "reference.json",
    "paper-rho": "paper_rho.json",
}

PRESET_NAMES = tuple(_FILES)

SCALED_FIELDS = ("rho1", "rho2", "rho3", "rho4", "rho5", "Dv")


def params_from_dict(raw: dict) -> DimensionalParams | ScaledParams:
    """Build a parameter value from a flat JSON-style dict.

    Dicts carrying ``rho1`` are read as scaled parameters, everything else as
    dimensional ones with field names exactly as in DimensionalParams.
    """
    if "rho1" in raw:
        extra = set(raw) - set(SCALED_FIELDS)
        if extra:
            raise ValueError(f"unknown scaled parameter field(s): {sorted(extra)}")
        return ScaledParams(**{k: float(v) for k, v in raw.items()})
    return DimensionalParams(**{k: float(v) for k, v in raw.items()})


def load_preset(name: str) -> DimensionalParams | ScaledParams:
    try:
        fname = _FILES[name]
    except KeyError:
        raise KeyError(f"unknown preset {name!r}; available: {', '.join(PRESET_NAMES)}") from None
    text = resources.files(__name__).joinpath(fname).read_text()
    return params_from_dict(json.loads(text))
