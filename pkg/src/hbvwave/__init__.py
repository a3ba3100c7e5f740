"""Within-host HBV reaction-diffusion toolkit.

Submodules:

- ``model``    parameters, scaling, R0, equilibria, elasticities
- ``spectral`` Gershgorin discs and a dense small-matrix eigensolver
- ``wave``     traveling-wave system, existence checker, heteroclinic shooting
- ``pde``      1-D method-of-lines solver with zero-flux boundaries
- ``cli``      command-line front end (``hbvwave`` entry point)
"""

from . import model, pde, presets, spectral, wave

__version__ = "0.1.0"

__all__ = ["model", "spectral", "wave", "pde", "presets", "__version__"]
