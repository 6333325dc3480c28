"""Optimal control of Jaynes-Cummings lattice ground states."""

from ._jcqoc import (
    Constraints,
    CrabParams,
    DecoherenceRates,
    Lattice,
    Problem,
    __version__,
    adiabatic_fidelity,
    bures_angle,
    ground_state,
    lindblad_fidelity,
    noise_robustness,
    optimize,
    pulse_fidelity,
    random_params,
    reference_rates,
    run,
    sector_dimension,
    spdm,
    speed_limit,
)

__all__ = [name for name in dir() if not name.startswith("_")] + ["__version__"]
