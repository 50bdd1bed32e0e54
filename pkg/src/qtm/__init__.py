"""Autonomous quantum thermal machines that generate steady-state entanglement.

Builds the three-qubit entanglement engine and its (2n-1)-qubit W-state
generalisation, solves their Lindblad dynamics, and checks the dark steady
states against closed forms.
"""

from qtm.liouvillian import build_liouvillian, evolve, spectral_info, steady_state
from qtm.machines import (
    INFINITE,
    GeneralMachineConfig,
    MachineConfig,
    build_machine_3q,
    build_machine_general,
)

__all__ = [
    "INFINITE",
    "GeneralMachineConfig",
    "MachineConfig",
    "build_liouvillian",
    "build_machine_3q",
    "build_machine_general",
    "evolve",
    "spectral_info",
    "steady_state",
]
