"""Python bindings for the nvsim NV-center simulation library.

Everything is re-exported from the compiled extension module
``nvsim_py._native``: labeled complex operators, fine-structure
Hamiltonians, effective orbital-branch reductions, dispersive spin-light
coupling, five-level Λ-system Lindblad dynamics, and ultrafast pulse-pair
control. Frequencies are angular (rad/s) unless a name says otherwise;
magnetic fields are in gauss.
"""

from ._native import (
    CONSTANTS_VERSION,
    BranchHamiltonians,
    DensityMatrix,
    Field,
    FourLevelParams,
    LambdaModel,
    Operator,
    OpticalPulse,
    Params,
    PrecessionFit,
    PulseSpec,
    Rates,
    SpinLightState,
    TransitionTable,
    __version__,
    accumulated_phase,
    angular_to_hz,
    bloch_vector,
    branch_hamiltonians,
    calibrate_mode_area_for_coupling,
    calibrate_mode_area_for_rabi,
    commutator,
    constants,
    coupling_constant_d,
    dark_state,
    dark_state_axis,
    energy_shift,
    evolve_lindblad,
    evolve_spin_light,
    extract_precession,
    fidelity,
    fine_structure_scan,
    five_level_labels,
    four_level_labels,
    ghz,
    ground_qubit_labels,
    h_diamagnetic,
    h_es_total,
    h_gs,
    h_so,
    h_ss,
    h_strain,
    h_zeeman,
    hz_to_angular,
    khz,
    kron,
    lindblad_superoperator,
    mhz,
    odd_lorentzian,
    pi_rotation_time,
    polariton_energies,
    product_labels,
    pulse_unitary,
    pulse_unitary_4level,
    rabi_frequency,
    spin_orbit_basis,
    spin_orbit_labels,
    stark_from_faraday,
    stark_shift,
    tdqt_scan,
    to_spin_orbit_basis,
)

__all__ = [
    "CONSTANTS_VERSION",
    "BranchHamiltonians",
    "DensityMatrix",
    "Field",
    "FourLevelParams",
    "LambdaModel",
    "Operator",
    "OpticalPulse",
    "Params",
    "PrecessionFit",
    "PulseSpec",
    "Rates",
    "SpinLightState",
    "TransitionTable",
    "__version__",
    "accumulated_phase",
    "angular_to_hz",
    "bloch_vector",
    "branch_hamiltonians",
    "calibrate_mode_area_for_coupling",
    "calibrate_mode_area_for_rabi",
    "commutator",
    "constants",
    "coupling_constant_d",
    "dark_state",
    "dark_state_axis",
    "energy_shift",
    "evolve_lindblad",
    "evolve_spin_light",
    "extract_precession",
    "fidelity",
    "fine_structure_scan",
    "five_level_labels",
    "four_level_labels",
    "ghz",
    "ground_qubit_labels",
    "h_diamagnetic",
    "h_es_total",
    "h_gs",
    "h_so",
    "h_ss",
    "h_strain",
    "h_zeeman",
    "hz_to_angular",
    "khz",
    "kron",
    "lindblad_superoperator",
    "mhz",
    "odd_lorentzian",
    "pi_rotation_time",
    "polariton_energies",
    "product_labels",
    "pulse_unitary",
    "pulse_unitary_4level",
    "rabi_frequency",
    "spin_orbit_basis",
    "spin_orbit_labels",
    "stark_from_faraday",
    "stark_shift",
    "tdqt_scan",
    "to_spin_orbit_basis",
]
