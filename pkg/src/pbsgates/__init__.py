"""Post-selected linear-optical logic with polarization-encoded photons."""

from pbsgates.fock import (
    PhotonicState,
    SingleParticleUnitary,
    apply_unitary,
    fidelity,
    inject_photon,
    inner_product,
    transition_amplitude_oracle,
    vacuum,
)
from pbsgates.optics import (
    AnalyzerSetting,
    HeraldOutcome,
    PbsSpec,
    WavePlateSpec,
    coincidence_probability,
    hwp_unitary,
    pbs_unitary,
    postselect_one_photon,
)
from pbsgates.devices import (
    DeviceOutcome,
    HeraldPolicy,
    QubitState,
    coherence_scan,
    destructive_cnot,
    full_cnot,
    parity_check,
    truth_table,
)

__version__ = "0.1.0"

__all__ = [
    "AnalyzerSetting",
    "DeviceOutcome",
    "HeraldOutcome",
    "HeraldPolicy",
    "PbsSpec",
    "PhotonicState",
    "QubitState",
    "SingleParticleUnitary",
    "WavePlateSpec",
    "apply_unitary",
    "coherence_scan",
    "coincidence_probability",
    "destructive_cnot",
    "fidelity",
    "full_cnot",
    "hwp_unitary",
    "inject_photon",
    "inner_product",
    "parity_check",
    "pbs_unitary",
    "postselect_one_photon",
    "transition_amplitude_oracle",
    "truth_table",
    "vacuum",
]
