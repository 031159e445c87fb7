"""Polarizing beam splitters, wave plates and photon-counting detection.

Angles are in degrees at this interface.  A polarization at angle ``t``
is ``cos(t)|H> + sin(t)|V>``; a basis at angle ``t`` has that state as its
pass axis and ``-sin(t)|H> + cos(t)|V>`` as the orthogonal axis.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from pbsgates.fock import (
    H,
    Path,
    PhotonicState,
    SingleParticleUnitary,
    apply_unitary,
    drop_paths,
)

PASS = "pass"
ORTH = "orth"


def _check_angle(name: str, value: float) -> None:
    if not 0.0 <= value < 180.0:
        raise ValueError(f"{name} must lie in [0, 180) degrees, got {value!r}")


def rotation(angle_deg: float) -> np.ndarray:
    """Columns are the pass and orthogonal axes of the basis at ``angle_deg``."""
    t = math.radians(angle_deg)
    c, s = math.cos(t), math.sin(t)
    return np.array([[c, -s], [s, c]], dtype=complex)


@dataclass(frozen=True)
class PbsSpec:
    """Polarizing beam splitter between two input paths.

    Inputs ``path_a`` and ``path_b`` exit through output ports that keep
    the same labels: the pass-axis component is transmitted (a -> a'), the
    orthogonal component is reflected (a -> b') with ``exp(i*reflection_phase)``.
    ``leak`` is the amplitude sent to the wrong port; 0 is an ideal PBS.
    """

    path_a: Path
    path_b: Path
    basis_angle: float = 0.0
    reflection_phase: float = 0.0
    leak: float = 0.0

    def __post_init__(self):
        _check_angle("basis_angle", self.basis_angle)
        if self.path_a == self.path_b:
            raise ValueError("PBS paths must be distinct")
        if not 0.0 <= self.leak < 1.0:
            raise ValueError(f"leak must lie in [0, 1), got {self.leak!r}")


@dataclass(frozen=True)
class WavePlateSpec:
    path: Path
    axis_angle: float

    def __post_init__(self):
        _check_angle("axis_angle", self.axis_angle)


@dataclass(frozen=True)
class AnalyzerSetting:
    path: Path
    angle: float

    def __post_init__(self):
        _check_angle("angle", self.angle)


@dataclass(frozen=True)
class HeraldOutcome:
    """One of the two outcomes of a polarization-resolving detector."""

    path: Path
    basis_angle: float
    accepted_pol: str = PASS

    def __post_init__(self):
        _check_angle("basis_angle", self.basis_angle)
        if self.accepted_pol not in (PASS, ORTH):
            raise ValueError(f"accepted_pol must be {PASS!r} or {ORTH!r}, got {self.accepted_pol!r}")

    @property
    def label(self) -> str:
        if self.accepted_pol == PASS:
            angle = self.basis_angle
        else:
            angle = (self.basis_angle + 90.0) % 180.0
        names = {0.0: "H", 90.0: "V", 45.0: "+45", 135.0: "-45"}
        return f"{self.path}:{names.get(angle, f'{angle:g}deg')}"


def pbs_unitary(spec: PbsSpec, paths: Sequence[Path]) -> SingleParticleUnitary:
    """Mode-space unitary of a PBS, identity outside ``spec``'s two paths.

    The block is built in the rotated basis and conjugated back to H/V.
    With ``leak = e`` and ``c = sqrt(1 - e^2)`` the pass component goes
    a -> c a' + e b', and the orthogonal component a -> p c b' + e a'
    with ``p = exp(i*reflection_phase)``.
    """
    e = spec.leak
    c = math.sqrt(1.0 - e * e)
    p = np.exp(1j * spec.reflection_phase)
    # rotated-basis ordering: (a_pass, a_orth, b_pass, b_orth)
    rot_block = np.array(
        [
            [c, 0, -e, 0],
            [0, e, 0, p * c],
            [e, 0, c, 0],
            [0, p * c, 0, -p * p * e],
        ],
        dtype=complex,
    )
    r = rotation(spec.basis_angle)
    r2 = np.kron(np.eye(2), r)
    block = r2 @ rot_block @ r2.conj().T
    return SingleParticleUnitary.on_paths(paths, [spec.path_a, spec.path_b], block)


def hwp_unitary(spec: WavePlateSpec, paths: Sequence[Path]) -> SingleParticleUnitary:
    """Half-wave plate: reflection of the polarization about ``axis_angle``."""
    t = 2 * math.radians(spec.axis_angle)
    jones = np.array([[math.cos(t), math.sin(t)], [math.sin(t), -math.cos(t)]])
    return SingleParticleUnitary.on_paths(paths, [spec.path], jones)


def basis_change(paths: Sequence[Path], path: Path, basis_angle: float) -> SingleParticleUnitary:
    """Relabel ``path``'s modes so that H carries the pass axis and V the orthogonal one."""
    return SingleParticleUnitary.on_paths(paths, [path], rotation(basis_angle).conj().T)


def project_detection(state: PhotonicState, path: Path, basis_angle: float, accepted_pol: str) -> PhotonicState:
    """Unnormalized projection onto one photon in the accepted axis of ``path``, none in the other.

    The detected path is removed from the returned state.
    """
    rotated = apply_unitary(state, basis_change(state.paths, path, basis_angle))
    i = rotated.mode(path, H)
    want = (1, 0) if accepted_pol == PASS else (0, 1)
    kept = {}
    for occ, amp in rotated.amplitudes.items():
        if (occ[i], occ[i + 1]) == want:
            out = list(occ)
            out[i] = out[i + 1] = 0
            kept[tuple(out)] = amp
    if state.n_photons == 0:
        return drop_paths(PhotonicState(state.paths, {}, 0), [path])
    projected = PhotonicState(rotated.paths, kept, state.n_photons - 1)
    return drop_paths(projected, [path])


def project_empty(state: PhotonicState, path: Path) -> PhotonicState:
    """Unnormalized projection onto no photons in ``path``; the path is removed."""
    i = state.mode(path, H)
    kept = {o: a for o, a in state.amplitudes.items() if o[i] == 0 and o[i + 1] == 0}
    return drop_paths(PhotonicState(state.paths, kept, state.n_photons), [path])


def postselect_one_photon(state: PhotonicState, herald: HeraldOutcome) -> tuple[float, PhotonicState]:
    """Probability and normalized conditional state for a single-photon herald click.

    A zero-probability outcome returns ``(0.0, empty)`` where ``empty.is_empty``.
    """
    if herald.path not in state.paths:
        raise KeyError(f"herald path {herald.path!r} not in state paths {state.paths!r}")
    projected = project_detection(state, herald.path, herald.basis_angle, herald.accepted_pol)
    prob = projected.norm_squared()
    if projected.is_empty:
        return 0.0, projected
    return prob, projected.normalized()


def coincidence_probability(state: PhotonicState, analyzers: Sequence[AnalyzerSetting]) -> float:
    """Probability that each analyzed path passes exactly one photon and blocks none."""
    seen = [a.path for a in analyzers]
    if len(set(seen)) != len(seen):
        raise ValueError(f"analyzer paths must be distinct, got {seen!r}")
    projected = state
    for a in analyzers:
        projected = project_detection(projected, a.path, a.angle, PASS)
        if projected.is_empty:
            return 0.0
    return projected.norm_squared()


def herald_partition(state: PhotonicState, path: Path, basis_angle: float) -> dict[str, float]:
    """Probabilities of the two single-click outcomes and of every other count in ``path``."""
    i = state.mode(path, H)
    other = sum(abs(a) ** 2 for o, a in state.amplitudes.items() if o[i] + o[i + 1] != 1)
    return {
        PASS: postselect_one_photon(state, HeraldOutcome(path, basis_angle, PASS))[0],
        ORTH: postselect_one_photon(state, HeraldOutcome(path, basis_angle, ORTH))[0],
        "other": float(other),
    }
