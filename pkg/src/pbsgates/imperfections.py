"""Imperfect two-photon interference and PBS leakage.

Partial distinguishability is a two-component mixture: with weight ``v**2``
the photons interfere perfectly, otherwise they behave as labeled
(classical) particles.  PBS leakage enters the unitary itself.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.optimize import bisect

from pbsgates.devices import (
    Branch,
    DeviceOutcome,
    HeraldPolicy,
    device_inputs,
    ideal_output,
    simulate,
)
from pbsgates.fock import PhotonicState, SingleParticleUnitary, apply_unitary
from pbsgates.qubit import QubitState

TWO_PHOTON_DEVICES = ("parity", "dcnot")

# lambda^2 / delta-lambda for 10 nm FWHM filters at 702 nm, in micrometres
DEFAULT_COHERENCE_LENGTH_UM = 0.702**2 / 0.010


@dataclass(frozen=True)
class VisibilityModel:
    """Wavepacket overlap ``v``, given directly or through a path-length delay."""

    overlap: float = 1.0
    delay: float | None = None
    coherence_length: float = DEFAULT_COHERENCE_LENGTH_UM

    def __post_init__(self):
        if self.delay is not None:
            if self.coherence_length <= 0:
                raise ValueError("coherence_length must be positive")
            object.__setattr__(self, "overlap", math.exp(-((self.delay / self.coherence_length) ** 2)))
        if not 0.0 <= self.overlap <= 1.0:
            raise ValueError(f"visibility must lie in [0, 1], got {self.overlap!r}")

    @property
    def interference_weight(self) -> float:
        return self.overlap**2


@dataclass(frozen=True)
class ExtinctionSpec:
    leak: float = 0.0

    def __post_init__(self):
        if not 0.0 <= self.leak < 1.0:
            raise ValueError(f"leak must lie in [0, 1), got {self.leak!r}")


def _check_device(device: str) -> None:
    if device not in TWO_PHOTON_DEVICES:
        raise ValueError(f"imperfection model supports {TWO_PHOTON_DEVICES}, not {device!r}")


@functools.lru_cache(maxsize=4096)
def _component(device, inputs, policy, leak, distinguishable) -> DeviceOutcome:
    return simulate(device, inputs, policy, leak=leak, distinguishable=distinguishable)


def run_distinguishable(
    device: str,
    inputs: Sequence[QubitState],
    policy=HeraldPolicy.STRICT,
    extinction: ExtinctionSpec | None = None,
) -> DeviceOutcome:
    """Run with fully distinguishable photons (no two-photon interference)."""
    _check_device(device)
    leak = extinction.leak if extinction else 0.0
    return _component(device, tuple(inputs), HeraldPolicy(policy), leak, True)


def run_with_visibility(
    device: str,
    inputs: Sequence[QubitState],
    model: VisibilityModel,
    policy=HeraldPolicy.STRICT,
    extinction: ExtinctionSpec | None = None,
) -> DeviceOutcome:
    _check_device(device)
    leak = extinction.leak if extinction else 0.0
    w = model.interference_weight
    inputs = tuple(inputs)
    policy = HeraldPolicy(policy)
    parts = []
    if w > 0.0:
        parts.append((w, "", _component(device, inputs, policy, leak, False)))
    if w < 1.0:
        parts.append((1.0 - w, "distinguishable:", _component(device, inputs, policy, leak, True)))
    if len(parts) == 1 and parts[0][0] == 1.0:
        return parts[0][2]
    branches = tuple(
        Branch(weight * b.probability, b.state, tuple(tag + h for h in b.heralds), b.corrections)
        for weight, tag, out in parts
        for b in out.branches
        if weight * b.probability > 0.0
    )
    main = None
    for b in branches:
        if main is None or b.probability > main.probability + 1e-12:
            main = b
    first = parts[0][2]
    return DeviceOutcome(
        success_probability=float(sum(weight * out.success_probability for weight, _, out in parts)),
        herald_label=first.herald_label,
        logical_output=main.state if main else None,
        correction_applied=first.correction_applied,
        output_paths=first.output_paths,
        branches=branches,
    )


def input_error(
    device: str,
    control: QubitState,
    target: QubitState,
    model: VisibilityModel,
    policy=HeraldPolicy.STRICT,
    extinction: ExtinctionSpec | None = None,
) -> float | None:
    """One minus the fidelity of the accepted output with the ideal output.

    ``None`` when the ideal device never succeeds on this input.
    """
    expected = ideal_output(device, control, target)
    if np.linalg.norm(expected) < 1e-12:
        return None
    out = run_with_visibility(device, device_inputs(device, control, target), model, policy, extinction)
    if out.success_probability <= 0.0:
        return None
    return max(0.0, 1.0 - out.fidelity(expected))


def input_grid(n_random: int = 100, seed: int = 0) -> list[tuple[QubitState, QubitState]]:
    """The four basis pairs followed by ``n_random`` Haar-random (control, target) pairs."""
    grid = [(QubitState.basis(c), QubitState.basis(t)) for c in (0, 1) for t in (0, 1)]
    rng = np.random.default_rng(seed)
    grid += [(QubitState.random(rng), QubitState.random(rng)) for _ in range(n_random)]
    return grid


@dataclass(frozen=True)
class ErrorReport:
    worst_case_error: float
    mean_error: float
    basis_errors: tuple[float | None, ...] = field(repr=False)
    grid_errors: tuple[float | None, ...] = field(repr=False)


def error_report(
    device: str,
    model: VisibilityModel,
    policy=HeraldPolicy.STRICT,
    extinction: ExtinctionSpec | None = None,
    n_random: int = 100,
    seed: int = 0,
) -> ErrorReport:
    """Worst-case error over basis inputs and mean error over the whole input grid."""
    _check_device(device)
    grid = input_grid(n_random, seed)
    errors = tuple(input_error(device, c, t, model, policy, extinction) for c, t in grid)
    basis = errors[:4]
    defined = [e for e in errors if e is not None]
    return ErrorReport(
        worst_case_error=max((e for e in basis if e is not None), default=0.0),
        mean_error=float(np.mean(defined)) if defined else 0.0,
        basis_errors=basis,
        grid_errors=errors,
    )


def worst_case_error(device: str, visibility: float, policy=HeraldPolicy.STRICT, extinction=None) -> float:
    return error_report(device, VisibilityModel(visibility), policy, extinction, n_random=0).worst_case_error


def fit_visibility(
    device: str = "dcnot",
    target_error: float = 0.17,
    policy=HeraldPolicy.STRICT,
    extinction: ExtinctionSpec | None = None,
    xtol: float = 1e-10,
) -> float:
    """Bisect for the visibility whose worst-case basis error equals ``target_error``."""
    lo, hi = worst_case_error(device, 0.0, policy, extinction), worst_case_error(device, 1.0, policy, extinction)
    if not min(lo, hi) <= target_error <= max(lo, hi):
        raise ValueError(f"target error {target_error} outside the reachable range [{hi:.4g}, {lo:.4g}]")
    return bisect(lambda v: worst_case_error(device, v, policy, extinction) - target_error, 0.0, 1.0, xtol=xtol)


def coupler_coincidence(coupler, distinguishable: bool = False) -> float:
    """Probability of one photon per output port when one photon enters each port of a two-mode coupler.

    Distinguishable photons each get a private copy of the two modes.
    """
    c = np.asarray(coupler, dtype=complex)
    # mode layout: path "a" = (port0, port1) for photon 0, path "b" the same for photon 1
    if distinguishable:
        state = PhotonicState(("a", "b"), {(1, 0, 0, 1): 1.0}, 2)
        u = SingleParticleUnitary(np.kron(np.eye(2), c))
        out = apply_unitary(state, u)
        return float(sum(abs(a) ** 2 for o, a in out.amplitudes.items() if o[0] + o[2] == 1 and o[1] + o[3] == 1))
    state = PhotonicState(("a",), {(1, 1): 1.0}, 2)
    out = apply_unitary(state, SingleParticleUnitary(c))
    return float(abs(out.amplitudes.get((1, 1), 0.0)) ** 2)
