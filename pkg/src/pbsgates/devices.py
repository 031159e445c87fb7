"""The parity check, destructive CNOT and Bell-ancilla CNOT.

Every device is a short program of optical elements and heralded
detections run on a :class:`~pbsgates.fock.PhotonicState`.  Heralds either
accept one designated outcome (strict) or both outcomes with a wave-plate
correction on the output path (feedforward); each accepted outcome is kept
as a separate :class:`Branch` so that imperfect runs stay explicit
mixtures of pure states.
"""

from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass, field
from enum import Enum
from typing import Sequence

import numpy as np

from pbsgates.fock import (
    H,
    V,
    PhotonicState,
    apply_unitary,
    drop_paths,
    inject_photon,
    inject_photons,
    rename_paths,
    vacuum,
)
from pbsgates.optics import (
    ORTH,
    PASS,
    AnalyzerSetting,
    HeraldOutcome,
    PbsSpec,
    WavePlateSpec,
    coincidence_probability,
    hwp_unitary,
    pbs_unitary,
    project_detection,
    project_empty,
)
from pbsgates.qubit import QubitState

DEVICES = ("parity", "dcnot", "cnot")
DEFAULT_PAIR_RATE = 6000.0

# corrections are half-wave plates: 0 deg is a phase flip, 45 deg a bit flip
CORRECTION_PLATES = {"phase-flip": 0.0, "bit-flip": 45.0}


class HeraldPolicy(str, Enum):
    STRICT = "strict"
    FEEDFORWARD = "feedforward"


def _policy(policy) -> HeraldPolicy:
    try:
        return HeraldPolicy(policy)
    except ValueError:
        raise ValueError(f"unknown herald policy {policy!r}; expected one of {[p.value for p in HeraldPolicy]}") from None


@dataclass(frozen=True)
class _Herald:
    path: int
    basis_angle: float
    correction: str
    correction_path: int


@dataclass(frozen=True)
class _Circuit:
    inputs: tuple[int, ...]
    output_paths: tuple[int, ...]
    # each step is either a PbsSpec or a _Herald
    steps: tuple
    bell_pair: tuple[int, int] | None = None

    @property
    def paths(self) -> tuple[int, ...]:
        extra = self.bell_pair or ()
        return tuple(sorted(set(self.inputs) | set(extra) | set(self.output_paths)))


def _circuit(device: str, leak: float = 0.0, reflection_phase: float = 0.0) -> _Circuit:
    pbs = dict(leak=leak, reflection_phase=reflection_phase)
    if device == "parity":
        return _Circuit(
            inputs=(1, 2),
            output_paths=(1,),
            steps=(PbsSpec(1, 2, 0.0, **pbs), _Herald(2, 45.0, "phase-flip", 1)),
        )
    if device == "dcnot":
        return _Circuit(
            inputs=(1, 2),
            output_paths=(1,),
            steps=(PbsSpec(1, 2, 45.0, **pbs), _Herald(2, 0.0, "bit-flip", 1)),
        )
    if device == "cnot":
        return _Circuit(
            inputs=(1, 2),
            output_paths=(1, 2),
            bell_pair=(3, 4),
            steps=(
                PbsSpec(1, 3, 0.0, **pbs),
                _Herald(3, 45.0, "phase-flip", 1),
                PbsSpec(2, 4, 45.0, **pbs),
                _Herald(4, 0.0, "bit-flip", 2),
            ),
        )
    raise ValueError(f"unknown device {device!r}; expected one of {DEVICES}")


@dataclass(frozen=True)
class Branch:
    """One accepted detection record with its normalized logical output."""

    probability: float
    state: PhotonicState
    heralds: tuple[str, ...]
    corrections: tuple[str, ...]

    def logical_vector(self, output_paths: Sequence) -> np.ndarray:
        return logical_vector(self.state, output_paths)


@dataclass(frozen=True)
class DeviceOutcome:
    success_probability: float
    herald_label: str
    logical_output: PhotonicState | None
    correction_applied: str
    output_paths: tuple
    branches: tuple[Branch, ...] = field(default=(), repr=False)

    def output_distribution(self) -> dict[str, float]:
        """Probability of each logical output bit string, given success."""
        n = len(self.output_paths)
        dist = {format(k, f"0{n}b"): 0.0 for k in range(2**n)}
        if self.success_probability <= 0.0:
            return dist
        for b in self.branches:
            probs = np.abs(b.logical_vector(self.output_paths)) ** 2
            for k, p in enumerate(probs):
                dist[format(k, f"0{n}b")] += float(b.probability * p / self.success_probability)
        return dist

    def fidelity(self, expected: np.ndarray) -> float:
        """Overlap of the accepted output mixture with the pure logical state ``expected``."""
        if self.success_probability <= 0.0:
            return 0.0
        expected = np.asarray(expected, dtype=complex)
        expected = expected / np.linalg.norm(expected)
        total = sum(b.probability * abs(np.vdot(expected, b.logical_vector(self.output_paths))) ** 2 for b in self.branches)
        return float(total / self.success_probability)

    def logical_vector(self) -> np.ndarray:
        return logical_vector(self.logical_output, self.output_paths)


def logical_vector(state: PhotonicState, paths: Sequence) -> np.ndarray:
    """Amplitudes over logical bit strings, one photon per path (H = 0, V = 1).

    Terms that do not hold exactly one photon in every listed path are
    ignored, matching coincidence detection on the output paths.
    """
    out = np.zeros(2 ** len(paths), dtype=complex)
    idx = [state.mode(p, H) for p in paths]
    for occ, amp in state.amplitudes.items():
        bits = []
        for i in idx:
            if (occ[i], occ[i + 1]) == (1, 0):
                bits.append(0)
            elif (occ[i], occ[i + 1]) == (0, 1):
                bits.append(1)
            else:
                break
        else:
            out[int("".join(map(str, bits)) or "0", 2)] += amp
    return out


def _labeled(path, label):
    return path if label is None else (path, label)


def simulate(
    device: str,
    inputs: Sequence[QubitState],
    policy=HeraldPolicy.STRICT,
    *,
    leak: float = 0.0,
    reflection_phase: float = 0.0,
    distinguishable: bool = False,
) -> DeviceOutcome:
    """Run ``device`` with input photons injected into its input paths in order.

    With ``distinguishable=True`` each input photon carries its own internal
    label, realized as a private copy of every spatial path, so photons
    never interfere; detectors do not resolve the label.
    """
    policy = _policy(policy)
    circuit = _circuit(device, leak, reflection_phase)
    if len(inputs) != len(circuit.inputs):
        raise ValueError(f"{device} takes {len(circuit.inputs)} input qubits, got {len(inputs)}")
    inputs = [q if isinstance(q, QubitState) else QubitState(*q) for q in inputs]
    if distinguishable and circuit.bell_pair:
        raise ValueError(f"distinguishable runs support two-photon devices only, not {device!r}")
    labels = tuple(range(len(inputs))) if distinguishable else (None,)
    all_paths = [_labeled(p, lab) for p in circuit.paths for lab in labels]

    state = vacuum(all_paths)
    for k, (path, q) in enumerate(zip(circuit.inputs, inputs)):
        state = inject_photon(state, _labeled(path, k if distinguishable else None), q)
    if circuit.bell_pair:
        s = 1 / math.sqrt(2)
        state = inject_photons(state, list(circuit.bell_pair), {(H, H): s, (V, V): s})

    # branches hold unnormalized states
    branches = [(state, (), ())]
    for step in circuit.steps:
        if isinstance(step, PbsSpec):
            nxt = []
            for st, heralds, corrs in branches:
                for lab in labels:
                    spec = PbsSpec(
                        _labeled(step.path_a, lab),
                        _labeled(step.path_b, lab),
                        step.basis_angle,
                        step.reflection_phase,
                        step.leak,
                    )
                    st = apply_unitary(st, pbs_unitary(spec, st.paths))
                nxt.append((st, heralds, corrs))
            branches = nxt
            continue
        accepted = [PASS] if policy is HeraldPolicy.STRICT else [PASS, ORTH]
        nxt = []
        for st, heralds, corrs in branches:
            for pol in accepted:
                herald = HeraldOutcome(step.path, step.basis_angle, pol)
                for lab in labels:
                    proj = project_detection(st, _labeled(step.path, lab), step.basis_angle, pol)
                    for other in labels:
                        if other != lab:
                            proj = project_empty(proj, _labeled(step.path, other))
                    if proj.is_empty:
                        continue
                    corr = "none"
                    if pol == ORTH:
                        corr = step.correction
                        for c_lab in labels:
                            plate = WavePlateSpec(_labeled(step.correction_path, c_lab), CORRECTION_PLATES[corr])
                            proj = apply_unitary(proj, hwp_unitary(plate, proj.paths))
                    tag = herald.label if lab is None else f"{herald.label}#{lab}"
                    nxt.append((proj, heralds + (tag,), corrs + (corr,)))
        branches = nxt

    final: list[Branch] = []
    for st, heralds, corrs in branches:
        for part, suffix in _split_labels(st, circuit.output_paths, labels):
            if part.is_empty:
                continue
            final.append(Branch(part.norm_squared(), part.normalized(), heralds + suffix, corrs))

    success = float(sum(b.probability for b in final))
    # first branch wins ties so the designated herald is reported when outcomes are equiprobable
    main = None
    for b in final:
        if main is None or b.probability > main.probability + 1e-12:
            main = b
    accepted = [PASS] if policy is HeraldPolicy.STRICT else [PASS, ORTH]
    herald_labels = [
        "|".join(HeraldOutcome(s.path, s.basis_angle, pol).label for pol in accepted)
        for s in circuit.steps
        if isinstance(s, _Herald)
    ]
    if policy is HeraldPolicy.STRICT:
        correction = "none"
    else:
        correction = "+".join(s.correction for s in circuit.steps if isinstance(s, _Herald))
    return DeviceOutcome(
        success_probability=success,
        herald_label=" & ".join(herald_labels),
        logical_output=main.state if main else None,
        correction_applied=correction,
        output_paths=circuit.output_paths,
        branches=tuple(final),
    )


def _split_labels(state: PhotonicState, output_paths, labels):
    """Split a labeled state into orthogonal parts by which label copy each output photon carries.

    Every part is returned over the bare output paths.
    """
    if labels == (None,):
        idx = [state.mode(p, H) for p in output_paths]
        amps = {o: a for o, a in state.amplitudes.items() if all(o[i] + o[i + 1] == 1 for i in idx)}
        part = PhotonicState(state.paths, amps, state.n_photons)
        yield drop_paths(part, [p for p in state.paths if p not in output_paths]), ()
        return
    groups: dict[tuple, dict] = defaultdict(dict)
    for occ, amp in state.amplitudes.items():
        key = []
        for p in output_paths:
            occupied = [lab for lab in labels if state.path_count(occ, (p, lab))]
            if len(occupied) != 1:
                break
            key.append(occupied[0])
        else:
            groups[tuple(key)][occ] = amp
    for key, amps in sorted(groups.items()):
        part = PhotonicState(state.paths, amps, state.n_photons)
        keep = {(p, lab) for p, lab in zip(output_paths, key)}
        part = drop_paths(part, [p for p in state.paths if p not in keep])
        part = rename_paths(part, {(p, lab): p for p, lab in zip(output_paths, key)})
        # restore the declared output order
        order = [part.paths.index(p) for p in output_paths]
        amps = {tuple(o[2 * k + pol] for k in order for pol in (H, V)): a for o, a in part.amplitudes.items()}
        yield PhotonicState(tuple(output_paths), amps, part.n_photons), tuple(f"photon{lab}@{p}" for p, lab in zip(output_paths, key))


def parity_check(q1: QubitState, q2: QubitState, policy=HeraldPolicy.STRICT, **kwargs) -> DeviceOutcome:
    """Pass ``q1`` to output path 1 when it agrees with ``q2``; PBS in H/V, herald at 45 deg."""
    return simulate("parity", (q1, q2), policy, **kwargs)


def destructive_cnot(target: QubitState, control: QubitState, policy=HeraldPolicy.STRICT, **kwargs) -> DeviceOutcome:
    """Flip ``target`` when ``control`` is V; PBS at 45 deg, herald in H/V. The control is consumed."""
    return simulate("dcnot", (target, control), policy, **kwargs)


def full_cnot(control: QubitState, target: QubitState, policy=HeraldPolicy.FEEDFORWARD, **kwargs) -> DeviceOutcome:
    """Non-destructive CNOT from a parity check and a destructive CNOT sharing a Bell pair.

    Output paths are (1, 2) = (control, target).
    """
    return simulate("cnot", (control, target), policy, **kwargs)


def device_inputs(device: str, control: QubitState, target: QubitState) -> tuple[QubitState, QubitState]:
    """Order (control, target) as the device's input paths expect them.

    For the parity check the reference qubit on path 2 plays the control
    role and the transferred qubit on path 1 the target role.
    """
    if device == "cnot":
        return control, target
    if device in ("parity", "dcnot"):
        return target, control
    raise ValueError(f"unknown device {device!r}; expected one of {DEVICES}")


def ideal_output(device: str, control: QubitState, target: QubitState) -> np.ndarray:
    """Expected logical output vector of an ideal, successful run."""
    c, t = control.vector, target.vector
    if device == "parity":
        return t * c
    if device == "dcnot":
        return c[0] * t + c[1] * t[::-1]
    if device == "cnot":
        return CNOT @ np.kron(c, t)
    raise ValueError(f"unknown device {device!r}; expected one of {DEVICES}")


CNOT = np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex)


@dataclass(frozen=True)
class TruthTableRow:
    in_control: int
    in_target: int
    output_distribution: dict[str, float]
    success_probability: float
    synthetic_counts: dict[str, float]


def truth_table(
    device: str,
    policy=HeraldPolicy.STRICT,
    pair_rate: float = DEFAULT_PAIR_RATE,
    **kwargs,
) -> list[TruthTableRow]:
    """Run ``device`` over all computational-basis inputs, rows ordered (control, target)."""
    if device not in DEVICES:
        raise ValueError(f"unknown device {device!r}; expected one of {DEVICES}")
    rows = []
    for c in (0, 1):
        for t in (0, 1):
            inputs = device_inputs(device, QubitState.basis(c), QubitState.basis(t))
            out = simulate(device, inputs, policy, **kwargs)
            dist = out.output_distribution()
            counts = {k: pair_rate * out.success_probability * p for k, p in dist.items()}
            rows.append(TruthTableRow(c, t, dist, out.success_probability, counts))
    return rows


def coherence_scan(
    q1: QubitState,
    q2: QubitState,
    angles: Sequence[float],
    policy=HeraldPolicy.STRICT,
    **kwargs,
) -> list[tuple[float, float]]:
    """Coincidence probability of the parity check versus the output analyzer angle.

    Strict mode keeps the herald analyzer fixed at +45 deg on path 2 and
    sweeps the analyzer on path 1 over the two-photon output state.
    """
    angles = list(angles)
    if not angles:
        raise ValueError("angle list is empty")
    policy = _policy(policy)
    if policy is HeraldPolicy.STRICT:
        circuit = _circuit("parity", kwargs.get("leak", 0.0), kwargs.get("reflection_phase", 0.0))
        state = vacuum(circuit.paths)
        state = inject_photon(inject_photon(state, 1, q1), 2, q2)
        state = apply_unitary(state, pbs_unitary(circuit.steps[0], state.paths))
        return [
            (float(a), coincidence_probability(state, [AnalyzerSetting(1, float(a) % 180.0), AnalyzerSetting(2, 45.0)]))
            for a in angles
        ]
    out = parity_check(q1, q2, policy, **kwargs)
    result = []
    for a in angles:
        p = sum(b.probability * coincidence_probability(b.state, [AnalyzerSetting(1, float(a) % 180.0)]) for b in out.branches)
        result.append((float(a), float(p)))
    return result


def fit_malus(angles: Sequence[float], values: Sequence[float]) -> dict[str, float]:
    """Least-squares fit of ``offset + amplitude*cos^2(theta - theta0)``.

    Linear in ``1, cos 2theta, sin 2theta``, so the fit is exact for ideal data.
    """
    th = np.radians(np.asarray(angles, dtype=float))
    y = np.asarray(values, dtype=float)
    design = np.column_stack([np.ones_like(th), np.cos(2 * th), np.sin(2 * th)])
    (c0, c1, c2), *_ = np.linalg.lstsq(design, y, rcond=None)
    r = math.hypot(c1, c2)
    theta0 = math.degrees(0.5 * math.atan2(c2, c1)) % 180.0
    return {
        "theta0_deg": theta0,
        "zero_deg": (theta0 + 90.0) % 180.0,
        "amplitude": 2 * r,
        "offset": c0 - r,
    }


def postselected_maps(device: str, policy=HeraldPolicy.FEEDFORWARD, **kwargs) -> dict[tuple[str, ...], np.ndarray]:
    """Unnormalized logical transfer matrix for each herald record.

    Column ``k`` holds the output amplitudes, scaled by the square root of
    the branch probability, for basis input ``k = 2*control + target``.
    """
    if device != "cnot":
        raise ValueError("process maps are defined for the two-qubit CNOT only")
    maps: dict[tuple[str, ...], np.ndarray] = defaultdict(lambda: np.zeros((4, 4), dtype=complex))
    for k in range(4):
        c, t = divmod(k, 2)
        out = full_cnot(QubitState.basis(c), QubitState.basis(t), policy, **kwargs)
        for b in out.branches:
            maps[b.heralds][:, k] += math.sqrt(b.probability) * b.logical_vector(out.output_paths)
    return dict(maps)


def process_fidelity(maps: dict, ideal: np.ndarray) -> float:
    """Probability-weighted fidelity of each branch map with ``ideal``, up to a branch-global phase."""
    ideal = np.asarray(ideal, dtype=complex)
    d = ideal.shape[0]
    weight = total = 0.0
    for m in maps.values():
        w = float(np.trace(m.conj().T @ m).real)
        if w <= 0.0:
            continue
        total += abs(np.trace(ideal.conj().T @ m)) ** 2 / d
        weight += w
    return total / weight if weight else 0.0
