"""Multi-photon Fock states over polarization-resolved spatial paths.

Each spatial path carries two modes, H then V, and modes are ordered
path-major in the order the paths were declared.  A state is a sparse map
from occupation tuples to complex amplitudes with a fixed photon number.
"""

from __future__ import annotations

import itertools
import math
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Hashable, Iterable, Mapping, Sequence

import numpy as np

from pbsgates.qubit import QubitState

H, V = 0, 1
POLS = (H, V)

PRUNE_TOL = 1e-12
UNITARY_TOL = 1e-12
MAX_PHOTONS = 6
MAX_MODES = 16

Path = Hashable
Occupation = tuple[int, ...]


@dataclass(frozen=True, order=True)
class ModeIndex:
    path: Path
    pol: int

    def __post_init__(self):
        if self.pol not in POLS:
            raise ValueError(f"polarization must be H (0) or V (1), got {self.pol!r}")


def _check_caps(n_modes: int, n_photons: int) -> None:
    if n_modes > MAX_MODES:
        raise ValueError(f"{n_modes} modes exceeds the cap of {MAX_MODES}")
    if n_photons > MAX_PHOTONS:
        raise ValueError(f"{n_photons} photons exceeds the cap of {MAX_PHOTONS}")


@dataclass(frozen=True)
class PhotonicState:
    """Sparse Fock-space state with a fixed photon number.

    ``amplitudes`` maps occupation tuples (one entry per mode) to complex
    amplitudes.  Terms below :data:`PRUNE_TOL` in magnitude are dropped at
    construction.  An empty ``amplitudes`` map is the zero vector, used as
    the marker for a post-selection that cannot succeed.
    """

    paths: tuple
    amplitudes: Mapping[Occupation, complex] = field(compare=False)
    n_photons: int = 0

    def __post_init__(self):
        paths = tuple(self.paths)
        if len(set(paths)) != len(paths):
            raise ValueError(f"duplicate path labels in {paths!r}")
        object.__setattr__(self, "paths", paths)
        n_modes = 2 * len(paths)
        _check_caps(n_modes, self.n_photons)
        clean = {}
        for occ, amp in self.amplitudes.items():
            occ = tuple(int(n) for n in occ)
            if len(occ) != n_modes:
                raise ValueError(f"occupation {occ} does not match {n_modes} modes")
            if min(occ, default=0) < 0 or sum(occ) != self.n_photons:
                raise ValueError(f"occupation {occ} is not a {self.n_photons}-photon basis vector")
            amp = complex(amp)
            if abs(amp) >= PRUNE_TOL:
                clean[occ] = amp
        object.__setattr__(self, "amplitudes", clean)

    @property
    def n_modes(self) -> int:
        return 2 * len(self.paths)

    @property
    def modes(self) -> tuple[ModeIndex, ...]:
        return tuple(ModeIndex(p, pol) for p in self.paths for pol in POLS)

    @property
    def is_empty(self) -> bool:
        return not self.amplitudes

    def mode(self, path: Path, pol: int) -> int:
        try:
            return 2 * self.paths.index(path) + pol
        except ValueError:
            raise KeyError(f"unknown path {path!r}; state has {self.paths!r}") from None

    def norm_squared(self) -> float:
        return float(sum(abs(a) ** 2 for a in self.amplitudes.values()))

    def normalized(self) -> "PhotonicState":
        norm = math.sqrt(self.norm_squared())
        if norm == 0.0:
            raise ValueError("cannot normalize the zero state")
        return self._replace({o: a / norm for o, a in self.amplitudes.items()})

    def scaled(self, factor: complex) -> "PhotonicState":
        return self._replace({o: a * factor for o, a in self.amplitudes.items()})

    def path_count(self, occ: Occupation, path: Path) -> int:
        i = self.mode(path, H)
        return occ[i] + occ[i + 1]

    def vector(self, basis: Sequence[Occupation]) -> np.ndarray:
        return np.array([self.amplitudes.get(tuple(o), 0.0) for o in basis], dtype=complex)

    def _replace(self, amplitudes) -> "PhotonicState":
        return PhotonicState(self.paths, amplitudes, self.n_photons)

    def __repr__(self) -> str:
        terms = " + ".join(f"({a:.4g})|{','.join(map(str, o))}>" for o, a in sorted(self.amplitudes.items()))
        return f"PhotonicState(paths={self.paths!r}, {terms or '0'})"


def vacuum(paths: Iterable[Path]) -> PhotonicState:
    paths = tuple(paths)
    return PhotonicState(paths, {(0,) * (2 * len(paths)): 1.0}, 0)


def inject_photons(
    state: PhotonicState,
    paths: Sequence[Path],
    amplitudes: Mapping[tuple[int, ...], complex],
) -> PhotonicState:
    """Add one photon to each of ``paths`` with a joint polarization wavefunction.

    ``amplitudes`` maps a tuple of polarizations (one per path) to its
    amplitude, e.g. ``{(H, H): s, (V, V): s}`` for a Bell pair.
    """
    if len(set(paths)) != len(paths):
        raise ValueError("paths must be distinct")
    idx = [state.mode(p, H) for p in paths]
    for occ in state.amplitudes:
        for i, p in zip(idx, paths):
            if occ[i] or occ[i + 1]:
                raise ValueError(f"path {p!r} already holds photons")
    norm = sum(abs(a) ** 2 for a in amplitudes.values())
    if abs(norm - 1.0) > 1e-10:
        raise ValueError(f"photon wavefunction is not normalized (norm^2 = {norm!r})")
    new = {}
    for occ, amp in state.amplitudes.items():
        for pols, c in amplitudes.items():
            if len(pols) != len(paths) or any(pol not in POLS for pol in pols):
                raise ValueError(f"bad polarization label {pols!r}")
            out = list(occ)
            for i, pol in zip(idx, pols):
                out[i + pol] += 1
            new[tuple(out)] = amp * c
    return PhotonicState(state.paths, new, state.n_photons + len(paths))


def inject_photon(state: PhotonicState, path: Path, qubit: QubitState) -> PhotonicState:
    """Add a single photon ``alpha|H> + beta|V>`` in ``path``."""
    if not isinstance(qubit, QubitState):
        qubit = QubitState(*qubit)
    return inject_photons(state, [path], {(H,): qubit.alpha, (V,): qubit.beta})


@dataclass(frozen=True)
class SingleParticleUnitary:
    """Mode-space unitary; column ``i`` is the image of creation operator ``i``."""

    matrix: np.ndarray = field(compare=False)

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError(f"unitary must be square, got shape {m.shape}")
        dev = np.max(np.abs(m.conj().T @ m - np.eye(m.shape[0]))) if m.size else 0.0
        if dev > UNITARY_TOL:
            raise ValueError(f"matrix is not unitary (max |U^dag U - I| = {dev:.3g})")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @property
    def n_modes(self) -> int:
        return self.matrix.shape[0]

    def __matmul__(self, other: "SingleParticleUnitary") -> "SingleParticleUnitary":
        return SingleParticleUnitary(self.matrix @ other.matrix)

    @classmethod
    def identity(cls, n_modes: int) -> "SingleParticleUnitary":
        return cls(np.eye(n_modes, dtype=complex))

    @classmethod
    def on_paths(cls, all_paths: Sequence[Path], paths: Sequence[Path], block: np.ndarray) -> "SingleParticleUnitary":
        """Embed ``block`` (acting on the H/V modes of ``paths``) into the full mode space."""
        all_paths = list(all_paths)
        idx = []
        for p in paths:
            if p not in all_paths:
                raise KeyError(f"unknown path {p!r}")
            k = 2 * all_paths.index(p)
            idx += [k, k + 1]
        block = np.asarray(block, dtype=complex)
        if block.shape != (len(idx), len(idx)):
            raise ValueError(f"block shape {block.shape} does not fit {len(paths)} path(s)")
        full = np.eye(2 * len(all_paths), dtype=complex)
        full[np.ix_(idx, idx)] = block
        return cls(full)


def apply_unitary(state: PhotonicState, u: SingleParticleUnitary) -> PhotonicState:
    """Evolve ``state`` by substituting ``a_i^dag -> sum_j u[j, i] a_j^dag``."""
    if not isinstance(u, SingleParticleUnitary):
        u = SingleParticleUnitary(u)
    if u.n_modes != state.n_modes:
        raise ValueError(f"unitary acts on {u.n_modes} modes, state has {state.n_modes}")
    m = u.matrix
    columns = [[(j, m[j, i]) for j in np.flatnonzero(np.abs(m[:, i]) > 0)] for i in range(m.shape[0])]
    fact = [math.factorial(k) for k in range(state.n_photons + 1)]
    out: dict[Occupation, complex] = defaultdict(complex)
    for occ, amp in state.amplitudes.items():
        photons = [i for i, n in enumerate(occ) for _ in range(n)]
        coeff = amp / math.sqrt(math.prod(fact[n] for n in occ))
        for choice in itertools.product(*(columns[i] for i in photons)):
            target = [0] * state.n_modes
            c = coeff
            for j, uji in choice:
                target[j] += 1
                c *= uji
            out[tuple(target)] += c * math.sqrt(math.prod(fact[n] for n in target))
    return PhotonicState(state.paths, out, state.n_photons)


def permanent(a: np.ndarray) -> complex:
    """Permanent by direct expansion over permutations (small matrices only)."""
    a = np.asarray(a)
    n = a.shape[0]
    if n == 0:
        return 1.0 + 0j
    return complex(sum(math.prod(a[i, s[i]] for i in range(n)) for s in itertools.permutations(range(n))))


def transition_amplitude_oracle(u, input: Sequence[int], output: Sequence[int]) -> complex:
    """``<output| U |input>`` from the permanent of the occupation-repeated submatrix."""
    m = u.matrix if isinstance(u, SingleParticleUnitary) else np.asarray(u, dtype=complex)
    if sum(input) != sum(output):
        raise ValueError(f"photon numbers differ: {sum(input)} in, {sum(output)} out")
    if len(input) != m.shape[1] or len(output) != m.shape[0]:
        raise ValueError("occupation length does not match the unitary")
    cols = [i for i, n in enumerate(input) for _ in range(n)]
    rows = [j for j, n in enumerate(output) for _ in range(n)]
    norm = math.prod(math.factorial(n) for n in input) * math.prod(math.factorial(n) for n in output)
    return permanent(m[np.ix_(rows, cols)]) / math.sqrt(norm)


def _check_same_space(a: PhotonicState, b: PhotonicState) -> None:
    if a.paths != b.paths or a.n_photons != b.n_photons:
        raise ValueError(
            f"states live in different spaces: {a.paths}/{a.n_photons} photons vs {b.paths}/{b.n_photons} photons"
        )


def inner_product(a: PhotonicState, b: PhotonicState) -> complex:
    """``<a|b>``, antilinear in ``a``."""
    _check_same_space(a, b)
    return complex(sum(amp.conjugate() * b.amplitudes.get(o, 0.0) for o, amp in a.amplitudes.items()))


def fidelity(a: PhotonicState, b: PhotonicState) -> float:
    return abs(inner_product(a, b)) ** 2


def tensor(a: PhotonicState, b: PhotonicState) -> PhotonicState:
    """Product state over the concatenated path lists."""
    if set(a.paths) & set(b.paths):
        raise ValueError("tensor factors must have disjoint paths")
    amps = {oa + ob: x * y for oa, x in a.amplitudes.items() for ob, y in b.amplitudes.items()}
    return PhotonicState(a.paths + b.paths, amps, a.n_photons + b.n_photons)


def drop_paths(state: PhotonicState, paths: Iterable[Path]) -> PhotonicState:
    """Remove paths that are empty in every term."""
    paths = set(paths)
    keep = [k for k, p in enumerate(state.paths) if p not in paths]
    if len(keep) + len(paths) != len(state.paths):
        raise KeyError(f"unknown path among {paths!r}")
    idx = [2 * k + pol for k in keep for pol in POLS]
    amps = {}
    for occ, amp in state.amplitudes.items():
        if sum(occ) != sum(occ[i] for i in idx):
            raise ValueError("cannot drop a path that holds photons")
        amps[tuple(occ[i] for i in idx)] = amp
    return PhotonicState(tuple(state.paths[k] for k in keep), amps, state.n_photons)


def rename_paths(state: PhotonicState, mapping: Mapping[Path, Path]) -> PhotonicState:
    return PhotonicState(tuple(mapping.get(p, p) for p in state.paths), state.amplitudes, state.n_photons)
