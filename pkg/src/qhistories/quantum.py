"""Qubit registers, gates, projective measurements and density operators.

Qubit 0 is the leftmost ket label and the most significant bit of a basis
index, so ``|10>`` is index 2 of a two-qubit register.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np

from .errors import (
    DimensionError,
    InvalidWireError,
    InvariantError,
    NormalizationError,
    NotUnitaryError,
    UnknownLabelError,
    ZeroProbabilityError,
)
from .linalg import as_matrix, as_vector, frobenius_close, is_unitary, num_qubits_for_dim

ZERO_PROBABILITY_FLOOR = 1e-14
NORM_TOL = 1e-9
OPERATOR_TOL = 1e-10

_S2 = 1 / np.sqrt(2)
I2 = np.eye(2, dtype=complex)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
Z = np.array([[1, 0], [0, -1]], dtype=complex)
H = np.array([[1, 1], [1, -1]], dtype=complex) * _S2
CNOT = np.array(
    [[1, 0, 0, 0],
     [0, 1, 0, 0],
     [0, 0, 0, 1],
     [0, 0, 1, 0]],
    dtype=complex,
)

for _m in (I2, X, Y, Z, H, CNOT):
    _m.flags.writeable = False


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=complex, copy=True)
    a.flags.writeable = False
    return a


def check_wires(wires: Sequence[int], num_qubits: int) -> tuple[int, ...]:
    wires = tuple(wires)
    for w in wires:
        if not isinstance(w, (int, np.integer)) or isinstance(w, bool):
            raise InvalidWireError(f"wire {w!r} is not an integer")
        if not 0 <= w < num_qubits:
            raise InvalidWireError(f"wire {w} out of range for {num_qubits}-qubit register")
    if len(set(wires)) != len(wires):
        raise InvalidWireError(f"duplicate wires in {list(wires)}")
    return tuple(int(w) for w in wires)


@dataclass(frozen=True, eq=False)
class StateVector:
    """Normalized pure state of an n-qubit register."""

    amplitudes: np.ndarray

    def __post_init__(self):
        amps = as_vector(self.amplitudes)
        num_qubits_for_dim(amps.shape[0])
        norm2 = float(np.vdot(amps, amps).real)
        if abs(norm2 - 1.0) > NORM_TOL:
            raise NormalizationError(f"state has squared norm {norm2:.12g}, expected 1")
        object.__setattr__(self, "amplitudes", _frozen(amps))

    @property
    def num_qubits(self) -> int:
        return num_qubits_for_dim(self.amplitudes.shape[0])

    @property
    def dim(self) -> int:
        return self.amplitudes.shape[0]

    @classmethod
    def basis(cls, bits: str) -> "StateVector":
        """Computational basis state from a bit string, e.g. ``"10"``."""
        amps = np.zeros(1 << len(bits), dtype=complex)
        amps[int(bits, 2)] = 1.0
        return cls(amps)

    @classmethod
    def product(cls, qubits: Sequence[Sequence[complex]]) -> "StateVector":
        amps = np.ones(1, dtype=complex)
        for q in qubits:
            amps = np.kron(amps, np.asarray(q, dtype=complex))
        return cls(amps)

    @classmethod
    def normalized(cls, amps) -> "StateVector":
        amps = as_vector(amps)
        norm = np.linalg.norm(amps)
        if norm < ZERO_PROBABILITY_FLOOR:
            raise NormalizationError("cannot normalize a zero vector")
        return cls(amps / norm)

    def close_to(self, other: "StateVector", tol: float = 1e-12) -> bool:
        return self.dim == other.dim and frobenius_close(self.amplitudes, other.amplitudes, tol)

    def __repr__(self) -> str:
        return f"StateVector(num_qubits={self.num_qubits}, amplitudes={np.array2string(self.amplitudes, precision=6)})"


@dataclass(frozen=True, eq=False)
class GatePlacement:
    unitary: np.ndarray
    wires: tuple[int, ...]

    def __post_init__(self):
        u = as_matrix(self.unitary)
        wires = tuple(self.wires)
        if u.shape != (1 << len(wires), 1 << len(wires)):
            raise DimensionError(f"{u.shape[0]}x{u.shape[1]} gate does not act on {len(wires)} wire(s)")
        if len(set(wires)) != len(wires):
            raise InvalidWireError(f"duplicate wires in {list(wires)}")
        if not is_unitary(u, OPERATOR_TOL):
            raise NotUnitaryError("gate matrix is not unitary")
        object.__setattr__(self, "unitary", _frozen(u))
        object.__setattr__(self, "wires", wires)


def lift_operator(op: np.ndarray, wires: Sequence[int], num_qubits: int) -> np.ndarray:
    """Embed a k-wire operator into the full register, identity elsewhere."""
    wires = check_wires(wires, num_qubits)
    op = as_matrix(op)
    k = len(wires)
    if op.shape != (1 << k, 1 << k):
        raise DimensionError(f"{op.shape[0]}x{op.shape[1]} operator does not act on {k} wire(s)")
    rest = [q for q in range(num_qubits) if q not in wires]
    full = np.kron(op, np.eye(1 << len(rest), dtype=complex))
    order = list(wires) + rest
    n = num_qubits
    perm = [order.index(q) for q in range(n)] + [n + order.index(q) for q in range(n)]
    dim = 1 << n
    return full.reshape((2,) * (2 * n)).transpose(perm).reshape(dim, dim)


def lift_gate(g: GatePlacement, num_qubits: int) -> np.ndarray:
    return lift_operator(g.unitary, g.wires, num_qubits)


def apply_gate(s: StateVector, g: GatePlacement) -> StateVector:
    n = s.num_qubits
    wires = check_wires(g.wires, n)
    k = len(wires)
    psi = s.amplitudes.reshape((2,) * n)
    u = g.unitary.reshape((2,) * (2 * k))
    out = np.tensordot(u, psi, axes=(list(range(k, 2 * k)), list(wires)))
    out = np.moveaxis(out, list(range(k)), list(wires))
    return StateVector(out.reshape(-1))


def _range_basis(p: np.ndarray) -> np.ndarray:
    """Orthonormal basis (as columns) of a projector's range.

    Diagonal projectors give computational basis vectors in index order;
    otherwise eigenvectors are phase-fixed so the largest component is real
    and positive.
    """
    off = p - np.diag(np.diag(p))
    if not off.size or np.max(np.abs(off)) <= OPERATOR_TOL:
        idx = np.flatnonzero(np.diag(p).real > 0.5)
        return np.eye(p.shape[0], dtype=complex)[:, idx]
    vals, vecs = np.linalg.eigh(p)
    vecs = vecs[:, vals > 0.5]
    for j in range(vecs.shape[1]):
        col = vecs[:, j]
        i = int(np.argmax(np.abs(col)))
        vecs[:, j] = col * (abs(col[i]) / col[i])
    return vecs


class ProjectorFamily:
    """Labeled, complete, mutually orthogonal projectors: one measurement.

    Each outcome is stored as an orthonormal basis of its range, so a
    computational-basis family on n qubits costs one ``2^n x 2^n`` array
    rather than ``2^n`` of them. Full projectors are built on demand.
    """

    def __init__(self, labels: Sequence[str], bases: Sequence[np.ndarray], *, validate: bool = True):
        self._labels = tuple(labels)
        self._bases = tuple(_frozen(b) for b in bases)
        self._index = {lab: i for i, lab in enumerate(self._labels)}
        self._projectors: dict[str, np.ndarray] = {}
        if validate:
            self._validate()

    def _validate(self):
        if not self._labels:
            raise InvariantError("projector family has no outcomes")
        if len(self._index) != len(self._labels):
            raise InvariantError(f"duplicate outcome labels in {list(self._labels)}")
        for lab in self._labels:
            if not isinstance(lab, str) or not lab:
                raise InvariantError(f"outcome label {lab!r} must be a non-empty string")
        dim = self._bases[0].shape[0]
        num_qubits_for_dim(dim)
        if any(b.ndim != 2 or b.shape[0] != dim or b.shape[1] == 0 for b in self._bases):
            raise DimensionError("outcome bases must be non-empty columns of equal dimension")
        w = np.hstack(self._bases)
        if w.shape[1] != dim:
            raise InvariantError(f"outcome ranks sum to {w.shape[1]}, expected {dim} (completeness)")
        if not frobenius_close(w.conj().T @ w, np.eye(dim), OPERATOR_TOL):
            raise InvariantError("outcome ranges are not orthonormal")

    @classmethod
    def from_projectors(cls, outcomes: Sequence[tuple[str, np.ndarray]]) -> "ProjectorFamily":
        outcomes = [(lab, as_matrix(p)) for lab, p in outcomes]
        if not outcomes:
            raise InvariantError("projector family has no outcomes")
        dim = outcomes[0][1].shape[0]
        eye = np.eye(dim)
        total = np.zeros((dim, dim), dtype=complex)
        for lab, p in outcomes:
            if p.shape != (dim, dim):
                raise DimensionError(f"projector {lab!r} has shape {p.shape}, expected {(dim, dim)}")
            if not frobenius_close(p, p.conj().T, OPERATOR_TOL):
                raise InvariantError(f"projector {lab!r} is not Hermitian")
            if not frobenius_close(p @ p, p, OPERATOR_TOL):
                raise InvariantError(f"projector {lab!r} is not idempotent")
            total += p
        for i, (la, pa) in enumerate(outcomes):
            for lb, pb in outcomes[i + 1:]:
                if not frobenius_close(pa @ pb, 0 * eye, OPERATOR_TOL):
                    raise InvariantError(f"projectors {la!r} and {lb!r} are not orthogonal")
        if not frobenius_close(total, eye, OPERATOR_TOL):
            raise InvariantError("projectors do not sum to the identity")
        fam = cls([lab for lab, _ in outcomes], [_range_basis(p) for _, p in outcomes])
        fam._projectors = {lab: _frozen(p) for lab, p in outcomes}
        return fam

    @property
    def labels(self) -> tuple[str, ...]:
        return self._labels

    @property
    def dim(self) -> int:
        return self._bases[0].shape[0]

    @property
    def num_qubits(self) -> int:
        return num_qubits_for_dim(self.dim)

    def __len__(self) -> int:
        return len(self._labels)

    def __iter__(self) -> Iterator[str]:
        return iter(self._labels)

    def __contains__(self, label) -> bool:
        return label in self._index

    def basis(self, label: str) -> np.ndarray:
        try:
            return self._bases[self._index[label]]
        except KeyError:
            raise UnknownLabelError(f"unknown outcome label {label!r}; expected one of {list(self._labels)}") from None

    def rank(self, label: str) -> int:
        return self.basis(label).shape[1]

    def projector(self, label: str) -> np.ndarray:
        if label not in self._projectors:
            v = self.basis(label)
            self._projectors[label] = _frozen(v @ v.conj().T)
        return self._projectors[label]

    @property
    def outcomes(self) -> list[tuple[str, np.ndarray]]:
        return [(lab, self.projector(lab)) for lab in self._labels]

    @property
    def is_nondegenerate(self) -> bool:
        return all(b.shape[1] == 1 for b in self._bases)

    def __repr__(self) -> str:
        ranks = ", ".join(f"{lab}:{b.shape[1]}" for lab, b in zip(self._labels, self._bases))
        return f"ProjectorFamily(num_qubits={self.num_qubits}, outcomes=[{ranks}])"


def computational_basis_family(num_qubits: int) -> ProjectorFamily:
    if num_qubits < 1:
        raise ValueError("num_qubits must be at least 1")
    dim = 1 << num_qubits
    eye = np.eye(dim, dtype=complex)
    labels = [format(i, f"0{num_qubits}b") for i in range(dim)]
    return ProjectorFamily(labels, [eye[:, [i]] for i in range(dim)], validate=False)


def subsystem_family(f: ProjectorFamily, wires: Sequence[int], num_qubits: int) -> ProjectorFamily:
    """Lift a measurement on ``wires`` to the whole register (identity elsewhere)."""
    wires = check_wires(wires, num_qubits)
    if len(wires) != f.num_qubits:
        raise InvalidWireError(f"{f.num_qubits}-qubit family placed on {len(wires)} wire(s)")
    if list(wires) == list(range(num_qubits)):
        return f
    return ProjectorFamily.from_projectors(
        [(lab, lift_operator(p, wires, num_qubits)) for lab, p in f.outcomes]
    )


def outcome_probability(s: StateVector, f: ProjectorFamily, label: str) -> float:
    if f.dim != s.dim:
        raise DimensionError(f"family of dim {f.dim} applied to state of dim {s.dim}")
    c = f.basis(label).conj().T @ s.amplitudes
    return float(np.vdot(c, c).real)


def born_update(s: StateVector, f: ProjectorFamily, label: str) -> tuple[float, StateVector]:
    """Probability of ``label`` and the renormalized post-measurement state."""
    if f.dim != s.dim:
        raise DimensionError(f"family of dim {f.dim} applied to state of dim {s.dim}")
    v = f.basis(label)
    c = v.conj().T @ s.amplitudes
    p = float(np.vdot(c, c).real)
    if p < ZERO_PROBABILITY_FLOOR:
        raise ZeroProbabilityError(f"outcome {label!r} has probability {p:.3g}")
    return p, StateVector((v @ c) / np.sqrt(p))


@dataclass(frozen=True, eq=False)
class DensityOperator:
    matrix: np.ndarray

    def __post_init__(self):
        m = as_matrix(self.matrix)
        if m.shape[0] != m.shape[1]:
            raise DimensionError("density operator must be square")
        num_qubits_for_dim(m.shape[0])
        if not frobenius_close(m, m.conj().T, OPERATOR_TOL):
            raise InvariantError("density operator is not Hermitian")
        tr = np.trace(m).real
        if abs(tr - 1.0) > NORM_TOL:
            raise InvariantError(f"density operator has trace {tr:.12g}, expected 1")
        if np.linalg.eigvalsh(m).min() < -NORM_TOL:
            raise InvariantError("density operator has a negative eigenvalue")
        object.__setattr__(self, "matrix", _frozen(m))

    @property
    def num_qubits(self) -> int:
        return num_qubits_for_dim(self.matrix.shape[0])

    def purity(self) -> float:
        return float(np.trace(self.matrix @ self.matrix).real)


def density_from_pure(s: StateVector) -> DensityOperator:
    return DensityOperator(np.outer(s.amplitudes, s.amplitudes.conj()))


def partial_trace(rho: DensityOperator, keep_wires: Sequence[int]) -> DensityOperator:
    """Reduced operator on ``keep_wires``, in the order given."""
    n = rho.num_qubits
    keep = check_wires(keep_wires, n)
    if not keep:
        raise InvalidWireError("keep_wires must be non-empty")
    gone = [q for q in range(n) if q not in keep]
    dk, dg = 1 << len(keep), 1 << len(gone)
    order = list(keep) + gone
    t = rho.matrix.reshape((2,) * (2 * n)).transpose(order + [n + q for q in order])
    reduced = np.trace(t.reshape(dk, dg, dk, dg), axis1=1, axis2=3)
    return DensityOperator(reduced)


def named_family(name: str, num_qubits: int) -> ProjectorFamily:
    """Built-in measurements addressable by name from scenario files.

    ``computational``, ``identity`` (one trivial outcome), ``parity``
    (``even``/``odd`` in the computational basis), ``x`` (product X basis,
    labels over ``+``/``-``) and ``bell`` (two qubits only).
    """
    dim = 1 << num_qubits
    if name == "computational":
        return computational_basis_family(num_qubits)
    if name == "identity":
        return ProjectorFamily(["1"], [np.eye(dim, dtype=complex)], validate=False)
    if name == "parity":
        eye = np.eye(dim, dtype=complex)
        odd = np.array([bin(i).count("1") % 2 for i in range(dim)], dtype=bool)
        return ProjectorFamily(["even", "odd"], [eye[:, ~odd], eye[:, odd]], validate=False)
    if name == "x":
        hn = np.ones((1, 1), dtype=complex)
        for _ in range(num_qubits):
            hn = np.kron(hn, H)
        labels = [format(i, f"0{num_qubits}b").replace("0", "+").replace("1", "-") for i in range(dim)]
        return ProjectorFamily(labels, [hn[:, [i]] for i in range(dim)])
    if name == "bell":
        if num_qubits != 2:
            raise InvalidWireError("the bell family acts on exactly 2 qubits")
        vecs = np.array([[1, 0, 0, 1], [1, 0, 0, -1], [0, 1, 1, 0], [0, 1, -1, 0]], dtype=complex).T * _S2
        return ProjectorFamily(["phi+", "phi-", "psi+", "psi-"], [vecs[:, [i]] for i in range(4)])
    raise UnknownLabelError(f"unknown measurement family {name!r}")


NAMED_FAMILIES = ("computational", "identity", "parity", "x", "bell")
