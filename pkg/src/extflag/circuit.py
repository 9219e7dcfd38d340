"""Layered circuit IR, text format, dense unitaries and ion-trap compilation."""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass
from importlib import resources
from typing import Iterable, Sequence

import numpy as np

SINGLE_KINDS = ("H", "S", "Sdg", "X", "Y", "Z", "T", "Tdg", "RX", "RY", "RZ")
TWO_KINDS = ("CNOT", "CZ", "XX")
ROTATION_KINDS = ("RX", "RY", "RZ", "XX")
NATIVE_KINDS = frozenset(ROTATION_KINDS)
MAX_WIDTH = 12

# rotation axis (as Pauli letters on the gate's qubits) used by the overrotation model
AXES = {"RX": "X", "RY": "Y", "RZ": "Z", "XX": "XX", "X": "X", "Y": "Y", "Z": "Z",
        "S": "Z", "Sdg": "Z", "T": "Z", "Tdg": "Z"}

_MNEMONIC = {k.lower(): k for k in SINGLE_KINDS + TWO_KINDS}


class CircuitError(ValueError):
    pass


class ParseError(CircuitError):
    def __init__(self, lineno: int, msg: str):
        super().__init__(f"line {lineno}: {msg}")
        self.lineno = lineno


class ResourceError(CircuitError):
    pass


def _multiple_of(angle: float, unit: float) -> int | None:
    r = angle / unit
    k = round(r)
    return k if abs(r - k) < 1e-9 else None


@dataclass(frozen=True)
class Gate:
    kind: str
    qubits: tuple[int, ...]
    angle: float | None = None

    def __post_init__(self):
        if self.kind not in SINGLE_KINDS + TWO_KINDS:
            raise CircuitError(f"unknown gate kind {self.kind!r}")
        arity = 2 if self.kind in TWO_KINDS else 1
        if len(self.qubits) != arity:
            raise CircuitError(f"{self.kind} takes {arity} qubit(s), got {self.qubits}")
        if len(set(self.qubits)) != arity:
            raise CircuitError(f"duplicate qubit in {self.kind} {self.qubits}")
        if any(q < 0 for q in self.qubits):
            raise CircuitError(f"negative qubit index in {self.qubits}")
        if (self.angle is not None) != (self.kind in ROTATION_KINDS):
            raise CircuitError(f"angle mismatch for {self.kind}")

    @property
    def is_two_qubit(self) -> bool:
        return len(self.qubits) == 2

    @property
    def is_clifford(self) -> bool:
        return is_clifford(self.kind, self.angle)

    @property
    def axis(self) -> str | None:
        """Pauli axis letters on ``qubits``; ``None`` for H, CNOT and CZ."""
        return AXES.get(self.kind)

    def inverse(self) -> Gate:
        inv = {"S": "Sdg", "Sdg": "S", "T": "Tdg", "Tdg": "T"}
        if self.kind in inv:
            return Gate(inv[self.kind], self.qubits)
        if self.angle is not None:
            return Gate(self.kind, self.qubits, -self.angle)
        return self

    def matrix(self) -> np.ndarray:
        return gate_matrix(self.kind, self.angle)

    def __str__(self) -> str:
        parts = [self.kind.lower(), *map(str, self.qubits)]
        if self.angle is not None:
            parts.append(format_angle(self.angle))
        return " ".join(parts)


def is_clifford(kind: str, angle: float | None = None) -> bool:
    """XX(theta) = exp(-i theta XX) is Clifford on multiples of pi/4; the
    single-qubit rotations exp(-i theta P / 2) on multiples of pi/2."""
    if kind in ("T", "Tdg"):
        return False
    if kind in ("RX", "RY", "RZ"):
        return _multiple_of(angle, math.pi / 2) is not None
    if kind == "XX":
        return _multiple_of(angle, math.pi / 4) is not None
    return True


def format_angle(angle: float) -> str:
    return f"{angle:.17g}"


_SQ2 = 1 / math.sqrt(2)
_FIXED = {
    "H": np.array([[_SQ2, _SQ2], [_SQ2, -_SQ2]], dtype=complex),
    "S": np.diag([1, 1j]),
    "Sdg": np.diag([1, -1j]),
    "T": np.diag([1, np.exp(1j * math.pi / 4)]),
    "Tdg": np.diag([1, np.exp(-1j * math.pi / 4)]),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.diag([1, -1]).astype(complex),
    # two-qubit matrices index as b0 + 2*b1 with b0 the bit of qubits[0]
    "CNOT": np.array(
        [[1, 0, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0], [0, 1, 0, 0]], dtype=complex
    ),
    "CZ": np.diag([1, 1, 1, -1]).astype(complex),
}
_PAULI = {
    "X": _FIXED["X"], "Y": _FIXED["Y"], "Z": _FIXED["Z"],
    "XX": np.kron(_FIXED["X"], _FIXED["X"]),
}


def axis_rotation(axis: str, angle: float) -> np.ndarray:
    """exp(-i angle A) for a Pauli axis A given by letters."""
    a = _PAULI[axis]
    return math.cos(angle) * np.eye(a.shape[0]) - 1j * math.sin(angle) * a


def gate_matrix(kind: str, angle: float | None = None) -> np.ndarray:
    if kind in _FIXED:
        return _FIXED[kind].copy()
    if kind == "XX":
        return axis_rotation("XX", angle)
    return axis_rotation(kind[1], angle / 2)


@dataclass(frozen=True)
class Circuit:
    width: int
    moments: tuple[tuple[Gate, ...], ...] = ()

    def __post_init__(self):
        if self.width < 1:
            raise CircuitError("width must be positive")
        moments = tuple(tuple(sorted(m, key=lambda g: g.qubits)) for m in self.moments)
        object.__setattr__(self, "moments", moments)
        for i, moment in enumerate(moments):
            used: set[int] = set()
            for g in moment:
                if max(g.qubits) >= self.width:
                    raise CircuitError(f"gate {g} exceeds width {self.width}")
                if used & set(g.qubits):
                    raise CircuitError(f"moment {i} reuses a qubit in {g}")
                used.update(g.qubits)

    @classmethod
    def from_gates(cls, width: int, gates: Iterable[Gate]) -> Circuit:
        """Greedy packing: each gate goes to the earliest moment after every
        earlier gate sharing one of its qubits."""
        frontier = [0] * width
        layers: list[list[Gate]] = []
        for g in gates:
            if max(g.qubits) >= width:
                raise CircuitError(f"gate {g} exceeds width {width}")
            m = max(frontier[q] for q in g.qubits)
            if m == len(layers):
                layers.append([])
            layers[m].append(g)
            for q in g.qubits:
                frontier[q] = m + 1
        return cls(width, tuple(tuple(layer) for layer in layers))

    @property
    def gates(self) -> list[Gate]:
        return [g for m in self.moments for g in m]

    def __len__(self) -> int:
        return len(self.moments)

    @property
    def gate_count(self) -> int:
        return sum(len(m) for m in self.moments)

    @property
    def two_qubit_count(self) -> int:
        return sum(g.is_two_qubit for g in self.gates)

    @property
    def non_clifford_count(self) -> int:
        return sum(not g.is_clifford for g in self.gates)

    @property
    def is_native(self) -> bool:
        return all(g.kind in NATIVE_KINDS for g in self.gates)

    def slice(self, start: int, stop: int) -> Circuit:
        return Circuit(self.width, self.moments[start:stop])

    def widen(self, width: int) -> Circuit:
        return Circuit(width, self.moments)

    def inverse(self) -> Circuit:
        return Circuit(
            self.width, tuple(tuple(g.inverse() for g in m) for m in reversed(self.moments))
        )

    def __add__(self, other: Circuit) -> Circuit:
        width = max(self.width, other.width)
        return Circuit(width, self.moments + other.moments)


# --------------------------------------------------------------------------
# text format


def parse(text: str) -> Circuit:
    width = None
    gates: list[Gate] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tok = line.split()
        if width is None:
            if tok[0] != "qubits" or len(tok) != 2:
                raise ParseError(lineno, "expected header 'qubits <N>'")
            try:
                width = int(tok[1])
            except ValueError:
                raise ParseError(lineno, f"bad qubit count {tok[1]!r}") from None
            if width < 1:
                raise ParseError(lineno, "qubit count must be positive")
            continue
        kind = _MNEMONIC.get(tok[0])
        if kind is None:
            raise ParseError(lineno, f"unknown mnemonic {tok[0]!r}")
        arity = 2 if kind in TWO_KINDS else 1
        n_args = arity + (kind in ROTATION_KINDS)
        if len(tok) - 1 != n_args:
            raise ParseError(lineno, f"{tok[0]} expects {n_args} argument(s)")
        try:
            qubits = tuple(int(t) for t in tok[1 : 1 + arity])
        except ValueError:
            raise ParseError(lineno, "qubit index must be an integer") from None
        for q in qubits:
            if not 0 <= q < width:
                raise ParseError(lineno, f"qubit {q} out of range for width {width}")
        if len(set(qubits)) != len(qubits):
            raise ParseError(lineno, "duplicate qubit in gate")
        angle = None
        if kind in ROTATION_KINDS:
            try:
                angle = float(tok[-1])
            except ValueError:
                raise ParseError(lineno, f"malformed angle {tok[-1]!r}") from None
            if not math.isfinite(angle):
                raise ParseError(lineno, f"malformed angle {tok[-1]!r}")
        gates.append(Gate(kind, qubits, angle))
    if width is None:
        raise ParseError(0, "missing 'qubits <N>' header")
    return Circuit.from_gates(width, gates)


def serialize(c: Circuit) -> str:
    lines = [f"qubits {c.width}"]
    lines.extend(str(g) for g in c.gates)
    return "\n".join(lines) + "\n"


def load(path) -> Circuit:
    with open(path) as fh:
        return parse(fh.read())


# --------------------------------------------------------------------------
# dense unitaries


def apply_gate_to_tensor(state: np.ndarray, mat: np.ndarray, qubits: Sequence[int], n: int,
                         offset: int = 0) -> np.ndarray:
    """Left-multiply ``mat`` onto the axes of ``state`` that hold ``qubits``.

    ``state`` has ``n`` qubit axes starting at ``offset`` in big-endian order,
    so qubit ``q`` sits on axis ``offset + n - 1 - q``.
    """
    k = len(qubits)
    t = mat.reshape((2,) * (2 * k))
    # t axes: out bits for qubits[k-1..0], then in bits for the same order
    axes = [offset + n - 1 - q for q in reversed(qubits)]
    out = np.tensordot(t, state, axes=(list(range(k, 2 * k)), axes))
    return np.moveaxis(out, list(range(k)), axes)


def to_unitary(c: Circuit) -> np.ndarray:
    n = c.width
    if n > MAX_WIDTH:
        raise ResourceError(f"width {n} exceeds dense limit {MAX_WIDTH}")
    dim = 1 << n
    u = np.eye(dim, dtype=complex).reshape((2,) * n + (dim,))
    for g in c.gates:
        u = apply_gate_to_tensor(u, g.matrix(), g.qubits, n)
    return u.reshape(dim, dim)


def equal_up_to_phase(a: np.ndarray, b: np.ndarray, atol: float = 1e-10) -> bool:
    idx = np.unravel_index(np.argmax(np.abs(b)), b.shape)
    if abs(b[idx]) < atol:
        return np.allclose(a, b, atol=atol)
    phase = a[idx] / b[idx]
    if not math.isclose(abs(phase), 1.0, abs_tol=atol):
        return False
    return np.allclose(a, phase * b, atol=atol)


# --------------------------------------------------------------------------
# ion-trap native compilation: {RX, RY, RZ, XX}

_HALF = math.pi / 2

_NATIVE_SINGLE = {
    # time-ordered rotation sequences, each equal to the gate up to global phase
    "H": (("RZ", math.pi), ("RY", _HALF)),
    "S": (("RZ", _HALF),),
    "Sdg": (("RZ", -_HALF),),
    "T": (("RZ", math.pi / 4),),
    "Tdg": (("RZ", -math.pi / 4),),
    "X": (("RX", math.pi),),
    "Y": (("RY", math.pi),),
    "Z": (("RZ", math.pi),),
}


def _native_cnot(c: int, t: int) -> list[list[Gate]]:
    return [
        [Gate("RY", (c,), _HALF)],
        [Gate("XX", (c, t), math.pi / 4)],
        [Gate("RX", (c,), -_HALF), Gate("RX", (t,), -_HALF)],
        [Gate("RY", (c,), -_HALF)],
    ]


def _native_layers(g: Gate) -> list[list[Gate]]:
    if g.kind in NATIVE_KINDS:
        return [[g]]
    if g.kind in _NATIVE_SINGLE:
        return [[Gate(k, g.qubits, a)] for k, a in _NATIVE_SINGLE[g.kind]]
    if g.kind == "CNOT":
        return _native_cnot(*g.qubits)
    # CZ(a, b) = H_b CNOT(a, b) H_b
    a, b = g.qubits
    h = _native_layers(Gate("H", (b,)))
    return h + _native_cnot(a, b) + h


def native_moment_map(c: Circuit) -> list[int]:
    """Start index of each input moment's block in ``compile_to_native(c)``;
    the final entry is the total moment count."""
    starts = [0]
    for m in c.moments:
        starts.append(starts[-1] + max((len(_native_layers(g)) for g in m), default=0))
    return starts


def compile_to_native(c: Circuit) -> Circuit:
    """Each input moment becomes a contiguous block of native moments, so
    section boundaries survive compilation (see :func:`native_moment_map`)."""
    out: list[tuple[Gate, ...]] = []
    for m in c.moments:
        seqs = [_native_layers(g) for g in m]
        depth = max((len(s) for s in seqs), default=0)
        for i in range(depth):
            out.append(tuple(gate for s in seqs if i < len(s) for gate in s[i]))
    return Circuit(c.width, tuple(out))


# --------------------------------------------------------------------------
# benchmarks


def zzzzz_rotation_circuit(n_qubits: int, theta: float) -> Circuit:
    """exp(-i theta/2 Z...Z) as a CNOT ladder, one RZ on the last qubit, and
    the mirrored ladder."""
    if n_qubits < 2:
        raise ValueError("need at least 2 qubits")
    ladder = [Gate("CNOT", (i, i + 1)) for i in range(n_qubits - 1)]
    gates = ladder + [Gate("RZ", (n_qubits - 1,), theta)] + ladder[::-1]
    return Circuit.from_gates(n_qubits, gates)


MAGIC_ASSET = "magic_distillation.qc"
MAGIC_SHA256 = "b0ae78572981a7de8dbfec0127bd3afd7281016e9615ba3b824661cf49d2fa1f"


def magic_distillation_circuit() -> Circuit:
    """T layer on five qubits followed by the five-qubit-code decoder
    (terminal syndrome measurements omitted)."""
    raw = resources.files("extflag.circuits").joinpath(MAGIC_ASSET).read_bytes()
    digest = hashlib.sha256(raw).hexdigest()
    if digest != MAGIC_SHA256:
        raise CircuitError(f"{MAGIC_ASSET} checksum mismatch: {digest}")
    return parse(raw.decode())
