"""Conjugation of Pauli operators through Clifford gates and circuit sections."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .circuit import Circuit, Gate, _multiple_of
from .pauli import DimensionError, PauliString, multiply_phased

# Images of (X, Z) for one-qubit gates and (XI, ZI, IX, IZ) for two-qubit gates
# under P -> g P g^dagger; letters list qubits[0] first. Rotations are keyed by
# their quarter-turn count (pi/2 for RX/RY/RZ, pi/4 for XX). Generated from the
# dense gate matrices and checked against them in tests/test_propagation.py.
CONJUGATION_TABLE = {
    "H": ("+Z", "+X"),
    "S": ("+Y", "+Z"),
    "Sdg": ("-Y", "+Z"),
    "X": ("+X", "-Z"),
    "Y": ("-X", "-Z"),
    "Z": ("-X", "+Z"),
    "CNOT": ("+XX", "+ZI", "+IX", "+ZZ"),
    "CZ": ("+XZ", "+ZI", "+ZX", "+IZ"),
    ("RX", 1): ("+X", "-Y"),
    ("RX", 2): ("+X", "-Z"),
    ("RX", 3): ("+X", "+Y"),
    ("RY", 1): ("-Z", "+X"),
    ("RY", 2): ("-X", "-Z"),
    ("RY", 3): ("+Z", "-X"),
    ("RZ", 1): ("+Y", "+Z"),
    ("RZ", 2): ("-X", "+Z"),
    ("RZ", 3): ("-Y", "+Z"),
    ("XX", 1): ("+XI", "-YX", "+IX", "-XY"),
    ("XX", 2): ("+XI", "-ZI", "+IX", "-IZ"),
    ("XX", 3): ("+XI", "+YX", "+IX", "+XY"),
}


class ClassificationError(ValueError):
    """A Pauli was asked to pass through a non-Clifford gate by conjugation."""


class CompatibilityError(ValueError):
    def __init__(self, violation: Compatibility):
        super().__init__(
            f"operator {violation.operator} incompatible with {violation.gate} "
            f"at moment {violation.moment}, qubit {violation.qubit}"
        )
        self.violation = violation


def _expand(images: tuple[str, ...]) -> list[tuple[int, int, int]]:
    """Lookup of every local pattern ``lx | lz << k`` to ``(x, z, sign)``."""
    k = len(images) // 2
    gens = [PauliString.from_label(s) for s in images]
    out = []
    for code in range(1 << (2 * k)):
        lx, lz = code & ((1 << k) - 1), code >> k
        acc = PauliString.identity(k)
        phase = 0
        for j in range(k):
            bx, bz = (lx >> j) & 1, (lz >> j) & 1
            phase += bx & bz  # Y = i X Z
            if bx:
                acc, dk = multiply_phased(acc, gens[2 * j])
                phase += dk
            if bz:
                acc, dk = multiply_phased(acc, gens[2 * j + 1])
                phase += dk
        phase %= 4
        assert phase in (0, 2), "conjugation produced an imaginary phase"
        out.append((acc.x, acc.z, 1 if phase == 0 else -1))
    return out


_LOOKUP = {key: _expand(images) for key, images in CONJUGATION_TABLE.items()}
_IDENTITY_LOOKUP = {k: [(c & ((1 << k) - 1), c >> k, 1) for c in range(1 << (2 * k))]
                    for k in (1, 2)}


def _table_for(g: Gate):
    if g.kind in _LOOKUP:
        return _LOOKUP[g.kind]
    if g.kind in ("RX", "RY", "RZ", "XX"):
        unit = math.pi / 4 if g.kind == "XX" else math.pi / 2
        turns = _multiple_of(g.angle, unit)
        if turns is not None:
            turns %= 4
            if turns == 0:
                return _IDENTITY_LOOKUP[len(g.qubits)]
            return _LOOKUP[(g.kind, turns)]
    raise ClassificationError(f"{g} is not Clifford")


def conjugate_through_gate(p: PauliString, g: Gate) -> PauliString:
    """Return ``g p g^dagger``."""
    table = _table_for(g)
    qs = g.qubits
    if max(qs) >= p.n:
        raise DimensionError(f"{g} acts outside a {p.n}-qubit operator")
    lx = lz = 0
    for j, q in enumerate(qs):
        lx |= ((p.x >> q) & 1) << j
        lz |= ((p.z >> q) & 1) << j
    if not (lx | lz):
        return p
    nx, nz, s = table[lx | (lz << len(qs))]
    x, z = p.x, p.z
    for j, q in enumerate(qs):
        bit = 1 << q
        x = (x & ~bit) | (((nx >> j) & 1) << q)
        z = (z & ~bit) | (((nz >> j) & 1) << q)
    return PauliString(p.n, x, z, p.sign * s)


@dataclass(frozen=True)
class Compatibility:
    ok: bool
    moment: int | None = None
    qubit: int | None = None
    gate: Gate | None = None
    operator: PauliString | None = None

    def __bool__(self) -> bool:
        return self.ok

    def to_json(self) -> dict:
        if self.ok:
            return {"compatible": True}
        return {
            "compatible": False,
            "moment": self.moment,
            "qubit": self.qubit,
            "gate": str(self.gate),
            "operator": str(self.operator),
        }


def _gate_violation(p: PauliString, g: Gate) -> int | None:
    """First qubit where ``p`` fails to commute trivially with non-Clifford ``g``.

    Passing means identity on the gate's qubits, or (for Pauli-axis rotations,
    T and Tdg included) equality with the rotation axis up to sign.
    """
    local = p.restrict(g.qubits)
    if set(local) == {"I"}:
        return None
    if g.axis is not None and local == g.axis:
        return None
    for q, ch in zip(g.qubits, local):
        want = g.axis[g.qubits.index(q)] if g.axis else "I"
        if ch != "I" and ch != want:
            return q
    return g.qubits[0]


def _step(p: PauliString, moment: tuple[Gate, ...], index: int, inverse: bool) -> PauliString:
    for g in moment:
        if g.is_clifford:
            p = conjugate_through_gate(p, g.inverse() if inverse else g)
        else:
            q = _gate_violation(p, g)
            if q is not None:
                raise CompatibilityError(Compatibility(False, index, q, g, p))
    return p


@dataclass(frozen=True)
class PropagationResult:
    pauli: PauliString
    layer_trace: tuple[PauliString, ...] = field(default=())

    def to_json(self) -> dict:
        return {"pauli": str(self.pauli), "layer_trace": [str(t) for t in self.layer_trace]}


def propagate(c: Circuit, p: PauliString, from_moment: int = 0, to_moment: int | None = None,
              trace: bool = True) -> PropagationResult:
    """Carry ``p`` from moment boundary ``from_moment`` to ``to_moment``.

    Boundary ``k`` sits just before moment ``k``. With ``to_moment < from_moment``
    the operator is pulled backwards using inverse gates.
    """
    if p.n < c.width:
        raise DimensionError(f"{p.n}-qubit operator on a width-{c.width} circuit")
    if to_moment is None:
        to_moment = len(c.moments)
    for b in (from_moment, to_moment):
        if not 0 <= b <= len(c.moments):
            raise IndexError(f"moment boundary {b} outside [0, {len(c.moments)}]")
    out = [p] if trace else None
    if to_moment >= from_moment:
        for m in range(from_moment, to_moment):
            p = _step(p, c.moments[m], m, inverse=False)
            if trace:
                out.append(p)
    else:
        for m in range(from_moment - 1, to_moment - 1, -1):
            p = _step(p, c.moments[m], m, inverse=True)
            if trace:
                out.append(p)
    return PropagationResult(p, tuple(out) if trace else (p,))


def check_compatibility(c: Circuit, p: PauliString, from_moment: int = 0,
                        to_moment: int | None = None) -> Compatibility:
    try:
        propagate(c, p, from_moment, to_moment, trace=False)
    except CompatibilityError as exc:
        return exc.violation
    return Compatibility(True)


def disentangling_operator(c: Circuit, f: PauliString, section: tuple[int, int] | None = None
                           ) -> PauliString:
    """U f U^dagger over the section; for Hermitian Pauli ``f`` this is the
    operator whose controlled version undoes controlled-``f``."""
    start, stop = section if section is not None else (0, len(c.moments))
    return propagate(c, f, start, stop, trace=False).pauli
