"""Pauli flag gadgets: synthesis, nesting and circuit instrumentation."""

from __future__ import annotations

from dataclasses import dataclass

from .circuit import Circuit, Gate
from .pauli import PauliString, weight
from .propagation import CompatibilityError, check_compatibility, disentangling_operator


@dataclass(frozen=True)
class FlagGadget:
    """Controlled-P before a section and controlled-P' after it.

    ``disentangle`` is stored with sign +1; a negative propagated sign is
    carried by ``sign_fix`` and realised as Z on the ancilla.
    """

    entangle: PauliString
    disentangle: PauliString
    ancilla: int
    entry_moment: int
    exit_moment: int
    sign_fix: bool = False

    @property
    def section(self) -> tuple[int, int]:
        return self.entry_moment, self.exit_moment

    @property
    def signed_disentangle(self) -> PauliString:
        return -self.disentangle if self.sign_fix else self.disentangle

    def two_qubit_count(self) -> int:
        return weight(self.entangle) + weight(self.disentangle)

    def with_ancilla(self, ancilla: int) -> FlagGadget:
        return FlagGadget(self.entangle, self.disentangle, ancilla, self.entry_moment,
                          self.exit_moment, self.sign_fix)

    def to_json(self) -> dict:
        return {
            "entangle": str(self.entangle),
            "disentangle": str(self.disentangle),
            "ancilla": self.ancilla,
            "entry": self.entry_moment,
            "exit": self.exit_moment,
            "sign_fix": self.sign_fix,
        }

    @classmethod
    def from_json(cls, d: dict) -> FlagGadget:
        return cls(
            PauliString.from_label(d["entangle"]),
            PauliString.from_label(d["disentangle"]),
            int(d["ancilla"]),
            int(d["entry"]),
            int(d["exit"]),
            bool(d["sign_fix"]),
        )


@dataclass(frozen=True)
class NestedFlagSet:
    """Gadgets listed outermost first. ``disentangle_order`` defaults to the
    reversed list order, the only valid nesting."""

    gadgets: tuple[FlagGadget, ...] = ()
    disentangle_order: tuple[int, ...] | None = None

    def __post_init__(self):
        object.__setattr__(self, "gadgets", tuple(self.gadgets))
        if self.disentangle_order is None:
            order = tuple(reversed(range(len(self.gadgets))))
            object.__setattr__(self, "disentangle_order", order)

    @property
    def ancillas(self) -> tuple[int, ...]:
        return tuple(g.ancilla for g in self.gadgets)

    def __len__(self) -> int:
        return len(self.gadgets)

    def __iter__(self):
        return iter(self.gadgets)


def _section(c: Circuit, section) -> tuple[int, int]:
    start, stop = section if section is not None else (0, len(c.moments))
    if not 0 <= start <= stop <= len(c.moments):
        raise ValueError(f"section {start}:{stop} outside circuit of {len(c.moments)} moments")
    return start, stop


def synthesize(c: Circuit, p: PauliString, section: tuple[int, int] | None = None,
               ancilla: int | None = None) -> FlagGadget:
    if p.n != c.width:
        p = p.extend(c.width) if p.n < c.width else p.truncate(c.width)
    if p.is_identity:
        raise ValueError("identity flag detects nothing")
    start, stop = _section(c, section)
    p = p.unsigned()
    compat = check_compatibility(c, p, start, stop)
    if not compat:
        raise CompatibilityError(compat)
    p_out = disentangling_operator(c, p, (start, stop))
    return FlagGadget(
        entangle=p,
        disentangle=p_out.unsigned(),
        ancilla=c.width if ancilla is None else ancilla,
        entry_moment=start,
        exit_moment=stop,
        sign_fix=p_out.sign == -1,
    )


def controlled_pauli_layers(ancilla: int, p: PauliString) -> list[tuple[Gate, ...]]:
    """One controlled-Pauli leg per non-identity letter, ascending qubit order.
    Controlled-Y is S^dagger, CNOT, S on the target."""
    layers: list[tuple[Gate, ...]] = []
    for q in p.support:
        letter = p.letter(q)
        if letter == "X":
            layers.append((Gate("CNOT", (ancilla, q)),))
        elif letter == "Z":
            layers.append((Gate("CZ", (ancilla, q)),))
        else:
            layers += [(Gate("Sdg", (q,)),), (Gate("CNOT", (ancilla, q)),), (Gate("S", (q,)),)]
    return layers


@dataclass(frozen=True)
class InstrumentLayout:
    """Where the pieces of an instrumented circuit sit, in moment indices."""

    entangle_start: int
    section_start: int
    disentangle_start: int
    gadget_end: int  # boundary after the sign-fix moment
    inserted_before: int
    inserted_after: int

    def map_boundary(self, b: int, entry: int, exit_: int) -> int:
        """Instrumented boundary for boundary ``b`` of the original circuit.
        The exit boundary maps to just before the disentangling legs."""
        if b <= entry:
            return b
        if b < exit_:
            return b + self.inserted_before
        if b == exit_:
            return self.disentangle_start
        return b + self.inserted_before + self.inserted_after


def _build(c: Circuit, flags: NestedFlagSet):
    if not len(flags):
        return c, None
    ancillas = flags.ancillas
    if len(set(ancillas)) != len(ancillas):
        raise ValueError(f"ancilla collision in {ancillas}")
    if min(ancillas) < c.width:
        raise ValueError(f"ancillas {ancillas} overlap the data register (width {c.width})")
    sections = {g.section for g in flags}
    if len(sections) != 1:
        raise ValueError(f"nested flags must share one section, got {sorted(sections)}")
    entry, exit_ = sections.pop()
    width = max(c.width, max(ancillas) + 1)
    width_pad = lambda p: p.extend(width)  # noqa: E731

    pre = list(c.moments[:entry])
    ent = [tuple(Gate("H", (a,)) for a in ancillas)]
    for g in flags:
        ent += controlled_pauli_layers(g.ancilla, width_pad(g.entangle))
    body = list(c.moments[entry:exit_])
    dis: list[tuple[Gate, ...]] = []
    for i in flags.disentangle_order:
        g = flags.gadgets[i]
        dis += controlled_pauli_layers(g.ancilla, width_pad(g.disentangle))
    fix = tuple(Gate("Z", (g.ancilla,)) for g in flags if g.sign_fix)
    if fix:
        dis.append(fix)
    post = list(c.moments[exit_:])
    layout = InstrumentLayout(
        entangle_start=len(pre),
        section_start=len(pre) + len(ent),
        disentangle_start=len(pre) + len(ent) + len(body),
        gadget_end=len(pre) + len(ent) + len(body) + len(dis),
        inserted_before=len(ent),
        inserted_after=len(dis),
    )
    return Circuit(width, tuple(pre + ent + body + dis + post)), layout


def instrument(c: Circuit, flags: NestedFlagSet | FlagGadget) -> Circuit:
    if isinstance(flags, FlagGadget):
        flags = NestedFlagSet((flags,))
    return _build(c, flags)[0]


def instrument_layout(c: Circuit, flags: NestedFlagSet | FlagGadget) -> InstrumentLayout | None:
    if isinstance(flags, FlagGadget):
        flags = NestedFlagSet((flags,))
    return _build(c, flags)[1]


@dataclass(frozen=True)
class NestingCheck:
    ok: bool
    kind: str = ""
    detail: str = ""

    def __bool__(self) -> bool:
        return self.ok


def validate_nesting(flags: NestedFlagSet, circuit: Circuit | None = None) -> NestingCheck:
    """Ancillas distinct, one shared section, disentangles in reverse order and,
    when ``circuit`` is given, each gadget consistent with it."""
    ancillas = flags.ancillas
    if len(set(ancillas)) != len(ancillas):
        return NestingCheck(False, "ancilla", f"repeated ancilla in {ancillas}")
    if circuit is not None and ancillas and min(ancillas) < circuit.width:
        return NestingCheck(False, "ancilla", f"ancilla inside data register: {ancillas}")
    if len({g.section for g in flags}) > 1:
        return NestingCheck(False, "section", "gadgets cover different sections")
    expected = tuple(reversed(range(len(flags))))
    if tuple(flags.disentangle_order) != expected:
        return NestingCheck(
            False, "ordering",
            f"disentangle order {flags.disentangle_order}, expected {expected}",
        )
    if circuit is not None:
        for i, g in enumerate(flags):
            try:
                ref = synthesize(circuit, g.entangle, g.section, g.ancilla)
            except (CompatibilityError, ValueError) as exc:
                return NestingCheck(False, "gadget", f"gadget {i}: {exc}")
            if ref != g:
                return NestingCheck(False, "gadget", f"gadget {i} disentangle mismatch")
    return NestingCheck(True)


def nest(*gadgets: FlagGadget, data_width: int | None = None) -> NestedFlagSet:
    """Nested set with ancillas renumbered consecutively after the data register."""
    base = data_width if data_width is not None else min(g.ancilla for g in gadgets)
    return NestedFlagSet(tuple(g.with_ancilla(base + i) for i, g in enumerate(gadgets)))
