"""Single-fault enumeration and simulation-free flag scoring.

Every enumerable fault is pushed to the flag's exit boundary and counted as
detected when it anticommutes with a disentangling operator. The score of a
flag is the detected count minus a per-qubit penalty standing in for the
faults the gadget itself adds (6 per qubit of P and of P' for
depolarizing noise: each two-qubit gate brings 3 faults on each qubit).
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Iterable, Sequence

from .circuit import Circuit, compile_to_native, native_moment_map
from .gadget import FlagGadget, NestedFlagSet, instrument_layout, instrument, synthesize
from .pauli import PauliString, commutes, weight
from .propagation import CompatibilityError, propagate

MODEL_KINDS = ("depolarizing", "crosstalk", "overrotation")


@dataclass(frozen=True)
class NoiseModel:
    kind: str
    p: float = 0.0
    crosstalk_ratio: float = 0.1
    epsilon: float = 0.0

    def __post_init__(self):
        if self.kind not in MODEL_KINDS:
            raise ValueError(f"unknown noise model {self.kind!r}")
        if not 0.0 <= self.p <= 1.0:
            raise ValueError(f"error probability {self.p} outside [0, 1]")
        if not 0.0 <= self.crosstalk_ratio <= 1.0:
            raise ValueError(f"crosstalk ratio {self.crosstalk_ratio} outside [0, 1]")

    @property
    def parameter(self) -> float:
        return self.epsilon if self.kind == "overrotation" else self.p

    def with_parameter(self, value: float) -> NoiseModel:
        if self.kind == "overrotation":
            return replace(self, epsilon=value)
        return replace(self, p=value)

    @property
    def needs_native(self) -> bool:
        return self.kind == "overrotation"

    def penalty(self) -> float:
        """Score cost per qubit of P or P' (one gadget two-qubit gate each)."""
        if self.kind == "depolarizing":
            return 6.0
        if self.kind == "crosstalk":
            # 6 gate faults plus 3 faults on each of ~2 chain neighbours at the reduced rate
            return 6.0 * (1.0 + self.crosstalk_ratio)
        return 1.0

    def to_json(self) -> dict:
        return {"kind": self.kind, "p": self.p, "crosstalk_ratio": self.crosstalk_ratio,
                "epsilon": self.epsilon}


def chain_neighbors(qubits: Sequence[int], width: int) -> list[int]:
    """Qubits adjacent to ``qubits`` on a linear chain, excluding the gate's own."""
    out = set()
    for q in qubits:
        for r in (q - 1, q + 1):
            if 0 <= r < width and r not in qubits:
                out.add(r)
    return sorted(out)


@dataclass(frozen=True)
class FaultLocation:
    """A place a fault may appear: after ``moment``, on ``qubits``.

    ``faults`` lists the Pauli labels (over ``qubits``) the location can emit;
    each is one enumerable fault carrying ``weight`` in detected counts.
    """

    moment: int
    qubits: tuple[int, ...]
    gate_index: int
    faults: tuple[str, ...]
    weight: float = 1.0
    tag: str = "gate"

    @property
    def qubit(self) -> int:
        return self.qubits[0]

    def paulis(self, n: int) -> list[tuple[str, PauliString]]:
        return [(f, PauliString.from_letters(dict(zip(self.qubits, f)), n)) for f in self.faults]

    def to_json(self) -> dict:
        return {"moment": self.moment, "qubits": list(self.qubits), "gate_index": self.gate_index,
                "faults": list(self.faults), "weight": self.weight, "tag": self.tag}


def fault_locations(c: Circuit, m: NoiseModel) -> list[FaultLocation]:
    """Time-ordered fault locations of ``c`` under ``m``."""
    if m.needs_native and not c.is_native:
        raise ValueError("overrotation fault locations need a native-compiled circuit")
    out: list[FaultLocation] = []
    for t, moment in enumerate(c.moments):
        for gi, g in enumerate(moment):
            if m.kind == "overrotation":
                out.append(FaultLocation(t, g.qubits, gi, (g.axis,), 1.0, "axis"))
                continue
            if not g.is_two_qubit:
                continue
            for q in g.qubits:
                out.append(FaultLocation(t, (q,), gi, ("X", "Y", "Z")))
            if m.kind == "crosstalk":
                for q in chain_neighbors(g.qubits, c.width):
                    out.append(
                        FaultLocation(t, (q,), gi, ("X", "Y", "Z"), m.crosstalk_ratio, "crosstalk")
                    )
    return out


@dataclass(frozen=True)
class PropagatedFault:
    location: FaultLocation
    label: str
    pauli: PauliString  # at the target boundary; sign kept but unused for detection

    @property
    def weight(self) -> float:
        return self.location.weight

    def to_json(self) -> dict:
        return {**self.location.to_json(), "fault": self.label, "output": str(self.pauli)}


@dataclass
class ErrorSet:
    """Faults pushed to ``boundary``. Faults outside ``section`` cannot be
    flagged and sit in ``outside``; ``nonpropagable`` hit an incompatible
    non-Clifford gate on the way."""

    boundary: int
    section: tuple[int, int]
    entries: list[PropagatedFault] = field(default_factory=list)
    outside: list[tuple[FaultLocation, str]] = field(default_factory=list)
    nonpropagable: list[tuple[FaultLocation, str]] = field(default_factory=list)

    @property
    def total_weight(self) -> float:
        return (sum(e.weight for e in self.entries)
                + sum(loc.weight for loc, _ in self.outside + self.nonpropagable))

    def __len__(self) -> int:
        return len(self.entries)


def output_error_set(c: Circuit, m: NoiseModel, section: tuple[int, int] | None = None
                     ) -> ErrorSet:
    start, stop = section if section is not None else (0, len(c.moments))
    es = ErrorSet(stop, (start, stop))
    for loc in fault_locations(c, m):
        for label, p in loc.paulis(c.width):
            if not start <= loc.moment < stop:
                es.outside.append((loc, label))
                continue
            try:
                out = propagate(c, p, loc.moment + 1, stop, trace=False).pauli
            except CompatibilityError:
                es.nonpropagable.append((loc, label))
                continue
            es.entries.append(PropagatedFault(loc, label, out))
    return es


@dataclass(frozen=True)
class FlagScore:
    flag: FlagGadget | NestedFlagSet
    n_detected: float
    q: float
    detected_fraction: float
    penalty: float = 6.0

    @property
    def gadgets(self) -> tuple[FlagGadget, ...]:
        return self.flag.gadgets if isinstance(self.flag, NestedFlagSet) else (self.flag,)

    @property
    def weight_p(self) -> int:
        return sum(weight(g.entangle) for g in self.gadgets)

    @property
    def weight_pprime(self) -> int:
        return sum(weight(g.disentangle) for g in self.gadgets)

    def sort_key(self):
        labels = tuple(str(g.entangle) for g in self.gadgets)
        return (-self.q, self.weight_p + self.weight_pprime, labels)

    def to_row(self) -> dict:
        return {
            "flag_entangle": " ".join(str(g.entangle) for g in self.gadgets),
            "flag_disentangle": " ".join(str(g.signed_disentangle) for g in self.gadgets),
            "weight_P": self.weight_p,
            "weight_Pprime": self.weight_pprime,
            "n_detected": _num(self.n_detected),
            "q": _num(self.q),
        }


def _num(v: float):
    return int(v) if float(v).is_integer() else v


def detected_faults(flag: FlagGadget | NestedFlagSet, error_set: ErrorSet) -> list[PropagatedFault]:
    gadgets = flag.gadgets if isinstance(flag, NestedFlagSet) else (flag,)
    checks = []
    for g in gadgets:
        if g.section != error_set.section:
            raise ValueError(f"flag section {g.section} differs from error set {error_set.section}")
        checks.append(g.disentangle)
    n = error_set.entries[0].pauli.n if error_set.entries else None
    if n is not None:
        checks = [p.extend(n) if p.n < n else p for p in checks]
    return [e for e in error_set.entries if any(not commutes(e.pauli, p) for p in checks)]


def quality(flag: FlagGadget | NestedFlagSet, error_set: ErrorSet, m: NoiseModel,
            penalty: float | None = None) -> FlagScore:
    """n_detected - c * w(P) - c * w(P') with c = ``m.penalty()`` unless given."""
    c = m.penalty() if penalty is None else penalty
    hits = detected_faults(flag, error_set)
    n_det = sum(e.weight for e in hits)
    gadgets = flag.gadgets if isinstance(flag, NestedFlagSet) else (flag,)
    w = sum(weight(g.entangle) + weight(g.disentangle) for g in gadgets)
    total = error_set.total_weight
    return FlagScore(flag, n_det, n_det - c * w, n_det / total if total else 0.0, c)


def instrumented_detections(c: Circuit, flag: FlagGadget | NestedFlagSet, m: NoiseModel
                            ) -> tuple[Circuit, list[tuple[FaultLocation, str, bool]]]:
    """Every enumerable fault of the instrumented circuit with its flag outcome.

    A fault trips the flags when, pushed to the end of the gadget, it has a Z
    component on some ancilla. The circuit is returned native-compiled when
    the model asks for it.
    """
    flags = flag if isinstance(flag, NestedFlagSet) else NestedFlagSet((flag,))
    full = instrument(c, flags)
    end = instrument_layout(c, flags).gadget_end
    if m.needs_native:
        end = native_moment_map(full)[end]
        full = compile_to_native(full)
    out = []
    for loc in fault_locations(full, m):
        for label, p in loc.paulis(full.width):
            hit = False
            if loc.moment < end:
                try:
                    res = propagate(full, p, loc.moment + 1, end, trace=False).pauli
                    hit = any((res.z >> a) & 1 for a in flags.ancillas)
                except CompatibilityError:
                    pass
            out.append((loc, label, hit))
    return full, out


def exact_quality(c: Circuit, flag: FlagGadget | NestedFlagSet, m: NoiseModel) -> FlagScore:
    """Detected weight on the instrumented circuit minus the weight of the
    fault locations the gadget adds."""
    full, table = instrumented_detections(c, flag, m)
    base = compile_to_native(c) if m.needs_native else c
    hits = sum(loc.weight for loc, _, hit in table if hit)

    def total(circ):
        return sum(loc.weight * len(loc.faults) for loc in fault_locations(circ, m))

    added = total(full) - total(base)
    return FlagScore(flag, hits, hits - added, hits / total(full) if total(full) else 0.0, 0.0)


@dataclass
class RankResult:
    scores: list[FlagScore]
    incompatible: list[tuple[PauliString, str]]


def rank_flags(c: Circuit, candidates: Iterable[PauliString],
               section: tuple[int, int] | None = None, m: NoiseModel | None = None,
               exact: bool = False, error_set: ErrorSet | None = None) -> RankResult:
    """Synthesize and score each candidate, best first.

    Ties in q go to the lighter flag, then to the entangling label.
    """
    m = m or NoiseModel("depolarizing")
    scored_circuit, sec = scoring_view(c, m, section)
    if error_set is None and not exact:
        error_set = output_error_set(scored_circuit, m, sec)
    scores, bad = [], []
    for p in candidates:
        try:
            g = synthesize(c, p, section)
        except CompatibilityError as exc:
            bad.append((p, str(exc)))
            continue
        except ValueError as exc:
            bad.append((p, str(exc)))
            continue
        if exact:
            scores.append(exact_quality(c, g, m))
        else:
            scores.append(quality(retarget(g, sec), error_set, m))
    scores = [replace(s, flag=_restore(s.flag, section, c)) for s in scores]
    scores.sort(key=FlagScore.sort_key)
    return RankResult(scores, bad)


def scoring_view(c: Circuit, m: NoiseModel, section):
    """Circuit and section that fault enumeration should run on."""
    start, stop = section if section is not None else (0, len(c.moments))
    if not m.needs_native:
        return c, (start, stop)
    starts = native_moment_map(c)
    return compile_to_native(c), (starts[start], starts[stop])


def retarget(g: FlagGadget, sec: tuple[int, int]) -> FlagGadget:
    return replace(g, entry_moment=sec[0], exit_moment=sec[1])


def _restore(flag, section, c: Circuit):
    start, stop = section if section is not None else (0, len(c.moments))
    return replace(flag, entry_moment=start, exit_moment=stop)


def score_flag(c: Circuit, flag: FlagGadget | NestedFlagSet, m: NoiseModel,
               error_set: ErrorSet | None = None) -> FlagScore:
    """Score a gadget or nested set defined on ``c`` (uncompiled)."""
    gadgets = flag.gadgets if isinstance(flag, NestedFlagSet) else (flag,)
    scored, sec = scoring_view(c, m, gadgets[0].section)
    if error_set is None:
        error_set = output_error_set(scored, m, sec)
    if isinstance(flag, NestedFlagSet):
        moved = NestedFlagSet(tuple(retarget(g, sec) for g in flag.gadgets),
                              flag.disentangle_order)
    else:
        moved = retarget(flag, sec)
    s = quality(moved, error_set, m)
    return replace(s, flag=flag)
