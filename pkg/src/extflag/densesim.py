"""Dense density-matrix simulation with the three fault-injection models."""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .circuit import MAX_WIDTH, Circuit, ResourceError, apply_gate_to_tensor, axis_rotation
from .faults import NoiseModel, chain_neighbors
from .pauli import PauliString


class DegeneratePostselection(ArithmeticError):
    pass


class NumericalHealthWarning(RuntimeWarning):
    pass


@dataclass
class DensityMatrix:
    width: int
    data: np.ndarray

    @property
    def trace(self) -> float:
        return float(np.real(np.trace(self.data)))

    def is_hermitian(self, atol: float = 1e-10) -> bool:
        return np.allclose(self.data, self.data.conj().T, atol=atol)

    def min_eigenvalue(self) -> float:
        return float(np.linalg.eigvalsh((self.data + self.data.conj().T) / 2).min())


def product_state(labels: str, width: int | None = None) -> np.ndarray:
    """Statevector from per-qubit labels in ``01+-``, qubit 0 first; qubits
    past the label are |0>."""
    width = len(labels) if width is None else width
    if len(labels) > width:
        raise ValueError(f"label {labels!r} longer than width {width}")
    kets = {
        "0": np.array([1, 0], dtype=complex),
        "1": np.array([0, 1], dtype=complex),
        "+": np.array([1, 1], dtype=complex) / np.sqrt(2),
        "-": np.array([1, -1], dtype=complex) / np.sqrt(2),
    }
    psi = np.ones(1, dtype=complex)
    for ch in labels.ljust(width, "0"):
        try:
            psi = np.kron(kets[ch], psi)
        except KeyError:
            raise ValueError(f"bad state label {ch!r}") from None
    return psi


def _initial_vector(input_state, width: int) -> np.ndarray:
    if isinstance(input_state, str):
        return product_state(input_state, width)
    v = np.asarray(input_state, dtype=complex).ravel()
    if v.size > (1 << width) or v.size & (v.size - 1):
        raise ValueError(f"state of size {v.size} does not fit {width} qubits")
    if not np.isclose(np.vdot(v, v).real, 1.0, atol=1e-10):
        raise ValueError("input state is not normalized")
    if v.size < (1 << width):
        pad = np.zeros((1 << width) // v.size, dtype=complex)
        pad[0] = 1
        v = np.kron(pad, v)
    return v


def output_state(c: Circuit, input_state="") -> np.ndarray:
    """Noiseless statevector after ``c``."""
    n = c.width
    if n > MAX_WIDTH:
        raise ResourceError(f"width {n} exceeds dense limit {MAX_WIDTH}")
    psi = _initial_vector(input_state, n).reshape((2,) * n)
    for g in c.gates:
        psi = apply_gate_to_tensor(psi, g.matrix(), g.qubits, n)
    return psi.reshape(-1)


# --- operations on a (2,)*2n density tensor; ket axes first, big-endian


def _apply_unitary(rho: np.ndarray, mat: np.ndarray, qubits: Sequence[int], n: int) -> np.ndarray:
    rho = apply_gate_to_tensor(rho, mat, qubits, n, 0)
    return apply_gate_to_tensor(rho, mat.conj(), qubits, n, n)


def _conj_pauli(rho: np.ndarray, letter: str, q: int, n: int) -> np.ndarray:
    """P rho P for a single-qubit Pauli, by index flips and sign masks."""
    a, b = n - 1 - q, 2 * n - 1 - q
    out = rho
    if letter in "ZY":
        shape = [2 if i in (a, b) else 1 for i in range(2 * n)]
        out = out * np.array([[1, -1], [-1, 1]]).reshape(shape)
    if letter in "XY":
        out = np.flip(out, axis=(a, b))
    return out


def depolarize(rho: np.ndarray, p: float, q: int, n: int) -> np.ndarray:
    """(1 - p) rho + p/3 (X rho X + Y rho Y + Z rho Z) on qubit ``q``."""
    if p == 0:
        return rho
    acc = (1 - p) * rho
    for letter in "XYZ":
        acc = acc + (p / 3) * _conj_pauli(rho, letter, q, n)
    return acc


def apply_kraus(rho: np.ndarray, ops: Iterable[np.ndarray], qubits: Sequence[int], n: int
                ) -> np.ndarray:
    return sum(_apply_unitary(rho, k, qubits, n) for k in ops)


def apply_pauli(rho: np.ndarray, p: PauliString, n: int) -> np.ndarray:
    for q in p.support:
        rho = _conj_pauli(rho, p.letter(q), q, n)
    return rho


def _channels(rho: np.ndarray, moment, model: NoiseModel, n: int) -> np.ndarray:
    if model.kind == "overrotation":
        if model.epsilon:
            for g in moment:
                rho = _apply_unitary(rho, axis_rotation(g.axis, model.epsilon / 2), g.qubits, n)
        return rho
    for g in moment:
        if not g.is_two_qubit:
            continue
        for q in g.qubits:
            rho = depolarize(rho, model.p, q, n)
        if model.kind == "crosstalk":
            for q in chain_neighbors(g.qubits, n):
                rho = depolarize(rho, model.p * model.crosstalk_ratio, q, n)
    return rho


def simulate(c: Circuit, model: NoiseModel | None = None, input_state="",
             faults: Iterable[tuple[int, PauliString]] = ()) -> DensityMatrix:
    """Run ``c`` on a product or vector input.

    Noise for a moment is applied after all of its gates. ``faults`` are
    ``(moment, pauli)`` pairs injected after that moment's noise.
    """
    n = c.width
    if n > MAX_WIDTH:
        raise ResourceError(f"width {n} exceeds dense limit {MAX_WIDTH}")
    if model is not None and model.kind == "overrotation" and not c.is_native:
        raise ValueError("overrotation model needs a native-compiled circuit")
    psi = _initial_vector(input_state, n)
    rho = np.multiply.outer(psi, psi.conj()).reshape((2,) * (2 * n))
    injected: dict[int, list[PauliString]] = {}
    for m, p in faults:
        injected.setdefault(m, []).append(p)
    for m, moment in enumerate(c.moments):
        for g in moment:
            rho = _apply_unitary(rho, g.matrix(), g.qubits, n)
        if model is not None:
            rho = _channels(rho, moment, model, n)
        for p in injected.get(m, ()):
            rho = apply_pauli(rho, p, n)
    dim = 1 << n
    return DensityMatrix(n, rho.reshape(dim, dim))


def postselect_flags(rho: DensityMatrix, flags) -> tuple[DensityMatrix, float]:
    """Project flag ancillas onto |+>, return the renormalised remaining
    register and the joint survival probability."""
    ancillas = sorted(flags.ancillas if hasattr(flags, "ancillas") else flags)
    if not ancillas:
        return rho, 1.0
    n = rho.width
    if max(ancillas) >= n or min(ancillas) < 0:
        raise ValueError(f"ancillas {ancillas} outside width {n}")
    plus = np.array([1, 1], dtype=complex) / np.sqrt(2)
    t = rho.data.reshape((2,) * (2 * n))
    # contract highest qubits first so remaining axis positions stay valid
    for q in reversed(ancillas):
        t = np.tensordot(t, plus, axes=([n - 1 - q + n], [0]))  # bra
        t = np.tensordot(plus.conj(), t, axes=([0], [n - 1 - q]))  # ket
        n -= 1
    dim = 1 << n
    data = t.reshape(dim, dim)
    survival = float(np.real(np.trace(data)))
    if survival < 1e-15:
        raise DegeneratePostselection(f"survival probability {survival:.3g}")
    return DensityMatrix(n, data / survival), min(max(survival, 0.0), 1.0)


def fidelity(rho: DensityMatrix, reference: np.ndarray) -> float:
    """<psi| rho |psi>, clamped to [0, 1]."""
    psi = np.asarray(reference, dtype=complex).ravel()
    if psi.size != rho.data.shape[0]:
        raise ValueError(f"reference of size {psi.size} vs {rho.data.shape[0]}-dim state")
    f = float(np.real(np.vdot(psi, rho.data @ psi)))
    if f < -1e-9 or f > 1 + 1e-9:
        warnings.warn(f"fidelity {f!r} clamped to [0, 1]", NumericalHealthWarning, stacklevel=2)
    return min(max(f, 0.0), 1.0)
