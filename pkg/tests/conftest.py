import math
import random

import numpy as np
import pytest

from extflag.circuit import Circuit, Gate
from extflag.pauli import PauliString

CLIFFORD_1Q = ["H", "S", "Sdg", "X", "Y", "Z"]
CLIFFORD_2Q = ["CNOT", "CZ"]


def random_clifford_circuit(rng: random.Random, width: int, n_gates: int,
                            rotations: bool = False) -> Circuit:
    kinds = CLIFFORD_1Q + (CLIFFORD_2Q if width > 1 else [])
    if rotations:
        kinds = kinds + ["RX", "RY", "RZ"] + (["XX"] if width > 1 else [])
    gates = []
    for _ in range(n_gates):
        k = rng.choice(kinds)
        if k in ("CNOT", "CZ", "XX"):
            qs = tuple(rng.sample(range(width), 2))
        else:
            qs = (rng.randrange(width),)
        angle = None
        if k in ("RX", "RY", "RZ"):
            angle = rng.randint(-3, 4) * math.pi / 2
        elif k == "XX":
            angle = rng.randint(-3, 4) * math.pi / 4
        gates.append(Gate(k, qs, angle))
    return Circuit.from_gates(width, gates)


def match_signed_pauli(mat: np.ndarray, n: int) -> PauliString:
    """Read the signed Pauli off a dense matrix, independent of propagation.

    A Pauli X^x Z^z (times a phase) has column r supported on row r ^ x with
    entry proportional to (-1)^(z . r); that fixes x and z, and the sign is
    then checked against the matrix definition.
    """
    x = int(np.argmax(np.abs(mat[:, 0])))
    base = mat[x, 0]
    z = 0
    for j in range(n):
        r = 1 << j
        ratio = mat[r ^ x, r] / base
        if np.isclose(ratio, -1, atol=1e-9):
            z |= r
        elif not np.isclose(ratio, 1, atol=1e-9):
            raise AssertionError("matrix is not a signed Pauli")
    p = PauliString(n, x, z)
    for cand in (p, -p):
        if np.allclose(mat, cand.to_matrix(), atol=1e-10):
            return cand
    raise AssertionError("matrix is not a signed Pauli")


def random_state(rng: np.random.Generator, n: int) -> np.ndarray:
    v = rng.normal(size=1 << n) + 1j * rng.normal(size=1 << n)
    return v / np.linalg.norm(v)


@pytest.fixture
def rng():
    return random.Random(1234)


ACCEPTANCE: dict[int, str] = {}


@pytest.fixture
def criterion():
    """Record one PASS/FAIL line per acceptance criterion."""

    def record(number: int, ok: bool, detail: str) -> bool:
        ACCEPTANCE[number] = f"criterion {number}: {'PASS' if ok else 'FAIL'}  {detail}"
        print(ACCEPTANCE[number])
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for k in sorted(ACCEPTANCE):
            terminalreporter.write_line(ACCEPTANCE[k])
