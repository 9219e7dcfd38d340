"""Signed n-qubit Pauli operators in symplectic (x, z) bit-mask form.

Qubit ``i`` lives in bit ``i`` of both masks. The text form lists qubit 0
first, e.g. ``"+XIZ"`` is X on qubit 0 and Z on qubit 2.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

_LETTERS = "IXZY"  # indexed by x | (z << 1)
_BITS = {"I": (0, 0), "X": (1, 0), "Z": (0, 1), "Y": (1, 1)}


class DimensionError(ValueError):
    """Raised when two operators act on different qubit counts."""


class PhaseError(ValueError):
    """Raised when a product would carry an imaginary phase."""


@dataclass(frozen=True)
class PauliString:
    n: int
    x: int = 0
    z: int = 0
    sign: int = 1

    def __post_init__(self):
        if self.n < 1:
            raise ValueError(f"qubit count must be positive, got {self.n}")
        if self.sign not in (1, -1):
            raise ValueError(f"sign must be +1 or -1, got {self.sign}")
        limit = 1 << self.n
        if not (0 <= self.x < limit and 0 <= self.z < limit):
            raise ValueError("bit masks exceed qubit count")

    @classmethod
    def identity(cls, n: int) -> PauliString:
        return cls(n)

    @classmethod
    def from_label(cls, text: str) -> PauliString:
        """Parse ``"+IXYZ"``, ``"-ZZ"`` or an unsigned ``"XY"``."""
        text = text.strip()
        sign = 1
        if text[:1] and text[0] in "+-":
            sign = -1 if text[0] == "-" else 1
            text = text[1:]
        if not text:
            raise ValueError("empty Pauli label")
        x = z = 0
        for i, ch in enumerate(text.upper()):
            try:
                bx, bz = _BITS[ch]
            except KeyError:
                raise ValueError(f"bad Pauli letter {ch!r} in {text!r}") from None
            x |= bx << i
            z |= bz << i
        return cls(len(text), x, z, sign)

    @classmethod
    def single(cls, n: int, qubit: int, letter: str) -> PauliString:
        bx, bz = _BITS[letter.upper()]
        return cls(n, bx << qubit, bz << qubit)

    @classmethod
    def from_letters(cls, letters: dict[int, str], n: int, sign: int = 1) -> PauliString:
        x = z = 0
        for q, ch in letters.items():
            bx, bz = _BITS[ch.upper()]
            x |= bx << q
            z |= bz << q
        return cls(n, x, z, sign)

    def letter(self, qubit: int) -> str:
        return _LETTERS[((self.x >> qubit) & 1) | (((self.z >> qubit) & 1) << 1)]

    @property
    def letters(self) -> str:
        return "".join(self.letter(i) for i in range(self.n))

    @property
    def support(self) -> tuple[int, ...]:
        mask = self.x | self.z
        return tuple(i for i in range(self.n) if (mask >> i) & 1)

    @property
    def is_identity(self) -> bool:
        return not (self.x | self.z)

    def __str__(self) -> str:
        return ("+" if self.sign == 1 else "-") + self.letters

    def __neg__(self) -> PauliString:
        return PauliString(self.n, self.x, self.z, -self.sign)

    def unsigned(self) -> PauliString:
        return PauliString(self.n, self.x, self.z)

    def restrict(self, qubits) -> str:
        return "".join(self.letter(q) for q in qubits)

    def extend(self, n: int) -> PauliString:
        """Pad with identities up to ``n`` qubits."""
        if n < self.n:
            raise DimensionError(f"cannot shrink {self.n} qubits to {n}")
        return PauliString(n, self.x, self.z, self.sign)

    def truncate(self, n: int) -> PauliString:
        mask = (1 << n) - 1
        return PauliString(n, self.x & mask, self.z & mask, self.sign)

    def to_matrix(self) -> np.ndarray:
        """Dense matrix, little-endian (qubit 0 is the least significant bit)."""
        mats = {
            "I": np.eye(2, dtype=complex),
            "X": np.array([[0, 1], [1, 0]], dtype=complex),
            "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
            "Z": np.array([[1, 0], [0, -1]], dtype=complex),
        }
        out = np.ones((1, 1), dtype=complex)
        for q in range(self.n):
            out = np.kron(mats[self.letter(q)], out)
        return self.sign * out


def _check(a: PauliString, b: PauliString) -> None:
    if a.n != b.n:
        raise DimensionError(f"qubit counts differ: {a.n} vs {b.n}")


def weight(p: PauliString) -> int:
    return (p.x | p.z).bit_count()


def commutes(a: PauliString, b: PauliString) -> bool:
    _check(a, b)
    return ((a.x & b.z).bit_count() + (a.z & b.x).bit_count()) % 2 == 0


def multiply_phased(a: PauliString, b: PauliString) -> tuple[PauliString, int]:
    """Return ``(P, k)`` with ``a @ b == 1j**k * P`` and ``P.sign == +1``."""
    _check(a, b)
    x = a.x ^ b.x
    z = a.z ^ b.z
    # each factor is i^{#Y} X^x Z^z; moving Z^{z_a} past X^{x_b} gives (-1)^{z_a.x_b}
    k = (
        (a.x & a.z).bit_count()
        + (b.x & b.z).bit_count()
        + 2 * (a.z & b.x).bit_count()
        - (x & z).bit_count()
    )
    k += 2 * ((a.sign == -1) + (b.sign == -1))
    return PauliString(a.n, x, z), k % 4


def multiply(a: PauliString, b: PauliString) -> PauliString:
    """Signed product of two commuting Paulis.

    Anticommuting inputs produce a +-i phase; use :func:`multiply_phased`.
    """
    p, k = multiply_phased(a, b)
    if k % 2:
        raise PhaseError(f"{a} and {b} anticommute; product carries phase i^{k}")
    return p if k == 0 else -p


def random_pauli(n: int, seed: int, draw: int = 0, nonidentity: bool = False) -> PauliString:
    """Uniform letter per qubit; deterministic in ``(seed, draw)``."""
    if n < 1:
        raise ValueError("n must be >= 1")
    rng = np.random.default_rng([seed & (2**64 - 1), draw])
    while True:
        codes = rng.integers(0, 4, size=n)
        x = z = 0
        for i, c in enumerate(codes):
            x |= int(c & 1) << i
            z |= int(c >> 1) << i
        if not nonidentity or (x | z):
            return PauliString(n, x, z)
