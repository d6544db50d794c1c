"""Kraus-sphere geometry.

A channel with Kraus operators ``{K^a}`` (each d x d, a = 1..m) is
re-expressed as d real unit vectors of length ``2*m*d``: for column i,
vector ``v_i`` lists the pairs ``(Re K^a[k, i], Im K^a[k, i])`` with the
operator index a outermost and the row index k innermost.  This layout
is the single normative component ordering used everywhere, including
serialization; the symplectic form below relies on the (x, y) adjacency
it produces.

Collecting the vectors of all d columns gives a frame.  Unit norm,
mutual Euclidean orthogonality, and mutual symplectic orthogonality of
the frame vectors are together exactly the completeness relation
``sum_a (K^a)† K^a = I``, so valid frames and CPTP Kraus sets are in
bijection.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

COMPLETENESS_TOL = 1e-8
FRAME_TOL_LOOSE = 1e-6


@dataclass
class KrausSet:
    """Ordered set of ``m`` Kraus operators, each ``d x d`` complex."""

    d: int
    m: int
    operators: list[np.ndarray]

    def __post_init__(self):
        if self.d < 1 or self.m < 1:
            raise ValueError(f"invalid dimensions d={self.d}, m={self.m}")
        if self.m > self.d**2:
            raise ValueError(f"m={self.m} exceeds d^2={self.d ** 2}")
        if len(self.operators) != self.m:
            raise ValueError(
                f"expected {self.m} operators, got {len(self.operators)}"
            )
        self.operators = [np.asarray(op, dtype=complex) for op in self.operators]
        for op in self.operators:
            if op.shape != (self.d, self.d):
                raise ValueError(
                    f"operator shape {op.shape} does not match d={self.d}"
                )

    def completeness_deviation(self) -> float:
        """Max entrywise deviation of sum_a (K^a)† K^a from the identity."""
        acc = np.zeros((self.d, self.d), dtype=complex)
        for op in self.operators:
            acc += op.conj().T @ op
        return float(np.max(np.abs(acc - np.eye(self.d))))

    def stack(self) -> np.ndarray:
        """Operators as one (m, d, d) array."""
        return np.stack(self.operators)

    def to_dict(self) -> dict:
        return {
            "d": self.d,
            "m": self.m,
            "operators": [
                [[float(z.real), float(z.imag)] for z in op.ravel()]
                for op in self.operators
            ],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "KrausSet":
        d, m = int(data["d"]), int(data["m"])
        ops = []
        for flat in data["operators"]:
            arr = np.array([complex(re, im) for re, im in flat])
            ops.append(arr.reshape(d, d))
        return cls(d=d, m=m, operators=ops)


@dataclass
class KrausFrame:
    """d unit vectors on the Kraus sphere, stored as rows of ``vectors``."""

    d: int
    m: int
    vectors: np.ndarray  # shape (d, 2*m*d), real

    def __post_init__(self):
        self.vectors = np.asarray(self.vectors, dtype=float)
        expected = (self.d, 2 * self.m * self.d)
        if self.vectors.shape != expected:
            raise ValueError(
                f"vectors shape {self.vectors.shape}, expected {expected}"
            )

    @property
    def vector_dim(self) -> int:
        return 2 * self.m * self.d

    def deviation(self) -> float:
        """Max entrywise deviation of the frame Gram matrix from identity."""
        return float(np.max(np.abs(completeness_gram(self) - np.eye(self.d))))

    def to_dict(self) -> dict:
        return {
            "d": self.d,
            "m": self.m,
            "vectors": [[float(x) for x in row] for row in self.vectors],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "KrausFrame":
        return cls(
            d=int(data["d"]),
            m=int(data["m"]),
            vectors=np.array(data["vectors"], dtype=float),
        )


def symplectic_form(dim: int) -> np.ndarray:
    """The symplectic bilinear form I_{dim/2} kron [[0, 1], [-1, 0]].

    Antisymmetric with S @ S = -I; encodes the imaginary part of the
    complex inner product under the interleaved (x, y) layout.
    """
    if dim < 2 or dim % 2 != 0:
        raise ValueError(f"symplectic form needs an even dimension >= 2, got {dim}")
    block = np.array([[0.0, 1.0], [-1.0, 0.0]])
    return np.kron(np.eye(dim // 2), block)


def symplectic_products(frame: KrausFrame) -> np.ndarray:
    """Matrix of pairings v_i . S v_j, computed blockwise.

    The diagonal vanishes exactly: each term x*y - y*x cancels bitwise.
    """
    even = frame.vectors[:, 0::2]
    odd = frame.vectors[:, 1::2]
    return even @ odd.T - odd @ even.T


def completeness_gram(frame: KrausFrame) -> np.ndarray:
    """Gram matrix with entries v_i . v_j + i (v_i . S v_j).

    Equals sum_a (K^a)† K^a of the corresponding Kraus set, so a valid
    frame returns the identity.
    """
    euclid = frame.vectors @ frame.vectors.T
    return euclid + 1j * symplectic_products(frame)


def kraus_to_frame(kraus: KrausSet) -> KrausFrame:
    """Relabel a Kraus set as a frame of real vectors (exact, no arithmetic).

    Raises ValueError when the completeness relation is violated beyond
    1e-8; the message carries the deviation.
    """
    deviation = kraus.completeness_deviation()
    if deviation > COMPLETENESS_TOL:
        raise ValueError(
            f"Kraus set violates completeness: max deviation {deviation:.3e}"
        )
    return KrausFrame(
        d=kraus.d, m=kraus.m, vectors=operator_stack_to_vectors(kraus.stack())
    )


def frame_to_kraus(frame: KrausFrame) -> KrausSet:
    """Exact inverse relabeling of :func:`kraus_to_frame`.

    Accepts frames that satisfy the frame constraints within the looser
    1e-6 tolerance, so channels produced by long transformation chains
    mid-optimization do not error spuriously.
    """
    deviation = frame.deviation()
    if deviation > FRAME_TOL_LOOSE:
        raise ValueError(
            f"frame violates unit/orthogonality constraints: "
            f"max Gram deviation {deviation:.3e}"
        )
    stack = vectors_to_operator_stack(frame.vectors, frame.d, frame.m)
    return KrausSet(d=frame.d, m=frame.m, operators=list(stack))


def identity_frame(d: int, m: int) -> KrausFrame:
    """Frame of the identity channel {I, 0, ..., 0} with m operators."""
    ops = [np.eye(d, dtype=complex)]
    ops += [np.zeros((d, d), dtype=complex) for _ in range(m - 1)]
    return kraus_to_frame(KrausSet(d=d, m=m, operators=ops))


def operator_stack_to_vectors(stack: np.ndarray) -> np.ndarray:
    """(m, d, d) operator stack -> (d, 2*m*d) frame rows."""
    m, d, _ = stack.shape
    # columns[i, a, k] = K^a[k, i]; flatten a-major, k-minor per row
    columns = stack.transpose(2, 0, 1).reshape(d, m * d)
    vectors = np.empty((d, 2 * m * d))
    vectors[:, 0::2] = columns.real
    vectors[:, 1::2] = columns.imag
    return vectors


def vectors_to_operator_stack(vectors: np.ndarray, d: int, m: int) -> np.ndarray:
    """Frame rows (..., d, 2*m*d) -> operator stack (..., m, d, d).

    Exact inverse of the relabeling; leading batch axes pass through.
    """
    columns = np.empty(vectors.shape[:-1] + (m * d,), dtype=complex)
    columns.real = vectors[..., 0::2]
    columns.imag = vectors[..., 1::2]
    shaped = columns.reshape(vectors.shape[:-1] + (m, d))
    return np.moveaxis(shaped, -3, -1)
