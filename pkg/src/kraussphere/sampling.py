"""Reproducible random mixed-state ensembles.

Single-qubit states are drawn uniformly over the Bloch ball volume;
higher dimensions use the Bures measure via the Ginibre + Haar-unitary
construction rho ~ (I + U) G G† (I + U)†, trace-normalized.

All randomness flows through numpy's counter-based Philox bit generator,
so a given (seed, count, dim) reproduces the same ensemble exactly on a
platform.  Per sample the Ginibre matrix is drawn first, then the
Gaussian matrix that is orthonormalized into the Haar unitary.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

SAMPLE_MEASURES = ("bloch_ball_uniform", "bures")


def philox_rng(seed: int) -> np.random.Generator:
    """Counter-based generator behind every random draw in the package."""
    return np.random.Generator(np.random.Philox(seed))


def sample_bloch_ball(seed: int, count: int) -> list[np.ndarray]:
    """Mixed qubit states (I + r . sigma) / 2 uniform over the ball volume.

    Direction is uniform on the sphere; the radius is u^(1/3) with u
    uniform, which makes the density uniform in volume.
    """
    if count < 1:
        raise ValueError(f"count must be >= 1, got {count}")
    rng = philox_rng(seed)
    directions = rng.normal(size=(count, 3))
    directions /= np.linalg.norm(directions, axis=1, keepdims=True)
    radii = rng.uniform(size=count) ** (1.0 / 3.0)
    bloch = directions * radii[:, None]
    states = []
    for x, y, z in bloch:
        states.append(
            0.5
            * np.array(
                [[1.0 + z, x - 1j * y], [x + 1j * y, 1.0 - z]], dtype=complex
            )
        )
    return states


def sample_bures(seed: int, count: int, dim: int) -> list[np.ndarray]:
    """Bures-measure random density matrices of the given dimension."""
    if count < 1:
        raise ValueError(f"count must be >= 1, got {count}")
    if dim < 2:
        raise ValueError(f"dim must be >= 2, got {dim}")
    rng = philox_rng(seed)
    eye = np.eye(dim)
    states = []
    for _ in range(count):
        g = _ginibre(rng, dim)
        shifted = (eye + haar_unitary(rng, dim)) @ g
        rho = shifted @ shifted.conj().T
        rho /= np.trace(rho).real
        # symmetrize away the last rounding asymmetry
        states.append((rho + rho.conj().T) / 2.0)
    return states


def _ginibre(rng: np.random.Generator, dim: int) -> np.ndarray:
    return rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))


def haar_unitary(rng: np.random.Generator, dim: int) -> np.ndarray:
    """Haar-random unitary from the QR decomposition of a Ginibre matrix.

    The phase convention makes the diagonal of the triangular factor
    real-positive, which is what makes QR output Haar-distributed.
    """
    q, r = np.linalg.qr(_ginibre(rng, dim))
    phases = np.diagonal(r).copy()
    phases /= np.abs(phases)
    return q * phases


@dataclass
class SampleConfig:
    """Which ensemble to draw: measure, size, and seed."""

    n_qubits: int
    count: int
    seed: int
    measure: str

    def __post_init__(self):
        if self.measure not in SAMPLE_MEASURES:
            raise ValueError(
                f"unknown measure {self.measure!r}; expected one of {SAMPLE_MEASURES}"
            )
        if self.measure == "bloch_ball_uniform" and self.n_qubits != 1:
            raise ValueError("bloch_ball_uniform sampling is single-qubit only")
        if self.n_qubits < 1 or self.count < 1:
            raise ValueError(
                f"need n_qubits >= 1 and count >= 1, got {self.n_qubits}, {self.count}"
            )

    @property
    def dim(self) -> int:
        return 2**self.n_qubits

    def draw(self, seed: int | None = None) -> list[np.ndarray]:
        """Draw the ensemble, optionally overriding the configured seed."""
        seed = self.seed if seed is None else seed
        if self.measure == "bloch_ball_uniform":
            return sample_bloch_ball(seed, self.count)
        return sample_bures(seed, self.count, self.dim)


def states_to_lists(states: list[np.ndarray]) -> list[list[list[float]]]:
    """Row-major [re, im] pair encoding, one flat matrix per state."""
    return [
        [[float(z.real), float(z.imag)] for z in np.asarray(rho).ravel()]
        for rho in states
    ]


def states_from_lists(data: list) -> list[np.ndarray]:
    states = []
    for flat in data:
        arr = np.array([complex(re, im) for re, im in flat])
        dim = round(len(flat) ** 0.5)
        if dim * dim != len(flat):
            raise ValueError(f"state entry count {len(flat)} is not a square")
        states.append(arr.reshape(dim, dim))
    return states
