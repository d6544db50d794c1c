"""Quasi-inverse channel learning.

The loss is 1 minus the ensemble-average Uhlmann fidelity between
original states and the states recovered by the angle-parameterized
channel; its gradient is taken by central differences in angle space and
followed with plain fixed-rate descent.  Every angle vector corresponds
to a CPTP channel by construction, so no iterate ever leaves the
physical set.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .channels import apply_channel_batch
from .geometry import KrausSet, identity_frame, vectors_to_operator_stack
from .linalg import FIDELITY_BAND, uhlmann_fidelity
from .sampling import philox_rng
from .transforms import (
    Generator,
    angle_count,
    channel_from_angles,
    finite_transform,
    generator_basis,
)

THREADS_ENV_VAR = "KRAUS_SPHERE_THREADS"

# memory budget for batched gradient evaluation: cap the largest complex
# intermediate at ~100 MB regardless of ansatz size
_CHUNK_BUDGET_ENTRIES = 6_000_000

INIT_MODES = ("zeros", "small_random")


class NonFiniteLossError(RuntimeError):
    """Loss became NaN/Inf during optimization; carries the iteration."""

    def __init__(self, iteration: int, value: float):
        super().__init__(f"non-finite loss {value!r} at iteration {iteration}")
        self.iteration = iteration


@dataclass
class OptimizerConfig:
    """Gradient-descent settings; defaults follow the experiments."""

    eta0: float = 0.1
    epsilon: float = 1e-6
    max_iters: int = 500
    loss_tol: float = 1e-7
    patience: int = 25
    init: str = "zeros"
    init_scale: float = 0.1
    m: int | None = None  # ansatz Kraus count; None means d**2
    seed: int = 0
    threads: int | None = None  # None: honor KRAUS_SPHERE_THREADS, default serial

    def __post_init__(self):
        if self.eta0 <= 0 or self.epsilon <= 0:
            raise ValueError("eta0 and epsilon must be positive")
        if self.init not in INIT_MODES:
            raise ValueError(
                f"unknown init {self.init!r}; expected one of {INIT_MODES}"
            )
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")


@dataclass
class TrainingRecord:
    iteration: int
    loss: float
    avg_fidelity: float
    grad_norm: float

    def to_dict(self) -> dict:
        return {
            "iteration": self.iteration,
            "loss": self.loss,
            "avg_fidelity": self.avg_fidelity,
            "grad_norm": self.grad_norm,
        }


@dataclass
class QuasiInverseResult:
    """Learned channel plus the full optimization trace."""

    channel: KrausSet
    angles: np.ndarray
    history: list[TrainingRecord]
    fidelity_before: float
    fidelity_after: float

    @property
    def iterations_used(self) -> int:
        return len(self.history)

    def to_dict(self) -> dict:
        return {
            "channel": self.channel.to_dict(),
            "angles": [float(t) for t in self.angles],
            "history": [rec.to_dict() for rec in self.history],
            "fidelity_before": self.fidelity_before,
            "fidelity_after": self.fidelity_after,
        }


def average_fidelity(pairs) -> float:
    """Mean Uhlmann fidelity over (recovered, original) pairs."""
    pairs = list(pairs)
    if not pairs:
        raise ValueError("average_fidelity needs at least one pair")
    return float(np.mean([uhlmann_fidelity(rec, orig) for rec, orig in pairs]))


class _EnsembleFidelity:
    """Uhlmann fidelities of recovered batches against fixed originals.

    For qubits the closed form Tr(a b) + 2 sqrt(det a det b) avoids any
    per-call eigendecomposition; otherwise the square roots of the
    originals are precomputed once and a single batched eigvalsh per
    call does the rest.  Either path equals uhlmann_fidelity to rounding
    (see the optimizer tests).
    """

    def __init__(self, originals: np.ndarray):
        self.originals = originals
        self.dim = originals.shape[-1]
        if self.dim == 2:
            dets = (
                originals[:, 0, 0] * originals[:, 1, 1]
                - originals[:, 0, 1] * originals[:, 1, 0]
            ).real
            self._dets = np.clip(dets, 0.0, None)
        else:
            w, v = np.linalg.eigh(originals)
            w = np.clip(w, 0.0, None)
            self._sqrts = (v * np.sqrt(w)[..., None, :]) @ v.conj().swapaxes(-1, -2)

    def __call__(self, recovered: np.ndarray) -> np.ndarray:
        """(..., N, d, d) recovered states -> (..., N) fidelities."""
        if self.dim == 2:
            overlap = np.einsum(
                "...nij,nji->...n", recovered, self.originals, optimize=True
            ).real
            dets = (
                recovered[..., 0, 0] * recovered[..., 1, 1]
                - recovered[..., 0, 1] * recovered[..., 1, 0]
            ).real
            fid = overlap + 2.0 * np.sqrt(np.clip(dets, 0.0, None) * self._dets)
        else:
            inner = self._sqrts @ recovered @ self._sqrts
            inner = (inner + inner.conj().swapaxes(-1, -2)) / 2.0
            w = np.clip(np.linalg.eigvalsh(inner), 0.0, None)
            fid = np.sum(np.sqrt(w), axis=-1) ** 2
        low, high = fid.min(), fid.max()
        if low < -FIDELITY_BAND or high > 1.0 + FIDELITY_BAND:
            raise ValueError(
                f"fidelity outside [0, 1] beyond tolerance: range [{low}, {high}]"
            )
        return np.clip(fid, 0.0, 1.0)


class LossContext:
    """Precomputed state for repeated loss and gradient evaluations.

    Holds the corrupted/original ensembles, the generator basis of the
    ansatz, and the fidelity machinery; immutable during a run, so
    gradient components can be evaluated concurrently.
    """

    def __init__(self, corrupted, originals, d: int, m: int, basis=None):
        self.d, self.m = d, m
        if len(corrupted) == 0 or len(originals) == 0:
            raise ValueError("state ensemble is empty")
        self.corrupted = np.asarray(
            corrupted if isinstance(corrupted, np.ndarray) else np.stack(corrupted),
            dtype=complex,
        )
        self.originals = np.asarray(
            originals if isinstance(originals, np.ndarray) else np.stack(originals),
            dtype=complex,
        )
        if self.corrupted.shape != self.originals.shape:
            raise ValueError(
                f"corrupted/original shapes differ: "
                f"{self.corrupted.shape} vs {self.originals.shape}"
            )
        if self.corrupted.ndim != 3 or self.corrupted.shape[1:] != (d, d):
            raise ValueError(
                f"expected states of shape (N, {d}, {d}), got {self.corrupted.shape}"
            )
        self.basis: list[Generator] = (
            generator_basis(2 * m * d) if basis is None else basis
        )
        self.n_angles = angle_count(d, m)
        self.base_vectors = identity_frame(d, m).vectors
        self._fidelity = _EnsembleFidelity(self.originals)

    def loss(self, angles: np.ndarray) -> float:
        angles = self._check_angles(angles)
        total = np.eye(2 * self.m * self.d)
        for gen, theta in zip(self.basis, angles):
            if theta != 0.0:
                total = finite_transform(gen, theta) @ total
        return float(self._losses_from_totals(total[None])[0])

    def gradient(self, angles: np.ndarray, epsilon: float, threads=None) -> np.ndarray:
        """Central-difference gradient, one +/- pair per angle.

        Variant transformations reuse shared prefix/suffix products of
        the unperturbed factors, so each component costs two matrix
        products plus one loss evaluation per sign.  Components are
        independent; the gather is by index, making the result identical
        for any worker count.
        """
        angles = self._check_angles(angles)
        n = self.n_angles
        dim = 2 * self.m * self.d
        eye = np.eye(dim)
        # None marks a zero angle (identity factor); the product lists
        # then share references, safe because nothing here mutates them
        factors = [
            finite_transform(gen, theta) if theta != 0.0 else None
            for gen, theta in zip(self.basis, angles)
        ]
        before = [eye]  # before[a] = M_{a-1} ... M_1
        for fac in factors[:-1]:
            before.append(fac @ before[-1] if fac is not None else before[-1])
        after = [eye] * (n + 1)  # after[a] = M_n ... M_{a+1}
        for a in range(n - 1, -1, -1):
            after[a] = (
                after[a + 1] @ factors[a] if factors[a] is not None else after[a + 1]
            )

        losses = np.empty(2 * n)
        n_states = self.corrupted.shape[0]
        chunk = max(2, _CHUNK_BUDGET_ENTRIES // (self.m * n_states * self.d**2))
        spans = [(lo, min(lo + chunk, 2 * n)) for lo in range(0, 2 * n, chunk)]

        def eval_span(span):
            lo, hi = span
            totals = np.empty((hi - lo, dim, dim))
            for index in range(lo, hi):
                a, offset = divmod(index, 2)
                sign = 1.0 if offset == 0 else -1.0
                shifted = finite_transform(self.basis[a], angles[a] + sign * epsilon)
                totals[index - lo] = after[a + 1] @ shifted @ before[a]
            losses[lo:hi] = self._losses_from_totals(totals)

        workers = _gradient_workers(len(spans), threads)
        if workers > 1:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                list(pool.map(eval_span, spans))
        else:
            for span in spans:
                eval_span(span)
        return (losses[0::2] - losses[1::2]) / (2.0 * epsilon)

    def _losses_from_totals(self, totals: np.ndarray) -> np.ndarray:
        """(V, dim, dim) composed transformations -> (V,) loss values."""
        vectors = self.base_vectors @ totals.swapaxes(-1, -2)
        stacks = vectors_to_operator_stack(vectors, self.d, self.m)
        recovered = np.einsum(
            "vaij,njk,valk->vnil",
            stacks,
            self.corrupted,
            stacks.conj(),
            optimize=True,
        )
        return 1.0 - self._fidelity(recovered).mean(axis=-1)

    def _check_angles(self, angles) -> np.ndarray:
        angles = np.asarray(angles, dtype=float)
        if angles.shape != (self.n_angles,):
            raise ValueError(
                f"expected {self.n_angles} angles, got shape {angles.shape}"
            )
        if not np.all(np.isfinite(angles)):
            raise ValueError("angles must be finite")
        return angles


def loss(angles, corrupted, originals, d: int, m: int) -> float:
    """1 - average fidelity of the angle-parameterized recovery.

    Functional form of :meth:`LossContext.loss`; builds the context each
    call, so prefer the context in loops.
    """
    return LossContext(corrupted, originals, d, m).loss(angles)


def central_difference(func, x: np.ndarray, epsilon: float) -> np.ndarray:
    """Generic central-difference gradient [f(x+eps e_i) - f(x-eps e_i)] / 2eps."""
    x = np.asarray(x, dtype=float)
    grad = np.empty_like(x)
    for i in range(x.size):
        shift = np.zeros_like(x)
        shift[i] = epsilon
        grad[i] = (func(x + shift) - func(x - shift)) / (2.0 * epsilon)
    return grad


def _gradient_workers(n_tasks: int, requested=None) -> int:
    if requested is None:
        env = os.environ.get(THREADS_ENV_VAR, "").strip()
        if env:
            try:
                requested = int(env)
            except ValueError:
                raise ValueError(
                    f"{THREADS_ENV_VAR} must be an integer, got {env!r}"
                ) from None
        else:
            requested = 1
    return max(1, min(int(requested), n_tasks))


def learn_quasi_inverse(
    channel: KrausSet, states, cfg: OptimizerConfig
) -> QuasiInverseResult:
    """Learn the quasi-inverse of ``channel`` on a state ensemble.

    States are corrupted once through the channel; descent then runs in
    the angle space of an m-operator ansatz acting on the corrupted
    states.  Returns the best angles seen (the identity start point
    always counts as a candidate, so the result never recovers worse
    than doing nothing), the corresponding channel, and the full
    training history.
    """
    states = list(states)
    if not states:
        raise ValueError("state ensemble is empty")
    deviation = channel.completeness_deviation()
    if deviation > 1e-6:
        raise ValueError(f"channel violates completeness: {deviation:.3e}")
    d = channel.d
    m = cfg.m if cfg.m is not None else d * d
    originals = np.stack(states)
    corrupted = apply_channel_batch(channel.stack(), originals)
    ctx = LossContext(corrupted, originals, d, m)

    zeros = np.zeros(ctx.n_angles)
    identity_loss = ctx.loss(zeros)
    fidelity_before = 1.0 - identity_loss
    if cfg.init == "zeros":
        theta = zeros.copy()
    else:
        rng = philox_rng(cfg.seed)
        theta = rng.normal(0.0, cfg.init_scale, ctx.n_angles)

    best_theta, best_loss = zeros, identity_loss
    history: list[TrainingRecord] = []
    prev_loss = None
    stalled = 0
    for iteration in range(cfg.max_iters):
        if iteration == 0 and cfg.init == "zeros":
            current = identity_loss
        else:
            current = ctx.loss(theta)
        if not np.isfinite(current):
            raise NonFiniteLossError(iteration, current)
        grad = ctx.gradient(theta, cfg.epsilon, cfg.threads)
        if not np.all(np.isfinite(grad)):
            raise NonFiniteLossError(iteration, float(np.sum(grad)))
        history.append(
            TrainingRecord(
                iteration=iteration,
                loss=current,
                avg_fidelity=1.0 - current,
                grad_norm=float(np.linalg.norm(grad)),
            )
        )
        if current < best_loss:
            best_loss = current
            best_theta = theta.copy()
            stalled = 0
        else:
            stalled += 1
        if prev_loss is not None and abs(current - prev_loss) < cfg.loss_tol:
            break
        if stalled >= cfg.patience:
            break
        prev_loss = current
        theta = theta - cfg.eta0 * grad

    learned = channel_from_angles(d, m, best_theta, basis=ctx.basis)
    return QuasiInverseResult(
        channel=learned,
        angles=best_theta,
        history=history,
        fidelity_before=fidelity_before,
        fidelity_after=1.0 - best_loss,
    )


def dominant_kraus_report(kraus: KrausSet) -> tuple[np.ndarray, bool]:
    """Per-operator weights Tr[(K^a)† K^a] / d and a unitarity verdict.

    A channel is reported effectively unitary when a single operator
    carries at least 99% of the weight.
    """
    deviation = kraus.completeness_deviation()
    if deviation > 1e-6:
        raise ValueError(f"channel violates completeness: {deviation:.3e}")
    weights = np.array(
        [float(np.trace(op.conj().T @ op).real) / kraus.d for op in kraus.operators]
    )
    return weights, bool(weights.max() >= 0.99)
