"""Dense state-vector primitives: reflections, phase estimation, amplitude
amplification and a numerical checker for the effective spectral gap lemma.

States are 1-D complex ``ndarray``; operators are square 2-D ``ndarray``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np
from scipy import linalg

ATOL = 1e-9
EXACT_ATOL = 1e-12

# Extra ancilla qubits on top of ceil(log2(1/delta)).
PE_EXTRA_QUBITS = 3
# Odd number of independent runs combined by circular median.
PE_DEFAULT_ROUNDS = 3
# controlled_applications <= PE_QUERY_CONSTANT / delta with the defaults above.
PE_QUERY_CONSTANT = 16 * PE_DEFAULT_ROUNDS

AccountingCallback = Callable[[int], None]


class DimensionError(ValueError):
    pass


class NotUnitaryError(ValueError):
    pass


def as_state(vec, normalized: bool = True, atol: float = 1e-10) -> np.ndarray:
    """Coerce ``vec`` to a complex 1-D array, checking the norm if asked."""
    v = np.asarray(vec, dtype=complex)
    if v.ndim != 1 or v.size == 0:
        raise DimensionError(f"expected a non-empty 1-D vector, got shape {v.shape}")
    if normalized and abs(np.linalg.norm(v) - 1.0) > atol:
        raise ValueError(f"state is not normalized (norm={np.linalg.norm(v):.3e})")
    return v


def basis_state(dim: int, index: int) -> np.ndarray:
    e = np.zeros(dim, dtype=complex)
    e[index] = 1.0
    return e


def unitarity_defect(U) -> float:
    U = np.asarray(U)
    return float(np.max(np.abs(U.conj().T @ U - np.eye(U.shape[0]))))


def is_unitary(U, atol: float = ATOL) -> bool:
    U = np.asarray(U)
    return U.ndim == 2 and U.shape[0] == U.shape[1] and unitarity_defect(U) <= atol


def check_unitary(U, atol: float = ATOL) -> np.ndarray:
    U = np.asarray(U, dtype=complex)
    if U.ndim != 2 or U.shape[0] != U.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {U.shape}")
    defect = unitarity_defect(U)
    if defect > atol:
        raise NotUnitaryError(f"matrix is not unitary (max |U*U - I| = {defect:.3e})")
    return U


def is_projector(P, atol: float = ATOL) -> bool:
    P = np.asarray(P)
    if P.ndim != 2 or P.shape[0] != P.shape[1]:
        return False
    return bool(np.allclose(P @ P, P, atol=atol) and np.allclose(P, P.conj().T, atol=atol))


def projector_onto(vectors: Sequence, dim: Optional[int] = None, tol: float = 1e-10) -> np.ndarray:
    """Orthogonal projector onto the span of ``vectors``.

    The span basis comes from an SVD, so linearly dependent inputs are fine.
    """
    basis = orthonormal_basis(vectors, dim=dim, tol=tol)
    return basis @ basis.conj().T


def orthonormal_basis(vectors: Sequence, dim: Optional[int] = None, tol: float = 1e-10) -> np.ndarray:
    """Columns form an orthonormal basis of span(vectors); shape (dim, rank)."""
    vecs = [np.asarray(v, dtype=complex) for v in vectors]
    if not vecs:
        if dim is None or dim <= 0:
            raise DimensionError("empty span needs a positive dimension")
        return np.zeros((dim, 0), dtype=complex)
    dims = {v.shape for v in vecs}
    if len(dims) != 1 or vecs[0].ndim != 1:
        raise DimensionError(f"vectors must share one 1-D shape, got {sorted(dims)}")
    if dim is not None and vecs[0].size != dim:
        raise DimensionError(f"vectors have dimension {vecs[0].size}, expected {dim}")
    M = np.stack(vecs, axis=1)
    u, s, _ = np.linalg.svd(M, full_matrices=False)
    scale = max(1.0, float(s[0])) if s.size else 1.0
    rank = int(np.sum(s > tol * scale))
    return u[:, :rank]


def complete_basis(columns: Sequence, dim: int, tol: float = 1e-8) -> np.ndarray:
    """Unitary whose leading columns are the given orthonormal vectors.

    Remaining columns come from Gram-Schmidt over the standard basis.
    """
    cols = [np.asarray(c, dtype=complex) for c in columns]
    for e in np.eye(dim, dtype=complex):
        if len(cols) == dim:
            break
        r = e.copy()
        for _ in range(2):
            for b in cols:
                r -= np.vdot(b, r) * b
        nr = np.linalg.norm(r)
        if nr > tol:
            cols.append(r / nr)
    return np.stack(cols, axis=1)


def reflection_from_projector(P) -> np.ndarray:
    P = np.asarray(P, dtype=complex)
    return 2 * P - np.eye(P.shape[0])


def reflect_about_span(vectors: Sequence, dim: Optional[int] = None) -> np.ndarray:
    """Return ``2 Pi - I`` where ``Pi`` projects onto span(vectors).

    An empty list gives ``-I`` and requires ``dim``.
    """
    if not vectors and (dim is None or dim <= 0):
        raise DimensionError("reflect_about_span: empty list needs a positive dim")
    return reflection_from_projector(projector_onto(vectors, dim=dim))


# --------------------------------------------------------------------------
# phase estimation


@dataclass(frozen=True)
class PhaseEstimateResult:
    phase: float
    controlled_applications: int
    samples: tuple = ()


def circular_distance(a, b):
    """Distance on the circle of length 2*pi."""
    d = np.mod(np.asarray(a) - np.asarray(b), 2 * np.pi)
    return np.minimum(d, 2 * np.pi - d)


def circular_median(phases: Sequence[float]) -> float:
    """Median of angles, unwrapped around their circular mean.

    If a strict majority of the samples lies within ``d`` of some angle
    ``phi`` (with ``d`` well below pi/2) the result does as well.
    """
    phases = np.asarray(phases, dtype=float)
    if phases.size == 1:
        return float(np.mod(phases[0], 2 * np.pi))
    centre = np.angle(np.mean(np.exp(1j * phases)))
    unwrapped = centre + np.angle(np.exp(1j * (phases - centre)))
    med = float(np.median(unwrapped))
    return float(np.mod(med, 2 * np.pi))


def register_size_for(delta: float) -> int:
    """Ancilla grid size 2**t with t = ceil(log2(1/delta)) + PE_EXTRA_QUBITS."""
    t = max(0, math.ceil(math.log2(1.0 / delta))) + PE_EXTRA_QUBITS
    return 2**t


def phase_distribution(U, state, register_size: int) -> np.ndarray:
    """Exact outcome distribution of textbook phase estimation.

    The ancilla holds ``register_size`` computational states prepared in
    uniform superposition; after the controlled powers ``U^k`` and an inverse
    Fourier transform, outcome ``m`` reports phase ``2*pi*m/register_size``.
    The joint state is simulated column by column: ``U^k state`` for every
    ``k`` and an FFT over ``k``.
    """
    U = np.asarray(U, dtype=complex)
    psi = np.asarray(state, dtype=complex)
    if U.shape != (psi.size, psi.size):
        raise DimensionError(f"operator {U.shape} does not act on a state of length {psi.size}")
    N = int(register_size)
    if N < 1:
        raise ValueError("register_size must be positive")
    powers = np.empty((N, psi.size), dtype=complex)
    powers[0] = psi
    for k in range(1, N):
        powers[k] = U @ powers[k - 1]
    # amplitude of m: (1/N) sum_k exp(-2 pi i k m / N) U^k psi
    amps = np.fft.fft(powers, axis=0) / N
    probs = np.sum(np.abs(amps) ** 2, axis=1)
    return probs / probs.sum()


def spectral_decomposition(U) -> tuple[np.ndarray, np.ndarray]:
    """Eigenphases in [0, 2pi) and an orthonormal eigenbasis of a unitary.

    Uses the complex Schur form; for a normal matrix it is diagonal, so the
    Schur vectors are eigenvectors even inside degenerate clusters.
    """
    T, Z = linalg.schur(np.asarray(U, dtype=complex), output="complex")
    phases = np.mod(np.angle(np.diag(T)), 2 * np.pi)
    return phases, Z


def phase_estimate(
    U,
    state,
    delta: float,
    mode: str = "circuit",
    rng: Optional[np.random.Generator] = None,
    rounds: int = PE_DEFAULT_ROUNDS,
    register_size: Optional[int] = None,
    on_apply: Optional[AccountingCallback] = None,
) -> PhaseEstimateResult:
    """Estimate an eigenphase of ``U`` seen from ``state``.

    ``circuit`` mode simulates ``rounds`` independent phase-estimation runs
    (each with ``register_size - 1`` controlled applications of ``U``,
    reported through ``on_apply``) and combines them by circular median.
    ``spectral`` mode samples an eigencomponent of ``state`` from an exact
    eigendecomposition and returns its phase; it is for validation and does
    no query accounting.
    """
    if not delta > 0:
        raise ValueError(f"delta must be positive, got {delta}")
    U = np.asarray(U, dtype=complex)
    psi = as_state(state)
    if U.ndim != 2 or U.shape != (psi.size, psi.size):
        raise DimensionError(f"operator {U.shape} does not act on a state of length {psi.size}")
    rng = np.random.default_rng() if rng is None else rng

    if mode == "spectral":
        phases, Z = spectral_decomposition(U)
        weights = np.abs(Z.conj().T @ psi) ** 2
        j = rng.choice(phases.size, p=weights / weights.sum())
        return PhaseEstimateResult(float(phases[j]), 0, (float(phases[j]),))
    if mode != "circuit":
        raise ValueError(f"unknown phase estimation mode {mode!r}")
    if rounds < 1:
        raise ValueError("rounds must be >= 1")

    N = register_size_for(delta) if register_size is None else int(register_size)
    probs = phase_distribution(U, psi, N)
    outcomes = rng.choice(N, size=rounds, p=probs)
    samples = 2 * np.pi * outcomes / N
    applications = rounds * (N - 1)
    if on_apply is not None:
        on_apply(applications)
    return PhaseEstimateResult(circular_median(samples), applications, tuple(float(s) for s in samples))


# --------------------------------------------------------------------------
# amplitude amplification


def grover_iterate(setup, target_projector) -> np.ndarray:
    """``-A S_0 A^* S_chi`` with ``S_0 = I - 2|e0><e0|`` and ``S_chi = I - 2 Pi``."""
    A = np.asarray(setup, dtype=complex)
    P = np.asarray(target_projector, dtype=complex)
    dim = A.shape[0]
    S0 = np.eye(dim, dtype=complex)
    S0[0, 0] = -1.0
    S_chi = np.eye(dim, dtype=complex) - 2 * P
    return -A @ S0 @ A.conj().T @ S_chi


def amplitude_amplify(
    setup,
    target,
    rounds: int,
    on_apply: Optional[AccountingCallback] = None,
) -> np.ndarray:
    """Amplify the component of ``setup @ e0`` inside ``range(target)``.

    If that component has norm ``sin(a)``, the returned state has target
    norm ``sin((2*rounds + 1) a)``. ``on_apply`` is charged one application
    of ``setup`` for the initial preparation and two (forward and inverse)
    per round.
    """
    A = check_unitary(setup)
    P = np.asarray(target, dtype=complex)
    if P.shape != A.shape:
        raise DimensionError(f"target projector {P.shape} does not match setup {A.shape}")
    if rounds < 0:
        raise ValueError("rounds must be nonnegative")
    state = A[:, 0].copy()
    Q = grover_iterate(A, P)
    for _ in range(rounds):
        state = Q @ state
    if on_apply is not None:
        on_apply(1 + 2 * rounds)
    return state


# --------------------------------------------------------------------------
# effective spectral gap lemma


@dataclass(frozen=True)
class ESGLResult:
    lhs: float
    bound: float
    holds: bool


def low_phase_projector(U, delta: float) -> np.ndarray:
    """Projector onto eigenvectors of ``U`` with eigenphase in [-delta, delta]."""
    phases, Z = spectral_decomposition(U)
    keep = circular_distance(phases, 0.0) <= delta
    Zk = Z[:, keep]
    return Zk @ Zk.conj().T


def esgl_check(PiA, PiB, w, delta: float, atol: float = ATOL) -> ESGLResult:
    """Compare ``||P_delta PiB w||`` against ``(delta/2) ||w||``.

    ``P_delta`` is the low-phase projector of ``R_B R_A``. Raises if ``w`` is
    not in the kernel of ``PiA``.
    """
    PiA = np.asarray(PiA, dtype=complex)
    PiB = np.asarray(PiB, dtype=complex)
    w = np.asarray(w, dtype=complex)
    if PiA.shape != PiB.shape or PiA.shape != (w.size, w.size):
        raise DimensionError("projectors and vector must share one dimension")
    if delta < 0:
        raise ValueError("delta must be nonnegative")
    if np.linalg.norm(PiA @ w) > atol:
        raise ValueError("w is not in the kernel of PiA")
    M = reflection_from_projector(PiB) @ reflection_from_projector(PiA)
    lhs = float(np.linalg.norm(low_phase_projector(M, delta) @ (PiB @ w)))
    bound = float(delta / 2 * np.linalg.norm(w))
    return ESGLResult(lhs, bound, lhs <= bound + atol)
