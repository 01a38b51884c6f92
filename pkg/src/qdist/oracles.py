"""Unitary oracles for the four access models, with register layouts and
query accounting.

Layout conventions
------------------
State-preparation oracles (models iii and iv) act on ``X = D + E (x) F``:
index 0 is the one-dimensional register ``D`` holding ``e0``, and symbol
``a`` with garbage coordinate ``f`` sits at ``1 + a * d_F + f``. Model iii is
the special case ``d_F = 1``.

String oracles act on ``C^n (x) C^(|A|+1)`` with index ``i * (|A|+1) + b``;
value ``b = 0`` is the blank and symbol ``a`` is stored as ``b = a + 1``.
"""

from __future__ import annotations

import copy
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy.stats import unitary_group

from .distributions import ProbDist, make_rng, mu_state
from .qcore import DimensionError, as_state, check_unitary

MODELS = ("i", "ii", "iii", "iv", "standard_string")


@dataclass(frozen=True)
class RegisterLayout:
    kind: str
    registers: tuple

    @property
    def dim(self) -> int:
        sizes = dict(self.registers)
        if self.kind == "state":
            return 1 + sizes["E"] * sizes["F"]
        if self.kind == "string":
            return sizes["I"] * sizes["V"]
        raise ValueError(f"unknown layout kind {self.kind!r}")

    @property
    def alphabet_size(self) -> int:
        sizes = dict(self.registers)
        return sizes["E"] if self.kind == "state" else sizes["V"] - 1

    @property
    def garbage_dim(self) -> int:
        return dict(self.registers)["F"]

    def symbol_slice(self, a: int) -> slice:
        """Coordinates of the block ``|a> (x) F`` in a state layout."""
        d_f = self.garbage_dim
        return slice(1 + a * d_f, 1 + (a + 1) * d_f)

    def to_dict(self) -> dict:
        return {"kind": self.kind, "registers": dict(self.registers)}


def state_layout(alphabet_size: int, garbage_dim: int = 1) -> RegisterLayout:
    if garbage_dim < 1:
        raise ValueError("garbage dimension d_F must be >= 1")
    if alphabet_size < 1:
        raise ValueError("alphabet must be non-empty")
    return RegisterLayout("state", (("D", 1), ("E", alphabet_size), ("F", garbage_dim)))


def string_layout(n: int, alphabet_size: int) -> RegisterLayout:
    return RegisterLayout("string", (("I", n), ("V", alphabet_size + 1)))


@dataclass
class OracleInstance:
    """A concrete oracle plus its query counter.

    ``hidden_label`` is bookkeeping for the experiment harness; algorithms
    never read it. Code that simulates an algorithm against ``unitary``
    directly must charge its uses through :meth:`charge`.
    """

    model: str
    unitary: np.ndarray
    layout: RegisterLayout
    hidden_label: Optional[str] = None
    query_count: int = 0
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.model not in MODELS:
            raise ValueError(f"unknown model {self.model!r}")
        self.unitary = check_unitary(self.unitary)
        if self.unitary.shape[0] != self.layout.dim:
            raise DimensionError(f"unitary of size {self.unitary.shape[0]} does not fit layout of dim {self.layout.dim}")

    @property
    def dim(self) -> int:
        return self.layout.dim

    @property
    def prepared_state(self) -> np.ndarray:
        """``O e0``."""
        return self.unitary[:, 0].copy()

    def charge(self, queries: int) -> None:
        if queries < 0:
            raise ValueError("cannot charge a negative number of queries")
        self.query_count += int(queries)

    def apply(self, vec) -> np.ndarray:
        self.charge(1)
        return self.unitary @ np.asarray(vec, dtype=complex)

    def apply_adjoint(self, vec) -> np.ndarray:
        self.charge(1)
        return self.unitary.conj().T @ np.asarray(vec, dtype=complex)

    def clone(self) -> "OracleInstance":
        """Copy with the query counter reset."""
        twin = copy.deepcopy(self)
        twin.query_count = 0
        return twin


# --------------------------------------------------------------------------
# garbage and completions


@dataclass(frozen=True)
class GarbageSpec:
    """How model-iv garbage vectors ``psi_a`` are chosen.

    ``trivial`` puts every symbol on the first garbage basis vector;
    ``haar_random`` draws independent Haar vectors (seeded per label);
    ``orthogonal_adversarial`` gives the P- and Q-encodings orthogonal
    garbage on every symbol, so their states are orthogonal whatever ``p``
    and ``q`` are.
    """

    kind: str = "trivial"
    d_f: int = 1
    seed: int = 0

    def __post_init__(self):
        if self.kind not in ("trivial", "haar_random", "orthogonal_adversarial"):
            raise ValueError(f"unknown garbage kind {self.kind!r}")
        if self.d_f < 1:
            raise ValueError("garbage dimension d_F must be >= 1")
        if self.kind == "orthogonal_adversarial" and self.d_f < 2:
            raise ValueError("orthogonal_adversarial garbage needs d_F >= 2")

    def vectors(self, alphabet_size: int, label: str = "P") -> np.ndarray:
        """Unit garbage vectors, one row per symbol."""
        out = np.zeros((alphabet_size, self.d_f), dtype=complex)
        if self.kind == "trivial":
            out[:, 0] = 1.0
        elif self.kind == "orthogonal_adversarial":
            shift = 0 if label == "P" else 1
            for a in range(alphabet_size):
                out[a, (a + shift) % self.d_f] = 1.0
        else:
            rng = make_rng(self.seed, 0 if label == "P" else 1)
            raw = rng.normal(size=(alphabet_size, self.d_f)) + 1j * rng.normal(size=(alphabet_size, self.d_f))
            out = raw / np.linalg.norm(raw, axis=1, keepdims=True)
        return out


def householder_completion(target) -> np.ndarray:
    """Unitary mapping ``e0`` to ``target`` (which must be orthogonal to ``e0``).

    It is the reflection through the complement of ``e0 - target``, so it
    also maps ``target`` back to ``e0``.
    """
    s = as_state(target)
    if abs(s[0]) > 1e-9:
        raise ValueError("target state must be orthogonal to e0")
    w = -s
    w[0] += 1.0
    return np.eye(s.size, dtype=complex) - np.outer(w, w.conj())


def random_completion(target, seed: int) -> np.ndarray:
    """Householder completion composed with a seeded Haar unitary fixing ``e0``."""
    H = householder_completion(target)
    dim = H.shape[0]
    V = np.eye(dim, dtype=complex)
    V[1:, 1:] = unitary_group.rvs(dim - 1, random_state=make_rng(seed, 7)) if dim > 2 else np.exp(
        2j * np.pi * make_rng(seed, 7).random()
    )
    return H @ V


def encode_state(p: ProbDist, garbage_vectors: np.ndarray) -> np.ndarray:
    """``e0``-free state ``sum_a sqrt(p_a) |a>|psi_a>`` in the ``D + E (x) F`` layout."""
    g = np.asarray(garbage_vectors, dtype=complex)
    if g.shape[0] != p.size:
        raise DimensionError("need one garbage vector per symbol")
    return np.concatenate([[0.0], (np.sqrt(p.probs)[:, None] * g).reshape(-1)])


def prepare_oracle(
    model: str,
    p: ProbDist,
    garbage: Optional[GarbageSpec] = None,
    label: Optional[str] = None,
    completion_seed: Optional[int] = None,
) -> OracleInstance:
    """State-preparation oracle for model ``iii`` or ``iv``.

    ``label`` selects the garbage stream (and is stored as the hidden label).
    ``completion_seed`` swaps the deterministic Householder completion for a
    randomized one with the same action on ``e0``.
    """
    if model == "iii":
        spec = GarbageSpec("trivial", 1)
    elif model == "iv":
        spec = garbage or GarbageSpec("trivial", 1)
    else:
        raise ValueError(f"prepare_oracle handles models iii and iv, not {model!r}")
    layout = state_layout(p.size, spec.d_f)
    state = encode_state(p, spec.vectors(p.size, label or "P"))
    if completion_seed is None:
        U = householder_completion(state)
    else:
        U = random_completion(state, completion_seed)
    meta = {"garbage": spec.kind, "d_f": spec.d_f, "completion_seed": completion_seed}
    return OracleInstance(model, U, layout, hidden_label=label, meta=meta)


# --------------------------------------------------------------------------
# reflection oracle and L matrices


def embed(psi) -> np.ndarray:
    """Prepend the ``e0`` coordinate (zero) to a vector of ``C^m``."""
    return np.concatenate([[0.0], np.asarray(psi, dtype=complex)])


def reflection_oracle(psi) -> np.ndarray:
    """Reflection through the orthogonal complement of ``e0 - psi``.

    ``psi`` is given in embedded coordinates (index 0 is ``e0``) and must be
    a unit vector orthogonal to ``e0``. The result swaps ``e0`` and ``psi``.
    """
    s = np.asarray(psi, dtype=complex)
    if s.ndim != 1 or s.size < 2:
        raise DimensionError("psi must be a vector with room for e0")
    if abs(s[0]) > 1e-9:
        raise ValueError("psi must be orthogonal to e0")
    return householder_completion(as_state(s))


def L_matrix(psi) -> np.ndarray:
    """Hermitian ``psi e0* + e0 psi*`` for ``psi`` in ``C^m`` (``e0`` is index 0)."""
    s = embed(psi)
    e0 = np.zeros_like(s)
    e0[0] = 1.0
    return np.outer(s, e0.conj()) + np.outer(e0, s.conj())


def swap_oracle_pair(p: ProbDist, q: ProbDist) -> tuple[np.ndarray, np.ndarray]:
    """Model-iii oracles exchanging ``e0`` with ``mu_p`` (resp. ``mu_q``)."""
    return reflection_oracle(embed(mu_state(p))), reflection_oracle(embed(mu_state(q)))


# --------------------------------------------------------------------------
# string oracles


def standard_oracle(x: Sequence[int], alphabet_size: int, label: Optional[str] = None) -> OracleInstance:
    """``|i>|0> -> |i>|x_i>`` as an involutive permutation matrix.

    Each ``|i>|0>`` is transposed with ``|i>|x_i + 1>``; other basis states
    are fixed.
    """
    x = [int(s) for s in x]
    n = len(x)
    if n < 1:
        raise ValueError("string must be non-empty")
    if any(s < 0 or s >= alphabet_size for s in x):
        raise ValueError(f"symbol outside alphabet of size {alphabet_size}")
    layout = string_layout(n, alphabet_size)
    width = alphabet_size + 1
    perm = np.arange(layout.dim)
    for i, s in enumerate(x):
        blank, val = i * width, i * width + s + 1
        perm[blank], perm[val] = val, blank
    U = np.zeros((layout.dim, layout.dim), dtype=complex)
    U[perm, np.arange(layout.dim)] = 1.0
    return OracleInstance("standard_string", U, layout, hidden_label=label, meta={"string": x})


def frequency_string(p: ProbDist, n: int) -> list:
    """Sorted string of length ``n`` whose symbol frequencies equal ``p``."""
    counts = p.probs * n
    if np.max(np.abs(counts - np.round(counts))) > 1e-9:
        raise ValueError(f"probabilities are not multiples of 1/{n}")
    return [a for a, c in enumerate(np.round(counts).astype(int)) for _ in range(c)]


def iid_string(p: ProbDist, n: int, seed: int) -> list:
    return make_rng(seed, 11).choice(p.size, size=n, p=p.probs).tolist()


def lift_string_oracle(
    x: Sequence[int], alphabet_size: int, label: Optional[str] = None, model: str = "i"
) -> OracleInstance:
    """Model-iv oracle obtained from one query to the string oracle of ``x``.

    The query maps the uniform index superposition to
    ``n^-1/2 sum_i |i>|x_i>``; swapping registers gives
    ``sum_a |a> (x) (n^-1/2 sum_{i: x_i = a} |i>)``, i.e. garbage of
    dimension ``n``. Every use of the returned oracle costs one query.
    """
    source = standard_oracle(x, alphabet_size)
    n = len(source.meta["string"])
    width = alphabet_size + 1
    start = np.zeros(source.dim, dtype=complex)
    start[::width] = 1 / np.sqrt(n)
    after = source.apply(start)
    layout = state_layout(alphabet_size, n)
    state = np.zeros(layout.dim, dtype=complex)
    for i in range(n):
        for b in range(1, width):
            state[1 + (b - 1) * n + i] = after[i * width + b]
    U = householder_completion(state)
    meta = {"string": list(source.meta["string"]), "source_queries": source.query_count}
    return OracleInstance("iv", U, layout, hidden_label=label, meta={**meta, "encodes": model})


def block_norms(state, layout: RegisterLayout) -> np.ndarray:
    """Squared norm of each symbol block ``|a> (x) F`` of a prepared state."""
    s = np.asarray(state)
    return np.array([np.sum(np.abs(s[layout.symbol_slice(a)]) ** 2) for a in range(layout.alphabet_size)])
