"""Finite probability distributions, their Hellinger geometry and the
distribution families used by the experiments."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Sequence, Union

import numpy as np

NORM_TOL = 1e-12


class AlphabetMismatch(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class ProbDist:
    """Probability vector over the alphabet ``{0, ..., size - 1}``.

    Entries are renormalized on construction; inputs whose total is off by
    more than ``1e-9`` are rejected rather than silently rescaled.
    """

    probs: np.ndarray

    def __init__(self, probs: Sequence[float]):
        arr = np.array(probs, dtype=float).reshape(-1)
        if arr.size == 0:
            raise ValueError("a distribution needs at least one symbol")
        if not np.all(np.isfinite(arr)) or np.any(arr < 0):
            raise ValueError("probabilities must be finite and nonnegative")
        total = arr.sum()
        if abs(total - 1.0) > 1e-9:
            raise ValueError(f"probabilities sum to {total!r}, not 1")
        arr = arr / total
        arr.setflags(write=False)
        object.__setattr__(self, "probs", arr)

    @property
    def size(self) -> int:
        return int(self.probs.size)

    def __len__(self) -> int:
        return self.size

    def __getitem__(self, a):
        return self.probs[a]

    def __eq__(self, other) -> bool:
        if not isinstance(other, ProbDist):
            return NotImplemented
        return self.size == other.size and bool(np.array_equal(self.probs, other.probs))

    def __hash__(self) -> int:
        return hash(self.probs.tobytes())

    def __repr__(self) -> str:
        return f"ProbDist({np.array2string(self.probs, precision=6, separator=', ')})"

    def tolist(self) -> list:
        return self.probs.tolist()


@dataclass(frozen=True)
class DistMetrics:
    hellinger: float
    bhattacharyya: float
    angle: float
    mu_distance: float


def _check_pair(p: ProbDist, q: ProbDist) -> None:
    if p.size != q.size:
        raise AlphabetMismatch(f"alphabet sizes differ: {p.size} vs {q.size}")


def mu_state(p: ProbDist) -> np.ndarray:
    """The state ``sum_a sqrt(p_a) |a>`` as a real unit vector."""
    return np.sqrt(p.probs)


def bhattacharyya(p: ProbDist, q: ProbDist) -> float:
    _check_pair(p, q)
    return float(min(1.0, np.sum(np.sqrt(p.probs * q.probs))))


def hellinger(p: ProbDist, q: ProbDist) -> float:
    _check_pair(p, q)
    return float(math.sqrt(0.5 * np.sum((np.sqrt(p.probs) - np.sqrt(q.probs)) ** 2)))


def metrics(p: ProbDist, q: ProbDist) -> DistMetrics:
    _check_pair(p, q)
    bc = bhattacharyya(p, q)
    d_h = hellinger(p, q)
    mu_dist = float(np.linalg.norm(mu_state(p) - mu_state(q)))
    # arccos is ill-conditioned near 1; take the angle from the chord instead
    angle = 2 * math.asin(min(1.0, mu_dist / 2))
    return DistMetrics(hellinger=d_h, bhattacharyya=bc, angle=angle, mu_distance=mu_dist)


# --------------------------------------------------------------------------
# families


def collision(n: int) -> tuple[ProbDist, ProbDist]:
    """Uniform on ``n`` symbols versus uniform on the first half."""
    if n < 2 or n % 2:
        raise ValueError("collision(n) needs an even n >= 2")
    p = np.full(n, 1.0 / n)
    q = np.zeros(n)
    q[: n // 2] = 2.0 / n
    return ProbDist(p), ProbDist(q)


def tiered_scale(t: int) -> Fraction:
    """Exact value of the common mass parameter of ``tiered(t)``."""
    if t < 1:
        raise ValueError("tiered(t) needs t >= 1")
    # first half: p sums to n*a, q to a*sum_i 4^(i-1)(1 - 2^(1-i));
    # the second half swaps them, so each distribution has that total too
    n = (4**t - 1) // 3
    q_weight = sum(Fraction(4 ** (i - 1)) * (1 - Fraction(2) ** (1 - i)) for i in range(1, t + 1))
    return 1 / (n + q_weight)


def tiered_weights(t: int) -> np.ndarray:
    """Relative gaps ``(p_a - q_a) / scale`` on the first half: 1, 1/2 x4, 1/4 x16, ..."""
    if t < 1:
        raise ValueError("tiered(t) needs t >= 1")
    return np.concatenate([np.full(4 ** (i - 1), 2.0 ** (1 - i)) for i in range(1, t + 1)])


def tiered(t: int) -> tuple[ProbDist, ProbDist]:
    """Two distributions on ``2n`` symbols, ``n = (4^t - 1)/3``, with tiered gaps."""
    scale = tiered_scale(t)
    n = (4**t - 1) // 3
    p_half = [scale] * n
    q_half = []
    for i in range(1, t + 1):
        q_half += [(1 - Fraction(2) ** (1 - i)) * scale] * 4 ** (i - 1)
    p = [float(x) for x in p_half + q_half]
    q = [float(x) for x in q_half + p_half]
    return ProbDist(p), ProbDist(q)


def bernoulli(theta_p: float, theta_q: float) -> tuple[ProbDist, ProbDist]:
    """``(theta, 1 - theta)`` pairs."""
    for th in (theta_p, theta_q):
        if not 0 < th < 1:
            raise ValueError(f"bernoulli parameter must lie in (0, 1), got {th}")
    return ProbDist([theta_p, 1 - theta_p]), ProbDist([theta_q, 1 - theta_q])


def custom(p: Sequence[float], q: Sequence[float]) -> tuple[ProbDist, ProbDist]:
    P, Q = ProbDist(p), ProbDist(q)
    _check_pair(P, Q)
    return P, Q


def generate(kind: str, *args) -> tuple[ProbDist, ProbDist]:
    """Dispatch by family name: ``generate("collision", 4)`` and so on."""
    families = {"collision": collision, "tiered": tiered, "bernoulli": bernoulli, "custom": custom}
    try:
        fn = families[kind]
    except KeyError:
        raise ValueError(f"unknown distribution family {kind!r}") from None
    return fn(*args)


# --------------------------------------------------------------------------
# sampling


def make_rng(seed: int, stream: int = 0) -> np.random.Generator:
    """Counter-based (Philox) generator keyed by ``(seed, stream)``."""
    ss = np.random.SeedSequence([int(seed), int(stream)])
    return np.random.Generator(np.random.Philox(ss))


def sample(p: ProbDist, rng: Union[np.random.Generator, int], size=None):
    """Draw symbol indices from ``p``; an int ``rng`` is used as a seed."""
    if not isinstance(rng, np.random.Generator):
        rng = make_rng(rng)
    return rng.choice(p.size, size=size, p=p.probs)


# --------------------------------------------------------------------------
# files


def save_pair(path: Union[str, Path], p: ProbDist, q: ProbDist) -> None:
    _check_pair(p, q)
    Path(path).write_text(json.dumps({"p": p.tolist(), "q": q.tolist()}, indent=2) + "\n")


def load_pair(path: Union[str, Path]) -> tuple[ProbDist, ProbDist]:
    data = json.loads(Path(path).read_text())
    try:
        return custom(data["p"], data["q"])
    except KeyError as exc:
        raise ValueError(f"{path}: distribution file needs 'p' and 'q' lists") from exc
