"""Algorithms that decide whether an oracle encodes ``p`` or ``q``.

* :func:`discriminate_model3` amplifies the ``mu_q``-only direction of a
  state-preparation oracle.
* :func:`discriminate_model4` runs phase estimation on the walk operator
  built from the adversary witness; it only needs ``p`` and ``q``, never the
  garbage vectors or the completion of the oracle.
* :func:`standard_method` is the flag-rotation plus amplitude-estimation
  comparator.
* :func:`classical_discriminate` is the likelihood-ratio sampling baseline.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy import stats

from . import qcore
from .adversary import Gamma2Witness, build_witness, complexity_bound
from .distributions import ProbDist, make_rng, metrics, mu_state, tiered_scale, tiered_weights
from .oracles import OracleInstance, embed

P_LABEL, Q_LABEL = "P", "Q"


@dataclass
class DiscriminationInstance:
    p: ProbDist
    q: ProbDist
    oracle: OracleInstance
    model: str = ""

    def __post_init__(self):
        if self.p.size != self.q.size:
            raise ValueError("alphabet sizes differ")
        if not self.model:
            self.model = self.oracle.model


@dataclass
class DiscriminationOutcome:
    decision: str
    queries_used: int
    auxiliary: dict = field(default_factory=dict)


@dataclass(frozen=True)
class AlgoParams:
    """Tuning of the witness-based algorithm.

    ``epsilon`` is the error parameter; phase estimation runs at precision
    ``delta = kappa * epsilon**2 / T`` on a register of
    ``ceil(grid_factor / delta)`` points, ``rounds`` times, and the decision
    is a majority vote. The defaults were calibrated once on collision(4)
    so that a P-instance is accepted with probability >= 0.9 and then left
    alone.
    """

    epsilon: float = 0.5
    kappa: float = 4.0
    rounds: int = 15
    grid_factor: float = 8.0
    block_reflection: bool = False

    def __post_init__(self):
        if not 0 < self.epsilon < 1:
            raise ValueError("epsilon must lie in (0, 1)")
        if self.kappa <= 0 or self.grid_factor <= 0:
            raise ValueError("kappa and grid_factor must be positive")
        if self.rounds < 1 or self.rounds % 2 == 0:
            raise ValueError("rounds must be a positive odd number")


def _rng(rng):
    if rng is None:
        return make_rng(0)
    if isinstance(rng, np.random.Generator):
        return rng
    return make_rng(int(rng))


def _counter_delta(oracle: OracleInstance):
    start = oracle.query_count
    return lambda: oracle.query_count - start


# --------------------------------------------------------------------------
# model iii


def amplification_rounds(alpha: float) -> int:
    """``round(pi / (4 alpha) - 1/2)`` with halves rounded down, never negative."""
    return max(0, math.ceil(math.pi / (4 * alpha) - 1))


def flag_unitary(p: ProbDist, q: ProbDist) -> np.ndarray:
    """Unitary on ``D + E`` sending ``mu_p`` to ``e0`` and ``mu_q`` to ``cos a e0 + sin a e1``."""
    mp, mq = embed(mu_state(p)), embed(mu_state(q))
    r = mq - np.vdot(mp, mq) * mp
    nr = np.linalg.norm(r)
    if nr < 1e-14:
        raise ValueError("p and q give parallel states; alpha = 0")
    B = qcore.complete_basis([mp, r / nr], mp.size)
    return B.conj().T


def discriminate_model3(
    inst: DiscriminationInstance,
    rng=None,
    exact: bool = False,
) -> DiscriminationOutcome:
    """Amplitude amplification on ``U O`` for the flag ``e1``.

    On a P-instance the flag amplitude is exactly zero, so the answer is
    always P. With ``exact=True`` an ancilla rotation shrinks the angle so
    that the Q-instance succeeds with certainty.
    """
    rng = _rng(rng)
    oracle = inst.oracle
    if oracle.model != "iii":
        raise ValueError("discriminate_model3 needs a model iii oracle")
    alpha = metrics(inst.p, inst.q).angle
    if alpha == 0:
        raise ValueError("p and q coincide")
    used = _counter_delta(oracle)
    setup = flag_unitary(inst.p, inst.q) @ oracle.unitary
    dim = setup.shape[0]
    target = np.zeros((dim, dim), dtype=complex)
    target[1, 1] = 1.0
    if exact:
        k = max(0, math.ceil(math.pi / (4 * alpha) - 0.5))
        shrunk = math.pi / (2 * (2 * k + 1))
        ratio = min(1.0, math.sin(shrunk) / math.sin(alpha))
        half = math.asin(ratio)
        rot = np.array([[math.cos(half), -math.sin(half)], [math.sin(half), math.cos(half)]])
        setup = np.kron(setup, rot)
        target = np.kron(target, np.diag([0.0, 1.0]))
    else:
        k = amplification_rounds(alpha)
    state = qcore.amplitude_amplify(setup, target, k, on_apply=oracle.charge)
    flag_prob = float(np.real(np.vdot(state, target @ state)))
    decision = Q_LABEL if rng.random() < flag_prob else P_LABEL
    return DiscriminationOutcome(decision, used(), {"rounds": k, "alpha": alpha, "flag_probability": flag_prob})


# --------------------------------------------------------------------------
# model iv


class WalkSpace:
    """Index bookkeeping for ``A + B (x) C (x) X`` (``W`` is one-dimensional).

    ``A`` is index 0; ``|b>|c>|x>`` sits at ``1 + (2b + c) dX + x``.
    """

    def __init__(self, oracle_dim: int):
        self.dX = oracle_dim
        self.dim = 1 + 4 * oracle_dim

    def index(self, b: int, c: int, x: int) -> int:
        return 1 + (2 * b + c) * self.dX + x

    def block(self, b: int, c: int) -> slice:
        start = 1 + (2 * b + c) * self.dX
        return slice(start, start + self.dX)

    def zero(self) -> np.ndarray:
        return np.zeros(self.dim, dtype=complex)


@dataclass
class WalkData:
    """Garbage-independent numbers the model-iv algorithm needs."""

    witness: Gamma2Witness
    objective: float
    coeff: np.ndarray  # v_P amplitude per symbol, per unit garbage vector
    u_p: float
    overlap: float  # <psi, v_P>

    @classmethod
    def from_pair(cls, p: ProbDist, q: ProbDist, weights=None) -> "WalkData":
        w = build_witness(p, q, weights=weights)
        coeff = np.real(w.v_p[1:]).copy()
        return cls(w, w.objective, coeff, w.u_p, float(np.dot(np.sqrt(p.probs), coeff)))


def lambda_vectors(data: WalkData, p: ProbDist, layout, epsilon: float) -> list:
    """Vectors spanning ``Lambda``, the span of every positive witness vector.

    One anchor ``|0>_A + s (beta |00> + u_P |10>) e0`` and, per symbol ``a``
    and garbage coordinate ``f``, the pair ``|00>|a,f>`` and
    ``(g_a |01> + u_P sqrt(p_a) |11>)|a,f>``; the ``|00>`` directions absorb
    the unknown completion of the oracle on the complement of ``e0``.
    """
    space = WalkSpace(layout.dim)
    s = epsilon / math.sqrt(data.objective)
    anchor = space.zero()
    anchor[0] = 1.0
    anchor[space.index(0, 0, 0)] = s * data.overlap
    anchor[space.index(1, 0, 0)] = s * data.u_p
    vecs = [anchor]
    d_f = layout.garbage_dim
    for a in range(p.size):
        for f in range(d_f):
            x = 1 + a * d_f + f
            v = space.zero()
            v[space.index(0, 0, x)] = 1.0
            vecs.append(v)
            if p.probs[a] > 0:
                v = space.zero()
                v[space.index(0, 1, x)] = data.coeff[a]
                v[space.index(1, 1, x)] = data.u_p * math.sqrt(p.probs[a])
                vecs.append(v)
    return vecs


def lambda_reflection_blocks(data: WalkData, p: ProbDist, layout, epsilon: float) -> np.ndarray:
    """``2 Lambda - I`` assembled from its orthogonal blocks.

    ``Lambda`` splits into the anchor line plus, for each symbol, a fixed
    projector on ``B (x) C`` tensored with the identity on ``F``.
    """
    space = WalkSpace(layout.dim)
    s = epsilon / math.sqrt(data.objective)
    d_f = layout.garbage_dim
    P = np.zeros((space.dim, space.dim), dtype=complex)
    anchor = np.zeros(space.dim, dtype=complex)
    anchor[0] = 1.0
    anchor[space.index(0, 0, 0)] = s * data.overlap
    anchor[space.index(1, 0, 0)] = s * data.u_p
    anchor /= np.linalg.norm(anchor)
    P += np.outer(anchor, anchor.conj())
    for a in range(p.size):
        nu = np.array([0.0, data.coeff[a], 0.0, data.u_p * math.sqrt(p.probs[a])])
        Q_a = np.zeros((4, 4))
        Q_a[0, 0] = 1.0
        if np.linalg.norm(nu) > 0:
            nu = nu / np.linalg.norm(nu)
            Q_a += np.outer(nu, nu)
        sym = np.zeros((layout.dim, layout.dim))
        sym[layout.symbol_slice(a), layout.symbol_slice(a)] = np.eye(d_f)
        P[1:, 1:] += np.kron(Q_a, sym)
    return 2 * P - np.eye(space.dim)


def oracle_isometry(oracle_unitary) -> np.ndarray:
    """Columns ``(|b>|0>_C phi - |b>|1>_C O phi) / sqrt 2`` over ``b`` and a basis of ``phi``."""
    O = np.asarray(oracle_unitary, dtype=complex)
    space = WalkSpace(O.shape[0])
    dX = space.dX
    T = np.zeros((space.dim, 2 * dX), dtype=complex)
    for b in range(2):
        cols = slice(b * dX, (b + 1) * dX)
        T[space.block(b, 0), cols] = np.eye(dX) / math.sqrt(2)
        T[space.block(b, 1), cols] = -O / math.sqrt(2)
    return T


def oracle_reflection(oracle_unitary) -> np.ndarray:
    """``2 Pi_z - I = I - 2 T T*``; costs two oracle queries (``O_z`` and ``O_z*``)."""
    T = oracle_isometry(oracle_unitary)
    return np.eye(T.shape[0]) - 2 * T @ T.conj().T


def walk_operator(data: WalkData, p: ProbDist, oracle: OracleInstance, params: AlgoParams) -> np.ndarray:
    if params.block_reflection:
        R_lambda = lambda_reflection_blocks(data, p, oracle.layout, params.epsilon)
    else:
        R_lambda = qcore.reflect_about_span(lambda_vectors(data, p, oracle.layout, params.epsilon))
    return R_lambda @ oracle_reflection(oracle.unitary)


def positive_witness_vector(witness: Gamma2Witness, oracle_unitary, psi, epsilon: float, objective: float) -> np.ndarray:
    """``mu_x`` for a known P-encoding ``psi`` and its oracle (test helper)."""
    O = np.asarray(oracle_unitary, dtype=complex)
    space = WalkSpace(O.shape[0])
    s = epsilon / math.sqrt(objective)
    e0 = qcore.basis_state(space.dX, 0)
    mu = space.zero()
    mu[0] = 1.0
    mu[space.block(0, 0)] = s * (O.conj().T @ witness.v_p)
    mu[space.block(0, 1)] = s * witness.v_p
    mu[space.block(1, 0)] = s * e0 * witness.u_p
    mu[space.block(1, 1)] = s * np.asarray(psi) * witness.u_p
    return mu


def negative_witness_vector(witness: Gamma2Witness, oracle_unitary, phi, epsilon: float, objective: float) -> np.ndarray:
    """``w_y`` for a known Q-encoding ``phi`` and its oracle (test helper)."""
    O = np.asarray(oracle_unitary, dtype=complex)
    space = WalkSpace(O.shape[0])
    s = math.sqrt(objective) / epsilon
    e0 = qcore.basis_state(space.dX, 0)
    w = space.zero()
    w[0] = 1.0
    w[space.block(0, 0)] = -s * e0 * witness.u_q
    w[space.block(0, 1)] = s * np.asarray(phi) * witness.u_q
    w[space.block(1, 0)] = s * (O.conj().T @ witness.v_q)
    w[space.block(1, 1)] = -s * witness.v_q
    return w


def discriminate_model4(
    inst: DiscriminationInstance,
    params: Optional[AlgoParams] = None,
    rng=None,
    data: Optional[WalkData] = None,
) -> DiscriminationOutcome:
    """Phase estimation on ``(2 Lambda - I)(2 Pi_z - I)`` starting from ``|0>_A``.

    Each run accepts when the reported phase is within ``delta / 2`` of
    zero; the answer is the majority over ``params.rounds`` runs. Every
    controlled walk step is charged two oracle queries.
    """
    params = params or AlgoParams()
    rng = _rng(rng)
    oracle = inst.oracle
    if oracle.model != "iv" or oracle.layout.kind != "state":
        raise ValueError("discriminate_model4 needs a model iv state-preparation oracle")
    if oracle.layout.alphabet_size != inst.p.size:
        raise ValueError("oracle alphabet does not match the distributions")
    if metrics(inst.p, inst.q).angle == 0:
        raise ValueError("p and q coincide")
    data = data or WalkData.from_pair(inst.p, inst.q)
    used = _counter_delta(oracle)

    U = walk_operator(data, inst.p, oracle, params)
    delta = params.kappa * params.epsilon**2 / data.objective
    size = max(2, math.ceil(params.grid_factor / delta))
    start = qcore.basis_state(U.shape[0], 0)
    result = qcore.phase_estimate(
        U, start, delta, rng=rng, rounds=params.rounds, register_size=size,
        on_apply=lambda steps: oracle.charge(2 * steps),
    )
    accepts = [qcore.circular_distance(s, 0.0) <= delta / 2 for s in result.samples]
    votes = int(sum(accepts))
    decision = P_LABEL if 2 * votes > params.rounds else Q_LABEL
    aux = {
        "objective": data.objective,
        "delta": delta,
        "register_size": size,
        "reflections": result.controlled_applications,
        "accept_votes": votes,
        "phase": result.phase,
    }
    return DiscriminationOutcome(decision, used(), aux)


def model4_budget(objective: float, params: Optional[AlgoParams] = None) -> int:
    """Closed-form query count of :func:`discriminate_model4`."""
    params = params or AlgoParams()
    delta = params.kappa * params.epsilon**2 / objective
    size = max(2, math.ceil(params.grid_factor / delta))
    return 2 * params.rounds * (size - 1)


# --------------------------------------------------------------------------
# comparator: flag rotation + amplitude estimation


def flag_probabilities(p: ProbDist, q: ProbDist, c) -> tuple[float, float]:
    c = np.asarray(c, dtype=float)
    return float(np.dot(c, p.probs)), float(np.dot(c, q.probs))


def standard_method_cost(p: ProbDist, q: ProbDist, c) -> float:
    """``sqrt(S_p) / (S_p - S_q)`` for flag weights ``c``."""
    s_p, s_q = flag_probabilities(p, q, c)
    if s_p <= s_q:
        raise ValueError("flag weights do not separate p from q (S_p <= S_q)")
    return math.sqrt(s_p) / (s_p - s_q)


def indicator_weights(p: ProbDist, q: ProbDist) -> np.ndarray:
    """``1`` on symbols with ``p_a > q_a``."""
    return (p.probs > q.probs).astype(float)


def flagged_setup(oracle_unitary, layout, c) -> np.ndarray:
    """``O`` followed by ``|0> -> sqrt(1 - c_a)|0> + sqrt(c_a)|1>`` on a flag qubit.

    Flag is the least significant index; ``D`` is never flagged.
    """
    O = np.asarray(oracle_unitary, dtype=complex)
    c = np.asarray(c, dtype=float)
    rot_angles = np.zeros(layout.dim)
    for a, ca in enumerate(c):
        rot_angles[layout.symbol_slice(a)] = math.asin(math.sqrt(ca))
    R = np.zeros((2 * layout.dim, 2 * layout.dim))
    for x, th in enumerate(rot_angles):
        R[2 * x : 2 * x + 2, 2 * x : 2 * x + 2] = [[math.cos(th), -math.sin(th)], [math.sin(th), math.cos(th)]]
    return R @ np.kron(O, np.eye(2))


def standard_method(
    inst: DiscriminationInstance,
    c=None,
    rng=None,
    precision_constant: float = 8 * math.pi,
    rounds: int = 3,
) -> DiscriminationOutcome:
    """Estimate the flagged probability by phase estimation on the Grover iterate.

    The register has ``ceil(precision_constant * sqrt(S_p) / (S_p - S_q))``
    points, which keeps the textbook estimation error below half the gap.
    Each Grover step costs two queries and each run one more to prepare.
    """
    rng = _rng(rng)
    oracle = inst.oracle
    if oracle.model != "iv" or oracle.layout.kind != "state":
        raise ValueError("standard_method needs a model iv state-preparation oracle")
    p, q = inst.p, inst.q
    c = indicator_weights(p, q) if c is None else np.asarray(c, dtype=float)
    if c.shape != (p.size,) or np.any(c < 0) or np.any(c > 1):
        raise ValueError("flag weights must lie in [0, 1], one per symbol")
    s_p, s_q = flag_probabilities(p, q, c)
    if s_p <= s_q:
        raise ValueError("flag weights do not separate p from q (S_p <= S_q)")
    used = _counter_delta(oracle)

    A = flagged_setup(oracle.unitary, oracle.layout, c)
    target = np.diag(np.tile([0.0, 1.0], oracle.layout.dim)).astype(complex)
    G = qcore.grover_iterate(A, target)
    size = max(2, math.ceil(precision_constant * math.sqrt(s_p) / (s_p - s_q)))
    start = A[:, 0]
    oracle.charge(rounds)  # preparing A|0> once per run
    probs = qcore.phase_distribution(G, start, size)
    oracle.charge(2 * rounds * (size - 1))
    outcomes = rng.choice(size, size=rounds, p=probs)
    estimates = np.sin(np.pi * outcomes / size) ** 2
    est = float(np.median(estimates))
    decision = P_LABEL if est >= (s_p + s_q) / 2 else Q_LABEL
    aux = {"S_p": s_p, "S_q": s_q, "estimate": est, "register_size": size, "cost_formula": standard_method_cost(p, q, c)}
    return DiscriminationOutcome(decision, used(), aux)


def standard_method_budget(p: ProbDist, q: ProbDist, c=None, precision_constant: float = 8 * math.pi, rounds: int = 3) -> int:
    c = indicator_weights(p, q) if c is None else np.asarray(c, dtype=float)
    s_p, s_q = flag_probabilities(p, q, c)
    size = max(2, math.ceil(precision_constant * math.sqrt(s_p) / (s_p - s_q)))
    return rounds + 2 * rounds * (size - 1)


# --------------------------------------------------------------------------
# classical baseline


def log_likelihood_ratios(p: ProbDist, q: ProbDist) -> np.ndarray:
    """Per-symbol ``log(p_a / q_a)`` with ``+-inf`` on one-sided support (0 where both vanish)."""
    with np.errstate(divide="ignore", invalid="ignore"):
        llr = np.log(p.probs) - np.log(q.probs)
    llr[(p.probs == 0) & (q.probs == 0)] = 0.0
    return llr


def _decide(total: np.ndarray, coins: np.ndarray) -> np.ndarray:
    """True for P. NaN (both infinities) and exact zero are ties broken by ``coins``."""
    tie = np.isnan(total) | (total == 0)
    return np.where(tie, coins < 0.5, total > 0)


def classical_error_rates(
    p: ProbDist, q: ProbDist, n: int, trials: int = 20000, seed: int = 0, method: str = "auto"
) -> tuple[float, float]:
    """``(P(decide Q | P), P(decide P | Q))`` for the ``n``-sample likelihood-ratio test.

    Binary alphabets are evaluated exactly from the binomial law; otherwise
    by Monte Carlo over multinomial counts with a fixed seed.
    """
    if n < 1:
        raise ValueError("n must be positive")
    llr = log_likelihood_ratios(p, q)
    if method == "auto":
        method = "exact" if p.size == 2 else "monte_carlo"
    if method == "exact":
        if p.size != 2:
            raise ValueError("exact error rates are implemented for binary alphabets")
        k = np.arange(n + 1)
        with np.errstate(invalid="ignore"):
            totals = np.where(k > 0, k * llr[0], 0.0) + np.where(n - k > 0, (n - k) * llr[1], 0.0)
        wrong_p = np.where(np.isnan(totals) | (totals == 0), 0.5, (totals < 0).astype(float))
        wrong_q = np.where(np.isnan(totals) | (totals == 0), 0.5, (totals > 0).astype(float))
        return float(np.dot(stats.binom.pmf(k, n, p.probs[0]), wrong_p)), float(
            np.dot(stats.binom.pmf(k, n, q.probs[0]), wrong_q)
        )
    rng = make_rng(seed, n)
    errs = []
    for dist, truth in ((p, True), (q, False)):
        counts = rng.multinomial(n, dist.probs, size=trials)
        with np.errstate(invalid="ignore"):
            totals = np.where(counts > 0, counts * llr, 0.0).sum(axis=1)
        decided_p = _decide(totals, rng.random(trials))
        errs.append(float(np.mean(decided_p != truth)))
    return errs[0], errs[1]


def calibrate_sample_size(
    p: ProbDist, q: ProbDist, target_error: float = 1 / 3, trials: int = 20000, seed: int = 0, n_max: int = 10**6
) -> int:
    """Smallest ``n`` such that every sample size in ``[n, 2n]`` keeps the
    worse error rate at or below ``target_error``.

    The likelihood-ratio test's error is not monotone in ``n`` (lattice
    effects), so a single passing ``n`` is not a stable calibration.
    """
    if p == q:
        raise ValueError("p and q coincide")
    if not 0 < target_error < 0.5:
        raise ValueError("target_error must lie in (0, 1/2)")

    def ok(n):
        return max(classical_error_rates(p, q, n, trials, seed)) <= target_error

    hi = 1
    while not ok(hi):
        hi *= 2
        if hi > n_max:
            raise RuntimeError(f"no sample size up to {n_max} reaches error {target_error}")
    lo = hi // 2
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if ok(mid):
            hi = mid
        else:
            lo = mid
    n = hi
    while True:
        bad = [m for m in range(n, 2 * n + 1) if not ok(m)]
        if not bad:
            return n
        n = bad[-1] + 1
        if n > n_max:
            raise RuntimeError(f"no stable sample size up to {n_max}")


def classical_discriminate(
    p: ProbDist,
    q: ProbDist,
    sampler: Callable[[int], np.ndarray],
    target_error: float = 1 / 3,
    n: Optional[int] = None,
    rng=None,
) -> dict:
    """Draw a fixed number of samples and decide by the sign of the log-likelihood ratio."""
    if p == q:
        raise ValueError("p and q coincide")
    rng = _rng(rng)
    n = calibrate_sample_size(p, q, target_error) if n is None else int(n)
    xs = np.asarray(sampler(n), dtype=int)
    llr = log_likelihood_ratios(p, q)
    with np.errstate(invalid="ignore"):
        total = np.sum(llr[xs])
    decided_p = bool(_decide(np.array([total]), np.array([rng.random()]))[0])
    return {"decision": P_LABEL if decided_p else Q_LABEL, "samples_used": int(xs.size), "llr": float(total)}


# --------------------------------------------------------------------------
# tiered separation


def separation_bounds(t: int) -> dict:
    """Unconstrained and prefix-constrained optima for ``tiered(t)``.

    With gaps ``alpha * w`` the unconstrained ratio ``|u| / (sqrt(alpha) <u, w>)``
    is minimised at ``u = w``; the constrained one scans every 0/1 prefix.
    """
    if not 1 <= t <= 8:
        raise ValueError("t must lie in 1..8")
    alpha = float(tiered_scale(t))
    w = tiered_weights(t)
    unconstrained = 1 / (math.sqrt(alpha) * np.linalg.norm(w))
    k = np.arange(1, w.size + 1)
    prefix = np.sqrt(k) / (math.sqrt(alpha) * np.cumsum(w))
    best = int(np.argmin(prefix))
    return {
        "t": t,
        "n": int(w.size),
        "alpha": alpha,
        "unconstrained": float(unconstrained),
        "constrained": float(prefix[best]),
        "best_prefix": best + 1,
        "ratio": float(prefix[best] / unconstrained),
    }


def witness_cost(p: ProbDist, q: ProbDist, c) -> float:
    """Objective of the witness built with weights ``c`` (same as the complexity bound)."""
    return complexity_bound(p, q, c)
