"""Feasible points of the state-generation adversary program (upper bound)
and the rotation-matrix certificate for the string lower bound."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .distributions import ProbDist, metrics, mu_state
from .oracles import encode_state

WITNESS_TOL = 1e-9
MAX_TENSOR_DIM = 1024


def optimal_weights(p: ProbDist, q: ProbDist) -> np.ndarray:
    """``c_a = (sqrt p_a - sqrt q_a) / (sqrt p_a + sqrt q_a)``, zero where both vanish."""
    if p.size != q.size:
        raise ValueError("alphabet sizes differ")
    if p == q:
        raise ValueError("weights are undefined for identical distributions")
    sp, sq = np.sqrt(p.probs), np.sqrt(q.probs)
    den = sp + sq
    c = np.zeros(p.size)
    nz = den > 0
    c[nz] = (sp[nz] - sq[nz]) / den[nz]
    return c


def weighted_gap(p: ProbDist, q: ProbDist, c) -> float:
    """``S = sum_a c_a (p_a - q_a)``."""
    return float(np.dot(np.asarray(c, dtype=float), p.probs - q.probs))


def complexity_bound(p: ProbDist, q: ProbDist, c) -> float:
    """``(sqrt(sum c^2 p) + sqrt(sum c^2 q)) / |sum c (p - q)|``."""
    c = np.asarray(c, dtype=float)
    S = abs(weighted_gap(p, q, c))
    if S == 0:
        raise ValueError("weights give a zero gap")
    return (math.sqrt(np.dot(c**2, p.probs)) + math.sqrt(np.dot(c**2, q.probs))) / S


@dataclass
class Gamma2Witness:
    """One-dimensional-``W`` witness for the pair (P-state, Q-state)."""

    weights: np.ndarray
    u_p: float
    u_q: float
    v_p: np.ndarray
    v_q: np.ndarray
    gap: float
    pairing: str = "displayed"
    flipped: bool = False

    @property
    def objective(self) -> float:
        return max(self.u_p**2 + np.linalg.norm(self.v_p) ** 2, self.u_q**2 + np.linalg.norm(self.v_q) ** 2)

    def scaled(self, factor: float) -> "Gamma2Witness":
        return Gamma2Witness(
            self.weights, self.u_p * factor, self.u_q * factor, self.v_p * factor, self.v_q * factor,
            self.gap, self.pairing, self.flipped,
        )

    def to_dict(self) -> dict:
        return {
            "weights": self.weights.tolist(),
            "u_p": self.u_p,
            "u_q": self.u_q,
            "norm_v_p": float(np.linalg.norm(self.v_p)),
            "norm_v_q": float(np.linalg.norm(self.v_q)),
            "gap": self.gap,
            "objective": self.objective,
            "pairing": self.pairing,
            "flipped": self.flipped,
        }


def bilinear_form(w: Gamma2Witness, psi, phi) -> complex:
    """``<v_P, (psi - phi) u_Q> + <(psi - phi) u_P, v_Q>``."""
    d = np.asarray(psi, dtype=complex) - np.asarray(phi, dtype=complex)
    if d.shape != w.v_p.shape or d.shape != w.v_q.shape:
        raise ValueError(f"state dimension {d.shape} does not match witness {w.v_p.shape}")
    return np.vdot(w.v_p, d) * w.u_q + np.conj(w.u_p) * np.vdot(d, w.v_q)


def verify_witness(w: Gamma2Witness, psi, phi) -> float:
    """Feasibility residual ``|bilinear - 1|``."""
    return float(abs(bilinear_form(w, psi, phi) - 1.0))


def _fourth_root_parts(c, probs, garbage) -> tuple[float, np.ndarray]:
    m = float(np.dot(c**2, probs))
    root = m**0.25
    amp = c * np.sqrt(probs)
    vec = np.concatenate([[0.0], (amp[:, None] * garbage).reshape(-1)])
    if root == 0:
        return 0.0, np.zeros_like(vec)
    return root, vec / root


def build_witness(
    p: ProbDist,
    q: ProbDist,
    garbage_p=None,
    garbage_q=None,
    weights=None,
) -> Gamma2Witness:
    """Witness combining the per-symbol identity over the alphabet.

    ``garbage_p``/``garbage_q`` hold one unit vector per symbol (rows); by
    default every symbol uses the same single garbage coordinate. Weights
    default to :func:`optimal_weights`. If the weighted gap is negative the
    weights are negated (``flipped``), which leaves the objective unchanged.
    """
    if p.size != q.size:
        raise ValueError("alphabet sizes differ")
    c = optimal_weights(p, q) if weights is None else np.asarray(weights, dtype=float).copy()
    if c.shape != (p.size,):
        raise ValueError("need one weight per symbol")
    gp = np.ones((p.size, 1), dtype=complex) if garbage_p is None else np.asarray(garbage_p, dtype=complex)
    gq = np.ones((q.size, 1), dtype=complex) if garbage_q is None else np.asarray(garbage_q, dtype=complex)
    S = weighted_gap(p, q, c)
    flipped = False
    if S < 0:
        c, S, flipped = -c, -S, True
    if S <= 1e-15:
        raise ValueError("weighted gap sum_a c_a (p_a - q_a) is zero; p and q are not separated by c")

    root_p, v_p = _fourth_root_parts(c, p.probs, gp)
    root_q, v_q = _fourth_root_parts(c, q.probs, gq)
    scale = 1 / math.sqrt(S)
    w = Gamma2Witness(c, root_q * scale, root_p * scale, v_p * scale, v_q * scale, S, "displayed", flipped)

    psi, phi = encode_state(p, gp), encode_state(q, gq)
    if verify_witness(w, psi, phi) > WITNESS_TOL:
        # other placement of the fourth-root factors
        w = Gamma2Witness(c, root_p * scale, root_q * scale, v_p * scale, v_q * scale, S, "swapped", flipped)
    return w


def split_identity_residual(p_a: float, q_a: float, psi_a, phi_a) -> float:
    """Residual of ``<x, x - y> + <x - y, y> = p_a - q_a`` with ``x = sqrt(p_a) psi_a``, ``y = sqrt(q_a) phi_a``."""
    x = math.sqrt(p_a) * np.asarray(psi_a, dtype=complex)
    y = math.sqrt(q_a) * np.asarray(phi_a, dtype=complex)
    return float(abs(np.vdot(x, x - y) + np.vdot(x - y, y) - (p_a - q_a)))


# --------------------------------------------------------------------------
# lower bound


def tau(s_p: float, s_q: float) -> float:
    for s in (s_p, s_q):
        if not 0.0 <= s <= 1.0:
            raise ValueError(f"acceptance probability {s} outside [0, 1]")
    return math.sqrt(s_p * s_q) + math.sqrt((1 - s_p) * (1 - s_q))


def tau_upper(s_p: float, s_q: float) -> float:
    return 1 - abs(s_p - s_q) ** 2 / 8


def plane_basis(mu_q: np.ndarray, mu_p: np.ndarray, tol: float = 1e-8) -> np.ndarray:
    """Orthonormal basis from Gram-Schmidt on ``(mu_q, mu_p, e_1, e_2, ...)``.

    Candidates whose orthogonal remainder is below ``tol`` are skipped, so
    the first two columns always span a plane containing both vectors.
    """
    dim = mu_q.size
    cols = []
    for v in [mu_q, mu_p, *np.eye(dim)]:
        r = np.array(v, dtype=float)
        for b in cols:
            r -= np.dot(b, r) * b
        for b in cols:  # second pass for stability
            r -= np.dot(b, r) * b
        nr = np.linalg.norm(r)
        if nr > tol:
            cols.append(r / nr)
        if len(cols) == dim:
            break
    return np.stack(cols, axis=1)


def rotation_certificate_matrix(p: ProbDist, q: ProbDist) -> tuple[np.ndarray, float]:
    """Rotation by the angle between ``mu_q`` and ``mu_p`` in their plane, scaled by ``cos`` elsewhere."""
    alpha = metrics(p, q).angle
    B = plane_basis(mu_state(q), mu_state(p))
    if B.shape[1] < 2:  # one-symbol alphabet
        return np.eye(1), alpha
    b1, b2 = B[:, 0], B[:, 1]
    G = math.cos(alpha) * np.eye(p.size) + math.sin(alpha) * (np.outer(b2, b1) - np.outer(b1, b2))
    return G, alpha


def off_diagonal(M: np.ndarray) -> np.ndarray:
    """Hadamard product with the ``1_{a != b}`` mask."""
    out = np.array(M, dtype=float)
    np.fill_diagonal(out, 0.0)
    return out


def coordinate_mask(alphabet_size: int, n: int, j: int) -> np.ndarray:
    """``Delta_j[x, y] = 1_{x_j != y_j}`` over ``A^n`` in lexicographic order."""
    idx = np.indices((alphabet_size,) * n).reshape(n, -1)[j]
    return (idx[:, None] != idx[None, :]).astype(float)


def spectral_norm(M) -> float:
    return float(np.linalg.norm(M, 2))


@dataclass
class LowerBoundCertificate:
    G: np.ndarray
    alpha: float
    norm_G: float
    norm_G_offdiag: float
    image_residual: float
    n: Optional[int] = None
    s_p: Optional[float] = None
    s_q: Optional[float] = None
    tensor: dict = field(default_factory=dict)
    adversary_value: Optional[float] = None

    @property
    def sin_bound(self) -> float:
        return 2 * math.sin(self.alpha)

    def facts(self, tol: float = 1e-9) -> list:
        """``(name, measured, limit, holds)`` tuples for every checked fact."""
        out = [
            ("G mu_q = mu_p", self.image_residual, tol, self.image_residual <= tol),
            ("|G| = 1", abs(self.norm_G - 1), tol, abs(self.norm_G - 1) <= tol),
            ("|G o Delta| <= 2 sin(alpha)", self.norm_G_offdiag, self.sin_bound, self.norm_G_offdiag <= self.sin_bound + tol),
        ]
        if self.tensor:
            r = self.tensor["overlap_residual"]
            out.append(("delta_P* Gamma delta_Q = 1", r, tol, r <= tol))
            r = abs(self.tensor["norm_gamma"] - 1)
            out.append(("|Gamma| = 1", r, tol, r <= tol))
            for j, nj in enumerate(self.tensor["norm_gamma_offdiag"]):
                r = abs(nj - self.norm_G_offdiag)
                out.append((f"|Gamma o Delta_{j + 1}| = |G o Delta|", r, tol, r <= tol))
        return out

    @property
    def ok(self) -> bool:
        return all(f[3] for f in self.facts())

    def to_dict(self) -> dict:
        return {
            "alpha": self.alpha,
            "norm_G": self.norm_G,
            "norm_G_offdiag": self.norm_G_offdiag,
            "two_sin_alpha": self.sin_bound,
            "n": self.n,
            "s_p": self.s_p,
            "s_q": self.s_q,
            "tau": None if self.s_p is None else tau(self.s_p, self.s_q),
            "adversary_value": self.adversary_value,
            "facts": [
                {"fact": name, "measured": float(m), "limit": float(lim), "holds": bool(ok)}
                for name, m, lim, ok in self.facts()
            ],
        }


def lower_bound_certificate(
    p: ProbDist,
    q: ProbDist,
    n: Optional[int] = None,
    s_p: Optional[float] = None,
    s_q: Optional[float] = None,
) -> LowerBoundCertificate:
    """Build ``G`` and check its norm facts; with ``n``, also check ``G^{(x)n}``.

    The reported ``adversary_value`` is the raw ratio
    ``(delta_P* Gamma delta_Q - tau |Gamma|) / max_j |Gamma o Delta_j|``
    (the hidden constant is not estimated).
    """
    if p.size != q.size:
        raise ValueError("alphabet sizes differ")
    if p == q:
        raise ValueError("p and q coincide; there is nothing to certify")
    G, alpha = rotation_certificate_matrix(p, q)
    mp, mq = mu_state(p), mu_state(q)
    cert = LowerBoundCertificate(
        G=G,
        alpha=alpha,
        norm_G=spectral_norm(G),
        norm_G_offdiag=spectral_norm(off_diagonal(G)),
        image_residual=float(np.linalg.norm(G @ mq - mp)),
        n=n,
        s_p=s_p,
        s_q=s_q,
    )
    if n is not None:
        if n < 1:
            raise ValueError("n must be positive")
        D = p.size**n
        if D > MAX_TENSOR_DIM:
            raise ValueError(f"|A|^n = {D} exceeds the explicit tensor limit {MAX_TENSOR_DIM}")
        Gamma = np.ones((1, 1))
        dP = np.ones(1)
        dQ = np.ones(1)
        for _ in range(n):
            Gamma = np.kron(Gamma, G)
            dP = np.kron(dP, mp)
            dQ = np.kron(dQ, mq)
        overlap = float(dP @ Gamma @ dQ)
        cert.tensor = {
            "overlap": overlap,
            "overlap_residual": abs(overlap - 1),
            "norm_gamma": spectral_norm(Gamma),
            "norm_gamma_offdiag": [spectral_norm(Gamma * coordinate_mask(p.size, n, j)) for j in range(n)],
        }
    if s_p is not None or s_q is not None:
        if s_p is None or s_q is None:
            raise ValueError("give both s_p and s_q")
        t = tau(s_p, s_q)
        if cert.tensor:
            num = cert.tensor["overlap"] - t * cert.tensor["norm_gamma"]
            den = max(cert.tensor["norm_gamma_offdiag"])
        else:
            num = 1 - t
            den = cert.norm_G_offdiag
        cert.adversary_value = num / den if den > 0 else math.inf
    return cert
