import math

import numpy as np
import pytest
from scipy.optimize import brentq

from qdist import discriminators as disc
from qdist import qcore
from qdist.adversary import build_witness, complexity_bound, optimal_weights
from qdist.distributions import ProbDist, bernoulli, collision, hellinger, make_rng, metrics, tiered
from qdist.oracles import GarbageSpec, encode_state, prepare_oracle

GARBAGE = [GarbageSpec("trivial", 1), GarbageSpec("haar_random", 2, 5), GarbageSpec("orthogonal_adversarial", 2)]


def instance(p, q, label, model="iv", garbage=None, completion_seed=None):
    dist = p if label == "P" else q
    return disc.DiscriminationInstance(p, q, prepare_oracle(model, dist, garbage, label, completion_seed))


# ---------------------------------------------------------------- model iii


def test_model3_never_mislabels_p():
    for pair in (collision(4), bernoulli(0.5, 0.8), tiered(2)):
        for seed in range(50):
            assert disc.discriminate_model3(instance(*pair, "P", "iii"), seed).decision == "P"


def test_model3_sixth_turn_is_exact():
    p, q = ProbDist([1.0, 0.0]), ProbDist([0.75, 0.25])
    assert metrics(p, q).angle == pytest.approx(math.pi / 6)
    res = disc.discriminate_model3(instance(p, q, "Q", "iii"), 0)
    assert res.auxiliary["rounds"] == 1
    assert res.auxiliary["flag_probability"] == pytest.approx(1.0, abs=1e-12)
    assert res.queries_used == 3


def test_model3_collision_half():
    res = disc.discriminate_model3(instance(*collision(4), "Q", "iii"), 0)
    assert res.auxiliary["rounds"] == 0
    assert res.auxiliary["flag_probability"] == pytest.approx(0.5, abs=1e-12)
    assert res.queries_used == 1


@pytest.mark.parametrize("pair", [collision(4), bernoulli(0.5, 0.8), bernoulli(0.5, 0.55), tiered(2)])
def test_model3_success_law_and_budget(pair):
    alpha = metrics(*pair).angle
    res = disc.discriminate_model3(instance(*pair, "Q", "iii"), 0)
    k = res.auxiliary["rounds"]
    assert k == max(0, round(math.pi / (4 * alpha) - 0.5 - 1e-12))
    assert res.auxiliary["flag_probability"] == pytest.approx(math.sin((2 * k + 1) * alpha) ** 2, abs=1e-9)
    assert res.auxiliary["flag_probability"] >= 0.5
    assert res.queries_used == 2 * k + 1 <= math.ceil(math.pi / (2 * alpha)) + 1


@pytest.mark.parametrize("pair", [collision(4), bernoulli(0.5, 0.8), tiered(2)])
def test_model3_exact_mode(pair):
    res = disc.discriminate_model3(instance(*pair, "Q", "iii"), 0, exact=True)
    assert res.auxiliary["flag_probability"] == pytest.approx(1.0, abs=1e-9)
    assert disc.discriminate_model3(instance(*pair, "P", "iii"), 0, exact=True).decision == "P"


def test_model3_rejects_wrong_model():
    with pytest.raises(ValueError):
        disc.discriminate_model3(instance(*collision(4), "P", "iv"))
    p = ProbDist([0.5, 0.5])
    with pytest.raises(ValueError):
        disc.discriminate_model3(disc.DiscriminationInstance(p, p, prepare_oracle("iii", p)))


# ---------------------------------------------------------------- model iv structure


def walk_setup(pair, label, garbage=GARBAGE[1], completion_seed=None, eps=0.5):
    p, q = pair
    inst = instance(p, q, label, "iv", garbage, completion_seed)
    data = disc.WalkData.from_pair(p, q)
    params = disc.AlgoParams(epsilon=eps)
    return inst, data, params


@pytest.mark.parametrize("pair", [collision(4), bernoulli(0.5, 0.8)])
@pytest.mark.parametrize("garbage", GARBAGE)
def test_positive_witness_is_fixed_point(pair, garbage):
    p, q = pair
    inst, data, params = walk_setup(pair, "P", garbage, completion_seed=3)
    O = inst.oracle.unitary
    g = garbage.vectors(p.size, "P")
    w = build_witness(p, q, g, garbage.vectors(q.size, "Q"))
    mu = disc.positive_witness_vector(w, O, encode_state(p, g), params.epsilon, data.objective)
    U = disc.walk_operator(data, p, inst.oracle, params)
    assert np.linalg.norm(U @ mu - mu) <= 1e-9
    Lam = qcore.projector_onto(disc.lambda_vectors(data, p, inst.oracle.layout, params.epsilon))
    assert np.linalg.norm(Lam @ mu - mu) <= 1e-9


@pytest.mark.parametrize("pair", [collision(4), bernoulli(0.5, 0.8)])
@pytest.mark.parametrize("garbage", GARBAGE)
def test_negative_witness(pair, garbage):
    p, q = pair
    inst, data, params = walk_setup(pair, "Q", garbage, completion_seed=4)
    O = inst.oracle.unitary
    gp, gq = garbage.vectors(p.size, "P"), garbage.vectors(q.size, "Q")
    w = build_witness(p, q, gp, gq)
    wy = disc.negative_witness_vector(w, O, encode_state(q, gq), params.epsilon, data.objective)
    T = disc.oracle_isometry(O)
    Pi_y = np.eye(T.shape[0]) - T @ T.conj().T
    zero_a = qcore.basis_state(T.shape[0], 0)
    assert np.linalg.norm(Pi_y @ wy - zero_a) <= 1e-9
    Lam = qcore.projector_onto(disc.lambda_vectors(data, p, inst.oracle.layout, params.epsilon))
    assert np.linalg.norm(Lam @ wy) <= 1e-9
    # the P-side positive vector for any garbage is orthogonal to it as well
    mu = disc.positive_witness_vector(w, prepare_oracle("iv", p, garbage, "P").unitary, encode_state(p, gp), params.epsilon, data.objective)
    assert abs(np.vdot(mu, wy)) <= 1e-9
    # effective spectral gap with Pi_A = Lambda, Pi_B = Pi_y
    for delta in (0.05, 0.2, 0.5):
        res = qcore.esgl_check(Lam, Pi_y, wy, delta)
        assert res.holds
    assert np.linalg.norm(wy) <= 3 * data.objective / params.epsilon


@pytest.mark.parametrize("pair", [collision(4), bernoulli(0.5, 0.8), tiered(1)])
def test_block_reflection_matches_normative(pair):
    p, q = pair
    for garbage in GARBAGE:
        layout = prepare_oracle("iv", p, garbage).layout
        data = disc.WalkData.from_pair(p, q)
        normative = qcore.reflect_about_span(disc.lambda_vectors(data, p, layout, 0.5))
        blocks = disc.lambda_reflection_blocks(data, p, layout, 0.5)
        assert np.max(np.abs(normative - blocks)) <= 1e-9


def test_oracle_reflection_is_reflection():
    O = prepare_oracle("iv", collision(4)[0], GARBAGE[1], completion_seed=1).unitary
    R = disc.oracle_reflection(O)
    assert np.allclose(R @ R, np.eye(R.shape[0]), atol=1e-12)
    assert np.allclose(R, R.conj().T, atol=1e-12)


# ---------------------------------------------------------------- model iv behaviour


@pytest.mark.parametrize("label", ["P", "Q"])
def test_model4_completion_invariance(label):
    pair = collision(4)
    base = [disc.discriminate_model4(instance(*pair, label, "iv", GARBAGE[1]), rng=s) for s in range(20)]
    for seed in range(20):
        other = disc.discriminate_model4(instance(*pair, label, "iv", GARBAGE[1], completion_seed=100 + seed), rng=seed)
        assert other.decision == base[seed].decision
        assert other.auxiliary["accept_votes"] == base[seed].auxiliary["accept_votes"]


@pytest.mark.parametrize("label", ["P", "Q"])
def test_model4_garbage_invariance(label):
    pair = bernoulli(0.5, 0.8)
    for seed in range(20):
        decisions = {
            disc.discriminate_model4(instance(*pair, label, "iv", g), rng=seed).decision for g in GARBAGE
        }
        assert len(decisions) == 1


@pytest.mark.parametrize("pair", [collision(4), bernoulli(0.5, 0.8), tiered(1)])
def test_model4_query_accounting(pair):
    inst = instance(*pair, "P", "iv", GARBAGE[0])
    res = disc.discriminate_model4(inst, rng=0)
    assert res.queries_used == inst.oracle.query_count == 2 * res.auxiliary["reflections"]
    assert res.queries_used == disc.model4_budget(res.auxiliary["objective"])


def test_model4_block_path_same_decisions():
    pair = collision(4)
    fast = disc.AlgoParams(block_reflection=True)
    for label in ("P", "Q"):
        for seed in range(10):
            a = disc.discriminate_model4(instance(*pair, label, "iv", GARBAGE[2]), rng=seed)
            b = disc.discriminate_model4(instance(*pair, label, "iv", GARBAGE[2]), fast, rng=seed)
            assert a.decision == b.decision


def test_model4_errors():
    pair = collision(4)
    with pytest.raises(ValueError):
        disc.discriminate_model4(instance(*pair, "P", "iii"))
    with pytest.raises(ValueError):
        disc.AlgoParams(epsilon=1.0)
    with pytest.raises(ValueError):
        disc.AlgoParams(rounds=4)


# ---------------------------------------------------------------- standard method


def test_standard_all_ones_rejected():
    p, q = collision(4)
    with pytest.raises(ValueError):
        disc.standard_method(instance(p, q, "P"), c=np.ones(4))


def test_standard_collision_indicator():
    p, q = collision(4)
    c = (q.probs == 0).astype(float)
    assert disc.flag_probabilities(p, q, c) == (0.5, 0.0)
    assert disc.standard_method_cost(p, q, c) == pytest.approx(math.sqrt(2), abs=1e-12)


@pytest.mark.parametrize("pair", [collision(4), bernoulli(0.5, 0.8), tiered(2)])
def test_standard_method_decisions_and_budget(pair):
    p, q = pair
    correct = 0
    for seed in range(40):
        label = "P" if seed % 2 == 0 else "Q"
        inst = instance(p, q, label, "iv", GARBAGE[1])
        res = disc.standard_method(inst, rng=seed)
        assert res.queries_used == inst.oracle.query_count == disc.standard_method_budget(p, q)
        correct += res.decision == label
    assert correct / 40 >= 2 / 3


def test_standard_cost_vs_witness_objective():
    # On weights in [0, 1] restricted to {p >= q}, c^2 <= c gives
    # cost >= sqrt(sum c^2 p) / S and cost >= (witness bound) / 2.
    rng = make_rng(0)
    for pair in (collision(4), collision(8), bernoulli(0.5, 0.8), bernoulli(0.3, 0.6), tiered(2)):
        p, q = pair
        support = p.probs >= q.probs
        for _ in range(50):
            c = rng.random(p.size) * support
            s_p, s_q = disc.flag_probabilities(p, q, c)
            if s_p - s_q < 1e-9:
                continue
            cost = disc.standard_method_cost(p, q, c)
            S = s_p - s_q
            assert cost >= math.sqrt(np.dot(c**2, p.probs)) / S - 1e-12
            assert cost >= complexity_bound(p, q, c) / 2 - 1e-12


def test_standard_cost_can_undercut_witness_bound():
    # a concrete case where the flag-rotation cost is below the witness bound at equal c
    p, q = ProbDist([0.6, 0.4]), ProbDist([0.5, 0.5])
    c = np.array([1.0, 0.0])
    assert disc.standard_method_cost(p, q, c) == pytest.approx(math.sqrt(0.6) / 0.1)
    assert complexity_bound(p, q, c) == pytest.approx((math.sqrt(0.6) + math.sqrt(0.5)) / 0.1)
    assert disc.standard_method_cost(p, q, c) < complexity_bound(p, q, c)


def test_standard_scales_with_inverse_distance():
    costs = []
    for th in (0.55, 0.6, 0.7, 0.8, 0.9):
        p, q = bernoulli(0.5, th)
        costs.append(disc.standard_method_cost(p, q, disc.indicator_weights(p, q)) * hellinger(p, q))
    assert max(costs) / min(costs) < 2


# ---------------------------------------------------------------- classical


def test_classical_disjoint_support():
    p, q = ProbDist([1.0, 0.0]), ProbDist([0.0, 1.0])
    assert disc.calibrate_sample_size(p, q) == 1
    out = disc.classical_discriminate(p, q, lambda n: np.zeros(n, dtype=int))
    assert out == {"decision": "P", "samples_used": 1, "llr": math.inf}


def test_classical_bernoulli_sample_size():
    n = disc.calibrate_sample_size(*bernoulli(0.5, 0.8))
    assert 5 <= n <= 100
    for m in range(n, 2 * n + 1):
        assert max(disc.classical_error_rates(*bernoulli(0.5, 0.8), m)) <= 1 / 3


def _theta_with_distance(d):
    return brentq(lambda t: hellinger(*bernoulli(0.5, t)) - d, 0.5 + 1e-9, 0.999)


def test_classical_halving_distance_quadruples_samples():
    d0 = hellinger(*bernoulli(0.5, 0.8))
    n_far = disc.calibrate_sample_size(*bernoulli(0.5, 0.8), target_error=0.1)
    n_near = disc.calibrate_sample_size(*bernoulli(0.5, _theta_with_distance(d0 / 2)), target_error=0.1)
    assert 3 <= n_near / n_far <= 5.5


def test_exact_and_monte_carlo_error_rates_agree():
    p, q = bernoulli(0.4, 0.6)
    exact = disc.classical_error_rates(p, q, 15, method="exact")
    mc = disc.classical_error_rates(p, q, 15, trials=50_000, method="monte_carlo")
    assert np.allclose(exact, mc, atol=0.01)


def test_classical_decisions_empirical():
    p, q = collision(4)
    n = disc.calibrate_sample_size(p, q)
    wrong = 0
    for seed in range(200):
        truth = p if seed % 2 == 0 else q
        out = disc.classical_discriminate(p, q, lambda k: make_rng(seed, 5).choice(4, size=k, p=truth.probs), n=n, rng=seed)
        wrong += out["decision"] != ("P" if seed % 2 == 0 else "Q")
    assert wrong / 200 <= 1 / 3 + 0.05


def test_classical_errors():
    p = ProbDist([0.5, 0.5])
    with pytest.raises(ValueError):
        disc.calibrate_sample_size(p, p)
    with pytest.raises(ValueError):
        disc.classical_discriminate(p, p, lambda n: np.zeros(n, dtype=int))


# ---------------------------------------------------------------- separation


def test_separation_two():
    r = disc.separation_bounds(2)
    assert r["n"] == 5 and r["alpha"] == pytest.approx(1 / 7)
    assert r["unconstrained"] == pytest.approx(math.sqrt(3.5), abs=1e-9)
    assert r["constrained"] == pytest.approx(1.97202659436653868, abs=1e-9)
    assert r["best_prefix"] == 5


def test_separation_one_coincides():
    r = disc.separation_bounds(1)
    assert r["unconstrained"] == pytest.approx(r["constrained"])


def test_separation_ratio_monotone():
    ratios = [disc.separation_bounds(t)["ratio"] for t in range(1, 7)]
    assert all(b >= a for a, b in zip(ratios, ratios[1:]))


@pytest.mark.parametrize("t", [0, 9])
def test_separation_range(t):
    with pytest.raises(ValueError):
        disc.separation_bounds(t)


def test_separation_matches_brute_force():
    # closed form vs explicit optimization over the direction of u
    from scipy.optimize import minimize

    from qdist.distributions import tiered_weights

    w = tiered_weights(3)
    alpha = disc.separation_bounds(3)["alpha"]
    obj = lambda u: np.linalg.norm(u) / (math.sqrt(alpha) * abs(np.dot(u, w)))
    best = minimize(obj, np.ones_like(w), method="BFGS").fun
    assert best == pytest.approx(disc.separation_bounds(3)["unconstrained"], rel=1e-6)


def test_witness_cost_alias():
    p, q = tiered(2)
    c = optimal_weights(p, q)
    assert disc.witness_cost(p, q, c) == complexity_bound(p, q, c)
