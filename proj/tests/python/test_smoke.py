import json
import math
from fractions import Fraction

import numpy as np
import pytest

import thetaforge as tf


def test_rank_one_closed_forms():
    for u in (-1.3, -0.2, 0.4, 2.0):
        e = tf.eval_E(np.eye(1), np.array([u]))
        m = tf.eval_M(np.eye(1), np.array([u]))
        assert abs(e.value - math.erf(math.sqrt(math.pi) * u)) < 1e-12
        sign = 1.0 if u > 0 else -1.0
        assert abs(m.value + sign * math.erfc(math.sqrt(math.pi) * abs(u))) < 1e-12


def test_identity_frame_factorizes():
    u = np.array([0.3, -0.45])
    e2 = tf.eval_E(np.eye(2), u).value
    ref = math.erf(math.sqrt(math.pi) * 0.3) * math.erf(math.sqrt(math.pi) * -0.45)
    assert abs(e2 - ref) < 1e-12


def test_wall_and_validation_errors():
    with pytest.raises(tf.WallTooClose):
        tf.eval_M(np.eye(2), np.array([0.0, 1.0]))
    with pytest.raises(tf.Error):
        tf.eval_M(np.eye(2), np.array([0.1, 0.2, 0.3]))
    assert issubclass(tf.ValidationError, ValueError)


def test_monte_carlo_is_deterministic():
    frame = np.array([[1.0, 0.3], [-0.2, 1.0]])
    u = np.array([0.2, 0.1])
    a = tf.eval_E_oracle_mc(frame, u, 20000, seed=3)
    b = tf.eval_E_oracle_mc(frame, u, 20000, seed=3)
    assert a.value == b.value
    assert abs(a.value - tf.eval_E(frame, u).value) < 5 * a.est_error


def test_cone_pairs():
    r = tf.check_cone_pair([[1, 0], [0, -1]], [[1, 0]], [[2, 1]])
    assert r["pass"]
    assert r["delta"] == Fraction(-1)
    assert r["q_minus_inertia"] == (0, 2, 0)
    bad = tf.check_cone_pair([[1, 0], [0, -1]], [[1, 0]], [[1, 0]])
    assert not bad["pass"] and bad["first_failed"] == "delta_sign"
    with pytest.raises(tf.NonExactInput):
        tf.check_cone_pair([[1, 0], [0, -1]], [[0.5, 0]], [[2, 1]])
    assert tf.a4_example_passes()


def test_theta_and_q_expansion():
    form, c, cp = [[3, 0], [0, -3]], [[1, 0]], [[2, 1]]
    phase, terms = tf.q_expansion(form, c, cp, ["1/3", 0], [1, 1], terms=5)
    assert phase == 1
    assert len(terms) == 5
    assert terms[0][:2] == (Fraction(1, 3), Fraction(-1))
    assert all(coeff.denominator == 1 for _, coeff, wall in terms if not wall)
    v = tf.theta(form, c, cp, ["1/3", 0], [1, 1], tol=1e-12)
    series = sum(float(k) * math.exp(-2 * math.pi * float(e)) for e, k, _ in
                 tf.q_expansion(form, c, cp, ["1/3", 0], [1, 1], terms=30)[1])
    assert abs(v["value"] - (-series)) < 1e-10
    with pytest.raises(tf.BudgetExceeded):
        tf.theta(form, c, cp, ["1/3", 0], [1, 1], tol=1e-14, max_points=3)


def test_sign_lemma():
    assert tf.sign_lemma_sum([[2, 1], [1, 2]], [1, -1]) == 0
    with pytest.raises(tf.GenericityViolated):
        tf.sign_lemma_sum([[1, 0], [0, 1]], [0, 1])


def test_cli_in_process():
    code, out, _ = tf.run_cli(["cones", "--builtin", "a4"])
    assert code == 0
    doc = json.loads(out)
    assert doc["pass"] and doc["top"]["q_minus_inertia"] == {"positive": 0, "negative": 8, "zero": 0}
    code, _, _ = tf.run_cli(["errfn", "--frame", "I2", "--u", "0,1", "--kind", "M"])
    assert code == 2
