import pathlib

import numpy as np
import pytest

import misbelief as mb

FIXTURES = pathlib.Path(__file__).resolve().parents[2] / "fixtures"


def two_groups(delta=1.0):
    return mb.Scenario(
        memberships=np.array([[1], [-1]], dtype=np.int32),
        calibers=np.zeros(2),
        discrimination=np.zeros(1),
        v_q=np.ones(2),
        v_eta=np.ones(1),
        agent=0,
        a_tilde=delta,
    )


def test_society_biases():
    report = mb.biases_closed_form(two_groups())
    assert report.theta_bias == pytest.approx([-0.5])
    assert report.caliber_bias == pytest.approx([1.0, -0.5])
    assert report.classifications == ["in-group-favoritism", "out-group-derogation"]
    via = mb.biases_via_theorem(two_groups())
    assert np.allclose(via.sigma_bias, report.sigma_bias, atol=1e-12)


def test_zero_overconfidence_is_unbiased():
    report = mb.biases_closed_form(two_groups(0.0))
    assert not report.caliber_bias.any()
    assert not report.theta_bias.any()


def test_corollary_checks_report_every_check():
    checks = mb.corollary_checks(two_groups())
    names = {c["name"] for c in checks}
    assert "outsider_group_unifies_incumbents" in names
    assert all(c["passed"] for c in checks if c["applicable"])


def test_cases_agree_with_oracle():
    rng = np.random.default_rng(3)
    design = rng.normal(size=(4, 3))
    chol = np.tril(rng.normal(scale=0.3, size=(4, 4)), -1) + np.diag(rng.uniform(0.5, 1.5, 4))
    model = mb.LinearGaussianModel(design, chol @ chol.T)
    f = rng.normal(size=3)
    for constraint in (
        mb.DogmaticConstraint.case1(1, f[1] + 1.0, model.sigma),
        mb.DogmaticConstraint.case2(f + 0.5),
        mb.DogmaticConstraint.case3(1, f[1] + 1.0),
    ):
        closed = mb.solve_limit(model, f, constraint)
        oracle, objective, grad = mb.numeric_oracle(model, f, constraint)
        assert np.allclose(closed.f_tilde, oracle.f_tilde, atol=1e-5)
        assert np.allclose(closed.sigma_tilde, oracle.sigma_tilde, atol=1e-5)
        assert objective == pytest.approx(mb.kl_at(model, f, closed), abs=1e-9)


def test_kl_hand_value():
    unit = mb.LinearGaussianModel(np.ones((1, 1)), np.ones((1, 1)))
    assert mb.kl_divergence(np.zeros(1), unit, np.ones(1), unit) == pytest.approx(0.5)


def test_sampling_is_deterministic():
    model = mb.LinearGaussianModel(np.eye(2), np.eye(2))
    a = mb.sample_signals(model, np.array([1.0, -1.0]), 1000, 7)
    b = mb.sample_signals(model, np.array([1.0, -1.0]), 1000, 7)
    assert a.shape == (1000, 2)
    assert np.array_equal(a, b)


def test_worked_examples():
    assert mb.example1_biases(1.0, 1.0) == pytest.approx((-1 / 7, -1 / 7, -2 / 7))
    assert mb.example2_biases(1.0, 1.0, 1.0) == pytest.approx((0.5, -1.0, -0.5))
    theta, caliber = mb.contact_biases(np.array([1, -1], dtype=np.int32), 1.0, 1.0, 1.0, 0, 1.0)
    assert theta == pytest.approx(-0.4)
    assert caliber[1] == pytest.approx(-0.2)
    bias, sigma_bias, tags = mb.correlated_biases(np.array([[1.0, 0.5], [0.5, 1.0]]), np.zeros(2), 0, 1.0)
    assert bias == pytest.approx([1.0, 0.5])
    assert tags[1] == "in-group"


def test_errors_carry_their_kind():
    with pytest.raises(mb.MisbeliefError, match="InvalidModel"):
        mb.LinearGaussianModel(np.eye(2), np.array([[1.0, 2.0], [2.0, 1.0]]))
    with pytest.raises(mb.MisbeliefError, match="InvalidScenario"):
        mb.Scenario(np.array([[2]], dtype=np.int32), np.zeros(1), np.zeros(1), np.ones(1), np.ones(1), 0, 1.0)
    with pytest.raises(ValueError):
        mb.load_scenario(str(FIXTURES / "corrupted" / "bad_syntax.json"))


def test_load_fixture():
    doc = mb.load_scenario(str(FIXTURES / "two_groups.json"))
    assert doc["kind"] == "society"
    assert doc["scenario"].agent == 0
    assert len(doc["digest"]) == 16


def test_convergence_trace():
    model = mb.LinearGaussianModel(np.array([[1.0, 0.0], [0.0, 1.0], [1.0, 1.0]]), np.eye(3))
    points, limit = mb.convergence_trace(
        model, np.zeros(2), mb.DogmaticConstraint.case3(0, 1.0), 10000, [100, 10000], 3
    )
    assert [p[0] for p in points] == [100, 10000]
    assert points[-1][1] < points[0][1]
    assert limit.f_tilde[0] == 1.0


def test_verify_suite():
    results = mb.run_suite("examples", trials=5)
    assert results and all(r["passed"] for r in results)
    with pytest.raises(mb.MisbeliefError, match="UnknownParameter"):
        mb.run_suite("nope")
