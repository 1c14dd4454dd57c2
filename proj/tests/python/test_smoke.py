import math

import pytest

import anisograd


def test_project_clips_coordinatewise():
    out = anisograd.project(
        lower=[-1.0, -1.0], upper=[1.0, 1.0], metric=[3.0, 0.5], w=[2.0, 0.25]
    )
    assert out == [1.0, 0.25]


def test_project_metric_independent():
    a = anisograd.project([-1.0], [1.0], [1.0], [5.0])
    b = anisograd.project([-1.0], [1.0], [123.0], [5.0])
    assert a == b == [1.0]


def test_weighted_norm():
    assert anisograd.weighted_norm([3.0, 4.0], [1.0, 1.0]) == pytest.approx(5.0)


def test_box_diameters_hypercube():
    d_inf, d_2 = anisograd.box_diameters([-1.0] * 4, [1.0] * 4)
    assert d_inf == pytest.approx(2.0)
    assert d_2 == pytest.approx(4.0)  # 2 * sqrt(d)


def test_step_size_kinds():
    assert anisograd.step_size("constant", 0.5, 7) == 0.5
    assert anisograd.step_size("inverse_sqrt", 1.0, 3) == pytest.approx(0.5)
    mid = anisograd.step_size("cosine", 1.0, 50, horizon=100)
    assert mid == pytest.approx(0.5)


def test_dataset_stats_synth():
    st = anisograd.dataset_stats("synth:census:n=400,seed=11")
    assert st["n"] == 400
    assert st["dim"] == 123
    assert st["lambda_max"] > 0
    assert st["L_norm1_diag"] > st["L_norminf_diag"] > 0


def test_logistic_loss_at_zero_is_ln2():
    st = anisograd.dataset_stats("synth:census:n=200,seed=5")
    f, g = anisograd.logistic_loss_grad("synth:census:n=200,seed=5", [0.0] * st["dim"])
    assert f == pytest.approx(math.log(2.0))
    assert len(g) == st["dim"]


def test_run_one_decreases_loss():
    spec = "synth:census:n=300,seed=9"
    out = anisograd.run_one(spec, "adagrad", "constant", 0.5, batch=8, steps=200, seed=1)
    assert not out["diverged"]
    first = out["records"][0][1]
    assert out["final_loss"] < first


def test_run_one_deterministic():
    spec = "synth:census:n=300,seed=9"
    a = anisograd.run_one(spec, "sgd", "inverse_sqrt", 0.1, batch=4, steps=100, seed=3)
    b = anisograd.run_one(spec, "sgd", "inverse_sqrt", 0.1, batch=4, steps=100, seed=3)
    assert a["final_w"] == b["final_w"]


def test_bound_plugin_example():
    r = anisograd.bound(
        "adagrad_convex",
        {"L_norm1": 1.0, "D_inf": 1.0, "sigma_norm1": 0.0, "M": 1, "T": 1},
    )
    assert r["total"] == pytest.approx(4.0)
    assert r["certified"] is True


def test_bound_missing_field_raises():
    with pytest.raises(ValueError, match="L_norm1"):
        anisograd.bound("adagrad_convex", {"D_inf": 1.0, "M": 1, "T": 1})


def test_ratios():
    r = anisograd.ratios(
        {
            "D_inf": 1.0,
            "D_2": 2.0,
            "sigma_norm1": 2.0,
            "sigma_norm2": 1.0,
            "L_norm1": 4.0,
            "L_norminf": 1.0,
        }
    )
    assert r["C_var"] == pytest.approx(0.5)
    assert r["R1"] == pytest.approx(1.0)
    assert r["R2"] == pytest.approx(1.0)


def test_theory_step_size_thm1():
    s = anisograd.theory_step_size("thm1", {"D_inf": 9.79})
    assert s["kind"] == "constant"
    assert s["base"] == pytest.approx(9.79)
