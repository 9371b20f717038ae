import json
import math

import pytest

import semsnet

TINY = """
[data]
window_len = 20
num_segments = 5
[split]
trials = 2
[train]
epochs = 2
[lstm]
hidden_sizes = 6
[synth]
children = 10
frames = 200
"""


@pytest.fixture(scope="module")
def cohort(tmp_path_factory):
    out = tmp_path_factory.mktemp("cohort")
    manifest = semsnet.generate(out, config=TINY, seed=5)
    assert manifest.name == "manifest.csv"
    return out


def test_default_config_parses_back():
    text = semsnet.default_config()
    assert "[train]" in text
    assert semsnet.generate.__doc__


def test_train_then_predict(cohort):
    fitted = semsnet.train(cohort, config=TINY, seed=5)
    bundle = json.loads(fitted["bundle"])
    assert bundle["format"] == "semsnet-bundle"
    assert set(fitted["train_ids"]).isdisjoint(fitted["val_ids"])

    p = semsnet.predict(fitted["bundle"], cohort / "sessions" / "child_003.csv", age=8.0, gender="m")
    assert p["child_id"] == "child_003"
    assert len(p["per_window_scores"]) == 5
    assert 0.0 <= p["final_score"] <= 12.0


def test_train_is_deterministic(cohort):
    a = semsnet.train(cohort, config=TINY, seed=9)["bundle"]
    b = semsnet.train(cohort, config=TINY, seed=9)["bundle"]
    assert a == b


def test_crossval_reports(cohort):
    r = semsnet.crossval(cohort, config=TINY, seed=5, jobs=2)
    assert r["cv_report"].splitlines()[0] == "trial,level,rmse,accuracy,f1,sensitivity,specificity"
    assert [a["level"] for a in r["aggregate"]] == ["window", "child"]
    assert all(math.isfinite(a["rmse_mean"]) for a in r["aggregate"])


def test_importance_is_a_distribution(cohort):
    imp = semsnet.importance(cohort, config=TINY, seed=5)
    assert len(imp) == 10
    assert sum(imp.values()) == pytest.approx(1.0, abs=1e-9)


def test_metrics():
    assert semsnet.rmse([1.0, 2.0], [1.0, 4.0]) == pytest.approx(math.sqrt(2.0))
    c = semsnet.classify([8.0, 2.0, 7.5, 1.0], [9.0, 8.0, 1.0, 1.0])
    assert (c["tp"], c["fn"], c["fp"], c["tn"]) == (1, 1, 1, 1)
    assert c["accuracy"] == pytest.approx(0.5)
    assert semsnet.classify([1.0], [1.0])["sensitivity"] is None


def test_errors_map_to_python_exceptions(tmp_path):
    with pytest.raises(semsnet.ConfigError, match="children"):
        semsnet.generate(tmp_path, config="[synth]\nchildren = -1\n")
    with pytest.raises(semsnet.DataError):
        semsnet.train(tmp_path)
    with pytest.raises(ValueError):
        semsnet.rmse([1.0], [1.0, 2.0])
