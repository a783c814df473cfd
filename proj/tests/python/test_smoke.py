import math

import numpy as np
import pytest

import coursemi


def small_synth():
    c = coursemi.SynthConfig()
    c.n_courses = 30
    c.n_students = 30
    c.n_teachers = 6
    c.n_subjects = 3
    c.d = 4
    c.p_in = 0.4
    return c


def test_version():
    assert coursemi.__version__ == "0.1.0"


def test_normalize_pair_graph():
    h = coursemi.normalize(np.array([[0.0, 1.0], [1.0, 0.0]]))
    assert np.allclose(h, 0.5)
    assert np.array_equal(coursemi.normalize(np.zeros((3, 3))), np.eye(3))


def test_generate_and_project():
    d = coursemi.generate(small_synth())
    g = d["graph"]
    assert g.num_courses == 30
    assert g.count("student") == 30
    assert d["features"].shape == (30, 4)
    a = coursemi.project(g, "MP2")
    assert a.shape == (30, 30)
    assert np.array_equal(a, a.T)
    assert np.all(np.diag(a) == 0)


def test_train_and_evaluate():
    d = coursemi.generate(small_synth())
    cfg = coursemi.Config()
    cfg.set("epochs", "5")
    cfg.set("embed_dim", "4")
    out = coursemi.train(d["graph"], d["features"], ["MP1", "MP2", "MP3"], cfg)
    assert out["unified"].shape == (30, 4)
    assert set(out["views"]) == {"MP1", "MP2", "MP3"}
    assert math.isclose(sum(out["alpha"]), 1.0)
    assert len(out["losses"]) == 5
    acc, f1 = coursemi.evaluate(out["unified"], d["labels"], cfg)
    assert 0.0 <= acc <= 1.0
    assert 0.0 <= f1 <= 1.0


def test_metrics():
    assert coursemi.accuracy([0, 1, 1], [0, 1, 0]) == pytest.approx(2 / 3)
    assert coursemi.macro_f1([0, 1], [0, 1], 2) == 1.0


def test_errors_map_to_python():
    cfg = coursemi.Config()
    with pytest.raises(ValueError):
        cfg.set("no_such_key", "1")
    with pytest.raises(OSError):
        coursemi.load_hin("/nonexistent/nodes.tsv", "/nonexistent/edges.tsv")


def test_files_round_trip(tmp_path):
    c = small_synth()
    coursemi.write_synth(c, str(tmp_path))
    g = coursemi.load_hin(str(tmp_path / "nodes.tsv"), str(tmp_path / "edges.tsv"))
    x = coursemi.load_features(str(tmp_path / "features.tsv"), g)
    assert np.array_equal(x, coursemi.generate(c)["features"])
    assert len(coursemi.load_labels(str(tmp_path / "labels.tsv"), g)) == 30
