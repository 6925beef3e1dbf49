import math
import os
import tempfile

import pytest

import phishguard as pg


def test_schema_shape():
    names = pg.schema()
    assert len(names) == 48
    assert len(set(names)) == 48
    assert names[0] == "NumDots"
    assert pg.schema_fingerprint() == pg.schema_fingerprint()


def test_extract_url_features():
    values = pg.extract_features("http://192.0.2.7/login")
    assert values["IpAddress"] == 1
    assert values["NoHttps"] == 1
    assert values["PathLevel"] == 1
    assert values["UrlLengthRT"] == 1


def test_extract_with_html():
    values = pg.extract_features(
        "http://example.com/", html="<html><body><p>x</p></body></html>"
    )
    assert values["MissingTitle"] == 1


def test_extract_rejects_bad_url():
    with pytest.raises(pg.ParseError):
        pg.extract_features("http://")


def test_metrics_reference_counts():
    m = pg.metrics(tp=1480, fp=9, fn=3, tn=1508)
    assert math.isclose(m["accuracy"], 0.9960, abs_tol=1e-4)
    assert math.isclose(m["precision"], 0.99396, abs_tol=1e-4)
    assert math.isclose(m["recall"], 0.99798, abs_tol=1e-4)
    assert math.isclose(m["f1"], 0.99596, abs_tol=1e-4)
    assert not m["degenerate"]


def test_train_predict_save_load_roundtrip():
    with tempfile.TemporaryDirectory() as tmp:
        csv_path = os.path.join(tmp, "data.csv")
        pg.synthesize_csv(csv_path, rows=400, seed=7)
        model, accuracy = pg.train_on_csv("logistic_regression", csv_path, seed=7)
        assert model.kind == "logistic_regression"
        assert 0.5 < accuracy <= 1.0

        row = [0.0] * 48
        p = model.predict_proba(row)
        assert 0.0 <= p <= 1.0
        assert model.predict(row) == (1 if p >= 0.5 else 0)

        model_path = os.path.join(tmp, "model.phfg")
        model.save(model_path)
        loaded = pg.load_model(model_path)
        assert loaded.predict_proba(row) == p
        assert 0.0 <= loaded.score_url("http://example.com/") <= 1.0


def test_schema_mismatch_raises():
    rows = [[float(i % 3)] * 48 for i in range(20)]
    labels = [i % 2 for i in range(20)]
    model = pg.train("naive_bayes", rows, labels, seed=1)
    with pytest.raises(pg.SchemaError):
        model.predict_proba([1.0, 2.0])
