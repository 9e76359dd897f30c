"""Smoke tests for the gradrank python extension.

The module directory is injected through GRADRANK_MODULE_DIR by ctest; when
running pytest by hand, point it at the CMake build's bindings/ directory.
"""

import json
import os
import sys

import pytest

MODULE_DIR = os.environ.get("GRADRANK_MODULE_DIR")
if MODULE_DIR:
    sys.path.insert(0, MODULE_DIR)

gr = pytest.importorskip("gradrank")


def test_tokenize():
    assert gr.tokenize("Blood Diseases, transmitted!") == ["blood", "diseases", "transmitted"]
    assert gr.tokenize("a b c d", max_len=2) == ["a", "b"]
    with pytest.raises(gr.GradrankError):
        gr.tokenize("!!!")


def test_embeddings_and_interaction(tmp_path):
    emb_file = tmp_path / "emb.txt"
    emb_file.write_text("a 1.0 0.0 0.0\nb 0.0 1.0 0.0\nc 0.0 0.0 1.0\n")
    table = gr.load_embeddings(str(emb_file), seed=5)
    assert table.dim == 3
    assert len(table) == 3
    assert "a" in table and "zzz" not in table
    assert table.lookup("zzz") == table.lookup("zzz")

    m = gr.build_interaction_matrix(["a", "b"], ["a", "c"], table)
    assert m.rows == 2 and m.cols == 2
    assert m.to_lists() == [[1.0, 0.0], [0.0, 0.0]]
    assert gr.flatten_columns(m) == [1.0, 0.0]


def test_train_explain_snippet_stats(tmp_path):
    corpus = gr.generate_synthetic_corpus(12, 40, seed=3)
    model = gr.init_model(gr.RankerConfig(seed=3))
    assert model.parameter_count == 17697

    history = gr.train(model, corpus.dataset, corpus.embeddings, epochs=4)
    assert len(history) == 4
    accuracy = gr.pairwise_accuracy(model, corpus.dataset, corpus.embeddings)
    assert accuracy >= 0.9

    record = corpus.dataset.records[0]
    report = gr.explain(model, record.query, record.positive, corpus.embeddings)
    assert report.localization.rows == len(record.query)
    assert report.localization.cols == len(record.positive)
    assert all(v >= 0.0 for row in report.localization.to_lists() for v in row)
    assert len(report.contributions) == len(record.positive)
    assert report.total >= 0.0

    parsed = json.loads(report.to_json())
    assert parsed["schema_version"] == 1
    assert parsed["query"] == list(record.query)

    span = gr.vanilla_snippet(record.query, record.positive, window=5)
    assert span.end - span.start <= 5
    zero = [0.0] * len(record.positive)
    same = gr.gradcam_snippet(record.query, record.positive, zero, window=5)
    assert (same.start, same.end) == (span.start, span.end)

    analysis = gr.corpus_analysis(model, corpus.dataset, corpus.embeddings)
    assert len(analysis.rows) == 12 * 5
    assert analysis.total_test.measure == "total"
    json.loads(analysis.to_json())


def test_model_round_trip(tmp_path):
    corpus = gr.generate_synthetic_corpus(4, 30, seed=9)
    model = gr.init_model(gr.RankerConfig(seed=11))
    path = tmp_path / "model.grnk"
    gr.save_model(model, str(path))
    loaded = gr.load_model(str(path))

    record = corpus.dataset.records[0]
    m = gr.build_interaction_matrix(record.query, record.positive, corpus.embeddings)
    assert gr.score(model, m) == gr.score(loaded, m)

    with pytest.raises(gr.GradrankError):
        gr.load_model(str(tmp_path / "missing.grnk"))


def test_stats_functions():
    assert gr.kurtosis_values([-1.0, 1.0, -1.0, 1.0]) == pytest.approx(1.0)
    with pytest.raises(gr.GradrankError):
        gr.kurtosis(gr.Matrix([[1.0, 1.0], [1.0, 1.0]]))

    result = gr.mann_whitney_u([3.0, 4.0], [1.0, 2.0])
    assert result.u_a == 4.0
    assert result.direction == "positive"
    assert result.p_value < 0.5

    up = gr.bilinear_upsample(gr.Matrix([[5.0]]), 3, 3)
    assert up.to_lists() == [[5.0] * 3] * 3


def test_term_extraction():
    doc = ["infection", "x", "infection"]
    assert gr.effective_terms([0.2, 0.0, 0.9], doc, k=2) == [2, 1]
    assert gr.filtered_terms([1.0, 0.0, 0.0, 0.0], [1.0, 1.0, 0.0, 0.0],
                             ["a", "b", "c", "d"], q_sim=75.0, q_contrib=50.0) == [1]
