import math

import numpy as np
import pytest

import slimrnn.harness as harness
from slimrnn.cells import VariantSpec, param_count
from slimrnn.data import Split
from slimrnn.harness import (
    METRICS_HEADER,
    ConfigError,
    EpochMetrics,
    TrainConfig,
    best_of,
    evaluate,
    run_grid,
    train,
)

from .conftest import synth_dataset
from .test_cells import zeroed_params


def small_config(**overrides):
    base = dict(
        variant="lstm6",
        activation="tanh",
        eta=1e-3,
        epochs=2,
        batch_size=8,
        n_h=6,
        seed=0,
        metrics_path=None,
    )
    base.update(overrides)
    return TrainConfig(**base)


def test_config_validation():
    with pytest.raises(ConfigError):
        small_config(eta=0.0).validate()
    with pytest.raises(ConfigError):
        small_config(epochs=0).validate()
    with pytest.raises(ConfigError):
        small_config(variant="gru").validate()
    with pytest.raises(ConfigError):
        small_config(train_limit=0).validate()


def test_evaluate_zero_logits_tie_breaks_to_class_zero():
    spec, cell, head = zeroed_params("lstm6", "tanh", 4, 3, 10)
    labels = np.array([0, 0, 1, 2, 0], dtype=np.int64)
    split = Split(sequences=np.zeros((5, 2, 4)), labels=labels)
    assert evaluate(spec, cell, head, split) == pytest.approx(3 / 5)


def test_evaluate_singleton_correct():
    spec, cell, head = zeroed_params("lstm6", "tanh", 4, 3, 10)
    split = Split(sequences=np.zeros((1, 2, 4)), labels=np.array([0], dtype=np.int64))
    assert evaluate(spec, cell, head, split) == 1.0


def test_evaluate_constructed_two_of_three():
    # zero cell state makes logits equal b_y; argmax points at class 1
    spec, cell, head = zeroed_params("srn", "tanh", 4, 3, 3)
    head.b_y[:] = [0.0, 1.0, 0.5]
    labels = np.array([1, 1, 2], dtype=np.int64)
    split = Split(sequences=np.zeros((3, 2, 4)), labels=labels)
    assert evaluate(spec, cell, head, split) == pytest.approx(2 / 3)


def test_evaluate_rejects_empty_split():
    spec, cell, head = zeroed_params("lstm6", "tanh", 4, 3, 10)
    split = Split(sequences=np.zeros((0, 2, 4)), labels=np.zeros(0, dtype=np.int64))
    with pytest.raises(ValueError):
        evaluate(spec, cell, head, split)


def row(epoch, train_acc, test_acc):
    return EpochMetrics(epoch, train_acc, test_acc, 0.5, 1.0)


def test_best_of_singleton():
    best = best_of([row(1, 0.4, 0.3)])
    assert (best.best_train, best.best_test, best.best_test_epoch) == (0.4, 0.3, 1)


def test_best_of_independent_maxima():
    rows = [row(1, 0.9, 0.5), row(2, 0.2, 0.9), row(3, 0.3, 0.7)]
    best = best_of(rows)
    assert best.best_train == 0.9
    assert best.best_test == 0.9
    assert best.best_test_epoch == 2


def test_best_of_tie_prefers_earliest_epoch():
    best = best_of([row(1, 0.1, 0.8), row(2, 0.1, 0.8)])
    assert best.best_test_epoch == 1


def test_best_of_rejects_empty():
    with pytest.raises(ValueError):
        best_of([])


def test_train_smoke(tmp_path):
    out = tmp_path / "metrics.csv"
    metrics = train(small_config(metrics_path=out), dataset=synth_dataset(24, 8))
    assert len(metrics) == 2
    for m in metrics:
        assert 0.0 <= m.train_accuracy <= 1.0
        assert 0.0 <= m.test_accuracy <= 1.0
        assert math.isfinite(m.mean_train_loss) and m.mean_train_loss >= 0.0
        assert m.epoch_seconds > 0.0
    assert [m.epoch for m in metrics] == [1, 2]
    lines = out.read_text().strip().splitlines()
    assert lines[0] == METRICS_HEADER
    assert len(lines) == 3


def test_train_learns_synthetic_stripes():
    config = small_config(variant="lstm6", eta=2e-3, epochs=8, n_h=24, batch_size=16)
    metrics = train(config, dataset=synth_dataset(192, 48))
    assert best_of(metrics).best_test >= 0.6
    assert metrics[-1].mean_train_loss < metrics[0].mean_train_loss


def test_train_is_deterministic():
    ds = synth_dataset(24, 8)
    a = train(small_config(), dataset=ds)
    b = train(small_config(), dataset=ds)
    for ra, rb in zip(a, b):
        assert ra.train_accuracy == rb.train_accuracy
        assert ra.test_accuracy == rb.test_accuracy
        assert ra.mean_train_loss == rb.mean_train_loss


def test_train_seed_changes_trajectory():
    ds = synth_dataset(24, 8)
    a = train(small_config(epochs=1), dataset=ds)
    b = train(small_config(epochs=1, seed=1), dataset=ds)
    assert a[0].mean_train_loss != b[0].mean_train_loss


def test_train_survives_divergence(tmp_path):
    # an absurd learning rate with relu drives the loss non-finite; training
    # must keep recording rows rather than abort
    out = tmp_path / "metrics.csv"
    config = small_config(variant="srn", activation="relu", eta=1e308, epochs=3, metrics_path=out)
    with np.errstate(all="ignore"):
        metrics = train(config, dataset=synth_dataset(24, 8))
    assert len(metrics) == 3
    assert any(not math.isfinite(m.mean_train_loss) for m in metrics)
    assert len(out.read_text().strip().splitlines()) == 4


def test_run_grid_structure(tmp_path):
    ds = synth_dataset(16, 8)
    summary = run_grid(
        ["lstm6", "lstm4a"],
        ["tanh"],
        [1e-3],
        small_config(epochs=1),
        tmp_path,
        dataset=ds,
    )
    lines = summary.read_text().strip().splitlines()
    assert lines[0] == harness.SUMMARY_HEADER
    assert len(lines) == 3
    assert (tmp_path / "lstm6_tanh_eta0.001.csv").exists()
    assert (tmp_path / "lstm4a_tanh_eta0.001.csv").exists()
    first = lines[1].split(",")
    assert first[0] == "lstm6"
    expected = param_count(VariantSpec.make("lstm6", "tanh"), 28, 6, 10)
    assert first[5] == str(expected)


def test_run_grid_single_cell_matches_train(tmp_path):
    ds = synth_dataset(16, 8)
    config = small_config(epochs=2)
    summary = run_grid(["lstm6"], ["tanh"], [1e-3], config, tmp_path, dataset=ds)
    direct = best_of(train(config, dataset=ds))
    cells = summary.read_text().strip().splitlines()[1].split(",")
    assert float(cells[3]) == direct.best_train
    assert float(cells[4]) == direct.best_test


def test_run_grid_records_failures_and_continues(tmp_path, monkeypatch):
    ds = synth_dataset(16, 8)
    real_train = harness.train

    def flaky(config, dataset=None, verbose=False):
        if config.variant == "lstm4a":
            raise RuntimeError("boom")
        return real_train(config, dataset=dataset, verbose=verbose)

    monkeypatch.setattr(harness, "train", flaky)
    summary = run_grid(
        ["lstm6", "lstm4a"], ["tanh"], [1e-3], small_config(epochs=1), tmp_path, dataset=ds
    )
    lines = summary.read_text().strip().splitlines()
    assert len(lines) == 3
    good = lines[1].split(",")
    bad = lines[2].split(",")
    assert good[0] == "lstm6" and float(good[4]) >= 0.0
    assert bad[0] == "lstm4a" and math.isnan(float(bad[4]))


def test_run_grid_rejects_empty_axes(tmp_path):
    with pytest.raises(ConfigError):
        run_grid([], ["tanh"], [1e-3], small_config(), tmp_path, dataset=synth_dataset(8, 8))


def test_run_grid_full_grid_completes(tmp_path):
    # the whole 6 x 3 x 3 protocol grid, shrunk to stay fast: 54 cells in,
    # 54 summary rows out, one metrics file per cell
    ds = synth_dataset(16, 8)
    variants = ["lstm", "lstm4", "lstm5", "lstm4a", "lstm5a", "lstm6"]
    etas = [1e-4, 1e-3, 2e-3]
    summary = run_grid(
        variants,
        ["tanh", "sigmoid", "relu"],
        etas,
        small_config(epochs=1, n_h=3, batch_size=16),
        tmp_path,
        dataset=ds,
    )
    lines = summary.read_text().strip().splitlines()
    assert len(lines) == 1 + 54
    assert len(list(tmp_path.glob("*_eta*.csv"))) == 54


def test_metrics_stream_survives_a_crash(tmp_path, monkeypatch):
    # rows must hit the file as epochs finish, not on successful completion
    out = tmp_path / "metrics.csv"
    calls = {"n": 0}
    real_evaluate = harness.evaluate

    def dying_evaluate(*args, **kwargs):
        calls["n"] += 1
        if calls["n"] > 2:  # die during epoch 2's evaluation
            raise KeyboardInterrupt
        return real_evaluate(*args, **kwargs)

    monkeypatch.setattr(harness, "evaluate", dying_evaluate)
    with pytest.raises(KeyboardInterrupt):
        train(small_config(epochs=5, metrics_path=out), dataset=synth_dataset(16, 8))
    lines = out.read_text().strip().splitlines()
    assert lines[0] == METRICS_HEADER
    assert len(lines) == 2  # header plus the completed first epoch
