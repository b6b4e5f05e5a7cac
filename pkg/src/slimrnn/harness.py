"""Training loop, per-epoch evaluation, metrics files, and the experiment grid.

One epoch is: reshuffle, walk the batches applying one RMSprop step per
batch, then run a full evaluation pass over the train and test splits.
The recorded epoch time covers the optimization walk only, not the
evaluation passes. Metrics rows are appended to the CSV and flushed as
soon as each epoch finishes, so a killed run keeps everything it
completed. A non-finite loss is recorded like any other value and
training simply continues; divergence is data, not an error.
"""

from __future__ import annotations

import math
import sys
import time
from dataclasses import dataclass, replace
from pathlib import Path
from typing import IO, Iterable

import numpy as np

from .bptt import batch_loss_and_grads, forward_sequence
from .cells import Activation, CellParams, OutputHead, Variant, VariantSpec, init_params, param_count
from .data import NUM_CLASSES, Dataset, Split, batches, load_dataset
from .optim import DEFAULT_EPS, DEFAULT_RHO, init_rms_state, rmsprop_step

METRICS_HEADER = "epoch,train_acc,test_acc,train_loss,epoch_seconds"
SUMMARY_HEADER = "variant,activation,eta,best_train,best_test,params,best_test_epoch"

DEFAULT_ETAS = (1e-4, 1e-3, 2e-3)


class ConfigError(ValueError):
    """Invalid training configuration."""


@dataclass
class TrainConfig:
    variant: Variant | str
    activation: Activation | str
    eta: float = 1e-3
    epochs: int = 100
    batch_size: int = 32
    n_h: int = 100
    seed: int = 0
    train_limit: int | None = None
    test_limit: int | None = None
    data_dir: str | Path = "data"
    metrics_path: str | Path | None = None
    rho: float = DEFAULT_RHO
    eps: float = DEFAULT_EPS

    def validate(self) -> "TrainConfig":
        try:
            variant = Variant(self.variant)
            activation = Activation(self.activation)
        except ValueError as e:
            raise ConfigError(str(e)) from None
        if self.eta <= 0:
            raise ConfigError("eta must be positive")
        if self.epochs < 1 or self.batch_size < 1 or self.n_h < 1:
            raise ConfigError("epochs, batch_size and hidden size must be at least 1")
        for name in ("train_limit", "test_limit"):
            v = getattr(self, name)
            if v is not None and v < 1:
                raise ConfigError(f"{name} must be at least 1 when given")
        return replace(self, variant=variant, activation=activation)


@dataclass
class EpochMetrics:
    epoch: int
    train_accuracy: float
    test_accuracy: float
    mean_train_loss: float
    epoch_seconds: float

    def csv_row(self) -> str:
        return ",".join(
            [
                str(self.epoch),
                repr(float(self.train_accuracy)),
                repr(float(self.test_accuracy)),
                repr(float(self.mean_train_loss)),
                repr(float(self.epoch_seconds)),
            ]
        )


@dataclass
class BestResult:
    best_train: float
    best_test: float
    best_test_epoch: int


def evaluate(spec: VariantSpec, params: CellParams, head: OutputHead, split: Split) -> float:
    """Fraction of examples whose argmax logit hits the label (ties: lowest index)."""
    if len(split) == 0:
        raise ValueError("cannot evaluate an empty split")
    correct = 0
    for idx in range(len(split)):
        logits, _ = forward_sequence(spec, params, head, split.sequences[idx])
        if int(np.argmax(logits)) == int(split.labels[idx]):
            correct += 1
    return correct / len(split)


def best_of(metrics: Iterable[EpochMetrics]) -> BestResult:
    """Independent maxima of train and test accuracy over the epochs."""
    rows = list(metrics)
    if not rows:
        raise ValueError("no epochs recorded")
    best_train = max(r.train_accuracy for r in rows)
    best_test_row = max(rows, key=lambda r: (r.test_accuracy, -r.epoch))
    return BestResult(
        best_train=best_train,
        best_test=best_test_row.test_accuracy,
        best_test_epoch=best_test_row.epoch,
    )


def train(
    config: TrainConfig,
    dataset: Dataset | None = None,
    verbose: bool = False,
) -> list[EpochMetrics]:
    """Run the full protocol; returns one metrics row per epoch.

    ``dataset`` defaults to the MNIST files under ``config.data_dir`` and
    may be injected directly (tests, synthetic data). Rows stream to
    ``config.metrics_path`` as they are produced.
    """
    config = config.validate()
    if dataset is None:
        dataset = load_dataset(config.data_dir, config.train_limit, config.test_limit)
    if len(dataset.train) == 0 or len(dataset.test) == 0:
        raise ValueError("dataset has an empty split")

    spec = VariantSpec.make(config.variant, config.activation)
    n_in = dataset.train.sequences.shape[2]
    cell, head = init_params(spec, n_in, config.n_h, NUM_CLASSES, config.seed)
    state = init_rms_state(
        {**cell.arrays(), **head.arrays()}, eta=config.eta, rho=config.rho, eps=config.eps
    )

    metrics: list[EpochMetrics] = []
    out = _open_metrics(config.metrics_path)
    try:
        for epoch in range(1, config.epochs + 1):
            n_seen = 0
            loss_sum = 0.0
            t0 = time.perf_counter()
            for batch in batches(dataset.train, config.batch_size, config.seed, epoch):
                loss, grads, _ = batch_loss_and_grads(spec, cell, head, batch)
                arrays, state = rmsprop_step(state, {**cell.arrays(), **head.arrays()}, grads)
                cell = cell.with_arrays(arrays)
                head = head.with_arrays(arrays)
                loss_sum += loss * len(batch)
                n_seen += len(batch)
            seconds = time.perf_counter() - t0

            row = EpochMetrics(
                epoch=epoch,
                train_accuracy=evaluate(spec, cell, head, dataset.train),
                test_accuracy=evaluate(spec, cell, head, dataset.test),
                mean_train_loss=loss_sum / n_seen,
                epoch_seconds=seconds,
            )
            metrics.append(row)
            if out is not None:
                out.write(row.csv_row() + "\n")
                out.flush()
            if verbose:
                print(
                    f"epoch {row.epoch:3d}  train_acc={row.train_accuracy:.4f}  "
                    f"test_acc={row.test_accuracy:.4f}  loss={row.mean_train_loss:.4f}  "
                    f"{row.epoch_seconds:.1f}s",
                    flush=True,
                )
    finally:
        if out is not None:
            out.close()
    return metrics


def _open_metrics(path: str | Path | None) -> IO[str] | None:
    if path is None:
        return None
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    f = open(path, "w")
    f.write(METRICS_HEADER + "\n")
    f.flush()
    return f


def _cell_name(variant: Variant, activation: Activation, eta: float) -> str:
    return f"{variant.value}_{activation.value}_eta{eta:g}.csv"


def run_grid(
    variants: Iterable[Variant | str],
    activations: Iterable[Activation | str],
    etas: Iterable[float],
    base: TrainConfig,
    out_dir: str | Path,
    dataset: Dataset | None = None,
    verbose: bool = False,
) -> Path:
    """Train every (variant, activation, eta) cell; returns the summary path.

    Each cell writes its own metrics CSV into ``out_dir``. A failing cell
    is recorded with NaN accuracies and the grid keeps going.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    variants = [Variant(v) for v in variants]
    activations = [Activation(a) for a in activations]
    etas = list(etas)
    if not variants or not activations or not etas:
        raise ConfigError("grid axes must be nonempty")

    if dataset is None:
        checked = base.validate()
        dataset = load_dataset(checked.data_dir, checked.train_limit, checked.test_limit)
    n_in = dataset.train.sequences.shape[2]

    summary_path = out_dir / "summary.csv"
    with open(summary_path, "w") as summary:
        summary.write(SUMMARY_HEADER + "\n")
        summary.flush()
        for variant in variants:
            for activation in activations:
                for eta in etas:
                    spec = VariantSpec.make(variant, activation)
                    n_params = param_count(spec, n_in, base.n_h, NUM_CLASSES)
                    config = replace(
                        base,
                        variant=variant,
                        activation=activation,
                        eta=eta,
                        metrics_path=out_dir / _cell_name(variant, activation, eta),
                    )
                    if verbose:
                        print(f"=== {variant.value} {activation.value} eta={eta:g}", flush=True)
                    try:
                        best = best_of(train(config, dataset=dataset, verbose=verbose))
                    except Exception as e:  # any cell failure: record, move on
                        print(
                            f"grid cell {variant.value}/{activation.value}/eta={eta:g} "
                            f"failed: {e}",
                            file=sys.stderr,
                        )
                        best = BestResult(math.nan, math.nan, 0)
                    summary.write(
                        ",".join(
                            [
                                variant.value,
                                activation.value,
                                f"{eta:g}",
                                repr(float(best.best_train)),
                                repr(float(best.best_test)),
                                str(n_params),
                                str(best.best_test_epoch),
                            ]
                        )
                        + "\n"
                    )
                    summary.flush()
    return summary_path
