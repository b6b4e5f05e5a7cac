import numpy as np
import pytest

from slimrnn.data import (
    TEST_IMAGES,
    TEST_LABELS,
    TRAIN_IMAGES,
    TRAIN_LABELS,
    Dataset,
    Split,
    write_idx_images,
    write_idx_labels,
)
from slimrnn.rng import TAG_SYNTH, stream


def synth_images(n: int, seed: int, rows: int = 28, cols: int = 28) -> tuple[np.ndarray, np.ndarray]:
    """Random uint8 images whose label is encoded as a bright stripe position."""
    rng = stream(seed, TAG_SYNTH)
    images = rng.integers(0, 26, size=(n, rows, cols), dtype=np.int64)
    labels = rng.integers(0, 10, size=n)
    for i in range(n):
        images[i, (2 + 2 * int(labels[i])) % rows, :] = rng.integers(200, 256, size=cols)
    return images.astype(np.uint8), labels.astype(np.int64)


def synth_split(n: int, seed: int, rows: int = 28, cols: int = 28) -> Split:
    images, labels = synth_images(n, seed, rows, cols)
    return Split(sequences=images.astype(np.float64) / 255.0, labels=labels)


def synth_dataset(n_train: int, n_test: int, seed: int = 0) -> Dataset:
    return Dataset(train=synth_split(n_train, seed), test=synth_split(n_test, seed + 1))


def write_mnist_dir(directory, n_train: int, n_test: int, seed: int = 0) -> None:
    """Write the four standard IDX files with synthetic content."""
    train_images, train_labels = synth_images(n_train, seed)
    test_images, test_labels = synth_images(n_test, seed + 1)
    write_idx_images(directory / TRAIN_IMAGES, train_images)
    write_idx_labels(directory / TRAIN_LABELS, train_labels)
    write_idx_images(directory / TEST_IMAGES, test_images)
    write_idx_labels(directory / TEST_LABELS, test_labels)


@pytest.fixture
def mnist_like_dir(tmp_path):
    write_mnist_dir(tmp_path, n_train=48, n_test=16)
    return tmp_path
