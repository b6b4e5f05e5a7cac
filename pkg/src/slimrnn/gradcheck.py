"""Central finite-difference verification of the hand-derived gradients.

For every trainable coordinate the loss is evaluated at +/- eps and the
central difference is compared against the analytic gradient. The
comparison is relative:

    err = |analytic - numeric| / max(|analytic|, |numeric|, 1e-4)

The 1e-4 floor keeps coordinates whose gradient vanishes from dividing
finite-difference roundoff (~1e-10 at eps=1e-5) by zero; real errors are
proportional to the gradient itself and still surface.

relu has a kink at zero, where no finite difference is trustworthy. A
coordinate is only compared when every relu input (candidate
pre-activations and cell states fed to the output activation) keeps a
magnitude above 1e-3 in both perturbed passes, so the +/- eps evaluations
cannot straddle the kink. Inputs that are exactly zero are exempt: a relu
cell pins many values at 0.0 by construction (clamped candidates feeding
a zero cell state), those stay pinned under perturbation as long as their
own sources clear the margin, and a pinned value never crosses the kink.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .bptt import backward_sequence, forward_sequence, softmax_xent
from .cells import Activation, StepCache, Variant, VariantSpec, init_params
from .rng import TAG_GRADCHECK, stream

EPS = 1e-5
REL_TOL = 1e-4
KINK_MARGIN = 1e-3
_ERR_FLOOR = 1e-4


def _min_nonzero_abs(v: np.ndarray, current: float) -> float:
    a = np.abs(v)
    a = a[a > 0.0]
    return current if a.size == 0 else min(current, float(a.min()))


def relu_margin(spec: VariantSpec, caches: list[StepCache]) -> float:
    """Smallest nonzero |input| seen by any relu application in a forward pass."""
    if spec.activation is not Activation.RELU:
        return np.inf
    margin = np.inf
    for k in caches:
        margin = _min_nonzero_abs(k.a_c, margin)
        if k.c is not None:
            margin = _min_nonzero_abs(k.c, margin)
    return margin


def _flatten(arrays: dict[str, np.ndarray]) -> np.ndarray:
    return np.concatenate([a.ravel() for a in arrays.values()])


def _unflatten(flat: np.ndarray, template: dict[str, np.ndarray]) -> dict[str, np.ndarray]:
    out = {}
    pos = 0
    for name, a in template.items():
        out[name] = flat[pos : pos + a.size].reshape(a.shape)
        pos += a.size
    return out


@dataclass
class CheckResult:
    variant: Variant
    activation: Activation
    seed: int
    max_rel_err: float
    compared: int
    skipped: int

    @property
    def passed(self) -> bool:
        return self.compared > 0 and self.max_rel_err < REL_TOL


def check_gradients(
    variant: Variant | str,
    activation: Activation | str,
    n_in: int = 3,
    n_h: int = 5,
    n_out: int = 4,
    T: int = 4,
    seed: int = 0,
    eps: float = EPS,
) -> CheckResult:
    """Compare BPTT gradients against central differences for one config."""
    spec = VariantSpec.make(variant, activation)
    cell, head = init_params(spec, n_in, n_h, n_out, seed)
    rng = stream(seed, TAG_GRADCHECK)
    seq = rng.uniform(0.0, 1.0, size=(T, n_in))
    label = int(rng.integers(0, n_out))

    params = {**cell.arrays(), **head.arrays()}
    base = _flatten(params)

    def loss_at(flat: np.ndarray) -> tuple[float, float]:
        arrays = _unflatten(flat, params)
        c = cell.with_arrays(arrays)
        h = head.with_arrays(arrays)
        logits, caches = forward_sequence(spec, c, h, seq)
        loss, _ = softmax_xent(logits, label)
        return loss, relu_margin(spec, caches)

    logits, caches = forward_sequence(spec, cell, head, seq)
    _, dlogits = softmax_xent(logits, label)
    analytic = _flatten(backward_sequence(spec, cell, head, caches, dlogits))

    max_err = 0.0
    compared = 0
    skipped = 0
    work = base.copy()
    for j in range(base.size):
        work[j] = base[j] + eps
        lo_plus, m_plus = loss_at(work)
        work[j] = base[j] - eps
        lo_minus, m_minus = loss_at(work)
        work[j] = base[j]
        if min(m_plus, m_minus) <= KINK_MARGIN:
            skipped += 1
            continue
        numeric = (lo_plus - lo_minus) / (2.0 * eps)
        scale = max(abs(analytic[j]), abs(numeric), _ERR_FLOOR)
        max_err = max(max_err, abs(analytic[j] - numeric) / scale)
        compared += 1

    return CheckResult(
        variant=spec.variant, activation=spec.activation, seed=seed,
        max_rel_err=max_err, compared=compared, skipped=skipped,
    )


def check_all(
    seeds: tuple[int, ...] = (0, 1, 2),
    variants: tuple[Variant, ...] = tuple(Variant),
    activations: tuple[Activation, ...] = tuple(Activation),
    **dims,
) -> list[CheckResult]:
    """The full verification matrix: variants x activations x seeds."""
    return [
        check_gradients(v, a, seed=s, **dims)
        for v in variants
        for a in activations
        for s in seeds
    ]
