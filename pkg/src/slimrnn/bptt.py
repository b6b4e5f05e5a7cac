"""Sequence forward pass, softmax cross-entropy, and backpropagation through time.

Classification reads the final hidden state only: logits = W_hy h_T + b_y.
The backward pass is hand-derived per variant. It walks the cached steps in
reverse carrying dL/dh_t and dL/dc_t, collects the per-step deltas of every
pre-activation, and forms weight gradients at the end with one stacked
matrix product per parameter (mathematically the same sum over t as
accumulating rank-1 outer products step by step, and much cheaper).

Gates fixed to constants contribute their constant factor to the carried
state gradients and produce no parameter gradients. Gradients are plain
dicts keyed by the parameter field names of the variant plus the head.
"""

from __future__ import annotations

import numpy as np

from .cells import (
    CellParams,
    CellState,
    GateStyle,
    OutputHead,
    StepCache,
    VariantSpec,
    activation_derivative,
    param_field_names_from_params,
    predict,
    step,
)
from .linalg import Vector, matvec_transposed

Gradients = dict[str, np.ndarray]


def forward_sequence(
    spec: VariantSpec, p: CellParams, head: OutputHead, seq: list[Vector] | np.ndarray
) -> tuple[Vector, list[StepCache]]:
    """Run the cell over a whole sequence from a zero state.

    Returns the head logits computed from the final hidden state, plus the
    per-step caches the backward pass consumes.
    """
    if len(seq) == 0:
        raise ValueError("empty sequence")
    state = CellState(h=np.zeros(p.n_h), c=np.zeros(p.n_h))
    caches: list[StepCache] = []
    for x in seq:
        state, cache = step(spec, p, x, state)
        caches.append(cache)
    return predict(head, state.h), caches


def softmax_xent(logits: Vector, label: int) -> tuple[float, Vector]:
    """Cross-entropy of softmax(logits) against an integer label.

    Uses max-subtraction so huge logits cannot overflow. Returns the loss
    and its gradient with respect to the logits (softmax minus one-hot).
    """
    n = logits.shape[0]
    if not 0 <= label < n:
        raise ValueError(f"label {label} out of range for {n} classes")
    z = logits - np.max(logits)
    e = np.exp(z)
    total = e.sum()
    probs = e / total
    loss = float(np.log(total) - z[label])
    dlogits = probs.copy()
    dlogits[label] -= 1.0
    return loss, dlogits


def _final_hidden(spec: VariantSpec, last: StepCache) -> Vector:
    if spec.gates is None:
        return last.c_tilde  # srn stores h_t in the candidate slot
    go = spec.gates[2]
    o_val = go.const if last.o is None else last.o
    return o_val * last.sig_c


def backward_sequence(
    spec: VariantSpec,
    p: CellParams,
    head: OutputHead,
    caches: list[StepCache],
    dlogits: Vector,
) -> Gradients:
    """Exact loss gradients for every trainable array, given forward caches."""
    if len(caches) == 0:
        raise ValueError("empty cache list (was forward_sequence run?)")
    n_h, n_in = p.n_h, p.n_in
    if caches[0].x.shape[0] != n_in or caches[0].h_prev.shape[0] != n_h:
        raise ValueError("caches do not match the given parameters")
    if dlogits.shape[0] != head.n_out:
        raise ValueError("dlogits length does not match the output head")

    T = len(caches)
    act = spec.activation
    gates = spec.gates

    h_last = _final_hidden(spec, caches[-1])
    grads: Gradients = {
        "W_hy": np.outer(dlogits, h_last),
        "b_y": dlogits.copy(),
    }
    dh = matvec_transposed(head.W_hy, dlogits)

    X = np.empty((T, n_in))
    Hprev = np.empty((T, n_h))
    for t, k in enumerate(caches):
        X[t] = k.x
        Hprev[t] = k.h_prev

    da_c = np.empty((T, n_h))

    if gates is None:  # srn: h_t = act(W_c x + U_c h_prev + b_c)
        for t in range(T - 1, -1, -1):
            k = caches[t]
            da = dh * activation_derivative(act, k.a_c, k.c_tilde)
            da_c[t] = da
            dh = matvec_transposed(p.U_c, da)
    else:
        gi, gf, go = gates
        learned = [(name, g) for name, g in zip(("i", "f", "o"), gates)
                   if g.style is not GateStyle.CONSTANT]
        da_gate = {name: np.empty((T, n_h)) for name, _ in learned}
        dc = np.zeros(n_h)
        for t in range(T - 1, -1, -1):
            k = caches[t]
            i_val = gi.const if k.i is None else k.i
            f_val = gf.const if k.f is None else k.f
            o_val = go.const if k.o is None else k.o

            # h_t = o * act(c_t)
            if k.o is not None:
                do = dh * k.sig_c
                da_gate["o"][t] = do * k.o * (1.0 - k.o)
            dc = dc + dh * o_val * activation_derivative(act, k.c, k.sig_c)

            # c_t = f * c_prev + i * cand
            if k.f is not None:
                df = dc * k.c_prev
                da_gate["f"][t] = df * k.f * (1.0 - k.f)
            if k.i is not None:
                di = dc * k.c_tilde
                da_gate["i"][t] = di * k.i * (1.0 - k.i)
            da = dc * i_val * activation_derivative(act, k.a_c, k.c_tilde)
            da_c[t] = da

            dh = matvec_transposed(p.U_c, da)
            for name, g in learned:
                row = da_gate[name][t]
                if g.style is GateStyle.DENSE:
                    dh = dh + matvec_transposed(getattr(p, f"U_{name}"), row)
                else:
                    dh = dh + getattr(p, f"u_{name}") * row
            dc = dc * f_val

        for name, g in learned:
            rows = da_gate[name]
            if g.style is GateStyle.DENSE:
                grads[f"W_{name}"] = rows.T @ X
                grads[f"U_{name}"] = rows.T @ Hprev
                grads[f"b_{name}"] = rows.sum(axis=0)
            else:
                grads[f"u_{name}"] = (rows * Hprev).sum(axis=0)
                if g.bias:
                    grads[f"b_{name}"] = rows.sum(axis=0)

    grads["W_c"] = da_c.T @ X
    grads["U_c"] = da_c.T @ Hprev
    grads["b_c"] = da_c.sum(axis=0)

    # Canonical key order: cell fields first, then the head.
    ordered = {name: grads[name] for name in param_field_names_from_params(p)}
    ordered["W_hy"] = grads["W_hy"]
    ordered["b_y"] = grads["b_y"]
    return ordered


def batch_loss_and_grads(
    spec: VariantSpec, p: CellParams, head: OutputHead, batch
) -> tuple[float, Gradients, int]:
    """Mean loss and mean gradients over a batch, plus the correct count.

    Examples are processed independently and reduced in index order, so
    results are reproducible regardless of how the work might be scheduled.
    Argmax ties resolve toward the lowest class index.
    """
    size = len(batch.labels)
    if size == 0:
        raise ValueError("empty batch")
    total: Gradients | None = None
    loss_sum = 0.0
    correct = 0
    for idx in range(size):
        logits, caches = forward_sequence(spec, p, head, batch.inputs[idx])
        label = int(batch.labels[idx])
        loss, dlogits = softmax_xent(logits, label)
        g = backward_sequence(spec, p, head, caches, dlogits)
        loss_sum += loss
        if int(np.argmax(logits)) == label:
            correct += 1
        if total is None:
            total = g
        else:
            for name, arr in g.items():
                total[name] += arr
    assert total is not None
    mean = {name: arr / size for name, arr in total.items()}
    return loss_sum / size, mean, correct
