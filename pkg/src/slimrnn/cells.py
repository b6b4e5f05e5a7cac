"""Recurrent cell variants: definition, initialization, and forward step.

Seven cells share one interface. ``srn`` is the ungated baseline

    h_t = act(W_c x_t + U_c h_{t-1} + b_c)

and the remaining six are memory cells of the form

    c_t = f_t * c_{t-1} + i_t * cand_t,    cand_t = act(W_c x_t + U_c h_{t-1} + b_c)
    h_t = o_t * act(c_t)

differing only in how the input/forget/output gates i, f, o are produced:

    lstm     dense gates   sigmoid(W_g x_t + U_g h_{t-1} + b_g)
    lstm4    point-wise    sigmoid(u_g * h_{t-1})
    lstm5    point-wise    sigmoid(u_g * h_{t-1} + b_g)
    lstm4a   input gate as lstm4; f = 0.96, o = 1 fixed
    lstm5a   input gate as lstm5; f = 0.96, o = 1 fixed
    lstm6    all gates fixed: i = 1, f = 0.59, o = 1

Gates always use the logistic sigmoid; ``act`` is the configurable cell
activation and is applied both to the candidate and to the cell state on
output. Fixed forget constants are strictly below one, which keeps the
cell bounded-input bounded-output (the state of an undriven cell decays
geometrically).
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from enum import Enum

import numpy as np
from scipy.special import expit

from .linalg import Matrix, Vector, matvec
from .rng import TAG_INIT, stream


class Activation(str, Enum):
    TANH = "tanh"
    SIGMOID = "sigmoid"
    RELU = "relu"


class Variant(str, Enum):
    SRN = "srn"
    LSTM = "lstm"
    LSTM4 = "lstm4"
    LSTM5 = "lstm5"
    LSTM4A = "lstm4a"
    LSTM5A = "lstm5a"
    LSTM6 = "lstm6"


class GateStyle(Enum):
    DENSE = "dense"          # sigmoid(W x + U h + b)
    POINTWISE = "pointwise"  # sigmoid(u * h [+ b])
    CONSTANT = "constant"


@dataclass(frozen=True)
class GateSpec:
    style: GateStyle
    bias: bool = False
    const: float | None = None


_DENSE = GateSpec(GateStyle.DENSE, bias=True)
_PW = GateSpec(GateStyle.POINTWISE, bias=False)
_PWB = GateSpec(GateStyle.POINTWISE, bias=True)

# (input, forget, output) gate wiring per variant; None marks the ungated srn.
_GATES: dict[Variant, tuple[GateSpec, GateSpec, GateSpec] | None] = {
    Variant.SRN: None,
    Variant.LSTM: (_DENSE, _DENSE, _DENSE),
    Variant.LSTM4: (_PW, _PW, _PW),
    Variant.LSTM5: (_PWB, _PWB, _PWB),
    Variant.LSTM4A: (_PW, GateSpec(GateStyle.CONSTANT, const=0.96), GateSpec(GateStyle.CONSTANT, const=1.0)),
    Variant.LSTM5A: (_PWB, GateSpec(GateStyle.CONSTANT, const=0.96), GateSpec(GateStyle.CONSTANT, const=1.0)),
    Variant.LSTM6: (
        GateSpec(GateStyle.CONSTANT, const=1.0),
        GateSpec(GateStyle.CONSTANT, const=0.59),
        GateSpec(GateStyle.CONSTANT, const=1.0),
    ),
}

GATE_NAMES = ("i", "f", "o")


@dataclass(frozen=True)
class VariantSpec:
    """A cell variant plus its activation and any fixed gate constants."""

    variant: Variant
    activation: Activation
    input_gate_const: float | None = None
    forget_const: float | None = None
    output_gate_const: float | None = None

    def __post_init__(self) -> None:
        gates = _GATES[self.variant]
        expected = (None, None, None) if gates is None else tuple(g.const for g in gates)
        got = (self.input_gate_const, self.forget_const, self.output_gate_const)
        if got != expected:
            raise ValueError(
                f"{self.variant.value}: gate constants {got} do not match the "
                f"variant definition {expected}"
            )
        if self.forget_const is not None and not abs(self.forget_const) < 1.0:
            raise ValueError("fixed forget constant must satisfy |f| < 1")

    @classmethod
    def make(cls, variant: Variant | str, activation: Activation | str) -> "VariantSpec":
        variant = Variant(variant)
        activation = Activation(activation)
        gates = _GATES[variant]
        consts = (None, None, None) if gates is None else tuple(g.const for g in gates)
        return cls(variant, activation, *consts)

    @property
    def gates(self) -> tuple[GateSpec, GateSpec, GateSpec] | None:
        return _GATES[self.variant]


def apply_activation(act: Activation, v: Vector) -> Vector:
    """Elementwise tanh, logistic sigmoid, or relu."""
    if act is Activation.TANH:
        return np.tanh(v)
    if act is Activation.SIGMOID:
        return expit(v)
    return np.maximum(v, 0.0)


def activation_derivative(act: Activation, pre: Vector, out: Vector) -> Vector:
    """Derivative of ``act`` at ``pre``, given ``out = act(pre)``.

    relu uses the pre-activation (derivative at exactly 0 is taken as 0);
    tanh and sigmoid are cheaper to differentiate from their outputs.
    """
    if act is Activation.TANH:
        return 1.0 - out * out
    if act is Activation.SIGMOID:
        return out * (1.0 - out)
    return (pre > 0.0).astype(np.float64)


@dataclass
class CellState:
    """Hidden vector and memory-cell vector at one time step."""

    h: Vector
    c: Vector


@dataclass
class CellParams:
    """Trainable arrays of one cell; only the fields the variant uses are set.

    W_* are input-to-hidden (n_h, n_in), U_* recurrent (n_h, n_h), u_*
    point-wise gate vectors (n_h,), b_* biases (n_h,). The srn reuses the
    candidate slots W_c/U_c/b_c for its single affine map.
    """

    W_c: Matrix
    U_c: Matrix
    b_c: Vector
    W_i: Matrix | None = None
    U_i: Matrix | None = None
    b_i: Vector | None = None
    W_f: Matrix | None = None
    U_f: Matrix | None = None
    b_f: Vector | None = None
    W_o: Matrix | None = None
    U_o: Matrix | None = None
    b_o: Vector | None = None
    u_i: Vector | None = None
    u_f: Vector | None = None
    u_o: Vector | None = None

    @property
    def n_in(self) -> int:
        return self.W_c.shape[1]

    @property
    def n_h(self) -> int:
        return self.W_c.shape[0]

    def arrays(self) -> dict[str, np.ndarray]:
        """Present trainable arrays, in canonical field order."""
        out = {}
        for name in param_field_names_from_params(self):
            out[name] = getattr(self, name)
        return out

    def with_arrays(self, arrays: dict[str, np.ndarray]) -> "CellParams":
        """Copy of self with every present field replaced from ``arrays``."""
        return replace(self, **{k: arrays[k] for k in self.arrays()})


@dataclass
class OutputHead:
    """Affine readout h -> logits."""

    W_hy: Matrix
    b_y: Vector

    @property
    def n_out(self) -> int:
        return self.b_y.shape[0]

    def arrays(self) -> dict[str, np.ndarray]:
        return {"W_hy": self.W_hy, "b_y": self.b_y}

    def with_arrays(self, arrays: dict[str, np.ndarray]) -> "OutputHead":
        return OutputHead(W_hy=arrays["W_hy"], b_y=arrays["b_y"])


@dataclass
class StepCache:
    """Forward intermediates of one step, retained for the backward pass.

    Gate entries are None when the variant fixes that gate to a constant
    (the constant lives in the VariantSpec). For the srn only x, h_prev,
    a_c and c_tilde (= h_t) are populated.
    """

    x: Vector
    h_prev: Vector
    c_prev: Vector | None
    i: Vector | None
    f: Vector | None
    o: Vector | None
    a_c: Vector
    c_tilde: Vector
    c: Vector | None
    sig_c: Vector | None


def param_field_names(variant: Variant | str) -> tuple[str, ...]:
    """Ordered trainable cell fields demanded by a variant."""
    variant = Variant(variant)
    gates = _GATES[variant]
    names: list[str] = []
    if gates is not None:
        for gname, gate in zip(GATE_NAMES, gates):
            if gate.style is GateStyle.DENSE:
                names += [f"W_{gname}", f"U_{gname}", f"b_{gname}"]
            elif gate.style is GateStyle.POINTWISE:
                names.append(f"u_{gname}")
                if gate.bias:
                    names.append(f"b_{gname}")
    names += ["W_c", "U_c", "b_c"]
    return tuple(names)


def param_field_names_from_params(p: CellParams) -> tuple[str, ...]:
    """Present fields of ``p``, in the same canonical order as param_field_names."""
    canonical: list[str] = []
    for gname in GATE_NAMES:
        canonical += [f"W_{gname}", f"U_{gname}", f"u_{gname}", f"b_{gname}"]
    canonical += ["W_c", "U_c", "b_c"]
    return tuple(n for n in canonical if getattr(p, n) is not None)


def param_count(spec: VariantSpec, n_in: int, n_h: int, n_out: int) -> int:
    """Total trainable scalars of cell plus output head."""
    if min(n_in, n_h, n_out) <= 0:
        raise ValueError("dimensions must be positive")
    shapes = _param_shapes(spec.variant, n_in, n_h)
    total = sum(int(np.prod(s)) for s in shapes.values())
    return total + n_h * n_out + n_out


def _param_shapes(variant: Variant, n_in: int, n_h: int) -> dict[str, tuple[int, ...]]:
    shapes: dict[str, tuple[int, ...]] = {}
    for name in param_field_names(variant):
        if name.startswith("W_"):
            shapes[name] = (n_h, n_in)
        elif name.startswith("U_"):
            shapes[name] = (n_h, n_h)
        else:  # u_* and b_* are per-unit vectors
            shapes[name] = (n_h,)
    return shapes


def _orthogonal(rng: np.random.Generator, n: int) -> Matrix:
    # QR of a Gaussian draw, sign-fixed so R's diagonal is positive: makes
    # the decomposition (and hence the init) unique for a given draw.
    g = rng.standard_normal((n, n))
    q, r = np.linalg.qr(g)
    d = np.sign(np.diag(r))
    d[d == 0] = 1.0
    return q * d


def _glorot(rng: np.random.Generator, shape: tuple[int, int], fan_in: int, fan_out: int) -> Matrix:
    limit = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, size=shape)


def init_params(
    spec: VariantSpec, n_in: int, n_h: int, n_out: int, seed: int
) -> tuple[CellParams, OutputHead]:
    """Deterministically initialize all trainable arrays for ``spec``.

    Input-to-hidden matrices are Glorot-uniform, recurrent matrices
    orthogonal, point-wise gate vectors uniform(-0.1, 0.1). Biases start
    at zero except the dense-gate cell's forget bias, which starts at one
    so the memory path is open early in training.
    """
    if min(n_in, n_h, n_out) <= 0:
        raise ValueError("dimensions must be positive")
    rng = stream(seed, TAG_INIT)
    values: dict[str, np.ndarray] = {}
    for name, shape in _param_shapes(spec.variant, n_in, n_h).items():
        if name.startswith("W_"):
            values[name] = _glorot(rng, shape, n_in, n_h)
        elif name.startswith("U_"):
            values[name] = _orthogonal(rng, n_h)
        elif name.startswith("u_"):
            values[name] = rng.uniform(-0.1, 0.1, size=shape)
        elif name == "b_f" and spec.variant is Variant.LSTM:
            values[name] = np.ones(shape)
        else:
            values[name] = np.zeros(shape)
    head = OutputHead(
        W_hy=_glorot(rng, (n_out, n_h), n_h, n_out),
        b_y=np.zeros(n_out),
    )
    return CellParams(**values), head


def _gate_value(gate: GateSpec, gname: str, p: CellParams, x: Vector, h: Vector) -> Vector | None:
    """Gate activation vector, or None for a constant gate."""
    if gate.style is GateStyle.CONSTANT:
        return None
    if gate.style is GateStyle.DENSE:
        a = matvec(getattr(p, f"W_{gname}"), x) + matvec(getattr(p, f"U_{gname}"), h)
        a += getattr(p, f"b_{gname}")
    else:
        a = getattr(p, f"u_{gname}") * h
        if gate.bias:
            a = a + getattr(p, f"b_{gname}")
    return expit(a)


def step(
    spec: VariantSpec, p: CellParams, x: Vector, prev: CellState
) -> tuple[CellState, StepCache]:
    """Advance the cell one time step. Inputs are never mutated."""
    if x.ndim != 1 or x.shape[0] != p.n_in:
        raise ValueError(f"input length {x.shape} does not match n_in={p.n_in}")
    if prev.h.shape[0] != p.n_h or prev.c.shape[0] != p.n_h:
        raise ValueError("previous state does not match n_h")

    act = spec.activation
    gates = spec.gates
    if gates is None:  # srn
        a = matvec(p.W_c, x) + matvec(p.U_c, prev.h) + p.b_c
        h = apply_activation(act, a)
        cache = StepCache(
            x=x, h_prev=prev.h, c_prev=None, i=None, f=None, o=None,
            a_c=a, c_tilde=h, c=None, sig_c=None,
        )
        return CellState(h=h, c=prev.c), cache

    gi, gf, go = gates
    i_vec = _gate_value(gi, "i", p, x, prev.h)
    f_vec = _gate_value(gf, "f", p, x, prev.h)
    o_vec = _gate_value(go, "o", p, x, prev.h)
    i_val = gi.const if i_vec is None else i_vec
    f_val = gf.const if f_vec is None else f_vec
    o_val = go.const if o_vec is None else o_vec

    a_c = matvec(p.W_c, x) + matvec(p.U_c, prev.h) + p.b_c
    c_tilde = apply_activation(act, a_c)
    c = f_val * prev.c + i_val * c_tilde
    sig_c = apply_activation(act, c)
    h = o_val * sig_c

    cache = StepCache(
        x=x, h_prev=prev.h, c_prev=prev.c, i=i_vec, f=f_vec, o=o_vec,
        a_c=a_c, c_tilde=c_tilde, c=c, sig_c=sig_c,
    )
    return CellState(h=h, c=c), cache


def predict(head: OutputHead, h: Vector) -> Vector:
    """Logits for a hidden vector (softmax is applied by the loss/metrics)."""
    return matvec(head.W_hy, h) + head.b_y
