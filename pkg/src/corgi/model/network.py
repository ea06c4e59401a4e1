"""Forward and backward passes, written out by hand.

The model follows the step recurrence: a character RNN embeds the query
predicate name, a two-layer encoder maps it to the core input, an LSTM cell
carries proof state across steps, and three two-layer heads read out the
termination probability, the next-rule distribution and the per-argument
symbol distributions. Backward passes mirror the forward caches exactly;
`gradient_check` in loss.py keeps them honest.
"""

from __future__ import annotations

from typing import Dict, List, Tuple

import numpy as np

from ..errors import ShapeError, UnknownCharacter
from .params import CHAR_IDS, ModelParams


def encode_chars(params: ModelParams, name: str):
    """Character RNN over a predicate name; returns (q, cache)."""
    if not name:
        raise UnknownCharacter("empty predicate name")
    ids = []
    for ch in name.lower():
        if ch not in CHAR_IDS:
            raise UnknownCharacter(f"character {ch!r} outside vocabulary")
        ids.append(CHAR_IDS[ch])
    Wx, Wh, b = params["char_Wx"], params["char_Wh"], params["char_b"]
    h = np.zeros(Wh.shape[0])
    hs = [h]
    for ci in ids:
        h = np.tanh(Wx[ci] + Wh.T @ h + b)
        hs.append(h)
    return h, (ids, hs)


def encode_chars_backward(params: ModelParams, cache, dq: np.ndarray,
                          grads: Dict[str, np.ndarray]) -> None:
    ids, hs = cache
    Wh = params["char_Wh"]
    dh = dq
    for step in range(len(ids) - 1, -1, -1):
        h = hs[step + 1]
        h_prev = hs[step]
        dz = dh * (1.0 - h * h)
        grads["char_b"] += dz
        grads["char_Wx"][ids[step]] += dz
        grads["char_Wh"] += np.outer(h_prev, dz)
        dh = Wh @ dz


def affine2(params: ModelParams, prefix: str, x: np.ndarray):
    """Two fully connected layers with a rectifier between."""
    W1, b1 = params[f"{prefix}_W1"], params[f"{prefix}_b1"]
    W2, b2 = params[f"{prefix}_W2"], params[f"{prefix}_b2"]
    if x.shape[0] != W1.shape[0]:
        raise ShapeError(f"{prefix}: input width {x.shape[0]} != {W1.shape[0]}")
    z1 = W1.T @ x + b1
    a1 = np.maximum(z1, 0.0)
    out = W2.T @ a1 + b2
    return out, (x, z1, a1)


def affine2_backward(params: ModelParams, prefix: str, cache, dout: np.ndarray,
                     grads: Dict[str, np.ndarray]) -> np.ndarray:
    x, z1, a1 = cache
    W1, W2 = params[f"{prefix}_W1"], params[f"{prefix}_W2"]
    grads[f"{prefix}_W2"] += np.outer(a1, dout)
    grads[f"{prefix}_b2"] += dout
    da1 = W2 @ dout
    dz1 = da1 * (z1 > 0.0)
    grads[f"{prefix}_W1"] += np.outer(x, dz1)
    grads[f"{prefix}_b1"] += dz1
    return W1 @ dz1


def lstm_cell(params: ModelParams, x: np.ndarray, h_prev: np.ndarray,
              c_prev: np.ndarray):
    W, b = params["lstm_W"], params["lstm_b"]
    H = h_prev.shape[0]
    xh = np.concatenate([x, h_prev])
    z = W.T @ xh + b
    i = _sigmoid(z[:H])
    f = _sigmoid(z[H:2 * H])
    g = np.tanh(z[2 * H:3 * H])
    o = _sigmoid(z[3 * H:])
    c = f * c_prev + i * g
    h = o * np.tanh(c)
    return h, c, (xh, i, f, g, o, c, c_prev)


def lstm_cell_backward(params: ModelParams, cache, dh: np.ndarray,
                       dc: np.ndarray, grads: Dict[str, np.ndarray]
                       ) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Returns (dx, dh_prev, dc_prev)."""
    xh, i, f, g, o, c, c_prev = cache
    W = params["lstm_W"]
    H = i.shape[0]
    tc = np.tanh(c)
    do = dh * tc
    dc_total = dc + dh * o * (1.0 - tc * tc)
    di = dc_total * g
    df = dc_total * c_prev
    dg = dc_total * i
    dc_prev = dc_total * f
    dz = np.concatenate([
        di * i * (1.0 - i),
        df * f * (1.0 - f),
        dg * (1.0 - g * g),
        do * o * (1.0 - o),
    ])
    grads["lstm_W"] += np.outer(xh, dz)
    grads["lstm_b"] += dz
    dxh = W @ dz
    D = xh.shape[0] - H
    return dxh[:D], dxh[D:], dc_prev


def _sigmoid(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def log_softmax(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max()
    return shifted - np.log(np.exp(shifted).sum())


def softmax(logits: np.ndarray) -> np.ndarray:
    return np.exp(log_softmax(logits))


def rule_context(params: ModelParams, parent_rule: int, left_rule: int
                 ) -> np.ndarray:
    """Concatenated parent and nearest-left-sister rule embeddings.

    A -1 id contributes a zero vector.
    """
    M = params["M_rule"]
    m1 = M.shape[1]
    parts = []
    for rid in (parent_rule, left_rule):
        if rid is None or rid < 0:
            parts.append(np.zeros(m1))
        else:
            if rid >= M.shape[0]:
                raise IndexError(f"rule id {rid} out of range")
            parts.append(M[rid])
    return np.concatenate(parts)


def zero_grads(params: ModelParams) -> Dict[str, np.ndarray]:
    return {k: np.zeros_like(v) for k, v in params.arrays.items()}


class StepState:
    """Recurrent core state threaded across proof steps."""

    __slots__ = ("h", "c", "t")

    def __init__(self, h: np.ndarray, c: np.ndarray, t: int = 0):
        self.h = h
        self.c = c
        self.t = t

    @classmethod
    def initial(cls, params: ModelParams) -> "StepState":
        H = params.dims.hidden
        return cls(np.zeros(H), np.zeros(H), 0)


def step(params: ModelParams, state: StepState, query_name: str,
         parent_left_rules: Tuple[int, int], args: List[int]
         ) -> Tuple[float, np.ndarray, List[np.ndarray], StepState]:
    """One guidance step.

    Returns (termination probability, rule distribution over all clauses,
    per-argument symbol distributions, next state). Deterministic; the
    distributions are proper simplex points.
    """
    q, _ = encode_chars(params, query_name)
    s, _ = affine2(params, "enc", q)
    r = rule_context(params, *parent_left_rules)
    h, c, _ = lstm_cell(params, np.concatenate([s, r]), state.h, state.c)
    end_logit, _ = affine2(params, "end", h)
    c_t = float(_sigmoid(end_logit)[0])
    rule_dist = softmax(affine2(params, "rule", h)[0])
    arg_dists = []
    for sym in args:
        if sym < 0 or sym >= params.n_symbols:
            raise IndexError(f"symbol id {sym} out of range")
        v = params["M_var"][sym]
        arg_dists.append(softmax(affine2(params, "var", v)[0]))
    return c_t, rule_dist, arg_dists, StepState(h, c, state.t + 1)
