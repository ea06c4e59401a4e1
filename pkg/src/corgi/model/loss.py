"""Trace negative log-likelihood and its hand-derived gradients.

Per step the objective sums the termination cross-entropy, the rule
selection cross-entropy and one symbol cross-entropy per argument. Builtin
steps (rule sentinel -1) are skipped entirely: the recurrent state does not
advance on them, matching how the prover bypasses the guide at inference.
"""

from __future__ import annotations

from typing import Dict, List, Tuple

import numpy as np

from ..traces import NO_RULE, TraceStep
from .network import (affine2, affine2_backward, encode_chars,
                      encode_chars_backward, log_softmax, lstm_cell,
                      lstm_cell_backward, rule_context, zero_grads)
from .params import ModelParams


def _model_steps(trace: List[TraceStep]) -> List[TraceStep]:
    return [s for s in trace if s.target_rule_id != NO_RULE]


def loss(params: ModelParams, trace: List[TraceStep]) -> float:
    """Negative log-likelihood of a trace; non-negative, 0 for empty traces."""
    value, _ = _forward(params, trace)
    return value


def loss_and_grads(params: ModelParams, trace: List[TraceStep]
                   ) -> Tuple[float, Dict[str, np.ndarray]]:
    value, caches = _forward(params, trace)
    grads = zero_grads(params)
    if not caches:
        return value, grads

    H = params.dims.hidden
    dh_next = np.zeros(H)
    dc_next = np.zeros(H)
    enc_width = params.dims.enc_out
    m1 = params.dims.m1
    for cache in reversed(caches):
        dh = dh_next.copy()
        # termination head
        dend = np.array([cache["p_end"] - cache["y_end"]])
        dh += affine2_backward(params, "end", cache["end_cache"], dend, grads)
        # rule head
        dlogits = np.exp(cache["rule_logp"])
        dlogits[cache["rule_target"]] -= 1.0
        dh += affine2_backward(params, "rule", cache["rule_cache"], dlogits, grads)
        # argument heads (independent of h)
        for sym, target, var_cache, var_logp in cache["var_heads"]:
            dv = np.exp(var_logp)
            dv[target] -= 1.0
            dvin = affine2_backward(params, "var", var_cache, dv, grads)
            grads["M_var"][sym] += dvin
        # through the recurrent cell
        dx, dh_prev, dc_prev = lstm_cell_backward(
            params, cache["lstm_cache"], dh, dc_next, grads)
        ds = dx[:enc_width]
        dr = dx[enc_width:]
        parent, sister = cache["context"]
        if parent >= 0:
            grads["M_rule"][parent] += dr[:m1]
        if sister >= 0:
            grads["M_rule"][sister] += dr[m1:]
        dq = affine2_backward(params, "enc", cache["enc_cache"], ds, grads)
        encode_chars_backward(params, cache["char_cache"], dq, grads)
        dh_next, dc_next = dh_prev, dc_prev
    return value, grads


def _forward(params: ModelParams, trace: List[TraceStep]):
    steps = _model_steps(trace)
    h = np.zeros(params.dims.hidden)
    c = np.zeros(params.dims.hidden)
    total = 0.0
    caches = []
    for step in steps:
        if step.target_rule_id >= params.n_rules:
            raise IndexError(
                f"rule id {step.target_rule_id} out of range (n1={params.n_rules})")
        q, char_cache = encode_chars(params, step.query_name)
        s, enc_cache = affine2(params, "enc", q)
        r = rule_context(params, step.parent_rule_id, step.left_sister_rule_id)
        x = np.concatenate([s, r])
        h, c, lstm_cache = lstm_cell(params, x, h, c)

        end_logit, end_cache = affine2(params, "end", h)
        y_end = 1.0 if step.terminate else 0.0
        l = end_logit[0]
        # stable BCE on the logit
        total += float(np.logaddexp(0.0, l) - y_end * l)
        p_end = float(1.0 / (1.0 + np.exp(-l))) if l >= 0 else float(
            np.exp(l) / (1.0 + np.exp(l)))

        rule_logits, rule_cache = affine2(params, "rule", h)
        rule_logp = log_softmax(rule_logits)
        total += float(-rule_logp[step.target_rule_id])

        var_heads = []
        for sym, target in zip(step.query_args, step.target_args):
            if sym >= params.n_symbols or target >= params.n_symbols:
                raise IndexError(f"symbol id out of range (n2={params.n_symbols})")
            v = params["M_var"][sym]
            var_logits, var_cache = affine2(params, "var", v)
            var_logp = log_softmax(var_logits)
            total += float(-var_logp[target])
            var_heads.append((sym, target, var_cache, var_logp))

        caches.append({
            "char_cache": char_cache, "enc_cache": enc_cache,
            "lstm_cache": lstm_cache, "end_cache": end_cache,
            "rule_cache": rule_cache, "rule_logp": rule_logp,
            "rule_target": step.target_rule_id, "p_end": p_end,
            "y_end": y_end, "var_heads": var_heads,
            "context": (step.parent_rule_id, step.left_sister_rule_id),
        })
    return total, caches


def _loss_and_masks(params: ModelParams, trace: List[TraceStep]):
    """Loss plus the concatenated rectifier activation masks.

    Finite differences are only valid where the loss is smooth; comparing
    masks at the two perturbed points detects ReLU kink crossings.
    """
    value, caches = _forward(params, trace)
    masks = []
    for cache in caches:
        for key in ("enc_cache", "end_cache", "rule_cache"):
            masks.append(cache[key][1] > 0.0)
        for _, _, var_cache, _ in cache["var_heads"]:
            masks.append(var_cache[1] > 0.0)
    if masks:
        return value, np.concatenate(masks)
    return value, np.zeros(0, dtype=bool)


def rule_loss_term(params: ModelParams, trace_step: TraceStep) -> float:
    """Only the rule cross-entropy of a single (state-initial) step."""
    h = np.zeros(params.dims.hidden)
    c = np.zeros(params.dims.hidden)
    q, _ = encode_chars(params, trace_step.query_name)
    s, _ = affine2(params, "enc", q)
    r = rule_context(params, trace_step.parent_rule_id,
                     trace_step.left_sister_rule_id)
    h, c, _ = lstm_cell(params, np.concatenate([s, r]), h, c)
    logits, _ = affine2(params, "rule", h)
    return float(-log_softmax(logits)[trace_step.target_rule_id])


def gradient_check(params: ModelParams, trace: List[TraceStep],
                   epsilon: float = 1e-5, sample_fraction: float = 0.01,
                   seed: int = 0, min_coords: int = 30) -> float:
    """Max relative error of analytic vs central-difference gradients.

    Checks a random sample (about `sample_fraction`) of all parameter
    coordinates. Coordinates whose perturbation flips a rectifier mask are
    skipped: the loss is not differentiable there and a central difference
    would measure the kink, not the gradient. Zero-length traces return 0
    by convention.
    """
    if not (1e-6 <= epsilon <= 1e-3):
        raise ValueError("epsilon out of range [1e-6, 1e-3]")
    if not _model_steps(trace):
        return 0.0
    _, grads = loss_and_grads(params, trace)
    rng = np.random.default_rng(seed)
    names = sorted(params.arrays)
    total = sum(params.arrays[n].size for n in names)
    n_samples = max(min_coords, int(total * sample_fraction))
    worst = 0.0
    checked = 0
    attempts = 0
    while checked < n_samples and attempts < 4 * n_samples:
        attempts += 1
        name = names[int(rng.integers(len(names)))]
        arr = params.arrays[name]
        flat_idx = int(rng.integers(arr.size))
        idx = np.unravel_index(flat_idx, arr.shape)
        orig = arr[idx]
        arr[idx] = orig + epsilon
        up, mask_up = _loss_and_masks(params, trace)
        arr[idx] = orig - epsilon
        down, mask_down = _loss_and_masks(params, trace)
        arr[idx] = orig
        if not np.array_equal(mask_up, mask_down):
            continue
        checked += 1
        numeric = (up - down) / (2.0 * epsilon)
        analytic = grads[name][idx]
        err = abs(analytic - numeric) / max(1.0, abs(analytic), abs(numeric))
        worst = max(worst, err)
    return worst
