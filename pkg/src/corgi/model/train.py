"""Plain stochastic gradient descent over trace corpora."""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np

from ..errors import DivergenceError
from ..traces import TraceCorpus
from .loss import loss_and_grads, _model_steps
from .network import affine2, encode_chars, lstm_cell, rule_context
from .params import ModelDims, ModelParams, init_params, load_pretrained_vectors


@dataclass
class TrainConfig:
    learning_rate: float = 0.1
    epochs: int = 100
    batch_size: int = 8
    seed: int = 0
    gradient_clip: float = 5.0
    embedding_init: Optional[str] = None  # path to pretrained word vectors

    def __post_init__(self):
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be > 0")
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")


def train(corpus: TraceCorpus, cfg: TrainConfig, n_rules: int,
          dims: Optional[ModelDims] = None,
          params: Optional[ModelParams] = None,
          log_every: int = 0) -> Tuple[ModelParams, List[float]]:
    """Minimize mean trace loss; returns (params, per-epoch mean loss log)."""
    if not corpus.traces:
        raise ValueError("empty corpus")
    if params is None:
        params = init_params(n_rules, corpus.symbol_table.symbols,
                             corpus.kb_fingerprint, dims=dims, seed=cfg.seed)
        if cfg.embedding_init:
            matrix, _ = load_pretrained_vectors(
                cfg.embedding_init, corpus.symbol_table.symbols,
                dim=params.dims.m2, seed=cfg.seed)
            params["M_var"] = matrix
    rng = np.random.default_rng(cfg.seed)
    order = np.arange(len(corpus.traces))
    log: List[float] = []
    for epoch in range(cfg.epochs):
        rng.shuffle(order)
        epoch_loss = 0.0
        for start in range(0, len(order), cfg.batch_size):
            batch = order[start:start + cfg.batch_size]
            accum = None
            for idx in batch:
                value, grads = loss_and_grads(params, corpus.traces[idx])
                epoch_loss += value
                if accum is None:
                    accum = grads
                else:
                    for k in accum:
                        accum[k] += grads[k]
            scale = 1.0 / len(batch)
            norm_sq = 0.0
            for k in accum:
                accum[k] *= scale
                norm_sq += float(np.sum(accum[k] * accum[k]))
            norm = norm_sq ** 0.5
            if not np.isfinite(norm):
                raise DivergenceError(f"non-finite gradients at epoch {epoch}")
            clip = cfg.gradient_clip
            factor = cfg.learning_rate * (clip / norm if norm > clip else 1.0)
            for k in accum:
                params.arrays[k] -= factor * accum[k]
        mean = epoch_loss / len(order)
        if not np.isfinite(mean):
            raise DivergenceError(f"loss diverged at epoch {epoch}")
        log.append(mean)
        if log_every and (epoch + 1) % log_every == 0:
            print(f"epoch {epoch + 1:4d}  mean loss {mean:.4f}")
    return params, log


def rule_accuracy(params: ModelParams, corpus: TraceCorpus) -> float:
    """Teacher-forced top-1 accuracy of the rule head over the corpus."""
    correct = 0
    total = 0
    for trace in corpus.traces:
        h = np.zeros(params.dims.hidden)
        c = np.zeros(params.dims.hidden)
        for step in _model_steps(trace):
            q, _ = encode_chars(params, step.query_name)
            s, _ = affine2(params, "enc", q)
            r = rule_context(params, step.parent_rule_id,
                             step.left_sister_rule_id)
            h, c, _ = lstm_cell(params, np.concatenate([s, r]), h, c)
            logits, _ = affine2(params, "rule", h)
            total += 1
            if int(np.argmax(logits)) == step.target_rule_id:
                correct += 1
    return correct / total if total else 0.0
