"""Trainable proof guidance: embeddings, recurrent core, output heads."""

from .guide import NeuralGuide
from .loss import gradient_check, loss, loss_and_grads, rule_loss_term
from .network import StepState, step
from .params import (CHAR_VOCAB, ModelDims, ModelParams, init_params,
                     load_pretrained_vectors)
from .train import TrainConfig, rule_accuracy, train

__all__ = [
    "ModelParams", "ModelDims", "init_params", "load_pretrained_vectors",
    "CHAR_VOCAB", "StepState", "step", "loss", "loss_and_grads",
    "rule_loss_term", "gradient_check", "TrainConfig", "train",
    "rule_accuracy", "NeuralGuide",
]
