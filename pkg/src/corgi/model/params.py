"""Model parameters: embedding matrices, encoder/core/head weights.

Everything is float64 numpy; training is CPU-only and deterministic under a
seed. A checkpoint bundles the arrays with the symbol table and the KB
fingerprint so a model can refuse to run against the wrong knowledge base.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple

import numpy as np

from ..errors import FormatError, ShapeError

CHAR_VOCAB = "abcdefghijklmnopqrstuvwxyz0123456789_"
CHAR_IDS = {c: i for i, c in enumerate(CHAR_VOCAB)}

CHECKPOINT_VERSION = 1


@dataclass
class ModelDims:
    m1: int = 256          # rule embedding width
    m2: int = 300          # atom/variable embedding width
    char_hidden: int = 64  # character encoder state
    enc_out: int = 64      # f_enc output width
    hidden: int = 128      # recurrent core state
    head_hidden: int = 128  # hidden width of the two-layer heads


class ModelParams:
    """Weight store: a flat dict of named float64 arrays plus metadata."""

    def __init__(self, arrays: Dict[str, np.ndarray], dims: ModelDims,
                 n_rules: int, symbols: List[str], kb_fingerprint: str):
        self.arrays = arrays
        self.dims = dims
        self.n_rules = n_rules
        self.symbols = list(symbols)
        self.symbol_ids = {s: i for i, s in enumerate(symbols)}
        self.kb_fingerprint = kb_fingerprint
        self.check_shapes()

    @property
    def n_symbols(self) -> int:
        return len(self.symbols)

    def __getitem__(self, name: str) -> np.ndarray:
        return self.arrays[name]

    def __setitem__(self, name: str, value: np.ndarray) -> None:
        self.arrays[name] = value

    def check_shapes(self) -> None:
        d = self.dims
        lstm_in = d.enc_out + 2 * d.m1
        expected = {
            "char_Wx": (len(CHAR_VOCAB), d.char_hidden),
            "char_Wh": (d.char_hidden, d.char_hidden),
            "char_b": (d.char_hidden,),
            "enc_W1": (d.char_hidden, d.head_hidden),
            "enc_b1": (d.head_hidden,),
            "enc_W2": (d.head_hidden, d.enc_out),
            "enc_b2": (d.enc_out,),
            "lstm_W": (lstm_in + d.hidden, 4 * d.hidden),
            "lstm_b": (4 * d.hidden,),
            "end_W1": (d.hidden, d.head_hidden),
            "end_b1": (d.head_hidden,),
            "end_W2": (d.head_hidden, 1),
            "end_b2": (1,),
            "rule_W1": (d.hidden, d.head_hidden),
            "rule_b1": (d.head_hidden,),
            "rule_W2": (d.head_hidden, self.n_rules),
            "rule_b2": (self.n_rules,),
            "var_W1": (d.m2, d.head_hidden),
            "var_b1": (d.head_hidden,),
            "var_W2": (d.head_hidden, self.n_symbols),
            "var_b2": (self.n_symbols,),
            "M_rule": (self.n_rules, d.m1),
            "M_var": (self.n_symbols, d.m2),
        }
        for name, shape in expected.items():
            if name not in self.arrays:
                raise ShapeError(f"missing parameter {name}")
            if self.arrays[name].shape != shape:
                raise ShapeError(
                    f"{name}: expected {shape}, got {self.arrays[name].shape}")

    def copy(self) -> "ModelParams":
        return ModelParams({k: v.copy() for k, v in self.arrays.items()},
                           self.dims, self.n_rules, self.symbols,
                           self.kb_fingerprint)

    # -- persistence -------------------------------------------------------

    def save(self, path) -> None:
        meta = {
            "version": CHECKPOINT_VERSION,
            "dims": vars(self.dims),
            "n_rules": self.n_rules,
            "symbols": self.symbols,
            "kb_fingerprint": self.kb_fingerprint,
        }
        np.savez(path, __meta__=np.frombuffer(
            json.dumps(meta).encode("utf-8"), dtype=np.uint8), **self.arrays)

    @classmethod
    def load(cls, path, kb_fingerprint: Optional[str] = None) -> "ModelParams":
        data = np.load(path)
        meta = json.loads(bytes(data["__meta__"]).decode("utf-8"))
        if meta.get("version") != CHECKPOINT_VERSION:
            raise FormatError(0, f"unsupported checkpoint version {meta.get('version')}")
        if kb_fingerprint is not None and meta["kb_fingerprint"] != kb_fingerprint:
            raise ShapeError(
                "checkpoint was trained against a different knowledge base "
                f"(fingerprint {meta['kb_fingerprint'][:12]}..., "
                f"expected {kb_fingerprint[:12]}...)")
        arrays = {k: data[k] for k in data.files if k != "__meta__"}
        return cls(arrays, ModelDims(**meta["dims"]), meta["n_rules"],
                   meta["symbols"], meta["kb_fingerprint"])


def init_params(n_rules: int, symbols: List[str], kb_fingerprint: str,
                dims: Optional[ModelDims] = None, seed: int = 0,
                scale: float = 0.1) -> ModelParams:
    dims = dims or ModelDims()
    rng = np.random.default_rng(seed)
    n2 = len(symbols)
    lstm_in = dims.enc_out + 2 * dims.m1

    def w(*shape):
        return rng.normal(0.0, scale, size=shape)

    def b(*shape):
        return np.zeros(shape)

    arrays = {
        "char_Wx": w(len(CHAR_VOCAB), dims.char_hidden),
        "char_Wh": w(dims.char_hidden, dims.char_hidden),
        "char_b": b(dims.char_hidden),
        "enc_W1": w(dims.char_hidden, dims.head_hidden),
        "enc_b1": b(dims.head_hidden),
        "enc_W2": w(dims.head_hidden, dims.enc_out),
        "enc_b2": b(dims.enc_out),
        "lstm_W": w(lstm_in + dims.hidden, 4 * dims.hidden),
        "lstm_b": b(4 * dims.hidden),
        "end_W1": w(dims.hidden, dims.head_hidden),
        "end_b1": b(dims.head_hidden),
        "end_W2": w(dims.head_hidden, 1),
        "end_b2": b(1),
        "rule_W1": w(dims.hidden, dims.head_hidden),
        "rule_b1": b(dims.head_hidden),
        "rule_W2": w(dims.head_hidden, n_rules),
        "rule_b2": b(n_rules),
        "var_W1": w(dims.m2, dims.head_hidden),
        "var_b1": b(dims.head_hidden),
        "var_W2": w(dims.head_hidden, n2),
        "var_b2": b(n2),
        "M_rule": w(n_rules, dims.m1),
        "M_var": w(n2, dims.m2),
    }
    return ModelParams(arrays, dims, n_rules, symbols, kb_fingerprint)


def load_pretrained_vectors(path, symbols: List[str], dim: int = 300,
                            seed: int = 0, scale: float = 0.1
                            ) -> Tuple[np.ndarray, int]:
    """Initialize an embedding matrix from a word-vector text file.

    File lines are `token v1 ... vdim`, whitespace separated. Rows for
    symbols found in the file take the file vector; the rest are seeded
    random normal. Returns (matrix, coverage count).
    """
    wanted = {s: i for i, s in enumerate(symbols)}
    rng = np.random.default_rng(seed)
    matrix = rng.normal(0.0, scale, size=(len(symbols), dim))
    coverage = 0
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            parts = line.rstrip("\n").split()
            if not parts:
                continue
            token, values = parts[0], parts[1:]
            if token not in wanted:
                continue
            if len(values) != dim:
                raise FormatError(
                    lineno, f"expected {dim} values, found {len(values)}")
            try:
                matrix[wanted[token]] = np.array([float(v) for v in values])
            except ValueError as exc:
                raise FormatError(lineno, str(exc)) from None
            coverage += 1
    return matrix, coverage
