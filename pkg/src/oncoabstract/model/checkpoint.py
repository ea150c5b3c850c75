"""Bit-exact binary checkpoints.

Layout: 8-byte magic, 8-byte little-endian header length, canonical JSON
header (format version, model config, vocab hash, ordered parameter table
with shapes and dtypes), then the raw little-endian parameter payload in
header order.
"""

from __future__ import annotations

import json
import os

import numpy as np

from .. import numcore as nc
from .config import ModelConfig
from .network import Model

MAGIC = b"OABCKPT1"
FORMAT = 1


class CheckpointError(ValueError):
    pass


def _header(model: Model) -> dict:
    names = sorted(model.params)
    return {
        "format": FORMAT,
        "config": model.config.to_dict(),
        "vocab_hash": model.vocab_hash,
        "params": [
            {"name": n, "shape": list(model.params[n].data.shape),
             "dtype": str(model.params[n].data.dtype)}
            for n in names
        ],
    }


def save_checkpoint(model: Model, path: str) -> None:
    header = _header(model)
    header_bytes = json.dumps(header, sort_keys=True, separators=(",", ":")).encode("utf-8")
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(len(header_bytes).to_bytes(8, "little"))
        fh.write(header_bytes)
        for entry in header["params"]:
            arr = model.params[entry["name"]].data
            fh.write(arr.astype(arr.dtype.newbyteorder("<"), copy=False).tobytes())


def load_checkpoint(path: str, expect_vocab_hash: str | None = None) -> Model:
    """Load a checkpoint; refuses on version or vocab-hash mismatch."""
    with open(path, "rb") as fh:
        magic = fh.read(len(MAGIC))
        if magic != MAGIC:
            raise CheckpointError(f"{path}: not a checkpoint file")
        header_len = int.from_bytes(fh.read(8), "little")
        header = json.loads(fh.read(header_len).decode("utf-8"))
        if header.get("format") != FORMAT:
            raise CheckpointError(f"{path}: unsupported checkpoint format "
                                  f"{header.get('format')} (expected {FORMAT})")
        if expect_vocab_hash is not None and header["vocab_hash"] != expect_vocab_hash:
            raise CheckpointError(
                f"{path}: vocabulary hash mismatch (checkpoint "
                f"{header['vocab_hash'][:12]}..., expected {expect_vocab_hash[:12]}...)")
        config = ModelConfig.from_dict(header["config"])
        params = {}
        for entry in header["params"]:
            dtype = np.dtype(entry["dtype"]).newbyteorder("<")
            count = int(np.prod(entry["shape"])) if entry["shape"] else 1
            raw = fh.read(count * dtype.itemsize)
            if len(raw) != count * dtype.itemsize:
                raise CheckpointError(f"{path}: truncated payload at {entry['name']}")
            arr = np.frombuffer(raw, dtype=dtype).reshape(entry["shape"]).copy()
            # construct directly so the stored dtype survives bit-exactly
            tensor = nc.Tensor(arr, requires_grad=True, name=entry["name"])
            params[entry["name"]] = tensor
    return Model(config, header["vocab_hash"], params=params)
