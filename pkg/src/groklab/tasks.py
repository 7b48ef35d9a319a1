"""Modular-arithmetic datasets over Z_p: enumeration, splits, null labels."""

from __future__ import annotations

import csv
import json
import math
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import NamedTuple

from .rng import SplitMix64

OPS = ("add", "sub", "mul", "div")


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    for d in range(2, math.isqrt(n) + 1):
        if n % d == 0:
            return False
    return True


def mod_inverse(v: int, p: int) -> int:
    """Inverse of v modulo p by the extended Euclidean algorithm."""
    old_r, r = v % p, p
    old_s, s = 1, 0
    while r:
        q = old_r // r
        old_r, r = r, old_r - q * r
        old_s, s = s, old_s - q * s
    if old_r != 1:
        raise ZeroDivisionError(f"{v} has no inverse modulo {p}")
    return old_s % p


@dataclass(frozen=True)
class TaskSpec:
    p: int
    op: str = "add"
    split_fraction: float = 0.5
    split_seed: int = 0

    def __post_init__(self):
        if self.op not in OPS:
            raise ValueError(f"op must be one of {OPS}, got {self.op!r}")
        if not is_prime(self.p):
            raise ValueError(f"p={self.p} is not prime")
        if not 0 < self.split_fraction <= 1:
            raise ValueError("split_fraction must lie in (0, 1]")
        if self.split_seed < 0:
            raise ValueError("split_seed must be unsigned")


class ExamplePair(NamedTuple):
    u: int
    v: int
    y: int


@dataclass
class DatasetSplit:
    train: list[ExamplePair]
    test: list[ExamplePair]


def eval_mod_op(u: int, v: int, op: str, p: int) -> int:
    if not (0 <= u < p and 0 <= v < p):
        raise ValueError(f"operands ({u}, {v}) outside Z_{p}")
    if op == "add":
        return (u + v) % p
    if op == "sub":
        return (u - v) % p
    if op == "mul":
        return (u * v) % p
    if op == "div":
        if v == 0:
            raise ZeroDivisionError("division by zero in Z_p")
        return (u * mod_inverse(v, p)) % p
    raise ValueError(f"unknown op {op!r}")


def enumerate_pairs(spec: TaskSpec) -> list[ExamplePair]:
    """All valid (u, v, y) in lexicographic (u, v) order."""
    p = spec.p
    v_lo = 1 if spec.op == "div" else 0
    return [ExamplePair(u, v, eval_mod_op(u, v, spec.op, p))
            for u in range(p) for v in range(v_lo, p)]


def split_dataset(pairs: list[ExamplePair], fraction: float, seed: int) -> DatasetSplit:
    """Seeded Fisher-Yates shuffle; the first floor(fraction*N) pairs train."""
    if not pairs:
        raise ValueError("cannot split an empty pair list")
    if not 0 < fraction <= 1:
        raise ValueError("fraction must lie in (0, 1]")
    order = SplitMix64(seed).shuffle(list(range(len(pairs))))
    n_train = math.floor(fraction * len(pairs))
    return DatasetSplit(train=[pairs[i] for i in order[:n_train]],
                        test=[pairs[i] for i in order[n_train:]])


def make_split(spec: TaskSpec) -> DatasetSplit:
    return split_dataset(enumerate_pairs(spec), spec.split_fraction, spec.split_seed)


def random_label_dataset(pairs: list[ExamplePair], seed: int, p: int | None = None) -> list[ExamplePair]:
    """Replace every label with an independent uniform draw from Z_p.

    ``p`` defaults to one more than the largest operand, which is exact for
    any full enumeration.
    """
    if not pairs:
        raise ValueError("empty pair list")
    if p is None:
        p = max(max(e.u, e.v) for e in pairs) + 1
    rng = SplitMix64(seed)
    return [ExamplePair(e.u, e.v, rng.below(p)) for e in pairs]


def write_dataset(path: str | Path, spec: TaskSpec, pairs: list[ExamplePair],
                  split: DatasetSplit | None = None, label_seed: int | None = None) -> Path:
    """Write ``u,v,y`` CSV plus a JSON sidecar (same stem) describing the task.

    The sidecar lists the row indices of the training pairs so the split can
    be recovered without re-running the shuffle.
    """
    from .io import atomic_write_text

    path = Path(path)
    lines = ["u,v,y"] + [f"{e.u},{e.v},{e.y}" for e in pairs]
    atomic_write_text(path, "\n".join(lines) + "\n")
    meta = {"task": asdict(spec), "n_pairs": len(pairs), "label_seed": label_seed}
    if split is not None:
        index = {(e.u, e.v): i for i, e in enumerate(pairs)}
        meta["n_train"] = len(split.train)
        meta["n_test"] = len(split.test)
        meta["train_rows"] = [index[(e.u, e.v)] for e in split.train]
    sidecar = path.with_suffix(".json")
    atomic_write_text(sidecar, json.dumps(meta, indent=1) + "\n")
    return sidecar


def read_dataset(path: str | Path) -> tuple[TaskSpec, list[ExamplePair], DatasetSplit | None]:
    path = Path(path)
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if header != ["u", "v", "y"]:
            raise ValueError(f"{path}: expected header u,v,y, got {header}")
        pairs = [ExamplePair(int(a), int(b), int(c)) for a, b, c in reader]
    meta = json.loads(path.with_suffix(".json").read_text())
    spec = TaskSpec(**meta["task"])
    split = None
    if "train_rows" in meta:
        rows = meta["train_rows"]
        chosen = set(rows)
        split = DatasetSplit(train=[pairs[i] for i in rows],
                             test=[e for i, e in enumerate(pairs) if i not in chosen])
    return spec, pairs, split
