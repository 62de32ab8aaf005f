"""Plain-text instance files and JSON results files.

Instance file: one example per line, comma-separated features. Blank
lines and lines starting with ``#`` are ignored, except the directive
``# labeled: yes`` which says the last column holds a +-1 label. Floats are
written in shortest round-trip form, so write-then-read is exact.

Results file: a JSON object with at least ``measure``, ``value`` and
``witness_params`` (see ``docs/formats.md``).
"""
from __future__ import annotations

import json
from pathlib import Path
from typing import Union

import numpy as np

from .core import LabeledDataset, UnlabeledDataset, as_features

__all__ = [
    "InstanceFormatError",
    "read_instance",
    "write_instance",
    "format_instance",
    "parse_instance",
    "write_results",
    "read_results",
]


class InstanceFormatError(ValueError):
    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line


def parse_instance(text: str) -> Union[LabeledDataset, UnlabeledDataset]:
    labeled = False
    rows, width = [], None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            key, _, val = line[1:].partition(":")
            if key.strip().lower() == "labeled":
                if val.strip().lower() not in ("yes", "no"):
                    raise InstanceFormatError("labeled directive must be 'yes' or 'no'", lineno)
                labeled = val.strip().lower() == "yes"
            continue
        try:
            vals = [float(tok) for tok in line.split(",")]
        except ValueError:
            raise InstanceFormatError(f"not a comma-separated list of numbers: {raw!r}", lineno) from None
        if width is None:
            width = len(vals)
        elif len(vals) != width:
            raise InstanceFormatError(f"expected {width} columns, got {len(vals)}", lineno)
        rows.append(vals)
    if not rows:
        raise InstanceFormatError("no examples", 0)
    arr = np.array(rows, dtype=float)
    if not labeled:
        return UnlabeledDataset(arr)
    if arr.shape[1] < 2:
        raise InstanceFormatError("labeled rows need at least one feature and a label", 0)
    return LabeledDataset(arr[:, :-1], arr[:, -1])


def read_instance(path) -> Union[LabeledDataset, UnlabeledDataset]:
    return parse_instance(Path(path).read_text())


def format_instance(data) -> str:
    x = as_features(data)
    labeled = isinstance(data, LabeledDataset)
    lines = [f"# labeled: {'yes' if labeled else 'no'}"]
    for i, row in enumerate(x):
        toks = [repr(float(v)) for v in row]
        if labeled:
            toks.append(str(int(data.labels[i])))
        lines.append(",".join(toks))
    return "\n".join(lines) + "\n"


def write_instance(path, data) -> None:
    Path(path).write_text(format_instance(data))


def write_results(path, payload: dict) -> None:
    for key in ("measure", "value", "witness_params"):
        if key not in payload:
            raise ValueError(f"results payload lacks {key!r}")
    Path(path).write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")


def read_results(path) -> dict:
    out = json.loads(Path(path).read_text())
    for key in ("measure", "value", "witness_params"):
        if key not in out:
            raise ValueError(f"results file lacks {key!r}")
    return out
