"""``disckit`` command-line front end.

    disckit <toy|convergence|rank|bench|estimate> [--seed N] [--out DIR]
            [--format json|csv] [--config FILE] ...

Option values come from flags, then from the ``--config`` file (flat
``key = value`` lines, ``#`` comments, keys are the long option names with
dashes or underscores), then from built-in defaults. Unknown config keys are
rejected.

Exit codes: 0 success, 1 usage, 2 data or parse error, 3 numeric failure.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from pathlib import Path

import numpy as np

from .core import HINGE, LOGISTIC, HypothesisClassSpec, LabeledDataset, UnlabeledDataset
from .disc import (
    default_class,
    direction_net,
    direction_threshold_grid,
    estimate_dh,
    estimate_sdisc,
    rank_sources,
    xdisc_bruteforce,
)
from .formats import read_instance, write_results
from .ingest import even_odd_labels, load_mnist, read_idx, scale_pixels
from .learner import TrainConfig

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_NUMERIC = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


# --- option table -------------------------------------------------------------

def _int_list(text) -> list:
    text = str(text).strip()
    if not text:
        return []
    try:
        return [int(tok) for tok in text.split(",") if tok.strip()]
    except ValueError:
        raise UsageError(f"expected comma-separated integers, got {text!r}") from None


def _float_list(text) -> list:
    text = str(text).strip()
    if not text:
        return []
    try:
        return [float(tok) for tok in text.split(",") if tok.strip()]
    except ValueError:
        raise UsageError(f"expected comma-separated numbers, got {text!r}") from None


def _choice(*allowed):
    def conv(text):
        if text not in allowed:
            raise UsageError(f"expected one of {', '.join(allowed)}, got {text!r}")
        return text
    return conv


def _bool_list(text) -> list:
    out = []
    for tok in str(text).split(","):
        tok = tok.strip().lower()
        if tok in ("1", "clean", "true", "yes"):
            out.append(True)
        elif tok in ("0", "noisy", "false", "no"):
            out.append(False)
        elif tok:
            raise UsageError(f"clean tags must be 1/0 (or clean/noisy), got {tok!r}")
    return out


def _positive_int(text) -> int:
    try:
        v = int(text)
    except ValueError:
        raise UsageError(f"expected an integer, got {text!r}") from None
    if v < 1:
        raise UsageError(f"expected a positive integer, got {v}")
    return v


def _nonneg_int(text) -> int:
    try:
        v = int(text)
    except ValueError:
        raise UsageError(f"expected an integer, got {text!r}") from None
    if v < 0:
        raise UsageError(f"expected a nonnegative integer, got {v}")
    return v


def _positive_float(text) -> float:
    try:
        v = float(text)
    except ValueError:
        raise UsageError(f"expected a number, got {text!r}") from None
    if not v > 0:
        raise UsageError(f"expected a positive number, got {v}")
    return v


# (dest, type, default, help); None default means "not set"
COMMON = [
    ("seed", _nonneg_int, 0, "global seed"),
    ("out", str, ".", "output directory"),
    ("format", _choice("json", "csv"), "json", "output format"),
]
TRAINING = [
    ("surrogate", _choice("hinge", "logistic"), "hinge", "surrogate loss for training"),
    ("epochs", _positive_int, 2000, "maximum epochs"),
    ("eta0", _positive_float, 1.0, "initial step size"),
    ("lambda", _positive_float, None, "norm bound of the class (default from the data)"),
]
COMMANDS = {
    "toy": COMMON + TRAINING + [
        ("n_per_class", _positive_int, 200, "points per class and domain"),
    ],
    "convergence": COMMON + TRAINING + [
        ("n_grid", _int_list, "1000,2000,4000,8000", "comma-separated sample sizes"),
        ("mnist_images", str, None, "IDX image file (optional; synthetic digits otherwise)"),
        ("mnist_labels", str, None, "IDX label file matching --mnist-images"),
    ],
    "rank": COMMON + [
        ("surrogate", _choice("hinge", "logistic"), "hinge", "surrogate loss for training"),
        ("epochs", _positive_int, 1000, "maximum epochs"),
        ("eta0", _positive_float, 10.0, "initial step size"),
        ("lambda", _positive_float, None, "norm bound of the class (default from the data)"),
        ("target", str, None, "target file (instance or IDX images)"),
        ("sources", str, None, "comma-separated source files (instance, or IMAGES.idx+LABELS.idx)"),
        ("clean", _bool_list, None, "comma-separated clean tags (1/0) for the sources"),
        ("measure", _choice("sdisc", "dh", "xdisc"), "sdisc", "discrepancy measure"),
        ("top_k", _positive_int, 5, "size of the top group for the clean count"),
        ("synthetic", _choice("yes", "no"), "no", "run the built-in clean/noisy synthetic task"),
        ("sigmas", _float_list, "30,40,50", "noise levels of the synthetic task"),
        ("reps", _positive_int, 5, "repetitions of the synthetic task"),
        ("n", _positive_int, 2000, "examples per domain in the synthetic task"),
    ],
    "bench": COMMON + TRAINING + [
        ("sizes", _int_list, "100,200,400", "comma-separated points per domain"),
        ("repeats", _positive_int, 3, "timed runs per cell (median reported)"),
    ],
    "estimate": [
        ("seed", _nonneg_int, 0, "global seed"),
        ("out", str, None, "directory for estimate.json (stdout only when unset)"),
        ("format", _choice("json", "csv"), "json", "output format"),
    ] + TRAINING + [
        ("source", str, None, "labeled source file"),
        ("target", str, None, "target file"),
        ("measure", _choice("sdisc", "dh", "xdisc"), "sdisc", "discrepancy measure"),
        ("candidates", _choice("path", "endpoints"), "path", "candidate set of the estimators"),
        ("grid", str, "auto", "xdisc grid: auto (1-D thresholds) or directions:K[:T]"),
    ],
}


def _flag(dest: str) -> str:
    return "--" + dest.replace("_", "-")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="disckit", description="Domain discrepancy estimation and experiment harnesses.")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)
    for name, opts in COMMANDS.items():
        sp = sub.add_parser(name, argument_default=argparse.SUPPRESS)
        sp.add_argument("--config", help="key=value config file")
        for dest, _typ, default, help_ in opts:
            shown = "" if default is None else f" (default: {default})"
            sp.add_argument(_flag(dest), dest=dest, help=help_ + shown)
    return p


def read_config(path) -> dict:
    out = {}
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise UsageError(f"cannot read config file {path}: {exc}") from None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, val = line.partition("=")
        if not sep:
            raise UsageError(f"{path}:{lineno}: expected key = value")
        out[key.strip().replace("-", "_")] = val.strip()
    return out


def resolve(command: str, ns: argparse.Namespace) -> dict:
    """Merge flags over config-file values over defaults, converting each."""
    opts = COMMANDS[command]
    known = {d for d, *_ in opts}
    file_vals = read_config(ns.config) if getattr(ns, "config", None) else {}
    unknown = sorted(set(file_vals) - known)
    if unknown:
        raise UsageError(f"unknown config key(s) for {command}: {', '.join(unknown)}")
    flags = vars(ns)
    out = {}
    for dest, typ, default, _ in opts:
        if dest in flags:
            raw = flags[dest]
        elif dest in file_vals:
            raw = file_vals[dest]
        else:
            raw = default
        out[dest] = None if raw is None else typ(raw)
    return out


# --- output -----------------------------------------------------------------------

def _cell(v):
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, (list, tuple)):
        return ";".join("" if x is None else str(_cell(x)) for x in v)
    if v is None:
        return ""
    return v


def _jsonable(v):
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, (np.floating,)):
        return float(v)
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, np.bool_):
        return bool(v)
    return v


def write_rows(out_dir: Path, name: str, rows: list, fmt: str, meta: dict) -> Path:
    out_dir.mkdir(parents=True, exist_ok=True)
    if fmt == "json":
        path = out_dir / f"{name}.json"
        payload = dict(meta, rows=rows)
        path.write_text(json.dumps(_jsonable(payload), indent=2, sort_keys=True) + "\n")
        return path
    path = out_dir / f"{name}.csv"
    buf = io.StringIO()
    fields = list(rows[0].keys()) if rows else []
    w = csv.DictWriter(buf, fieldnames=fields, lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow({k: _cell(_jsonable(v)) for k, v in r.items()})
    path.write_text(buf.getvalue())
    return path


def _train_cfg(o: dict) -> TrainConfig:
    return TrainConfig(
        surrogate=HINGE if o["surrogate"] == "hinge" else LOGISTIC,
        max_epochs=o["epochs"],
        eta0=o["eta0"],
        norm_bound=o.get("lambda"),
    )


def _meta(command: str, o: dict) -> dict:
    return {"command": command, "options": {k: v for k, v in o.items() if k not in ("out", "format")}}


# --- data loading -------------------------------------------------------------------

def _is_idx(path: str) -> bool:
    return path.endswith((".idx", ".idx.gz")) or "-idx" in Path(path).name


def load_dataset(spec: str, labeled: bool):
    """Instance file, IDX image file, or ``IMAGES+LABELS`` IDX pair."""
    if "+" in spec:
        images, labels = spec.split("+", 1)
        x, digits = load_mnist(images, labels)
        return LabeledDataset(scale_pixels(x), even_odd_labels(digits))
    if _is_idx(spec):
        img = read_idx(spec)
        x = img.array().reshape(img.dims[0], -1).astype(float)
        data = UnlabeledDataset(scale_pixels(x))
    else:
        data = read_instance(spec)
    if labeled and not isinstance(data, LabeledDataset):
        raise ValueError(f"{spec}: a labeled source is required (add '# labeled: yes')")
    return data


# --- commands -----------------------------------------------------------------------

def cmd_toy(o: dict) -> int:
    from .experiments import run_toy, toy_points

    row = run_toy(o["seed"], o["n_per_class"], _train_cfg(o))
    out = Path(o["out"])
    meta = _meta("toy", o)
    p1 = write_rows(out, "toy_results", [row], o["format"], meta)
    p2 = write_rows(out, "toy_points", toy_points(o["seed"], o["n_per_class"]), o["format"], meta)
    for k, v in row.items():
        if k != "seed":
            print(f"{k:16s} {v:.4f}")
    print(f"wrote {p1} and {p2}")
    return EXIT_OK


def cmd_convergence(o: dict) -> int:
    from .experiments import DigitPool, run_convergence

    grid = o["n_grid"]
    if not grid:
        raise UsageError("--n-grid must list at least one size")
    pool = None
    if o["mnist_images"] or o["mnist_labels"]:
        if not (o["mnist_images"] and o["mnist_labels"]):
            raise UsageError("--mnist-images and --mnist-labels go together")
        pool = DigitPool(*load_mnist(o["mnist_images"], o["mnist_labels"]))
    rows = run_convergence(grid, o["seed"], pool, _train_cfg(o))
    path = write_rows(Path(o["out"]), "convergence", rows, o["format"], _meta("convergence", o))
    print(f"wrote {path}")
    return EXIT_OK


def cmd_rank(o: dict) -> int:
    from .experiments import run_source_selection

    cfg = _train_cfg(o)
    if o["synthetic"] == "yes":
        if not o["sigmas"]:
            raise UsageError("--sigmas must list at least one noise level")
        rows = run_source_selection(o["seed"], o["sigmas"], o["reps"], o["n"], ("sdisc", "dh"), cfg)
        path = write_rows(Path(o["out"]), "rank_synthetic", rows, o["format"], _meta("rank", o))
        for sigma in o["sigmas"]:
            for m in ("sdisc", "dh"):
                sc = [r["score"] for r in rows if r["sigma"] == sigma and r["measure"] == m]
                print(f"sigma={sigma:g} {m:5s} scores={sc} mean={float(np.mean(sc)):.2f}")
        print(f"wrote {path}")
        return EXIT_OK
    if not o["target"] or not o["sources"]:
        raise UsageError("rank needs --target and --sources (or --synthetic yes)")
    target = load_dataset(o["target"], labeled=False)
    sources = [load_dataset(s.strip(), labeled=True) for s in o["sources"].split(",") if s.strip()]
    if not sources:
        raise UsageError("--sources must list at least one file")
    clean = o["clean"]
    if clean is not None and len(clean) != len(sources):
        raise UsageError("--clean must give one tag per source")
    r = rank_sources(target, sources, o["measure"], cfg=cfg, clean=clean, top_k=o["top_k"])
    rows = [{"source": i, "value": v, "rank": r.ranks[i], "error": r.errors.get(i, "")} for i, v in enumerate(r.values)]
    meta = dict(_meta("rank", o), order=r.order, ties=r.ties, clean_in_top=r.clean_in_top)
    path = write_rows(Path(o["out"]), "ranking", rows, o["format"], meta)
    print(json.dumps(_jsonable(r.to_dict()), sort_keys=True))
    print(f"wrote {path}")
    return EXIT_OK


def cmd_bench(o: dict) -> int:
    from .experiments import run_bench

    sizes = o["sizes"]
    if not sizes:
        raise UsageError("--sizes must list at least one size")
    if min(sizes) < 2:
        raise UsageError("every size must be >= 2")
    rows = run_bench(sizes, o["repeats"], o["seed"], _train_cfg(o))
    path = write_rows(Path(o["out"]), "bench", rows, o["format"], _meta("bench", o))
    for r in rows:
        print(f"n={r['n']:<6d} {r['method']:17s} {r['median_seconds']:.4f}s")
    print(f"wrote {path}")
    return EXIT_OK


def _grid_spec(spec: str):
    """``None`` for 'auto', else ``(directions, max_thresholds or None)``."""
    if spec == "auto":
        return None
    parts = spec.split(":")
    if parts[0] != "directions" or len(parts) not in (2, 3):
        raise UsageError("--grid must be 'auto' or 'directions:K[:T]'")
    k = _positive_int(parts[1])
    t = _positive_int(parts[2]) if len(parts) == 3 else None
    return k, t


def cmd_estimate(o: dict) -> int:
    if not o["source"] or not o["target"]:
        raise UsageError("estimate needs --source and --target")
    grid_spec = _grid_spec(o["grid"])
    source = load_dataset(o["source"], labeled=True)
    target = load_dataset(o["target"], labeled=False)
    cfg = _train_cfg(o)
    if o["measure"] == "xdisc":
        cls = None
        if grid_spec is not None:
            k, t = grid_spec
            dirs = direction_net(k, source.features.shape[1])
            grid = direction_threshold_grid(source, target, directions=dirs, max_thresholds=t)
            cls = HypothesisClassSpec(grid[0].basis, 1.0, grid)
        rep = xdisc_bruteforce(source.features, target.features, cls)
    else:
        cls = default_class(source, target, norm_bound=o["lambda"])
        if o["measure"] == "sdisc":
            rep = estimate_sdisc(source, target.features, cls, cfg, candidates=o["candidates"])
        else:
            rep = estimate_dh(source.features, target.features, cls, cfg, candidates=o["candidates"])
    payload = rep.to_dict()
    text = json.dumps(_jsonable(payload), indent=2, sort_keys=True)
    print(text)
    if o["out"] is not None:
        Path(o["out"]).mkdir(parents=True, exist_ok=True)
        write_results(Path(o["out"]) / "estimate.json", _jsonable(payload))
    return EXIT_OK


HANDLERS = {
    "toy": cmd_toy,
    "convergence": cmd_convergence,
    "rank": cmd_rank,
    "bench": cmd_bench,
    "estimate": cmd_estimate,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
        if not ns.command:
            raise UsageError(parser.format_usage().strip())
        opts = resolve(ns.command, ns)
        return HANDLERS[ns.command](opts)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ArithmeticError as exc:
        # divergence, overflow guards
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (OSError, ValueError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
