"""Command-line front end: one subcommand per study.

Configs are JSON objects.  Every key is optional except that the study must
be known (from the subcommand or a ``study`` key); missing keys take the
defaults in :data:`SCHEMA`.  Flags override file values, and each run writes
its fully resolved config next to the results::

    <output_dir>/<study>-<seed>/
        resolved-config.json
        run.json
        metrics.csv
        curves/*.csv

Exit codes: 0 success, 2 bad config or input, 3 numerical consistency
failure, 4 I/O failure.
"""

from __future__ import annotations

import argparse
import io
import json
import math
import os
import sys
from typing import Any, Callable, Sequence

import numpy as np

from .densesim import NoiseModel
from .errors import ConfigError, NumericalConsistencyError
from .experiments import (
    H3_REFERENCE,
    PathStudySpec,
    be_path_experiment,
    dressing_study,
    h3_paths,
    path_study,
    primitive_points,
    primitive_sweep,
    random_circuit_study,
    shadows_demo,
)
from .experiments.paths import rotations_from_table
from .experiments.primitive import DEFAULT_MISMATCH_LEVELS
from .experiments.random_study import DEFAULT_LEVELS
from .pauli import PauliRotation, parse_pauli_sum, parse_word
from .shadows import write_shadows

STUDIES = ("primitive", "random", "path", "dressing", "be-path", "shadows-demo")
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
EXIT_IO = 4
SEED_LIMIT = 1 << 64
MODELS = tuple(m.value for m in NoiseModel)


# --- value checkers ---------------------------------------------------------
# Each returns the normalized value or raises ValueError with a short reason.

def _int(lo: int | None = None, hi: int | None = None, nullable: bool = False) -> Callable[[Any], Any]:
    def check(v):
        if v is None and nullable:
            return None
        if isinstance(v, bool) or not isinstance(v, int):
            raise ValueError(f"expected an integer, got {v!r}")
        if lo is not None and v < lo:
            raise ValueError(f"must be >= {lo}, got {v}")
        if hi is not None and v > hi:
            raise ValueError(f"must be <= {hi}, got {v}")
        return v
    return check


def _real(lo: float | None = None, hi: float | None = None) -> Callable[[Any], float]:
    def check(v):
        if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
            raise ValueError(f"expected a finite number, got {v!r}")
        if (lo is not None and v < lo) or (hi is not None and v > hi):
            raise ValueError(f"must lie in [{lo}, {hi}], got {v}")
        return float(v)
    return check


def _choice(options: Sequence[str]) -> Callable[[Any], str]:
    def check(v):
        if v not in options:
            raise ValueError(f"expected one of {list(options)}, got {v!r}")
        return v
    return check


def _list_of(item: Callable[[Any], Any], min_len: int = 1) -> Callable[[Any], list]:
    def check(v):
        if not isinstance(v, list):
            raise ValueError(f"expected a list, got {v!r}")
        if len(v) < min_len:
            raise ValueError(f"needs at least {min_len} entries")
        out = []
        for i, x in enumerate(v):
            try:
                out.append(item(x))
            except ValueError as exc:
                raise ValueError(f"[{i}]: {exc}") from None
        return out
    return check


def _string(v):
    if not isinstance(v, str):
        raise ValueError(f"expected a string, got {v!r}")
    return v


def _optional_path(v):
    return None if v is None else _string(v)


def parse_grid(text: str) -> list[float]:
    """``"start:stop:count"`` to ``count`` evenly spaced points, both ends included.

    Raises:
        ValueError: malformed text, ``count < 1``, or ``stop < start``.
    """
    parts = text.split(":")
    if len(parts) != 3:
        raise ValueError(f"grid {text!r} is not start:stop:count")
    try:
        start, stop = float(parts[0]), float(parts[1])
        count = int(parts[2])
    except ValueError:
        raise ValueError(f"grid {text!r} is not start:stop:count") from None
    if count < 1:
        raise ValueError(f"grid {text!r} needs a positive count")
    if stop < start:
        raise ValueError(f"grid {text!r} has a negative step")
    if count == 1 and stop != start:
        raise ValueError(f"grid {text!r} has one point but distinct ends")
    return np.linspace(start, stop, count).tolist()


def _grid(v):
    if isinstance(v, str):
        return parse_grid(v)
    vals = _list_of(_real())(v)
    if any(b < a for a, b in zip(vals, vals[1:])):
        raise ValueError("angle list must be non-decreasing")
    return vals


_P = _real(0.0, 1.0)
_ORDER = _int(1, 64)

SCHEMA: dict[str, dict[str, tuple[Any, Callable[[Any], Any]]]] = {
    "common": {
        "seed": (0, _int(0, SEED_LIMIT - 1)),
        "output_dir": ("out", _string),
    },
    "primitive": {
        "angles": ("0:1.5707963267948966:51", _grid),
        "noise": (0.002, _P),
        "model": ("global_per_exp", _choice(MODELS)),
        "mismatch_levels": (list(DEFAULT_MISMATCH_LEVELS), _list_of(_P)),
        "mismatch_model": ("local_per_gate", _choice(MODELS)),
        "order": (5, _ORDER),
        "qmi_form": ("watanabe", _choice(("watanabe", "kumar"))),
        "se_entropy": ("renyi2", _choice(("renyi2", "von_neumann"))),
    },
    "random": {
        "count": (1000, _int(100)),
        "noise_levels": (list(DEFAULT_LEVELS), _list_of(_P)),
        "model": ("local_per_exp", _choice(MODELS)),
        "n_subsets": (5, _int(1)),
        "subset_size": (None, _int(1, nullable=True)),
        "bins": (10, _int(1)),
        "stratify": ("joint", _choice(("joint", "marginal"))),
        "order": (5, _ORDER),
        "qmi_form": ("watanabe", _choice(("watanabe", "kumar"))),
        "se_entropy": ("renyi2", _choice(("renyi2", "von_neumann"))),
        "workers": (1, _int(1)),
    },
    "path": {
        "spec": (None, _optional_path),
        "noise_per_g": (0.0005, _P),
        "model": ("local_per_exp", _choice(MODELS)),
        "order": (5, _ORDER),
    },
    "dressing": {
        "point_angles": ([0.2, 0.401, 0.6, 0.8, 1.0], _list_of(_real())),
        "fixed_angle": (0.401, _real()),
        "hamiltonian_files": (None, lambda v: None if v is None else _list_of(_string)(v)),
        "n_terms": (19, _int(1, 256)),
        "noise": (0.002, _P),
        "model": ("local_per_gate", _choice(MODELS)),
        "shots_per_basis": (1000, _int(1)),
        "n_bases": (None, _int(1, nullable=True)),
        "k_groups": (10, _int(1)),
        "order": (5, _ORDER),
    },
    "be-path": {
        "noise": (0.035, _P),
        "model": ("local_per_gate", _choice(MODELS)),
        "shots_per_basis": (1000, _int(1)),
        "n_bases": (None, _int(1, nullable=True)),
        "resamples": (250, _int(0)),
        "order": (5, _ORDER),
        "scale": (2.0, _real()),
    },
    "shadows-demo": {
        "theta": (0.401, _real(0.0, math.pi / 2)),
        "noise": (0.01, _P),
        "model": ("local_per_gate", _choice(MODELS)),
        "shot_grid": ([10, 100, 1000], _list_of(_int(1))),
        "n_bases": (None, _int(1, nullable=True)),
        "k_groups": (10, _int(1)),
        "order": (5, _ORDER),
    },
}

_PATH_KEYS = {"path": ("spec",), "dressing": ("hamiltonian_files",)}


def validate_config(
    source: str | dict[str, Any],
    study: str | None = None,
    overrides: dict[str, Any] | None = None,
    base_dir: str | None = None,
) -> dict[str, Any]:
    """Resolve a config against :data:`SCHEMA`, collecting every problem.

    Args:
        source: path to a JSON file or an already-parsed mapping.
        study: study name; must agree with a ``study`` key when both exist.
        overrides: values that replace file values (command-line flags).
        base_dir: directory for relative file paths; defaults to the config
            file's directory, else the working directory.

    Returns:
        The resolved config with every default filled in and file paths made
        absolute.

    Raises:
        ConfigError: one message per bad key, all reported together.
    """
    if isinstance(source, str):
        try:
            with open(source, encoding="utf-8") as fh:
                raw = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{source}: not valid JSON ({exc.msg} at line {exc.lineno})") from None
        if base_dir is None:
            base_dir = os.path.dirname(os.path.abspath(source))
    else:
        raw = source
    if not isinstance(raw, dict):
        raise ConfigError("config must be a JSON object")
    base_dir = base_dir or os.getcwd()
    merged = dict(raw)
    override_keys = set()
    for k, v in (overrides or {}).items():
        if v is not None:
            merged[k] = v
            override_keys.add(k)

    errors: list[str] = []
    file_study = merged.pop("study", None)
    if study is None:
        study = file_study
    elif file_study is not None and file_study != study:
        errors.append(f"study: config says {file_study!r} but {study!r} was requested")
    if study not in STUDIES:
        raise ConfigError(errors + [f"study: expected one of {list(STUDIES)}, got {study!r}"])

    schema = {**SCHEMA["common"], **SCHEMA[study]}
    resolved: dict[str, Any] = {"study": study}
    for key in sorted(set(merged) - set(schema)):
        errors.append(f"{key}: unknown key for study {study!r}")
    for key, (default, check) in schema.items():
        value = merged.get(key, default)
        try:
            value = check(value)
        except ValueError as exc:
            errors.append(f"{key}: {exc}")
            continue
        if key in _PATH_KEYS.get(study, ()) and value is not None:
            rel = os.getcwd() if key in override_keys else base_dir
            if isinstance(value, list):
                value = [os.path.abspath(os.path.join(rel, v)) for v in value]
            else:
                value = os.path.abspath(os.path.join(rel, value))
        resolved[key] = value
    if study == "random" and not errors:
        size = resolved["subset_size"] or resolved["count"] // resolved["n_subsets"]
        if size * resolved["n_subsets"] > resolved["count"]:
            errors.append(f"subset_size: {resolved['n_subsets']} subsets of {size} exceed count {resolved['count']}")
    if study == "primitive" and "angles" in resolved:
        a = resolved["angles"]
        if a and (a[0] < -1e-3 or a[-1] > math.pi / 2 + 1e-3):
            errors.append("angles: primitive angles must lie in [0, pi/2]")
    if study == "dressing" and resolved.get("hamiltonian_files") is not None and "point_angles" in resolved:
        if len(resolved["hamiltonian_files"]) != len(resolved["point_angles"]):
            errors.append("hamiltonian_files: one file per entry of point_angles is required")
    if errors:
        raise ConfigError(errors)
    return resolved


# --- input files ------------------------------------------------------------

def read_state_vector(path: str) -> np.ndarray:
    """State vector from ``.npy`` or from text with ``re [im]`` per line, normalized."""
    if path.endswith(".npy"):
        vec = np.load(path).astype(complex).ravel()
    else:
        data = np.loadtxt(path, ndmin=2, comments="#")
        vec = data[:, 0] + (1j * data[:, 1] if data.shape[1] > 1 else 0)
    norm = np.linalg.norm(vec)
    if norm == 0:
        raise ValueError(f"{path}: zero state vector")
    return vec / norm


def read_hamiltonian(path: str):
    with open(path, encoding="utf-8") as fh:
        return parse_pauli_sum(fh)


_SPEC_KEYS = {"paths", "angle_scale", "reference", "labels", "target", "hamiltonian", "reference_energy"}


def load_path_spec(path: str | None, noise_per_g: float, model: str) -> PathStudySpec:
    """Build a :class:`PathStudySpec` from a JSON path-spec file.

    ``None`` gives the built-in four-path table.  File keys: ``paths``
    (``"table"`` or a list of paths, each a list of ``[coefficient, word]``),
    ``angle_scale`` (rotation angle per coefficient, default 2), ``reference``,
    ``labels``, ``target`` and ``hamiltonian`` (file paths relative to the
    spec file) and ``reference_energy``.
    """
    if path is None:
        return PathStudySpec(h3_paths(), H3_REFERENCE, noise_per_g=noise_per_g, model=model)
    with open(path, encoding="utf-8") as fh:
        try:
            raw = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"spec: {path} is not valid JSON ({exc.msg})") from None
    errors = [f"spec.{k}: unknown key" for k in sorted(set(raw) - _SPEC_KEYS)]
    scale = raw.get("angle_scale", 2.0)
    reference = raw.get("reference", H3_REFERENCE)
    n = len(reference) if isinstance(reference, str) else 0
    if not isinstance(reference, str) or not reference or set(reference) - {"0", "1"}:
        errors.append(f"spec.reference: expected a bitstring, got {reference!r}")
    table = raw.get("paths", "table")
    paths: list[list[PauliRotation]] = []
    if table == "table":
        paths = h3_paths(scale)
    elif isinstance(table, list) and table:
        for i, p in enumerate(table):
            try:
                pairs = [(float(c), str(w)) for c, w in p]
                paths.append(rotations_from_table(pairs, n, scale))
            except (TypeError, ValueError) as exc:
                errors.append(f"spec.paths[{i}]: {exc}")
    else:
        errors.append("spec.paths: expected 'table' or a nonempty list of paths")
    base = os.path.dirname(os.path.abspath(path))
    target = ham = None
    try:
        if raw.get("target") is not None:
            target = read_state_vector(os.path.join(base, raw["target"]))
        if raw.get("hamiltonian") is not None:
            ham = read_hamiltonian(os.path.join(base, raw["hamiltonian"]))
    except ValueError as exc:
        errors.append(f"spec: {exc}")
    if errors:
        raise ConfigError(errors)
    return PathStudySpec(paths, reference, target, ham, noise_per_g, model,
                         list(raw.get("labels", [])), raw.get("reference_energy"))


# --- study runners ----------------------------------------------------------

def run_study(cfg: dict[str, Any]):
    """Run the study described by a resolved config; returns ``(record, extras)``.

    ``extras`` maps file names to text written beside the record.
    """
    s = cfg["study"]
    if s == "primitive":
        rec = primitive_sweep(cfg["angles"], cfg["noise"], cfg["model"], cfg["mismatch_levels"],
                              cfg["mismatch_model"], cfg["order"], cfg["qmi_form"], cfg["se_entropy"], config=cfg)
        rec.seed = cfg["seed"]
        return rec, {}
    if s == "random":
        rec = random_circuit_study(cfg["count"], cfg["noise_levels"], cfg["seed"], cfg["model"], cfg["n_subsets"],
                                   cfg["subset_size"], cfg["bins"], cfg["stratify"], cfg["order"], cfg["qmi_form"],
                                   cfg["se_entropy"], cfg["workers"], config=cfg)
        return rec, {}
    if s == "path":
        spec = load_path_spec(cfg["spec"], cfg["noise_per_g"], cfg["model"])
        rec = path_study(spec, cfg["order"], config=cfg)
        rec.seed = cfg["seed"]
        return rec, {}
    if s == "dressing":
        hams = None
        if cfg["hamiltonian_files"] is not None:
            hams = [read_hamiltonian(p) for p in cfg["hamiltonian_files"]]
        points = primitive_points(cfg["point_angles"], hams, cfg["n_terms"], cfg["seed"])
        fixed = [PauliRotation(cfg["fixed_angle"], parse_word("YXXX", 4))]
        rec = dressing_study(points, fixed, "1100", cfg["noise"], cfg["model"], None, cfg["shots_per_basis"],
                             cfg["n_bases"], cfg["k_groups"], cfg["seed"], cfg["order"], config=cfg)
        return rec, {}
    if s == "be-path":
        rec = be_path_experiment(cfg["noise"], cfg["model"], cfg["shots_per_basis"], cfg["n_bases"], cfg["seed"],
                                 cfg["resamples"], cfg["order"], cfg["scale"], config=cfg)
        return rec, {}
    if s == "shadows-demo":
        rec, shadows = shadows_demo(cfg["theta"], cfg["noise"], cfg["model"], cfg["shot_grid"], cfg["n_bases"],
                                    cfg["seed"], cfg["k_groups"], cfg["order"], config=cfg)
        buf = io.StringIO()
        write_shadows(shadows, buf)
        return rec, {"shadows.txt": buf.getvalue()}
    raise ConfigError(f"study: unknown study {s!r}")


def output_path(cfg: dict[str, Any]) -> str:
    return os.path.join(cfg["output_dir"], f"{cfg['study']}-{cfg['seed']}")


def write_outputs(cfg: dict[str, Any], record, extras: dict[str, str]) -> str:
    out = output_path(cfg)
    record.write(out)
    with open(os.path.join(out, "resolved-config.json"), "w", encoding="utf-8", newline="\n") as fh:
        fh.write(json.dumps(cfg, indent=2, sort_keys=True) + "\n")
    for name, text in extras.items():
        with open(os.path.join(out, name), "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    return out


# --- argument parsing -------------------------------------------------------

def _json_value(text: str) -> Any:
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def _set_pair(text: str) -> tuple[str, Any]:
    key, sep, value = text.partition("=")
    if not sep or not key:
        raise argparse.ArgumentTypeError(f"expected KEY=VALUE, got {text!r}")
    return key, _json_value(value)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="noisefloor", description="Noise-floor studies of Pauli product formulas.")
    sub = parser.add_subparsers(dest="study", required=True, metavar="STUDY")
    helps = {
        "primitive": "angle sweep of the YXXX primitive",
        "random": "random product-formula correlation study",
        "path": "operator-ordering path study",
        "dressing": "Hamiltonian dressing on one fixed circuit",
        "be-path": "simulated depth experiment with shadows and postselection",
        "shadows-demo": "shadow estimates versus shot count",
    }
    for name in STUDIES:
        p = sub.add_parser(name, help=helps[name])
        p.add_argument("--config", help="JSON config file")
        p.add_argument("--seed", type=int, help="master seed")
        p.add_argument("--out", dest="output_dir", help="output directory (default: out)")
        p.add_argument("--noise", type=float, help="noise strength p")
        p.add_argument("--model", help=f"noise model, one of {', '.join(MODELS)}")
        p.add_argument("--set", dest="sets", action="append", type=_set_pair, default=[], metavar="KEY=VALUE",
                       help="override any config key; VALUE is parsed as JSON when possible")
        if name == "primitive":
            p.add_argument("--angles", help="angle grid start:stop:count")
        if name == "random":
            p.add_argument("--count", type=int, help="number of random circuits")
            p.add_argument("--workers", type=int, help="worker processes")
        if name == "path":
            p.add_argument("--spec", help="JSON path-spec file")
            p.add_argument("--noise-per-g", dest="noise_per_g", type=float, help="noise after each exponential")
    return parser


def _overrides(args: argparse.Namespace) -> dict[str, Any]:
    out: dict[str, Any] = {}
    for key in ("seed", "output_dir", "model", "angles", "count", "workers", "spec", "noise_per_g"):
        if getattr(args, key, None) is not None:
            out[key] = getattr(args, key)
    if args.noise is not None:
        if args.study == "random":
            out["noise_levels"] = [args.noise]
        elif args.study == "path":
            out["noise_per_g"] = args.noise
        else:
            out["noise"] = args.noise
    for key, value in args.sets:
        out[key] = value
    return out


def main(argv: Sequence[str] | None = None) -> int:
    """Entry point; returns the process exit code."""
    args = build_parser().parse_args(argv)
    try:
        source = args.config if args.config else {}
        cfg = validate_config(source, args.study, _overrides(args))
        record, extras = run_study(cfg)
        out = write_outputs(cfg, record, extras)
    except ConfigError as exc:
        print(f"noisefloor: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalConsistencyError as exc:
        print(f"noisefloor: numerical consistency failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except OSError as exc:
        print(f"noisefloor: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ValueError as exc:
        print(f"noisefloor: invalid input: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    print(f"wrote {out} ({len(record.rows)} rows, seed {cfg['seed']})")
    return 0


if __name__ == "__main__":
    sys.exit(main())
