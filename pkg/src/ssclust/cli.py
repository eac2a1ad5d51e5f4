"""Command-line pipeline: ingest, optional sketching, solve, cluster, export.

Stages run in a fixed order (ingest -> project -> solve -> spectral ->
export) and every run can drop a metadata file that records the effective
parameters as reloadable key=value lines, so a finished run can be
reproduced from its metadata alone.

Exit codes: 0 success, 2 configuration error, 3 input or format error,
4 solver divergence, 5 I/O error.
"""

import argparse
import glob as globlib
import os
import sys
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import __version__
from .admm import SolverConfig, solve_ssc
from .data import (
    export_convergence,
    export_heatmap,
    export_labels,
    frames_to_matrix,
    load_frames,
    normalize_columns,
    synth_union_of_subspaces,
)
from .errors import ConfigError, DivergenceError, InputError
from .projection import gaussian_matrix, project
from .spectral import AFFINITY_FORMULA, build_affinity, cluster

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_INPUT = 3
EXIT_DIVERGED = 4
EXIT_IO = 5

# config-file keys; every flag has exactly one of these
_INT_KEYS = ("max_iter", "k", "k_max", "spectral_seed", "restarts")
_FLOAT_KEYS = ("mu", "rho", "tol_primal", "tol_change")
_STR_KEYS = (
    "frames",
    "synth",
    "project",
    "out_labels",
    "out_w",
    "out_c",
    "out_conv",
    "out_meta",
)
_BOOL_KEYS = ("normalize",)
_ALL_KEYS = _INT_KEYS + _FLOAT_KEYS + _STR_KEYS + _BOOL_KEYS


@dataclass
class RunConfig:
    """Everything one pipeline run depends on, seeds included."""

    frames: Optional[str] = None
    synth: Optional[tuple] = None  # (K, d, D, n_per, sigma, seed)
    normalize: bool = False
    project: Optional[tuple] = None  # (m, seed)
    solver: SolverConfig = None
    k_override: Optional[int] = None
    k_max: Optional[int] = None
    spectral_seed: int = 0
    restarts: int = 10
    out_labels: Optional[str] = None
    out_w: Optional[str] = None
    out_c: Optional[str] = None
    out_conv: Optional[str] = None
    out_meta: Optional[str] = None

    def __post_init__(self):
        if self.solver is None:
            self.solver = SolverConfig()

    def validate(self):
        if (self.frames is None) == (self.synth is None):
            raise ConfigError(
                "exactly one input source required: --frames or --synth"
            )
        if self.project is not None and self.project[0] < 1:
            raise ConfigError(f"projection m must be >= 1, got {self.project[0]}")
        if self.k_override is not None and self.k_override < 1:
            raise ConfigError(f"k must be >= 1, got {self.k_override}")
        if self.k_max is not None and self.k_max < 1:
            raise ConfigError(f"k_max must be >= 1, got {self.k_max}")
        if self.restarts < 1:
            raise ConfigError(f"restarts must be >= 1, got {self.restarts}")


def parse_synth_spec(text):
    """Parse 'K,d,D,n_per,sigma,seed' into a typed tuple."""
    parts = [p.strip() for p in text.split(",")]
    if len(parts) != 6:
        raise ConfigError(f"--synth needs K,d,D,n_per,sigma,seed, got {text!r}")
    try:
        K, d, D, n_per = (int(p) for p in parts[:4])
        sigma = float(parts[4])
        seed = int(parts[5])
    except ValueError:
        raise ConfigError(f"malformed --synth value {text!r}")
    return (K, d, D, n_per, sigma, seed)


def parse_project_spec(text):
    """Parse 'm,seed' into a pair of ints."""
    parts = [p.strip() for p in text.split(",")]
    if len(parts) != 2:
        raise ConfigError(f"--project needs m,seed, got {text!r}")
    try:
        return (int(parts[0]), int(parts[1]))
    except ValueError:
        raise ConfigError(f"malformed --project value {text!r}")


def load_config_file(path):
    """Read key=value lines; '#' comments and blank lines are skipped."""
    try:
        with open(path, "r", encoding="ascii") as fh:
            lines = fh.readlines()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}")
    values = {}
    for lineno, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected key=value, got {line!r}")
        key, _, value = line.partition("=")
        key = key.strip().replace("-", "_")
        if key not in _ALL_KEYS:
            raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
        values[key] = value.strip()
    return values


def _typed(key, raw):
    try:
        if key in _INT_KEYS:
            return int(raw)
        if key in _FLOAT_KEYS:
            return float(raw)
        if key in _BOOL_KEYS:
            lowered = raw.lower()
            if lowered not in ("true", "false"):
                raise ValueError(raw)
            return lowered == "true"
    except ValueError:
        raise ConfigError(f"bad value for {key}: {raw!r}")
    return raw


def build_parser():
    parser = argparse.ArgumentParser(
        prog="ssclust",
        description="Sparse self-expressive clustering of column-stacked data.",
    )
    inp = parser.add_argument_group("input")
    inp.add_argument("--frames", metavar="GLOB", help="PGM frame files")
    inp.add_argument(
        "--synth", metavar="K,d,D,n_per,sigma,seed", help="synthetic dataset"
    )
    inp.add_argument(
        "--normalize",
        action="store_const",
        const=True,
        default=None,
        help="scale each data column to unit length",
    )
    inp.add_argument(
        "--project", metavar="m,seed", help="random sketch to m dimensions"
    )
    sol = parser.add_argument_group("solver")
    sol.add_argument("--mu", type=float, help="quadratic penalty weight")
    sol.add_argument("--rho", type=float, help="augmented Lagrangian weight")
    sol.add_argument("--max-iter", type=int, dest="max_iter")
    sol.add_argument("--tol-primal", type=float, dest="tol_primal")
    sol.add_argument("--tol-change", type=float, dest="tol_change")
    spc = parser.add_argument_group("spectral")
    spc.add_argument("--k", type=int, help="fixed cluster count")
    spc.add_argument("--k-max", type=int, dest="k_max")
    spc.add_argument("--spectral-seed", type=int, dest="spectral_seed")
    spc.add_argument("--restarts", type=int)
    out = parser.add_argument_group("outputs")
    out.add_argument("--out-labels", dest="out_labels", metavar="CSV")
    out.add_argument("--out-w", dest="out_w", metavar="PGM")
    out.add_argument("--out-c", dest="out_c", metavar="PGM")
    out.add_argument("--out-conv", dest="out_conv", metavar="CSV")
    out.add_argument("--out-meta", dest="out_meta", metavar="FILE")
    parser.add_argument("--config", metavar="FILE", help="key=value defaults")
    return parser


def build_config(args):
    """Merge command line over config-file values over defaults."""
    fromfile = load_config_file(args.config) if args.config else {}

    def pick(key, default=None):
        cli_value = getattr(args, key)
        if cli_value is not None:
            return cli_value
        if key in fromfile:
            return _typed(key, fromfile[key])
        return default

    synth_raw = pick("synth")
    project_raw = pick("project")
    try:
        solver = SolverConfig(
            mu=pick("mu"),
            rho=pick("rho"),
            max_iter=pick("max_iter", 5000),
            tol_primal=pick("tol_primal", 1e-4),
            tol_change=pick("tol_change", 1e-5),
        )
    except InputError as exc:
        raise ConfigError(str(exc))
    return RunConfig(
        frames=pick("frames"),
        synth=parse_synth_spec(synth_raw) if synth_raw is not None else None,
        normalize=bool(pick("normalize", False)),
        project=parse_project_spec(project_raw) if project_raw is not None else None,
        solver=solver,
        k_override=pick("k"),
        k_max=pick("k_max"),
        spectral_seed=pick("spectral_seed", 0),
        restarts=pick("restarts", 10),
        out_labels=pick("out_labels"),
        out_w=pick("out_w"),
        out_c=pick("out_c"),
        out_conv=pick("out_conv"),
        out_meta=pick("out_meta"),
    )


def compare_partitions(labels_a, labels_b):
    """Fraction of point pairs on which two partitions agree.

    A pair agrees when both partitions put it in one cluster or both
    split it.  Invariant under relabeling; 1.0 for identical partitions.
    """
    labels_a = np.asarray(labels_a)
    labels_b = np.asarray(labels_b)
    if labels_a.shape != labels_b.shape or labels_a.ndim != 1:
        raise InputError(
            f"label vectors must match, got {labels_a.shape} and {labels_b.shape}"
        )
    n = labels_a.size
    if n < 2:
        return 1.0
    same_a = labels_a[:, None] == labels_a[None, :]
    same_b = labels_b[:, None] == labels_b[None, :]
    i, j = np.triu_indices(n, k=1)
    return float(np.mean(same_a[i, j] == same_b[i, j]))


def _load_input(config):
    if config.frames is not None:
        paths = sorted(globlib.glob(config.frames))
        if not paths:
            raise InputError(f"no files match {config.frames!r}")
        return frames_to_matrix(load_frames(paths), normalize=config.normalize)
    K, d, D, n_per, sigma, seed = config.synth
    dataset = synth_union_of_subspaces(K, d, D, n_per, noise_sigma=sigma, seed=seed)
    Y = dataset.Y
    if config.normalize:
        Y = normalize_columns(Y)
    return Y


def _write_metadata(path, config, report, result, k_max_eff):
    lines = ["# run record; reloadable with --config"]
    lines.append(f"# version={__version__}")
    lines.append(f"# affinity={AFFINITY_FORMULA}")
    lines.append(f"# converged={str(report.converged).lower()}")
    lines.append(f"# iterations={report.iterations}")
    lines.append(f"# r1={float(report.r_affine)!r}")
    lines.append(f"# r2={float(report.r_split)!r}")
    lines.append(f"# r3={float(report.r_change)!r}")
    lines.append(f"# estimated_k={result.estimated_k}")
    if config.frames is not None:
        lines.append(f"frames={config.frames}")
    else:
        K, d, D, n_per, sigma, seed = config.synth
        lines.append(f"synth={K},{d},{D},{n_per},{sigma!r},{seed}")
    lines.append(f"normalize={str(config.normalize).lower()}")
    if config.project is not None:
        lines.append(f"project={config.project[0]},{config.project[1]}")
    lines.append(f"mu={float(report.mu)!r}")
    lines.append(f"rho={float(report.rho)!r}")
    lines.append(f"max_iter={config.solver.max_iter}")
    lines.append(f"tol_primal={config.solver.tol_primal!r}")
    lines.append(f"tol_change={config.solver.tol_change!r}")
    if config.k_override is not None:
        lines.append(f"k={config.k_override}")
    lines.append(f"k_max={k_max_eff}")
    lines.append(f"spectral_seed={config.spectral_seed}")
    lines.append(f"restarts={config.restarts}")
    for key in ("out_labels", "out_w", "out_c", "out_conv", "out_meta"):
        value = getattr(config, key)
        if value is not None:
            lines.append(f"{key}={value}")
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def run(config):
    """Execute the pipeline; returns an exit code, artifacts on disk."""
    written = []
    stage = "config"
    try:
        config.validate()
        stage = "ingest"
        Y = _load_input(config)
        stage = "project"
        if config.project is not None:
            m, seed = config.project
            G = gaussian_matrix(m, Y.shape[0], seed)
            Y = project(G, Y)
        stage = "solve"
        C, report = solve_ssc(Y, config.solver)
        if not report.converged:
            print(
                f"ssclust: solve: not converged after {report.iterations} "
                f"iterations (r1={report.r_affine:.3g} r2={report.r_split:.3g} "
                f"r3={report.r_change:.3g})",
                file=sys.stderr,
            )
        stage = "spectral"
        W = build_affinity(C)
        k_max_eff = config.k_max
        if k_max_eff is None:
            k_max_eff = min(W.shape[0] - 1, 15)
        result = cluster(
            W,
            k_override=config.k_override,
            seed=config.spectral_seed,
            k_max=k_max_eff,
            restarts=config.restarts,
        )
        stage = "export"
        if config.out_labels is not None:
            export_labels(result.labels, config.out_labels)
            written.append(config.out_labels)
        if config.out_w is not None:
            export_heatmap(W, config.out_w)
            written.append(config.out_w)
        if config.out_c is not None:
            export_heatmap(C, config.out_c)
            written.append(config.out_c)
        if config.out_conv is not None:
            export_convergence(report.history, config.out_conv)
            written.append(config.out_conv)
        if config.out_meta is not None:
            _write_metadata(config.out_meta, config, report, result, k_max_eff)
            written.append(config.out_meta)
    except (ConfigError, DivergenceError, InputError, OSError) as exc:
        for path in written:
            try:
                os.unlink(path)
            except OSError:
                pass
        print(f"ssclust: {stage}: {exc}", file=sys.stderr)
        if isinstance(exc, ConfigError):
            return EXIT_CONFIG
        if isinstance(exc, DivergenceError):
            return EXIT_DIVERGED
        if isinstance(exc, InputError):
            return EXIT_INPUT
        return EXIT_IO
    return EXIT_OK


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        config = build_config(args)
    except ConfigError as exc:
        print(f"ssclust: config: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return run(config)


if __name__ == "__main__":
    sys.exit(main())
