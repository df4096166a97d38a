"""Command-line front end: ``dsom generate | sample | diagnose | kde``.

Exit status is 0 on success, 1 on a usage error and 2 when the input data
cannot be read or violates a precondition.
"""

from __future__ import annotations

import argparse
import secrets
import sys
from pathlib import Path

import numpy as np

from . import diagnostics, io, testbeds
from .errors import DSoMError
from .sampler import Exponent, Metric, SamplerConfig, default_threads, sample, sample_normalized

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise _UsageError(f"{self.prog}: error: {message}")


def _int_pair(text: str, sep: str, what: str) -> tuple[int, int]:
    parts = text.lower().split(sep)
    try:
        a, b = (int(p) for p in parts)
    except ValueError:
        raise argparse.ArgumentTypeError(f"{what} must look like 'A{sep}B' with integers, got {text!r}") from None
    return a, b


def _int_list(text: str) -> list[int]:
    try:
        return [int(p) for p in text.split(",") if p.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _seed_or_echo(seed: int | None, what: str) -> int:
    if seed is None:
        seed = secrets.randbits(63)
        print(f"{what}: no --seed given, using seed {seed}", file=sys.stderr)
    return seed


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="dsom", description="Dirichlet sampling on manifolds")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    g = sub.add_parser("generate", help="write a synthetic testbed to CSV")
    g.add_argument("--kind", required=True, choices=[k.value for k in testbeds.TestbedKind])
    g.add_argument("--count", required=True, type=int)
    g.add_argument("--seed", type=int)
    g.add_argument("--noise", type=float, help="Gaussian noise std (Möbius kinds only)")
    g.add_argument("--independent-noise", action="store_true", help="ring: draw U per coordinate")
    g.add_argument("--out", required=True, type=Path)

    s = sub.add_parser("sample", help="draw new points from a dataset")
    s.add_argument("--input", required=True, type=Path)
    s.add_argument("--format", choices=["csv", "ply"], help="input format (default: from the file suffix)")
    s.add_argument("--k", required=True, type=int)
    s.add_argument("--gamma", required=True, type=float)
    s.add_argument("--threshold", required=True, type=float)
    s.add_argument("--n-samples", required=True, type=int)
    s.add_argument("--metric", default="euclidean", choices=[m.value for m in Metric])
    s.add_argument("--exponent", default="squared", choices=[e.value for e in Exponent])
    s.add_argument("--seed", type=int)
    s.add_argument("--normalize", action="store_true", help="sample in z-scores, write original units")
    s.add_argument("--provenance", action="store_true", help="also write OUT.provenance.csv")
    s.add_argument("--threads", type=int, default=None, help=f"worker threads (default {default_threads()})")
    s.add_argument("--ridge", type=float, default=0.0, help="initial covariance ridge for Mahalanobis")
    s.add_argument("--alpha-floor", type=float, default=1e-7)
    s.add_argument("--out", required=True, type=Path)

    d = sub.add_parser("diagnose", help="convergence curves conv1/conv2")
    d.add_argument("--data", required=True, type=Path)
    d.add_argument("--sim", required=True, type=Path)
    d.add_argument("--checkpoints", type=_int_list, help="comma-separated sample counts")
    d.add_argument("--centered", action="store_true", help="compare covariances instead of raw moments")
    d.add_argument("--out", required=True, type=Path)

    k = sub.add_parser("kde", help="2-D Gaussian KDE on a grid, long-form CSV")
    k.add_argument("--input", required=True, type=Path)
    k.add_argument("--cols", type=lambda t: _int_pair(t, ",", "--cols"), default=(0, 1))
    k.add_argument("--resolution", type=lambda t: _int_pair(t, "x", "--resolution"), default=(128, 128))
    k.add_argument("--out", required=True, type=Path)
    return p


def _load(path: Path, fmt: str | None):
    if fmt is None:
        fmt = "ply" if path.suffix.lower() == ".ply" else "csv"
    return io.load_ply(path) if fmt == "ply" else io.load_csv(path)


def _cmd_generate(a) -> None:
    seed = _seed_or_echo(a.seed, "generate")
    if a.kind == "ring":
        if a.noise is not None:
            raise _UsageError("--noise does not apply to the ring")
        ds = testbeds.generate_ring(a.count, seed, independent_noise=a.independent_noise)
    else:
        ds = testbeds.generate(testbeds.TestbedSpec(a.kind, a.count, seed, a.noise))
    io.save_csv(ds, a.out)


def _cmd_sample(a) -> None:
    seed = _seed_or_echo(a.seed, "sample")
    data = _load(a.input, a.format)
    config = SamplerConfig(
        k=a.k,
        gamma=a.gamma,
        threshold=a.threshold,
        n_samples=a.n_samples,
        metric=a.metric,
        distance_exponent=a.exponent,
        seed=seed,
        alpha_floor=a.alpha_floor,
    )
    config.check_against(data)
    kw = dict(ridge=a.ridge, provenance=a.provenance, threads=a.threads)
    sim = sample_normalized(data, config, **kw) if a.normalize else sample(data, config, **kw)
    io.save_csv(sim, a.out)
    if a.provenance:
        io.save_csv(sim.provenance, provenance_path(a.out))


def provenance_path(out: Path) -> Path:
    out = Path(out)
    return out.with_name(out.stem + ".provenance.csv")


def _cmd_diagnose(a) -> None:
    data = io.load_csv(a.data)
    sim = io.load_csv(a.sim)
    report = diagnostics.convergence_report(data, sim, a.checkpoints, centered=a.centered)
    io.save_csv(report, a.out)


def _cmd_kde(a) -> None:
    ds = io.load_csv(a.input)
    i, j = a.cols
    for c in (i, j):
        if not 0 <= c < ds.n:
            raise _UsageError(f"--cols index {c} out of range for {ds.n} columns")
    grid = diagnostics.kde_grid(np.column_stack([ds.values[:, i], ds.values[:, j]]), grid=a.resolution)
    io.save_csv(grid, a.out)


_COMMANDS = {"generate": _cmd_generate, "sample": _cmd_sample, "diagnose": _cmd_diagnose, "kde": _cmd_kde}


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        _COMMANDS[args.command](args)
    except _UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:  # --help
        return EXIT_OK if exc.code in (0, None) else EXIT_USAGE
    except (DSoMError, OSError, ZeroDivisionError) as exc:
        print(f"dsom: error: {exc}", file=sys.stderr)
        return EXIT_DATA
    return EXIT_OK


cli_main = main


if __name__ == "__main__":
    sys.exit(main())
