"""Command-line front end.

Every subcommand reads one input file (a measure spec or a moment table),
runs one library operation and writes ``report.json`` and/or a CSV moment
table into ``--output-dir``.  Exit status: 0 pass/accept, 1 fail/reject,
2 input or configuration error.
"""

from __future__ import annotations

import argparse
import os
import sys
from dataclasses import asdict, dataclass, field
from importlib import metadata
from pathlib import Path

import numpy as np
import scipy

from . import hausdorff, transforms
from .curves import Box, HilbertCurve
from .errors import InputError, MomentTransformError, PipelineError, PreconditionError, ReconstructionError
from .io import atomic_write_text, dumps_report, load_input, moment_csv
from .measures import Measure, MomentSequence, moments

COMMANDS = ("check-hausdorff", "reconstruct", "to-unit", "from-unit", "pipeline", "approx-g",
            "leb-direction", "full-support", "rn-transform")

EXIT_PASS, EXIT_FAIL, EXIT_INPUT = 0, 1, 2


@dataclass
class RunConfig:
    command: str
    input: str
    output_dir: str = "."
    depth: int = 10
    max_degree: int = 8
    tol: float = 1e-6
    tol_psd: float = 1e-9
    seed: int = 0
    format: str = "both"
    box: list | None = None
    epsilon: float | None = None
    outer_radius: float | None = None
    threads: int = field(default=0)

    def validate(self):
        if self.command not in COMMANDS:
            raise InputError(f"unknown command {self.command!r}")
        if not 1 <= self.depth <= 20:
            raise InputError(f"--depth must lie in [1, 20], got {self.depth}")
        if not 0 <= self.max_degree <= 32:
            raise InputError(f"--max-degree must lie in [0, 32], got {self.max_degree}")
        for name in ("tol", "tol_psd", "epsilon", "outer_radius"):
            v = getattr(self, name)
            if v is not None and not (np.isfinite(v) and v > 0):
                raise InputError(f"--{name.replace('_', '-')} must be positive, got {v}")
        if self.format not in ("json", "csv", "both"):
            raise InputError(f"--format must be json, csv or both, got {self.format!r}")
        return self

    def provenance(self):
        d = asdict(self)
        d.pop("output_dir")
        return d


def _versions():
    try:
        own = metadata.version("artifact")
    except metadata.PackageNotFoundError:
        own = "unknown"
    return {"momtransform": own, "numpy": np.__version__, "scipy": scipy.__version__}


def _threads():
    raw = os.environ.get("MT_THREADS", "0")
    try:
        n = int(raw)
    except ValueError:
        raise InputError(f"MT_THREADS must be an integer, got {raw!r}") from None
    if n < 0:
        raise InputError("MT_THREADS must be >= 0")
    return n


# --------------------------------------------------------------------------
# input helpers
# --------------------------------------------------------------------------

def _measure(obj):
    if not isinstance(obj, Measure):
        raise InputError("this command needs a measure spec, not a moment table")
    return obj


def _univariate(obj, cfg):
    if isinstance(obj, MomentSequence):
        if obj.n != 1:
            raise InputError("expected a one-variable moment table")
        return obj
    mu = _measure(obj)
    if mu.n != 1:
        raise InputError("expected a measure on [0, 1] or a moment table")
    return moments(mu, cfg.max_degree)


def _box(cfg, n, mu=None):
    if cfg.box is not None:
        if len(cfg.box) != 2 * n:
            raise InputError(f"--box needs {2 * n} numbers (lo then hi) for dimension {n}")
        return Box(tuple(cfg.box[:n]), tuple(cfg.box[n:]))
    if mu is not None and mu.density is not None:
        return mu.density.box
    return Box.unit(n)


def _curve(cfg, mu):
    return HilbertCurve(_box(cfg, mu.n, mu), cfg.depth)


# --------------------------------------------------------------------------
# subcommands: each returns (exit code, result dict, moment table or None)
# --------------------------------------------------------------------------

def _check_hausdorff(cfg, obj):
    cert = hausdorff.check_hausdorff(_univariate(obj, cfg), cfg.tol_psd)
    return (EXIT_PASS if cert.accepted else EXIT_FAIL), cert.to_dict(), None


def _reconstruct(cfg, obj):
    ms = _univariate(obj, cfg)
    try:
        rec = hausdorff.reconstruct(ms, tol_psd=cfg.tol_psd)
    except PreconditionError as exc:
        return EXIT_FAIL, {"verdict": "reject", "error": str(exc),
                           "certificate": exc.certificate.to_dict()}, None
    except ReconstructionError as exc:
        return EXIT_FAIL, {"verdict": "fail", "error": str(exc), "diagnostics": exc.diagnostics}, None
    out = rec.to_dict()
    out["verdict"] = "accept"
    return EXIT_PASS, out, None


def _to_unit(cfg, obj):
    mu = _measure(obj)
    curve = _curve(cfg, mu)
    gm = transforms.transform_to_unit(mu, curve, cfg.max_degree)
    cert = hausdorff.check_hausdorff(gm, cfg.tol_psd)
    res = {"verdict": cert.verdict, "certificate": cert.to_dict(), "curve": transforms._curve_info(curve)}
    return (EXIT_PASS if cert.accepted else EXIT_FAIL), res, gm


def _from_unit(cfg, obj):
    mu = _measure(obj)
    if mu.n != 1:
        raise InputError("from-unit takes a measure on [0, 1]")
    n = len(cfg.box) // 2 if cfg.box is not None else 2
    curve = HilbertCurve(_box(cfg, n), cfg.depth)
    lifted, ms = transforms.lift_from_unit(mu, curve, cfg.max_degree)
    res = {"verdict": "pass", "mass": lifted.total_mass(), "n_atoms": lifted.n_atoms,
           "curve": transforms._curve_info(curve)}
    return EXIT_PASS, res, ms


def _report_result(rep):
    return (EXIT_PASS if rep.passed else EXIT_FAIL), rep.to_dict(), rep.source


def _pipeline(cfg, obj):
    mu = _measure(obj)
    try:
        rep = transforms.g_moment_pipeline(mu, _curve(cfg, mu), cfg.max_degree, cfg.tol, tol_psd=cfg.tol_psd)
    except PipelineError as exc:
        return EXIT_FAIL, {"verdict": "fail", "error": str(exc), "certificate": exc.certificate.to_dict()}, None
    return _report_result(rep)


def _approx_g(cfg, obj):
    mu = _measure(obj)
    eps = cfg.epsilon if cfg.epsilon is not None else 1e-2
    res = transforms.approximate_g(mu, _curve(cfg, mu), eps, cfg.max_degree)
    out = res.to_dict()
    out["verdict"] = "pass" if (res.passed and res.telescoping_holds) else "fail"
    return (EXIT_PASS if out["verdict"] == "pass" else EXIT_FAIL), out, None


def _leb_direction(cfg, obj):
    mu = _measure(obj)
    _, rep = transforms.lebesgue_direction(mu, _curve(cfg, mu), cfg.max_degree, cfg.tol)
    return _report_result(rep)


def _full_support(cfg, obj):
    mu = _measure(obj)
    _, rep = transforms.full_support_curve(mu, _curve(cfg, mu), cfg.max_degree, cfg.tol)
    return _report_result(rep)


def _rn_transform(cfg, obj):
    mu = _measure(obj)
    eps = cfg.epsilon if cfg.epsilon is not None else 0.25
    rep = transforms.rn_transform(mu, eps, cfg.max_degree, cfg.outer_radius, cfg.depth, cfg.tol_psd)
    return (EXIT_PASS if rep.verdict == "pass" else EXIT_FAIL), rep.to_dict(), rep.moments


HANDLERS = {
    "check-hausdorff": _check_hausdorff,
    "reconstruct": _reconstruct,
    "to-unit": _to_unit,
    "from-unit": _from_unit,
    "pipeline": _pipeline,
    "approx-g": _approx_g,
    "leb-direction": _leb_direction,
    "full-support": _full_support,
    "rn-transform": _rn_transform,
}


# --------------------------------------------------------------------------
# driver
# --------------------------------------------------------------------------

def _write(cfg, report, table):
    out = Path(cfg.output_dir)
    if cfg.format in ("json", "both"):
        atomic_write_text(out / "report.json", dumps_report(report))
    if cfg.format in ("csv", "both") and table is not None:
        atomic_write_text(out / "moments.csv", moment_csv(table))


def run(cfg):
    """Execute one configured command; returns the exit status."""
    report = {"command": cfg.command, "versions": _versions()}
    try:
        cfg.threads = _threads()
        cfg.validate()
        report["config"] = cfg.provenance()
        np.random.seed(cfg.seed)
        code, result, table = HANDLERS[cfg.command](cfg, load_input(cfg.input))
    except (InputError, PreconditionError, ValueError) as exc:
        report.update(exit_code=EXIT_INPUT, error=str(exc))
        print(f"error: {exc}", file=sys.stderr)
        _write_error(cfg, report)
        return EXIT_INPUT
    except MomentTransformError as exc:
        code, result, table = EXIT_FAIL, {"verdict": "fail", "error": f"{type(exc).__name__}: {exc}"}, None
    report.update(exit_code=code, result=result)
    _write(cfg, report, table)
    return code


def _write_error(cfg, report):
    if cfg.format in ("json", "both"):
        try:
            atomic_write_text(Path(cfg.output_dir) / "report.json", dumps_report(report))
        except OSError:
            pass


def build_parser():
    p = argparse.ArgumentParser(prog="momtransform", description=__doc__.splitlines()[0])
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--input", required=True, help="measure spec (.json) or moment table (.csv/.json)")
    p.add_argument("--output-dir", default=".")
    p.add_argument("--depth", type=int, default=10, help="curve depth (default 10)")
    p.add_argument("--max-degree", type=int, default=8, help="moment degree (default 8)")
    p.add_argument("--tol", type=float, default=1e-6, help="residual tolerance for pass/fail")
    p.add_argument("--tol-psd", type=float, default=1e-9, help="eigenvalue tolerance relative to m_0")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--format", choices=("json", "csv", "both"), default="both")
    p.add_argument("--box", type=float, nargs="+", help="target box: lo coordinates then hi coordinates")
    p.add_argument("--epsilon", type=float, help="approx-g target (default 1e-2); rn-transform shell width (0.25)")
    p.add_argument("--outer-radius", type=float, help="rn-transform disc radius (default: fitted)")
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    cfg = RunConfig(
        command=args.command, input=args.input, output_dir=args.output_dir, depth=args.depth,
        max_degree=args.max_degree, tol=args.tol, tol_psd=args.tol_psd, seed=args.seed,
        format=args.format, box=args.box, epsilon=args.epsilon, outer_radius=args.outer_radius,
    )
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())
