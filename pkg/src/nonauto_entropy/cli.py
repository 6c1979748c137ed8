"""Command-line front end.

Every command prints one JSON document to stdout.  With ``--output-dir``
the same document is written to ``<command>.json`` next to ``manifest.json``
(and ``growth.csv`` / ``words.csv`` where relevant).  Each artifact carries
the manifest digest, and nothing time-dependent goes into any output, so
identical manifests give byte-identical files.

Exit codes: 0 success, 2 a required hypothesis fails, 3 bad input,
4 numerical non-convergence.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import math
import sys
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import __version__
from .coding import Coder
from .coupled_expansion import (
    CoverConfig,
    cover_from_json,
    derive_matrix,
    expansion_report,
    lower_bound,
    upper_bound,
)
from .entropy_estimator import ORDERS, EstimatorConfig, estimate_entropy
from .errors import EntropyError, HypothesisFailure, InputError, InvalidConfig, NumericalError
from .subshift import parse_sequence, random_sequence
from .system_model import SystemModel, to_fraction
from .system_model import from_json as system_from_json
from .transition_matrix import (
    TransitionMatrix,
    count_allowable_words,
    enumerate_allowable_words,
    gelfand_estimate,
    is_irreducible,
    nu_bound,
    spectral_radius,
)
from .transition_matrix import from_json as matrix_from_json

EXIT_OK, EXIT_HYPOTHESIS, EXIT_INPUT, EXIT_NUMERIC = 0, 2, 3, 4


def _fmt_float(x: float) -> str:
    if not math.isfinite(x):
        return "null"
    return format(x, ".17g")


def dumps(obj, indent: int = 2, _level: int = 0) -> str:
    """JSON text with every float written to 17 significant digits."""
    pad = " " * (indent * (_level + 1))
    end = " " * (indent * _level)
    if isinstance(obj, bool) or obj is None:
        return json.dumps(obj)
    if isinstance(obj, (float, np.floating)):
        return _fmt_float(float(obj))
    if isinstance(obj, Fraction):
        return _fmt_float(float(obj))
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {dumps(v, indent, _level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        if all(isinstance(v, (int, float, str, bool, Fraction, np.number)) or v is None for v in obj):
            return "[" + ", ".join(dumps(v, indent, _level + 1) for v in obj) + "]"
        return "[\n" + ",\n".join(pad + dumps(v, indent, _level + 1) for v in obj) + "\n" + end + "]"
    raise TypeError(f"cannot serialise {type(obj).__name__}")


class Run:
    """Inputs, resolved configuration and manifest of one command."""

    def __init__(self, args: argparse.Namespace):
        self.args = args
        self.command = args.command
        self.digests: dict[str, str] = {}
        self.config: dict = {}

    def load_json(self, label: str, path: str):
        try:
            raw = Path(path).read_bytes()
        except OSError as exc:
            raise InputError(f"cannot read {label} file {path!r}: {exc.strerror}") from exc
        self.digests[label] = hashlib.sha256(raw).hexdigest()
        try:
            return json.loads(raw)
        except (json.JSONDecodeError, UnicodeDecodeError) as exc:
            raise InputError(f"{label} file {path!r} is not valid JSON: {exc}") from exc

    def matrix(self, path: str) -> TransitionMatrix:
        return matrix_from_json(self.load_json("matrix", path))

    def system(self, path: str) -> SystemModel:
        return system_from_json(self.load_json("system", path))

    def cover(self, path: str) -> CoverConfig:
        return cover_from_json(self.load_json("cover", path))

    @property
    def manifest(self) -> dict:
        return {
            "command": self.command,
            "config": self.config,
            "inputs": dict(sorted(self.digests.items())),
            "version": __version__,
            "seed": self.args.seed,
        }

    @property
    def digest(self) -> str:
        return hashlib.sha256(dumps(self.manifest).encode()).hexdigest()

    def emit(self, payload: dict, tables: dict[str, tuple[list[str], list[list]]] | None = None) -> None:
        doc = {"manifest_digest": self.digest, **payload, "manifest": self.manifest}
        text = dumps(doc) + "\n"
        sys.stdout.write(text)
        out = self.args.output_dir
        if out is None:
            return
        d = Path(out)
        d.mkdir(parents=True, exist_ok=True)
        (d / "manifest.json").write_text(dumps(self.manifest) + "\n")
        (d / f"{self.command}.json").write_text(text)
        for name, (header, rows) in (tables or {}).items():
            buf = io.StringIO()
            buf.write(f"# manifest_digest={self.digest}\n")
            w = csv.writer(buf, lineterminator="\n")
            w.writerow(header)
            for r in rows:
                w.writerow([_fmt_float(v) if isinstance(v, float) else v for v in r])
            (d / name).write_text(buf.getvalue())


def _matrix_for(run: Run, sysm: SystemModel, cfg: CoverConfig) -> TransitionMatrix:
    if run.args.matrix:
        return run.matrix(run.args.matrix)
    return derive_matrix(sysm, cfg)


def _parse_eps(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(t) for t in text.split(","))
    except ValueError as exc:
        raise InvalidConfig(f"cannot parse --eps {text!r}") from exc


def _parse_restrict(text: str) -> int:
    kind, _, rest = text.partition(":")
    key, _, val = rest.partition("=")
    if kind != "coded" or key != "depth" or not val.isdigit():
        raise InvalidConfig(f"--restrict must look like coded:depth=14, got {text!r}")
    return int(val)


def cmd_spectral_radius(run: Run) -> int:
    A = run.matrix(run.args.matrix)
    run.config = {"tol": run.args.tol, "gelfand_n": run.args.gelfand}
    rho = spectral_radius(A, tol=run.args.tol)
    nu = nu_bound(A)
    out = {
        "n": A.size,
        "rho": rho,
        "log_rho": math.log(rho) if rho > 0 else -math.inf,
        "nu": nu,
        "log_nu": math.log(nu),
        "irreducible": is_irreducible(A),
    }
    if run.args.gelfand:
        out["gelfand"] = gelfand_estimate(A, run.args.gelfand)
    run.emit(out)
    return EXIT_OK


def cmd_enumerate_words(run: Run) -> int:
    A = run.matrix(run.args.matrix)
    n = run.args.length
    run.config = {"length": n, "cap": run.args.cap}
    count = count_allowable_words(A, n)
    words = enumerate_allowable_words(A, n, cap=run.args.cap)
    text = ["".join(str(s) for s in w) if A.size < 10 else ",".join(str(s) for s in w) for w in words.tolist()]
    out = {"length": n, "count": len(text), "norm": count}
    if run.args.output_dir is None:
        out["words"] = text
    run.emit(out, {"words.csv": (["word"], [[t] for t in text])})
    return EXIT_OK


def _bound_payload(cert) -> dict:
    out = {"kind": cert.kind, "certified": cert.certified}
    if cert.certified or cert.report is None:
        out["log_rho"] = cert.log_rho
        if cert.log_nu is not None:
            out["log_nu"] = cert.log_nu
        out["status"] = "certified" if cert.certified else "matrix-only"
    else:
        out["status"] = "refused"
        out["failures"] = list(cert.failures)
    if cert.report is not None:
        out["report"] = cert.report.to_json()
    return out


def cmd_bound_lower(run: Run) -> int:
    a = run.args
    A = run.matrix(a.matrix)
    if (a.system is None) != (a.cover is None):
        raise InvalidConfig("--system and --cover go together")
    sysm = run.system(a.system) if a.system else None
    cfg = run.cover(a.cover) if a.cover else None
    run.config = {"with_system": sysm is not None}
    cert = lower_bound(A, sysm, cfg)
    run.emit(_bound_payload(cert))
    return EXIT_OK if cert.certified or sysm is None else EXIT_HYPOTHESIS


def cmd_bound_upper(run: Run) -> int:
    a = run.args
    sysm, cfg, A = run.system(a.system), run.cover(a.cover), run.matrix(a.matrix)
    cert = upper_bound(A, sysm, cfg)
    run.emit(_bound_payload(cert))
    return EXIT_OK if cert.certified else EXIT_HYPOTHESIS


def cmd_verify(run: Run) -> int:
    a = run.args
    sysm, cfg = run.system(a.system), run.cover(a.cover)
    A = run.matrix(a.matrix) if a.matrix else None
    run.config = {"derive_matrix": A is None, "horizon": cfg.horizon_for(sysm)}
    report = expansion_report(sysm, cfg, A)
    run.emit(report.to_json())
    return EXIT_OK if report.coupled_expanding else EXIT_HYPOTHESIS


def cmd_estimate(run: Run) -> int:
    a = run.args
    sysm = run.system(a.system)
    eps = _parse_eps(a.eps)
    restrict = None
    depth = None
    if a.restrict:
        depth = _parse_restrict(a.restrict)
        if a.cover is None:
            raise InvalidConfig("--restrict coded:... needs --cover")
        cfg = run.cover(a.cover)
        _, restrict = Coder(sysm, cfg, _matrix_for(run, sysm, cfg)).coded_points(depth)
        restrict = tuple(restrict)
    config = EstimatorConfig(a.n_min, a.n_max, eps, a.grid, restrict, a.saturation, a.order)
    run.config = {
        "n_min": a.n_min,
        "n_max": a.n_max,
        "epsilons": list(eps),
        "grid_size": a.grid,
        "restrict_depth": depth,
        "saturation": a.saturation,
        "order": a.order,
    }
    est = estimate_entropy(sysm, config)
    rows = [[c.epsilon, n, cnt] for c in est.curves for n, cnt, _ in c.rows]
    out = {
        "h_est": est.h_est,
        "per_eps_slopes": {format(e, "g"): s for e, s in est.per_eps_slopes.items()},
        "fit_windows": {format(c.epsilon, "g"): list(c.fit) if c.fit else None for c in est.curves},
        "degenerate": est.degenerate,
        "restricted": est.restricted,
        "notes": list(est.notes),
    }
    run.emit(out, {"growth.csv": (["epsilon", "n", "count"], rows)})
    return EXIT_OK


def cmd_code(run: Run) -> int:
    a = run.args
    sysm, cfg = run.system(a.system), run.cover(a.cover)
    A = _matrix_for(run, sysm, cfg)
    coder = Coder(sysm, cfg, A)
    radius = to_fraction(a.radius)
    if (a.alpha is None) == (a.random is None):
        raise InvalidConfig("give exactly one of --alpha and --random")
    if a.alpha is not None:
        alphas = [parse_sequence(A, a.alpha)]
    else:
        rng = np.random.default_rng(a.seed)
        seeds = rng.integers(0, 2**63 - 1, size=a.random)
        alphas = [random_sequence(A, int(s), a.prefix_len) for s in seeds]
    run.config = {"start": a.start, "radius": float(radius), "random": a.random, "prefix_len": a.prefix_len}
    points = [{"alpha": str(al), **coder.code_point(al, a.start, radius).to_json()} for al in alphas]
    run.emit(points[0] if a.alpha is not None else {"points": points})
    return EXIT_OK


def cmd_itinerary(run: Run) -> int:
    a = run.args
    sysm, cfg = run.system(a.system), run.cover(a.cover)
    x = to_fraction(a.x)
    run.config = {"x": str(x), "start": a.start, "length": a.length}
    coder = Coder(sysm, cfg, TransitionMatrix.full(cfg.size), check=False)
    it = coder.itinerary(x, a.start, a.length)
    run.emit({"word": list(it.word), "text": ",".join(map(str, it.word)), "defined": it.defined, "undefined_at": it.undefined_at})
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="nonauto-entropy", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--output-dir", help="write JSON/CSV artifacts and manifest.json here")
    common.add_argument("--seed", type=int, default=0, help="seed for randomized inputs (default 0)")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("spectral-radius", parents=[common], help="spectral radius and nu bound of a matrix")
    s.add_argument("--matrix", required=True)
    s.add_argument("--tol", type=float, default=1e-12)
    s.add_argument("--gelfand", type=int, default=0, metavar="N", help="also report ||A^N||^(1/N)")
    s.set_defaults(func=cmd_spectral_radius)

    s = sub.add_parser("enumerate-words", parents=[common], help="list allowable words of a given length")
    s.add_argument("--matrix", required=True)
    s.add_argument("--length", type=int, required=True)
    s.add_argument("--cap", type=int, default=1_000_000)
    s.set_defaults(func=cmd_enumerate_words)

    s = sub.add_parser("bound-lower", parents=[common], help="entropy lower bound log rho(A)")
    s.add_argument("--matrix", required=True)
    s.add_argument("--system")
    s.add_argument("--cover")
    s.set_defaults(func=cmd_bound_lower)

    s = sub.add_parser("bound-upper", parents=[common], help="entropy upper bound log rho(A)")
    for name in ("--system", "--cover", "--matrix"):
        s.add_argument(name, required=True)
    s.set_defaults(func=cmd_bound_upper)

    s = sub.add_parser("verify", parents=[common], help="check coupled expansion of a cover")
    s.add_argument("--system", required=True)
    s.add_argument("--cover", required=True)
    s.add_argument("--matrix", help="default: derive the largest admissible matrix")
    s.set_defaults(func=cmd_verify)

    s = sub.add_parser("estimate", parents=[common], help="separated-set entropy estimate")
    s.add_argument("--system", required=True)
    s.add_argument("--n-min", type=int, default=5)
    s.add_argument("--n-max", type=int, default=16)
    s.add_argument("--eps", default="0.05,0.02,0.01")
    s.add_argument("--grid", type=int, default=200_000)
    s.add_argument("--saturation", type=float, default=0.125, help="fit only counts up to this fraction of the points")
    s.add_argument("--order", choices=ORDERS, default="left_to_right", help="greedy scan order over the grid")
    s.add_argument("--restrict", help="coded:depth=D restricts to coded points (needs --cover)")
    s.add_argument("--cover")
    s.add_argument("--matrix")
    s.set_defaults(func=cmd_estimate)

    s = sub.add_parser("code", parents=[common], help="coded point of a symbol sequence")
    s.add_argument("--system", required=True)
    s.add_argument("--cover", required=True)
    s.add_argument("--matrix")
    s.add_argument("--alpha", help='sequence literal such as "1,2|1"')
    s.add_argument("--random", type=int, metavar="K", help="code K random sequences")
    s.add_argument("--prefix-len", type=int, default=20)
    s.add_argument("--start", type=int, default=1)
    s.add_argument("--radius", default="1e-8")
    s.set_defaults(func=cmd_code)

    s = sub.add_parser("itinerary", parents=[common], help="symbols visited by an orbit")
    s.add_argument("--system", required=True)
    s.add_argument("--cover", required=True)
    s.add_argument("--x", required=True, help="point, decimal or fraction such as 2/3")
    s.add_argument("--length", type=int, default=20)
    s.add_argument("--start", type=int, default=1)
    s.set_defaults(func=cmd_itinerary)
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    run = Run(args)
    try:
        return args.func(run)
    except EntropyError as exc:
        err = exc
    except (ValueError, TypeError) as exc:
        err = InputError(str(exc))
    if isinstance(err, HypothesisFailure):
        code = EXIT_HYPOTHESIS
    elif isinstance(err, NumericalError):
        code = EXIT_NUMERIC
    else:
        code = EXIT_INPUT
    sys.stdout.write(dumps(err.to_dict()) + "\n")
    return code

if __name__ == "__main__":
    sys.exit(main())
