"""Command-line entry point: ``crystalline <subcommand> [options]``.

Exit codes: 0 success, 1 check failure, 2 configuration error,
3 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import io
import json
import logging
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import acceptance, builtins
from .analysis import (decompose_progressions, delone_check, gap_stats, progression_intersection,
                       rational_period, relation_probe)
from .dirichlet import DirichletSeries, find_zeros, torus_zero_curve
from .errors import ConfigInvalid, NumericalFailure, ValidationError
from .measure import (TestFunction, build_measure, build_spectrum, spectrum_growth,
                      verify_summation)
from .polynomial import StablePair, load_pair
from .series import coeff_bound_check, log_coeffs_multinomial, log_coeffs_recurrence
from .stability import Verdict, verify_pair_stability

log = logging.getLogger("crystalline")

EXIT_OK, EXIT_CHECK, EXIT_CONFIG, EXIT_NUMERIC = 0, 1, 2, 3

COMMANDS = ("stability", "coeffs", "zeros", "curve", "verify", "spectrum", "gaps", "delone",
            "progression", "relations", "reproduce-all")


@dataclass
class RunConfig:
    command: str
    builtin: str | None = "lasso"
    pair_file: str | None = None
    xi: tuple[float, ...] | None = None
    window: float = 100.0
    degree_max: int = 20
    test: str = "gaussian"
    sigma: float = 1.0
    oversample: int = 32
    budget: int = 10**5
    seed: int = 0
    emit: str = "json"
    out: str | None = None
    filter: str | None = None
    algorithm: str = "recurrence"
    resolution: int = 256
    precision: int = 10
    max_coeff: int = 1000
    count: int = 8
    r: float | None = None
    R: float | None = None
    a: float = 0.0
    d: float | None = None
    _pair: StablePair | None = field(default=None, repr=False, compare=False)

    def validate(self) -> "RunConfig":
        if self.command not in COMMANDS:
            raise ConfigInvalid(f"command: unknown subcommand {self.command!r}")
        if self.emit not in ("csv", "json"):
            raise ConfigInvalid("emit: must be 'csv' or 'json'")
        if not self.window > 0:
            raise ConfigInvalid("window: must be > 0")
        if self.degree_max < 1:
            raise ConfigInvalid("degree_max: must be >= 1")
        if self.test not in ("gaussian", "cosine", "bump"):
            raise ConfigInvalid("test: must be gaussian, cosine or bump")
        if self.algorithm not in ("recurrence", "multinomial", "both"):
            raise ConfigInvalid("algorithm: must be recurrence, multinomial or both")
        if self.command == "reproduce-all":
            return self
        pair = self.pair
        if self.xi is None:
            if self.pair_file is not None or self.builtin not in builtins.DEFAULT_XI:
                raise ConfigInvalid("xi: required for pair files")
            self.xi = builtins.DEFAULT_XI[self.builtin]
        if len(self.xi) != pair.n:
            raise ConfigInvalid(f"xi: {len(self.xi)} values for a {pair.n}-variable polynomial")
        if any(not (x > 0 and math.isfinite(x)) for x in self.xi):
            raise ConfigInvalid("xi: entries must be positive and finite")
        return self

    @property
    def pair(self) -> StablePair:
        if self._pair is None:
            if self.pair_file is not None:
                try:
                    self._pair = load_pair(self.pair_file)
                except OSError as exc:
                    raise ConfigInvalid(f"pair: cannot read {self.pair_file}: {exc}") from None
                except json.JSONDecodeError as exc:
                    raise ConfigInvalid(f"pair: {self.pair_file} line {exc.lineno}: {exc.msg}") from None
            else:
                self._pair = builtins.builtin_pair(self.builtin)
        return self._pair

    @property
    def source(self) -> str:
        return self.pair_file if self.pair_file is not None else f"builtin:{self.builtin}"

    def test_function(self) -> TestFunction:
        return {"gaussian": TestFunction.gaussian, "cosine": TestFunction.cosine,
                "bump": TestFunction.bump}[self.test](self.sigma)

    def describe(self) -> dict:
        return {"source": self.source, "xi": list(self.xi) if self.xi else None,
                "window": self.window, "seed": self.seed}


def load_config_file(path: str) -> dict:
    """Read a JSON config; keys are :class:`RunConfig` field names."""
    try:
        with open(path) as fh:
            obj = json.load(fh)
    except OSError as exc:
        raise ConfigInvalid(f"config: cannot read {path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise ConfigInvalid(f"config: {path} line {exc.lineno}: {exc.msg}") from None
    if not isinstance(obj, dict):
        raise ConfigInvalid("config: top level must be an object")
    known = {f.name for f in dataclasses.fields(RunConfig) if not f.name.startswith("_")}
    for key in obj:
        if key not in known:
            raise ConfigInvalid(f"config: unknown field {key!r}")
    if "xi" in obj and obj["xi"] is not None:
        obj["xi"] = tuple(float(v) for v in obj["xi"])
    return obj


# -- output -------------------------------------------------------------------


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, complex):
        return {"re": obj.real, "im": obj.imag}
    return obj


def emit(cfg: RunConfig, name: str, summary: dict, rows: list[dict] | None = None) -> None:
    """Write ``summary`` (json) or ``rows`` (csv) to ``--out`` or stdout."""
    if cfg.emit == "csv" and rows is not None:
        buf = io.StringIO()
        if rows:
            writer = csv.DictWriter(buf, fieldnames=list(rows[0]))
            writer.writeheader()
            writer.writerows(rows)
        text = buf.getvalue()
    else:
        payload = {**summary, "rows": rows} if rows is not None else summary
        text = json.dumps(_jsonable(payload), indent=2) + "\n"
    if cfg.out:
        out = Path(cfg.out)
        out.mkdir(parents=True, exist_ok=True)
        ext = "csv" if cfg.emit == "csv" and rows is not None else "json"
        path = out / f"{name}.{ext}"
        path.write_text(text)
        if ext == "csv":
            (out / f"{name}.summary.json").write_text(json.dumps(_jsonable(summary), indent=2) + "\n")
        print(f"wrote {path}")
    else:
        sys.stdout.write(text)


# -- subcommands ----------------------------------------------------------------


def cmd_stability(cfg: RunConfig) -> int:
    rp, rq = verify_pair_stability(cfg.pair, budget=cfg.budget, seed=cfg.seed)
    ok = rp.verdict is Verdict.NO_COUNTEREXAMPLE and rq.verdict is Verdict.NO_COUNTEREXAMPLE
    emit(cfg, "stability", {**cfg.describe(), "P": rp.to_dict(), "Q": rq.to_dict(),
                            "note": "randomized search; no counterexample is evidence, not proof"})
    return EXIT_OK if ok else EXIT_CHECK


def cmd_coeffs(cfg: RunConfig) -> int:
    P, D = cfg.pair.P, cfg.degree_max
    tables = {}
    if cfg.algorithm in ("recurrence", "both"):
        tables["recurrence"] = log_coeffs_recurrence(P, D)
    if cfg.algorithm in ("multinomial", "both"):
        tables["multinomial"] = log_coeffs_multinomial(P, D)
    main = next(iter(tables.values()))
    bound = coeff_bound_check(P, main)
    summary = {**cfg.describe(), "degree_max": D, "algorithm": cfg.algorithm,
               "bound": dataclasses.asdict(bound), "terms": len(main)}
    ok = bound.passed
    if len(tables) == 2:
        diff = tables["recurrence"].max_abs_diff(tables["multinomial"])
        summary["max_disagreement"] = diff
        ok &= diff <= 1e-12
    rows = [{"k": " ".join(map(str, k)), "degree": sum(k), "re": c.real, "im": c.imag}
            for k, c in main.items()]
    emit(cfg, "coeffs", summary, rows)
    return EXIT_OK if ok else EXIT_CHECK


def cmd_zeros(cfg: RunConfig) -> int:
    series = DirichletSeries(cfg.pair, cfg.xi)
    zeros = find_zeros(series, (-cfg.window, cfg.window), cfg.oversample)
    rows = [{"gamma": float(g), "multiplicity": int(m), "residual": float(r), "error": float(e)}
            for g, m, r, e in zip(zeros.gammas, zeros.multiplicities, zeros.residuals, zeros.errors)]
    summary = {**cfg.describe(), "count": len(zeros),
               "all_simple": bool(np.all(zeros.multiplicities == 1)),
               "symmetric": zeros.is_symmetric()}
    emit(cfg, "zeros", summary, rows)
    return EXIT_OK


def cmd_curve(cfg: RunConfig) -> int:
    curve = torus_zero_curve(cfg.pair.P, cfg.resolution)
    rows = [{"component": i, "x": float(x), "y": float(y)}
            for i, comp in enumerate(curve.components) for x, y in comp]
    emit(cfg, "curve", {"source": cfg.source, "resolution": cfg.resolution,
                        "components": len(curve.components)}, rows)
    return EXIT_OK


def cmd_verify(cfg: RunConfig) -> int:
    rep = verify_summation(cfg.pair, cfg.xi, cfg.test_function(), cfg.window, cfg.degree_max,
                           oversample=cfg.oversample)
    ok = rep.residual <= rep.tail_estimate + 1e-8
    emit(cfg, "verify", {**cfg.describe(), "test": cfg.test, "param": cfg.sigma,
                         **rep.to_dict(), "passed": ok})
    return EXIT_OK if ok else EXIT_CHECK


def cmd_spectrum(cfg: RunConfig) -> int:
    spec = build_spectrum(cfg.pair, cfg.xi, cfg.window)
    A_values = [cfg.window / 8, cfg.window / 4, cfg.window / 2, cfg.window]
    growth, slope = spectrum_growth(spec, A_values)
    rows = [{"position": float(p), "re": complex(w).real, "im": complex(w).imag,
             "terms": len(src)} for p, w, src in zip(spec.positions, spec.weights, spec.provenance)]
    emit(cfg, "spectrum", {**cfg.describe(), "degree_max": spec.degree_max, "atoms": len(spec),
                           "growth": growth, "slope": slope}, rows)
    return EXIT_OK


def _measure(cfg: RunConfig):
    return build_measure(cfg.pair, cfg.xi, cfg.window, cfg.oversample)


def cmd_gaps(cfg: RunConfig) -> int:
    gs = gap_stats(_measure(cfg))
    emit(cfg, "gaps", {**cfg.describe(), **dataclasses.asdict(gs)})
    return EXIT_OK


def cmd_delone(cfg: RunConfig) -> int:
    if cfg.r is None or cfg.R is None:
        raise ConfigInvalid("r, R: both --r and --R are required")
    ok = delone_check(_measure(cfg), cfg.r, cfg.R)
    emit(cfg, "delone", {**cfg.describe(), "r": cfg.r, "R": cfg.R, "passed": ok})
    return EXIT_OK if ok else EXIT_CHECK


def cmd_progression(cfg: RunConfig) -> int:
    m = _measure(cfg)
    summary = {**cfg.describe()}
    if cfg.d is not None:
        hits = progression_intersection(m, cfg.a, cfg.d)
        summary.update({"a": cfg.a, "d": cfg.d, "count": hits.count, "hits": hits.hits})
    period = rational_period(cfg.pair.P.exponents @ np.asarray(cfg.xi))
    summary["period"] = period
    if period is not None:
        dec = decompose_progressions(m, period)
        summary["decomposition"] = {"exact": dec.exact, "leftover": dec.leftover,
                                    "missing": dec.missing,
                                    "progressions": [dataclasses.asdict(p) for p in dec.progressions]}
    emit(cfg, "progression", summary)
    return EXIT_OK


def cmd_relations(cfg: RunConfig) -> int:
    zeros = _measure(cfg).atoms
    idx = np.flatnonzero(zeros.gammas > 1e-8)[:cfg.count]
    probe = relation_probe(zeros.gammas[idx], cfg.precision, cfg.max_coeff,
                           value_errors=zeros.errors[idx], residuals=zeros.residuals[idx])
    emit(cfg, "relations", {**cfg.describe(), **probe.to_dict()})
    return EXIT_OK


def cmd_reproduce_all(cfg: RunConfig) -> int:
    results = acceptance.reproduce_all(cfg.filter)
    for r in results:
        print(r.line(), file=sys.stderr)
    rows = [{"criterion": r.criterion, "name": r.name, "passed": r.passed,
             "seconds": round(r.seconds, 4), "residual": r.residual, "error": r.error or ""}
            for r in results]
    emit(cfg, "reproduce_all", {"results": [r.to_dict() for r in results],
                                "passed": all(r.passed for r in results)}, rows)
    return EXIT_OK if all(r.passed for r in results) else EXIT_CHECK


HANDLERS = {
    "stability": cmd_stability, "coeffs": cmd_coeffs, "zeros": cmd_zeros, "curve": cmd_curve,
    "verify": cmd_verify, "spectrum": cmd_spectrum, "gaps": cmd_gaps, "delone": cmd_delone,
    "progression": cmd_progression, "relations": cmd_relations, "reproduce-all": cmd_reproduce_all,
}


def run(cfg: RunConfig) -> int:
    """Validate ``cfg``, run its subcommand and map errors to exit codes."""
    try:
        cfg.validate()
        return HANDLERS[cfg.command](cfg)
    except ValidationError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalFailure as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


# -- argument parsing -------------------------------------------------------------


def _xi(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad xi list {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON file with RunConfig fields")
    src = common.add_mutually_exclusive_group()
    src.add_argument("--builtin", choices=sorted(builtins.BUILTINS))
    src.add_argument("--pair", dest="pair_file", metavar="FILE", help="pair JSON file")
    common.add_argument("--xi", type=_xi, help="comma-separated frequencies")
    common.add_argument("--window", type=float, help="half-width A")
    common.add_argument("--degree-max", type=int, dest="degree_max")
    common.add_argument("--test", choices=["gaussian", "cosine", "bump"])
    common.add_argument("--sigma", type=float, help="test-function width")
    common.add_argument("--oversample", type=int)
    common.add_argument("--budget", type=int)
    common.add_argument("--seed", type=int)
    common.add_argument("--emit", choices=["csv", "json"])
    common.add_argument("--out", metavar="DIR")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="crystalline", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name, parents=[common])
        if name == "coeffs":
            p.add_argument("--algorithm", choices=["recurrence", "multinomial", "both"])
        elif name == "curve":
            p.add_argument("--resolution", type=int)
        elif name == "delone":
            p.add_argument("--r", type=float, dest="r")
            p.add_argument("--R", type=float, dest="R")
        elif name == "progression":
            p.add_argument("--a", type=float, dest="a")
            p.add_argument("--d", type=float, dest="d")
        elif name == "relations":
            p.add_argument("--precision", type=int)
            p.add_argument("--max-coeff", type=int, dest="max_coeff")
            p.add_argument("--count", type=int)
        elif name == "reproduce-all":
            p.add_argument("--filter", help="criterion numbers, names or tags, comma-separated")
    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    values = load_config_file(args.config) if args.config else {}
    for key, val in vars(args).items():
        if key in ("config", "verbose") or val is None:
            continue
        values[key] = val
    if values.get("pair_file") is not None and args.builtin is None:
        values["builtin"] = None
    return RunConfig(**values)


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        cfg = config_from_args(args)
    except ValidationError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())
