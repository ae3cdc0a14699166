"""Command-line entry point.

Every subcommand prints a single JSON document on stdout embedding a run
manifest (command line, effective config, input file hashes, tool version,
seed), so identical invocations on identical inputs produce byte-identical
output in the default single-threaded mode.  Wall-clock time goes to
stderr; --timing copies it into the manifest (at the cost of bytewise
reproducibility).

Exit codes: 0 ok, 2 bad input, 3 resource cap exceeded, 4 verification
failure.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import os
import re
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction

from . import __version__
from .algebra import (decomposition_suite, map_f, nonjump_catalog,
                      union_lambda_suite, union_on_set)
from .blowups import blowup, construction_suite, density, sequence_check
from .errors import CapExceeded, FormatError, PatternLabError
from .lagrangian import OptimizerConfig, grid_oracle, maximize, minimality_suite
from .patterns import (Hypergraph, hypergraph_to_json, load_any, load_pattern,
                       pattern_of_hypergraph, pattern_to_json, save_hypergraph,
                       save_pattern)

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_RESOURCE = 3
EXIT_VERIFICATION = 4


@dataclass
class RunManifest:
    """Reproducibility record embedded in every report."""

    command: list[str]
    config: dict
    input_hashes: dict[str, str]
    version: str
    seed: int | None
    wall_clock_s: float | None = None

    def to_dict(self, *, include_timing: bool = False) -> dict:
        out = {
            "command": self.command,
            "config": self.config,
            "input_hashes": self.input_hashes,
            "version": self.version,
            "seed": self.seed,
        }
        if include_timing and self.wall_clock_s is not None:
            out["wall_clock_s"] = self.wall_clock_s
        return out


def _sha256(path: str) -> str:
    with open(path, "rb") as fh:
        return hashlib.sha256(fh.read()).hexdigest()


def _fraction_dict(value) -> dict:
    return {"value": f"{value.numerator}/{value.denominator}", "value_float": float(value)}


def _optimizer_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--restarts", type=int, default=64,
                        help="random restarts on top of the barycenter starts")
    parser.add_argument("--iters", type=int, default=5000, help="max ascent iterations")
    parser.add_argument("--tol", type=float, default=1e-10, help="KKT stopping tolerance")
    parser.add_argument("--seed", type=int, default=0,
                        help="RNG seed (PATTERNLAB_SEED env var overrides)")


def _config_of(args: argparse.Namespace) -> OptimizerConfig:
    return OptimizerConfig(restarts=args.restarts, max_iterations=args.iters,
                           tolerance=args.tol, seed=args.seed)


def _parse_glue(args, m: int) -> tuple[int, ...]:
    if getattr(args, "glue", None) is not None:
        return (args.glue,)
    spec = args.glue_set
    if spec == "all":
        return tuple(range(1, m + 1))
    return tuple(int(v) for v in spec.split(","))


def _csv_ints(text: str) -> list[int]:
    return [int(v) for v in text.split(",") if v != ""]


# ---------------------------------------------------------------------------
# Subcommands: each returns (result dict, exit code, input paths)
# ---------------------------------------------------------------------------


def _cmd_lambda(args) -> tuple[dict, int, list[str]]:
    obj = load_any(args.file)
    if isinstance(obj, Hypergraph):
        source = {"kind": "hypergraph", "n": obj.n, "r": obj.r, "edges": obj.edge_count}
        P = pattern_of_hypergraph(obj)
    else:
        source = {"kind": "pattern", "m": obj.m, "r": obj.r, "edges": obj.edge_count}
        P = obj
    cfg = _config_of(args)
    rep = maximize(P, cfg)
    result = {"input": source, "report": rep.to_dict()}
    code = EXIT_OK
    if args.grid_denominator is not None:
        oracle = grid_oracle(P, args.grid_denominator)
        rep.oracle_gap = rep.value - float(oracle)
        result["report"] = rep.to_dict()
        result["grid_oracle"] = {"denominator": args.grid_denominator,
                                 **_fraction_dict(oracle)}
        if rep.oracle_gap < -1e-9:
            # The exact grid beat the optimizer: the reported maximum is not
            # the Lagrangian.  Surface it loudly.
            result["oracle_violation"] = True
            code = EXIT_VERIFICATION
    return result, code, [args.file]


def _cmd_union(args) -> tuple[dict, int, list[str]]:
    P1 = load_pattern(args.file1)
    P2 = load_pattern(args.file2)
    if args.on is not None:
        glue: tuple[int, ...] = (args.on,)
    elif args.on_set == "all":
        glue = tuple(range(1, P1.m + 1))
    else:
        glue = tuple(_csv_ints(args.on_set))
    U, lab = union_on_set(P1, P2, glue)
    result = {
        "glue": list(lab.glue),
        "m": U.m,
        "r": U.r,
        "edges": U.edge_count,
        "pattern": json.loads(pattern_to_json(U)),
        "labeling": lab.to_dict(),
    }
    if args.out:
        save_pattern(U, args.out)
        sidecar = re.sub(r"\.json$", "", args.out) + ".labeling.json"
        with open(sidecar, "w", encoding="utf-8") as fh:
            json.dump(lab.to_dict(), fh, indent=2)
            fh.write("\n")
        result["pattern_file"] = args.out
        result["labeling_file"] = sidecar
    return result, EXIT_OK, [args.file1, args.file2]


def _cmd_mapf(args) -> tuple[dict, int, list[str]]:
    P = load_pattern(args.pattern)
    glue = _parse_glue(args, P.m)
    cfg = _config_of(args)
    rep = map_f(P, glue, args.lambda2, cfg)
    result = {
        "glue": list(glue),
        "lambda2": args.lambda2,
        "value": rep.value,
        "report": rep.to_dict(),
    }
    return result, EXIT_OK, [args.pattern]


def _cmd_blowup(args) -> tuple[dict, int, list[str]]:
    P = load_pattern(args.pattern)
    sizes = _csv_ints(args.sizes)
    G, part = blowup(P, sizes)
    result = {
        "sizes": sizes,
        "n": G.n,
        "r": G.r,
        "edges": G.edge_count,
        "hypergraph": json.loads(hypergraph_to_json(G)),
    }
    if G.n >= G.r:
        result["density"] = density(G)
    if args.out:
        save_hypergraph(G, args.out)
        result["hypergraph_file"] = args.out
    return result, EXIT_OK, [args.pattern]


def _cmd_density(args) -> tuple[dict, int, list[str]]:
    G = load_any(args.file)
    if not isinstance(G, Hypergraph):
        raise FormatError(f"{args.file} is a pattern file; density needs a hypergraph")
    if G.n < G.r:
        raise FormatError(f"density needs n >= r, got n={G.n}, r={G.r}")
    exact = Fraction(G.edge_count, math.comb(G.n, G.r))
    result = {"n": G.n, "r": G.r, "edges": G.edge_count,
              "density": density(G), **_fraction_dict(exact)}
    return result, EXIT_OK, [args.file]


_SUITES = ("decomposition", "union-lambda", "minimality", "construction")


def _cmd_verify(args) -> tuple[dict, int, list[str]]:
    cfg = _config_of(args)
    names = list(_SUITES) if args.suite == "all" else [args.suite]
    runners = {
        "decomposition": lambda: decomposition_suite(trials=args.trials, seed=args.seed),
        "union-lambda": lambda: union_lambda_suite(cfg, seed=args.seed),
        "minimality": lambda: minimality_suite(cfg, seed=args.seed),
        "construction": lambda: construction_suite(seed=args.seed, cfg=cfg),
    }
    tasks = [runners[name] for name in names]
    if args.jobs > 1 and len(tasks) > 1:
        with ThreadPoolExecutor(max_workers=args.jobs) as pool:
            reports = list(pool.map(lambda fn: fn(), tasks))
    else:
        reports = [fn() for fn in tasks]
    passed = all(rep["passed"] for rep in reports)
    result = {"suites": reports, "passed": passed}
    return result, EXIT_OK if passed else EXIT_VERIFICATION, []


def _cmd_check_sequence(args) -> tuple[dict, int, list[str]]:
    names = sorted(f for f in os.listdir(args.directory) if f.endswith(".json"))
    if not names:
        raise FormatError(f"no .json pattern files in {args.directory}")
    paths = [os.path.join(args.directory, f) for f in names]
    patterns = [load_pattern(p) for p in paths]
    with open(args.eps_file, "r", encoding="utf-8") as fh:
        try:
            eps = json.load(fh)
        except json.JSONDecodeError as exc:
            raise FormatError(f"eps file: parse error at line {exc.lineno}: {exc.msg}") from exc
    if not isinstance(eps, (int, float, list)):
        raise FormatError("eps file must hold a number or a list of numbers")
    cfg = _config_of(args)
    report = sequence_check(patterns, args.k, args.lambda0, eps, cfg)
    result = {"terms": names, **report.to_dict()}
    return result, EXIT_OK if report.ok else EXIT_VERIFICATION, paths + [args.eps_file]


def _cmd_catalog(args) -> tuple[dict, int, list[str]]:
    l_values = _csv_ints(args.frankl_rodl_l) if args.frankl_rodl_l else ()
    entries = nonjump_catalog(args.r, frankl_rodl_l=l_values)
    result = {"r": args.r, "entries": [e.to_dict() for e in entries]}
    return result, EXIT_OK, []


# ---------------------------------------------------------------------------
# Parser and main
# ---------------------------------------------------------------------------


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="patternlab",
        description="Pattern Lagrangians over the simplex: evaluation, gluing, blowups, verification.",
    )
    parser.add_argument("--pretty", action="store_true", help="indent the JSON output")
    parser.add_argument("--timing", action="store_true",
                        help="include wall-clock time in the manifest (breaks bytewise reproducibility)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("lambda", help="maximize a pattern (or hypergraph) over the simplex")
    p.add_argument("file", help="pattern or hypergraph JSON file")
    _optimizer_flags(p)
    p.add_argument("--grid-denominator", type=int, default=None,
                   help="also run the exact rational grid oracle at this denominator")
    p.set_defaults(fn=_cmd_lambda)

    p = sub.add_parser("union", help="glue the second pattern into indices of the first")
    p.add_argument("file1")
    p.add_argument("file2")
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--on", type=int, help="single glue index of the first pattern")
    g.add_argument("--on-set", help="comma-separated glue indices, or 'all'")
    p.add_argument("--out", help="write the glued pattern here (labeling goes to a sidecar)")
    p.set_defaults(fn=_cmd_union)

    p = sub.add_parser("mapf", help="maximize host polynomial + lambda * sum of glue r-th powers")
    p.add_argument("--pattern", required=True)
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--glue", type=int, help="single glue index")
    g.add_argument("--glue-set", help="comma-separated glue indices, or 'all'")
    p.add_argument("--lambda", dest="lambda2", type=float, required=True,
                   help="inner Lagrangian value in [0, 1]")
    _optimizer_flags(p)
    p.set_defaults(fn=_cmd_mapf)

    p = sub.add_parser("blowup", help="materialize a blowup of a pattern")
    p.add_argument("--pattern", required=True)
    p.add_argument("--sizes", required=True, help="comma-separated class sizes")
    p.add_argument("--out", help="write the hypergraph here")
    p.set_defaults(fn=_cmd_blowup)

    p = sub.add_parser("density", help="edge density of a hypergraph file")
    p.add_argument("file")
    p.set_defaults(fn=_cmd_density)

    p = sub.add_parser("verify", help="run a verification suite")
    p.add_argument("suite", choices=_SUITES + ("all",))
    p.add_argument("--trials", type=int, default=200, help="random trials where applicable")
    p.add_argument("--jobs", type=int, default=1,
                   help="parallel suite execution (default 1 for bytewise reproducibility)")
    _optimizer_flags(p)
    p.set_defaults(fn=_cmd_verify)

    p = sub.add_parser("check-sequence", help="check sequence conditions on a directory of patterns")
    p.add_argument("directory", help="pattern files, ordered by filename")
    p.add_argument("--k", type=int, required=True, help="subpattern size for condition 3")
    p.add_argument("--lambda0", type=float, required=True, help="target level")
    p.add_argument("--eps-file", required=True,
                   help="JSON number or list: the required per-term margins")
    _optimizer_flags(p)
    p.set_defaults(fn=_cmd_check_sequence)

    p = sub.add_parser("catalog", help="known non-jump densities, as exact rationals")
    p.add_argument("--r", type=int, required=True)
    p.add_argument("--frankl-rodl-l", default="",
                   help="comma-separated l values to materialize the family entries")
    p.set_defaults(fn=_cmd_catalog)

    return parser


def _manifest_config(args: argparse.Namespace) -> dict:
    skip = {"fn", "command", "pretty", "timing"}
    return {k: v for k, v in sorted(vars(args).items()) if k not in skip}


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:]) if argv is None else list(argv)
    parser = _build_parser()
    args = parser.parse_args(argv)

    env_seed = os.environ.get("PATTERNLAB_SEED")
    if env_seed is not None and hasattr(args, "seed"):
        try:
            args.seed = int(env_seed)
        except ValueError:
            print(f"patternlab: PATTERNLAB_SEED={env_seed!r} is not an integer", file=sys.stderr)
            return EXIT_INPUT

    started = time.perf_counter()
    try:
        result, code, input_paths = args.fn(args)
        hashes = {path: _sha256(path) for path in input_paths}
    except CapExceeded as exc:
        print(f"patternlab: resource cap exceeded: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except (FormatError, PatternLabError, ValueError, OSError) as exc:
        print(f"patternlab: {exc}", file=sys.stderr)
        return EXIT_INPUT
    elapsed = time.perf_counter() - started

    manifest = RunManifest(
        command=["patternlab"] + argv,
        config=_manifest_config(args),
        input_hashes=hashes,
        version=__version__,
        seed=getattr(args, "seed", None),
        wall_clock_s=elapsed,
    )
    doc = {"manifest": manifest.to_dict(include_timing=args.timing), "result": result}
    if args.pretty:
        print(json.dumps(doc, indent=2))
    else:
        print(json.dumps(doc, separators=(",", ":")))
    print(f"patternlab: {args.command} finished in {elapsed:.3f}s", file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
