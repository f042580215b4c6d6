"""
qlext - Command-line interface

Usage:
    qlext validate INSTANCE [SOLUTION]
    qlext solve INSTANCE [--algo auto] [-o SOLUTION] [--no-timing]
    qlext gen random [--vertices N] [--edge-probability P] [--pages L] [--seed S]
    qlext gen mcc [EDGES COLORING] [--simple] [--random-k K --class-size N]
    qlext bench DIRECTORY [--algo ALGO ...]

Exit codes: 0 solved/valid, 1 unsolvable/invalid, 2 usage or parse error,
3 oracle budget exhausted, 4 solver disagreement.
"""
from concurrent.futures import ProcessPoolExecutor
from enum import IntEnum
from pathlib import Path
from typing import Optional, Sequence
import argparse
import csv
import json
import logging
import sys

from .config import ExhaustPolicy, PruneMode, SolverConfig
from .errors import (
    BudgetExhaustedError,
    ConsistencyError,
    GenerationError,
    InstanceParseError,
    PreconditionError,
    StructuralError,
    ValidationError,
)
from .models.files import InstanceFile, SolutionFile
from .models.layout import Graph, edge_key
from .models.result import Algorithm, SolveStatus
from .services.gen import DeletionPolicy, MccInstance, RandomGenConfig, gen_random, random_mcc, reduce_mcc
from .services.solver_service import SolverService

logger = logging.getLogger(__name__)

BENCH_COLUMNS = ["instance", "algo", "result", "branches", "milliseconds"]
DEFAULT_BENCH_ALGOS = (Algorithm.ORACLE, Algorithm.XP, Algorithm.KAPPA_ELL_FPT, Algorithm.TWO_VERTEX)


class ExitCode(IntEnum):
    OK = 0
    NEGATIVE = 1
    USAGE = 2
    BUDGET = 3
    DISAGREEMENT = 4


def _configure_logging(verbose: bool, quiet: bool) -> None:
    level = logging.DEBUG if verbose else logging.WARNING if quiet else logging.INFO
    logging.basicConfig(
        level=level,
        format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
        stream=sys.stderr,
        force=True,
    )


def _solver_config(args: argparse.Namespace) -> SolverConfig:
    prune_mode = getattr(args, "prune_mode", None)
    on_exhaust = getattr(args, "on_exhaust", None)
    return SolverConfig.from_env().with_overrides(
        jobs=getattr(args, "jobs", None),
        prune_mode=PruneMode(prune_mode) if prune_mode else None,
        oracle_max_branches=getattr(args, "oracle_budget", None),
        oracle_on_exhaust=ExhaustPolicy(on_exhaust) if on_exhaust else None,
    )


def _emit(text: str, output: Optional[Path]) -> None:
    if output is None:
        sys.stdout.write(text)
    else:
        output.write_text(text, encoding="utf-8")
        logger.info(f"Wrote {output}")


def cmd_validate(args: argparse.Namespace) -> int:
    inst = InstanceFile.load(args.instance).to_instance()
    report: dict = {"instance": str(args.instance), "valid": True}
    if args.solution is not None:
        solution = SolutionFile.load(args.solution)
        validation = solution.validate_against(inst)
        extends_h = solution.extends_instance(inst)
        report.update(
            valid=validation.ok and extends_h,
            extends_h=extends_h,
            violations=validation.describe(),
        )
    sys.stdout.write(json.dumps(report, indent=2) + "\n")
    return ExitCode.OK if report["valid"] else ExitCode.NEGATIVE


def cmd_solve(args: argparse.Namespace) -> int:
    inst = InstanceFile.load(args.instance).to_instance()
    result = SolverService(_solver_config(args)).solve(inst, args.algo)
    if result.status is SolveStatus.BUDGET_EXHAUSTED:
        logger.warning("Oracle budget exhausted; solvability unknown")
        return ExitCode.BUDGET
    if result.layout is None:
        logger.info(f"{args.instance}: unsolvable ({result.algorithm.value})")
        return ExitCode.NEGATIVE
    solution = SolutionFile.from_result(inst, result, timing=not args.no_timing)
    _emit(solution.dumps(), args.output)
    return ExitCode.OK


def cmd_gen_random(args: argparse.Namespace) -> int:
    cfg = RandomGenConfig(
        vertex_count=args.vertices,
        edge_probability=args.edge_probability,
        page_count=args.pages,
        deletion_policy=DeletionPolicy(vertices=args.delete_vertices, edges=args.delete_edges),
        seed=args.seed,
        independent_h_layout=args.independent_h,
    )
    _emit(InstanceFile.from_instance(gen_random(cfg)).dumps(), args.output)
    return ExitCode.OK


def _read_pairs(path: Path) -> list[tuple[str, str]]:
    pairs = []
    for number, line in enumerate(path.read_text(encoding="utf-8").splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        fields = line.split()
        if len(fields) != 2:
            raise ValidationError(f"{path}:{number}: expected two fields, got {len(fields)}")
        pairs.append((fields[0], fields[1]))
    return pairs


def load_mcc(edges_path: Path, coloring_path: Path) -> MccInstance:
    """
    Clique input from an edge list ("u v" per line) and a coloring ("v color" per line).

    The color count is the largest color used.
    """
    coloring = {}
    for vertex, color in _read_pairs(coloring_path):
        if not color.isdigit():
            raise ValidationError(f"Color of {vertex!r} is not a positive integer: {color!r}")
        coloring[vertex] = int(color)
    edges = tuple(sorted({edge_key(u, v) for u, v in _read_pairs(edges_path)}))
    k = max(coloring.values(), default=0)
    return MccInstance(graph=Graph(tuple(coloring), edges), k=k, coloring=coloring)


def cmd_gen_mcc(args: argparse.Namespace) -> int:
    if args.edges is not None:
        if args.coloring is None:
            raise ValidationError("An edge list needs a coloring file")
        mcc = load_mcc(args.edges, args.coloring)
    elif args.random_k is not None:
        mcc = random_mcc(args.random_k, args.class_size, args.edge_probability, args.seed)
    else:
        raise ValidationError("Give an edge list and coloring, or --random-k")
    art = reduce_mcc(mcc, simple=args.simple)
    _emit(InstanceFile.from_instance(art.instance).dumps(), args.output)
    return ExitCode.OK


def _bench_instance(
    path: Path, algorithms: Sequence[Algorithm], config: SolverConfig, timing: bool
) -> tuple[list[list[str]], bool]:
    """Rows for one instance and whether its definitive results disagree"""
    rows = []
    definitive = set()
    failed = False
    inst = InstanceFile.load(path).to_instance()
    service = SolverService(config)
    for algorithm in algorithms:
        try:
            result = service.solve(inst, algorithm)
        except PreconditionError:
            rows.append([path.stem, algorithm.value, "n/a", "", ""])
            continue
        except ConsistencyError as e:
            logger.error(f"{path.stem}/{algorithm.value}: {e}")
            rows.append([path.stem, algorithm.value, "error", "", ""])
            failed = True
            continue
        if result.status.is_definitive:
            definitive.add(result.status)
        milliseconds = f"{result.wall_ms:.3f}" if timing else ""
        rows.append(
            [path.stem, algorithm.value, result.status.value, str(result.stats.branches_explored), milliseconds]
        )
    return rows, failed or len(definitive) > 1


def cmd_bench(args: argparse.Namespace) -> int:
    directory = Path(args.directory)
    if not directory.is_dir():
        raise ValidationError(f"{directory} is not a directory")
    paths = sorted(directory.glob("*.json"))
    algorithms = [Algorithm(a) for a in args.algo] if args.algo else list(DEFAULT_BENCH_ALGOS)
    config = _solver_config(args)
    timing = not args.no_timing

    writer = csv.writer(sys.stdout, lineterminator="\n")
    writer.writerow(BENCH_COLUMNS)

    if config.jobs > 1 and len(paths) > 1:
        # Solvers run sequentially inside each instance worker
        inner = config.with_overrides(jobs=1)
        with ProcessPoolExecutor(max_workers=config.jobs) as pool:
            outcomes = pool.map(
                _bench_instance,
                paths,
                [algorithms] * len(paths),
                [inner] * len(paths),
                [timing] * len(paths),
            )
            results = list(outcomes)
    else:
        results = (_bench_instance(path, algorithms, config, timing) for path in paths)

    for path, (rows, disagree) in zip(paths, results):
        writer.writerows(rows)
        if disagree:
            sys.stdout.flush()
            logger.error(f"{path.stem}: solvers disagree")
            return ExitCode.DISAGREEMENT
    return ExitCode.OK


def _add_solver_options(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--jobs", type=int, help="Worker processes (default: QLEXT_JOBS or 1)")
    parser.add_argument("--prune-mode", choices=[m.value for m in PruneMode])
    parser.add_argument("--oracle-budget", type=int, help="Oracle step budget")
    parser.add_argument("--on-exhaust", choices=[p.value for p in ExhaustPolicy])
    parser.add_argument("--no-timing", action="store_true", help="Leave out wall times")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qlext", description="Queue layout extension solvers")
    verbosity = parser.add_mutually_exclusive_group()
    verbosity.add_argument("-v", "--verbose", action="store_true", help="Debug logging")
    verbosity.add_argument("-q", "--quiet", action="store_true", help="Warnings and errors only")
    commands = parser.add_subparsers(dest="command", required=True)

    validate = commands.add_parser("validate", help="Validate an instance and optionally a solution")
    validate.add_argument("instance", type=Path)
    validate.add_argument("solution", type=Path, nargs="?")
    validate.set_defaults(handler=cmd_validate)

    solve = commands.add_parser("solve", help="Solve an instance")
    solve.add_argument("instance", type=Path)
    solve.add_argument("--algo", choices=[a.value for a in Algorithm], default=Algorithm.AUTO.value)
    solve.add_argument("-o", "--output", type=Path, help="Solution file (default: stdout)")
    _add_solver_options(solve)
    solve.set_defaults(handler=cmd_solve)

    gen = commands.add_parser("gen", help="Generate an instance")
    generators = gen.add_subparsers(dest="generator", required=True)

    random_gen = generators.add_parser("random", help="Random partial layout")
    random_gen.add_argument("--vertices", type=int, default=6)
    random_gen.add_argument("--edge-probability", type=float, default=0.4)
    random_gen.add_argument("--pages", type=int, default=2)
    random_gen.add_argument("--delete-vertices", type=int, default=1)
    random_gen.add_argument("--delete-edges", type=int, default=1)
    random_gen.add_argument("--independent-h", action="store_true", help="Lay H out on its own spine")
    random_gen.add_argument("--seed", type=int, default=0)
    random_gen.add_argument("-o", "--output", type=Path)
    random_gen.set_defaults(handler=cmd_gen_random)

    mcc = generators.add_parser("mcc", help="Multicolored clique reduction")
    mcc.add_argument("edges", type=Path, nargs="?", help="Edge list, one 'u v' per line")
    mcc.add_argument("coloring", type=Path, nargs="?", help="Coloring, one 'v color' per line")
    mcc.add_argument("--simple", action="store_true", help="Avoid parallel edges in H")
    mcc.add_argument("--random-k", type=int, help="Random input with this many colors")
    mcc.add_argument("--class-size", type=int, default=2)
    mcc.add_argument("--edge-probability", type=float, default=0.5)
    mcc.add_argument("--seed", type=int, default=0)
    mcc.add_argument("-o", "--output", type=Path)
    mcc.set_defaults(handler=cmd_gen_mcc)

    bench = commands.add_parser("bench", help="Run solvers over a directory of instances")
    bench.add_argument("directory", type=Path)
    bench.add_argument("--algo", action="append", choices=[a.value for a in Algorithm])
    _add_solver_options(bench)
    bench.set_defaults(handler=cmd_bench)

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Entry point; returns the exit code"""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return ExitCode.OK if e.code == 0 else ExitCode.USAGE

    _configure_logging(args.verbose, args.quiet)
    try:
        return int(args.handler(args))
    except InstanceParseError as e:
        logger.error(f"Parse error: {e}")
        return ExitCode.USAGE
    except (PreconditionError, ValidationError, StructuralError, GenerationError) as e:
        logger.error(str(e))
        return ExitCode.USAGE
    except BudgetExhaustedError as e:
        logger.error(str(e))
        return ExitCode.BUDGET
    except ConsistencyError as e:
        logger.error(f"Internal error: {e}")
        return ExitCode.DISAGREEMENT
    except OSError as e:
        logger.error(str(e))
        return ExitCode.USAGE


if __name__ == "__main__":
    sys.exit(main())
