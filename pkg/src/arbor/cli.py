"""Command-line surface.

Subcommands: encode, dist, morph, solve, maze2tree, and the library verbs
lib add / lib list / lib nearest / lib transfer. Domain failures exit 1 with
a stable error code on stderr; usage errors exit 2.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import replace
from pathlib import Path

from .characteristic import (
    MetricWeights,
    characteristic_matrix,
    format_number,
    matrix_to_csv,
    matrix_to_json,
)
from .errors import ArborError, NoCorrespondence
from .metrics import tree_distance
from .morphism import compute_morphism, morphism_to_json
from .problems import (
    TreeProblem,
    maze_to_tree,
    parse_maze,
    problem_from_json,
    problem_to_json,
    solve,
)
from .solutions import solution_from_dict, solution_to_json
from .transfer import ProblemLibrary, transfer_solution
from .tree import binarize

DEFAULT_LIBRARY = "arbor_lib"


def _load_problem(path: str, strict: bool = False) -> TreeProblem:
    return problem_from_json(Path(path).read_text(), strict=strict)


def _weights_for(p: TreeProblem, spec: str | None, parser: argparse.ArgumentParser) -> MetricWeights:
    rows = len(p.tree.schema) + 1
    if spec is None:
        return MetricWeights.uniform(rows)
    try:
        values = tuple(float(x) for x in spec.split(","))
        return MetricWeights(values)
    except (ValueError, ArborError) as exc:
        parser.error(f"bad --lambda {spec!r}: {exc}")
        raise AssertionError  # parser.error exits


def _binary(p: TreeProblem) -> TreeProblem:
    tree = binarize(p.tree)
    return TreeProblem(
        tree=tree, kind=p.kind, objective=p.objective, goal_tips=p.goal_tips
    )


def _path_line(p: TreeProblem, solution) -> str:
    nodes = [p.tree.root]
    for parent, child in solution.marked_edges():
        nodes.append(child)
    return "path: " + " → ".join(nodes)


def _library(args: argparse.Namespace) -> ProblemLibrary:
    root = args.lib or os.environ.get("ARBOR_LIB") or DEFAULT_LIBRARY
    return ProblemLibrary(root)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="arbor",
        description="Encode, compare, solve, and transfer rooted tree problems.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_encode = sub.add_parser("encode", help="print the characteristic matrix")
    p_encode.add_argument("problem")
    p_encode.add_argument("--format", choices=("json", "csv", "text"), default="json")

    p_dist = sub.add_parser("dist", help="distance between two problems")
    p_dist.add_argument("a")
    p_dist.add_argument("b")
    p_dist.add_argument("--lambda", dest="weights", metavar="W1,W2,...")

    p_morph = sub.add_parser("morph", help="matrix morphism between two problems")
    p_morph.add_argument("a")
    p_morph.add_argument("b")

    p_solve = sub.add_parser("solve", help="solve a problem")
    p_solve.add_argument("problem")
    p_solve.add_argument("--strict", action="store_true")

    p_maze = sub.add_parser("maze2tree", help="convert a maze text file to problem JSON")
    p_maze.add_argument("maze")

    p_lib = sub.add_parser("lib", help="problem library operations")
    p_lib.add_argument("--lib", help="library root (default $ARBOR_LIB or ./arbor_lib)")
    lib_sub = p_lib.add_subparsers(dest="lib_command", required=True)

    l_add = lib_sub.add_parser("add", help="store a problem")
    l_add.add_argument("problem")
    l_add.add_argument("--solve", action="store_true", help="solve before storing")
    l_add.add_argument("--solution", help="store an existing solution JSON file")
    l_add.add_argument("--id", dest="problem_id")
    l_add.add_argument("--tags", default="", help="comma-separated tags")
    l_add.add_argument("--strict", action="store_true")

    lib_sub.add_parser("list", help="list stored records")

    l_near = lib_sub.add_parser("nearest", help="rank stored problems by distance")
    l_near.add_argument("--query", required=True)
    l_near.add_argument("--lambda", dest="weights", metavar="W1,W2,...")
    l_near.add_argument("--limit", type=int, default=5)

    l_tr = lib_sub.add_parser("transfer", help="transfer the nearest solved analog")
    l_tr.add_argument("--query", required=True)
    l_tr.add_argument("--lambda", dest="weights", metavar="W1,W2,...")

    return parser


def run(argv: list[str]) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _dispatch(args, parser)
    except ArborError as exc:
        print(f"error[{type(exc).__name__}]: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error[IO]: {exc}", file=sys.stderr)
        return 1


def _dispatch(args: argparse.Namespace, parser: argparse.ArgumentParser) -> int:
    if args.command == "encode":
        problem = _binary(_load_problem(args.problem))
        matrix = characteristic_matrix(problem.tree, source_id=Path(args.problem).stem)
        if args.format == "csv":
            sys.stdout.write(matrix_to_csv(matrix))
        elif args.format == "json":
            print(matrix_to_json(matrix))
        else:
            tags = [str(t) for t in matrix.column_index]
            width = max(len(t) for t in tags) + 1
            print("".join(t.rjust(width) for t in tags))
            for row in matrix.entries:
                print("".join(format_number(x).rjust(width) for x in row))
        return 0

    if args.command == "dist":
        pa, pb = _binary(_load_problem(args.a)), _binary(_load_problem(args.b))
        weights = _weights_for(pa, args.weights, parser)
        print(format_number(tree_distance(pa.tree, pb.tree, weights)))
        return 0

    if args.command == "morph":
        pa, pb = _binary(_load_problem(args.a)), _binary(_load_problem(args.b))
        m_a = characteristic_matrix(pa.tree, source_id=Path(args.a).stem)
        m_b = characteristic_matrix(pb.tree, source_id=Path(args.b).stem)
        print(morphism_to_json(compute_morphism(m_a, m_b)))
        return 0

    if args.command == "solve":
        problem = _load_problem(args.problem, strict=args.strict)
        solution = replace(solve(problem), problem_id=Path(args.problem).stem)
        print(solution_to_json(solution))
        print(_path_line(problem, solution))
        return 0

    if args.command == "maze2tree":
        problem = maze_to_tree(parse_maze(Path(args.maze).read_text()))
        print(problem_to_json(problem))
        return 0

    if args.command == "lib":
        return _dispatch_lib(args, parser)

    raise AssertionError(f"unhandled command {args.command!r}")


def _dispatch_lib(args: argparse.Namespace, parser: argparse.ArgumentParser) -> int:
    library = _library(args)

    if args.lib_command == "add":
        problem = _load_problem(args.problem, strict=args.strict)
        if args.solution:
            solution = solution_from_dict(json.loads(Path(args.solution).read_text()))
        elif args.solve:
            solution = solve(problem)
        else:
            solution = None
        tags = tuple(t for t in args.tags.split(",") if t)
        pid = library.add(problem, solution, problem_id=args.problem_id, tags=tags)
        print(pid)
        return 0

    if args.lib_command == "list":
        for r in library.records():
            solved = "solved" if r.has_solution else "open"
            tags = ",".join(r.tags)
            print(f"{r.problem_id}  {solved}  {tags}")
        return 0

    if args.lib_command == "nearest":
        query = _load_problem(args.query)
        weights = _weights_for(query, args.weights, parser)
        for pid, distance in library.nearest(_binary(query), weights, args.limit):
            print(f"{pid}  {format_number(distance)}")
        return 0

    if args.lib_command == "transfer":
        query = _binary(_load_problem(args.query))
        weights = _weights_for(query, args.weights, parser)
        ranked = library.nearest(query, weights, limit=len(library.records()) or 1)
        for pid, _ in ranked:
            analog, analog_sol = library.load(pid)
            if analog_sol is None:
                continue
            try:
                solution = transfer_solution(
                    analog, analog_sol, query, target_id=Path(args.query).stem
                )
            except NoCorrespondence:
                continue
            print(solution_to_json(solution))
            print(_path_line(query, solution))
            return 0
        raise NoCorrespondence("no solved analog with a tip correspondence in the library")

    raise AssertionError(f"unhandled lib command {args.lib_command!r}")


def main() -> None:
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
