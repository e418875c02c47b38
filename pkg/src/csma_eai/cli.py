"""Command-line interface and the benchmark experiment harness.

Commands: ``saturated`` (saturated throughput analysis), ``analyze``
(finite offered-load throughputs via equivalent access intensities),
``simulate`` (event-driven validation runs), ``gen`` (random topology
files), and ``experiment`` (EAI-vs-simulation error sweep over random
networks).

All output is deterministic for fixed arguments and seeds; JSON mode
emits a single document on stdout. Exit codes: 0 success, 2 input parse
error, 3 state-space cap exceeded, 4 solver non-convergence, 5 invalid
configuration.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from pathlib import Path

import numpy as np

from .eai import EaiSolution, compute_and_compare
from .errors import (
    CsmaError,
    IndexOutOfRangeError,
    InfeasibleTargetError,
    InvalidConfigError,
    IterationLimitExceededError,
    LengthMismatchError,
    NoConvergenceError,
    SelfLoopError,
    StateSpaceTooLargeError,
    TooManyEdgesError,
    TooManyLinksError,
)
from .graph import (
    DEFAULT_STATE_CAP,
    ContentionGraph,
    enumerate_independent_sets,
    format_graph_text,
    parse_graph_text,
)
from .icn import link_throughputs, partition_function
from .netgen import (
    random_contention_graph,
    throughput_error_report,
    unsaturated_load_recipe,
)
from .sim import SimConfig, SimResult, replicate

EXIT_OK = 0
EXIT_PARSE = 2
EXIT_STATE_CAP = 3
EXIT_NO_CONVERGENCE = 4
EXIT_INVALID_CONFIG = 5

_PARSE_ERRORS = (
    ValueError,
    OSError,
    SelfLoopError,
    IndexOutOfRangeError,
    TooManyLinksError,
    LengthMismatchError,
)


class _CliFailure(Exception):
    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code


def _fail(code: int, message: str) -> _CliFailure:
    return _CliFailure(code, message)


def _load_graph(path: str) -> ContentionGraph:
    try:
        return parse_graph_text(Path(path).read_text(encoding="utf-8"))
    except _PARSE_ERRORS as exc:
        raise _fail(EXIT_PARSE, f"cannot read graph {path}: {exc}") from exc


def _load_vector(path: str, what: str) -> list[float]:
    try:
        values = []
        for raw in Path(path).read_text(encoding="utf-8").splitlines():
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            values.append(float(line))
        return values
    except _PARSE_ERRORS as exc:
        raise _fail(EXIT_PARSE, f"cannot read {what} {path}: {exc}") from exc


def _resolve_rho(args, num_links: int):
    if args.rho_file is not None:
        vec = _load_vector(args.rho_file, "intensities")
        if len(vec) != num_links:
            raise _fail(
                EXIT_PARSE,
                f"intensity file has {len(vec)} entries for {num_links} links",
            )
        return vec
    return args.rho


def _jsonable(obj):
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return None if math.isnan(v) or math.isinf(v) else v
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (frozenset, set)):
        return sorted(int(v) for v in obj)
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    return obj


def _emit(payload: dict, human_lines: list[str], fmt: str) -> None:
    if fmt == "json":
        sys.stdout.write(json.dumps(_jsonable(payload), indent=2) + "\n")
    else:
        sys.stdout.write("\n".join(human_lines) + "\n")


def _vec4(values) -> str:
    return "[" + ", ".join(f"{float(v):.4f}" for v in values) + "]"


def _set_str(links) -> str:
    return "{" + ", ".join(str(i) for i in sorted(links)) + "}"


def _solution_payload(solution: EaiSolution, include_trace: bool) -> dict:
    payload = {
        "network_saturated": solution.network_saturated,
        "throughputs": solution.throughputs,
        "equivalent_intensities": solution.equivalent_intensities,
        "intensities": solution.intensities,
        "offered_load": solution.offered_load,
        "saturated_set": solution.saturated_set,
        "unsaturated_set": solution.unsaturated_set,
        "extra_countdown": solution.extra_countdown,
        "iterations": solution.iterations,
    }
    if include_trace:
        payload["trace"] = [
            {
                "iteration": rec.index,
                "solves": [
                    {
                        "saturated": s.saturated,
                        "unsaturated": s.unsaturated,
                        "rho_tilde": s.rho_tilde,
                    }
                    for s in rec.solves
                ],
                "rho_tilde": rec.rho_tilde,
                "throughputs": rec.throughputs,
                "saturated_next": rec.saturated_next,
                "unsaturated_next": rec.unsaturated_next,
            }
            for rec in solution.trace
        ]
    return payload


def _result_payload(res: SimResult) -> dict:
    return {
        "airtime_fraction": res.airtime_fraction,
        "transmissions": res.transmissions,
        "arrivals": res.arrivals,
        "queue_nonempty_fraction": res.queue_nonempty_fraction,
        "elapsed": res.elapsed,
    }


def cmd_saturated(args) -> int:
    graph = _load_graph(args.graph)
    rho = _resolve_rho(args, graph.num_links)
    space = enumerate_independent_sets(graph, max_states=args.max_states)
    z = partition_function(space, rho)
    th = link_throughputs(space, rho)
    payload = {
        "command": "saturated",
        "num_links": graph.num_links,
        "num_states": space.num_states,
        "partition_function": z,
        "throughputs": th,
    }
    human = [
        f"links:              {graph.num_links}",
        f"feasible states:    {space.num_states}",
        f"partition function: {z:.4f}",
        f"TH0:                {_vec4(th)}",
    ]
    _emit(payload, human, args.format)
    return EXIT_OK


def cmd_analyze(args) -> int:
    graph = _load_graph(args.graph)
    rho = _resolve_rho(args, graph.num_links)
    loads = _load_vector(args.loads, "loads")
    if len(loads) != graph.num_links:
        raise _fail(
            EXIT_PARSE,
            f"loads file has {len(loads)} entries for {graph.num_links} links",
        )
    solution = compute_and_compare(
        graph, rho, loads, max_states=args.max_states
    )
    payload = {"command": "analyze", "num_links": graph.num_links}
    payload.update(_solution_payload(solution, include_trace=args.trace))
    human = [
        f"network saturated:      {str(solution.network_saturated).lower()}",
        f"TH:                     {_vec4(solution.throughputs)}",
        f"equivalent intensities: {_vec4(solution.equivalent_intensities)}",
        f"saturated set:          {_set_str(solution.saturated_set)}",
        f"unsaturated set:        {_set_str(solution.unsaturated_set)}",
        f"iterations:             {solution.iterations}",
    ]
    if args.trace:
        for rec in solution.trace:
            human.append(f"iteration {rec.index}:")
            for s in rec.solves:
                human.append(
                    f"  solve S={_set_str(s.saturated)} "
                    f"U={_set_str(s.unsaturated)} rho~={_vec4(s.rho_tilde)}"
                )
            human.append(f"  TH{rec.index}: {_vec4(rec.throughputs)}")
            human.append(
                f"  next S={_set_str(rec.saturated_next)} "
                f"U={_set_str(rec.unsaturated_next)}"
            )
    _emit(payload, human, args.format)
    return EXIT_OK


def cmd_simulate(args) -> int:
    graph = _load_graph(args.graph)
    rho = _resolve_rho(args, graph.num_links)
    if args.mode == "offered":
        if args.loads is None:
            raise _fail(EXIT_INVALID_CONFIG, "offered mode requires --loads")
        loads = _load_vector(args.loads, "loads")
    else:
        if args.loads is not None:
            raise _fail(
                EXIT_INVALID_CONFIG, "--loads is only valid with --mode offered"
            )
        loads = None
    config = SimConfig(
        mode=args.mode,
        rho=rho,
        loads=loads,
        transmission_distribution=args.tx_dist,
        horizon=args.horizon,
        warmup=args.warmup,
        seed=args.seed,
    )
    summary = replicate(graph, config, args.reps)
    payload = {
        "command": "simulate",
        "mode": args.mode,
        "num_links": graph.num_links,
        "transmission_distribution": args.tx_dist,
        "horizon": config.horizon,
        "warmup": config.effective_warmup,
        "seed": args.seed,
        "replications": args.reps,
        "mean_airtime": summary.mean_airtime,
        "std_airtime": summary.std_airtime,
        "results": [_result_payload(r) for r in summary.results],
    }
    human = [
        f"mode:         {args.mode}",
        f"replications: {args.reps}",
        f"mean airtime: {_vec4(summary.mean_airtime)}",
        f"std airtime:  {_vec4(summary.std_airtime)}",
    ]
    _emit(payload, human, args.format)
    return EXIT_OK


def cmd_gen(args) -> int:
    graph = random_contention_graph(args.n, args.mean_degree, args.seed)
    text = format_graph_text(graph)
    Path(args.out).write_text(text, encoding="utf-8", newline="\n")
    payload = {
        "command": "gen",
        "num_links": graph.num_links,
        "num_edges": len(graph.edges),
        "mean_degree": 2 * len(graph.edges) / graph.num_links,
        "seed": args.seed,
        "path": args.out,
    }
    human = [
        f"wrote {args.out}: {graph.num_links} links, "
        f"{len(graph.edges)} edges"
    ]
    _emit(payload, human, args.format)
    return EXIT_OK


def _derive_seed(master: int, *path: int) -> int:
    seq = np.random.SeedSequence([int(master), *[int(p) for p in path]])
    return int(seq.generate_state(1, np.uint64)[0])


def _experiment_cell(degree_index, degree, args):
    runs = []
    pooled_errors: list[float] = []
    for run in range(args.runs_per_degree):
        graph_seed = _derive_seed(args.seed, degree_index, run, 0)
        sim_seed = _derive_seed(args.seed, degree_index, run, 1)
        record = {
            "run": run,
            "graph_seed": graph_seed,
            "sim_seed": sim_seed,
            "status": "ok",
        }
        try:
            graph = random_contention_graph(args.n, degree, graph_seed)
            space = enumerate_independent_sets(graph, max_states=args.max_states)
            loads = unsaturated_load_recipe(
                graph, args.rho, max_states=args.max_states
            )
            solution = compute_and_compare(
                graph, args.rho, loads, max_states=args.max_states
            )
            summary = replicate(
                graph,
                SimConfig(
                    mode="offered",
                    rho=args.rho,
                    loads=loads,
                    horizon=args.horizon,
                    warmup=args.warmup,
                    seed=sim_seed,
                ),
                args.reps,
            )
            report = throughput_error_report(
                solution.throughputs, summary.mean_airtime
            )
            record.update(
                num_edges=len(graph.edges),
                num_states=space.num_states,
                offered_load=loads,
                eai_throughputs=solution.throughputs,
                sim_airtime=summary.mean_airtime,
                relative_errors=report.relative_errors,
                mean_relative_error=report.mean_relative_error,
                excluded_links=list(report.excluded_links),
                excluded_absolute_errors=list(report.excluded_absolute_errors),
            )
            pooled_errors.extend(
                float(e) for e in report.relative_errors if not math.isnan(e)
            )
        except CsmaError as exc:
            record["status"] = type(exc).__name__
            record["error"] = str(exc)
            print(
                f"warning: degree {degree} run {run} failed: {exc}",
                file=sys.stderr,
            )
        runs.append(record)
    ok_runs = [r for r in runs if r["status"] == "ok"]
    cell_mean = (
        float(np.mean(pooled_errors)) if pooled_errors else float("nan")
    )
    return {
        "mean_degree": degree,
        "runs": runs,
        "successful_runs": len(ok_runs),
        "mean_relative_error": cell_mean,
    }


def cmd_experiment(args) -> int:
    degrees = args.degrees
    cells = [
        _experiment_cell(idx, degree, args)
        for idx, degree in enumerate(degrees)
    ]
    payload = {
        "command": "experiment",
        "parameters": {
            "degrees": degrees,
            "runs_per_degree": args.runs_per_degree,
            "n": args.n,
            "rho": args.rho,
            "horizon": args.horizon,
            "warmup": args.warmup,
            "reps": args.reps,
            "seed": args.seed,
        },
        "cells": cells,
    }
    human = ["mean degree | runs ok | mean relative error"]
    for cell in cells:
        err = cell["mean_relative_error"]
        err_str = f"{100 * err:.4f}%" if not math.isnan(err) else "n/a"
        human.append(
            f"{cell['mean_degree']:>11} | "
            f"{cell['successful_runs']:>7} | {err_str}"
        )
    if args.csv:
        _write_experiment_csv(args.csv, cells)
    _emit(payload, human, args.format)
    if any(cell["successful_runs"] == 0 for cell in cells):
        return EXIT_STATE_CAP
    return EXIT_OK


def _write_experiment_csv(path: str, cells: list[dict]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            [
                "mean_degree",
                "run",
                "link",
                "offered_load",
                "eai_throughput",
                "sim_airtime",
                "relative_error",
            ]
        )
        for cell in cells:
            for record in cell["runs"]:
                if record["status"] != "ok":
                    writer.writerow(
                        [cell["mean_degree"], record["run"], "", "", "", "",
                         record["status"]]
                    )
                    continue
                for i, rel in enumerate(record["relative_errors"]):
                    writer.writerow(
                        [
                            cell["mean_degree"],
                            record["run"],
                            i + 1,
                            repr(float(record["offered_load"][i])),
                            repr(float(record["eai_throughputs"][i])),
                            repr(float(record["sim_airtime"][i])),
                            "" if math.isnan(rel) else repr(float(rel)),
                        ]
                    )


def _add_common(parser, with_rho=True):
    parser.add_argument("--format", choices=("human", "json"), default="human")
    if with_rho:
        group = parser.add_mutually_exclusive_group(required=True)
        group.add_argument(
            "--rho", type=float, help="uniform access intensity"
        )
        group.add_argument(
            "--rho-file", help="per-link intensity file (one value per line)"
        )
    parser.add_argument(
        "--max-states",
        type=int,
        default=DEFAULT_STATE_CAP,
        help="independent-set enumeration cap",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="csma-eai",
        description="Throughput computation for CSMA networks with finite offered load",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("saturated", help="saturated throughput analysis")
    p.add_argument("--graph", required=True)
    _add_common(p)
    p.set_defaults(func=cmd_saturated)

    p = sub.add_parser("analyze", help="finite offered-load analysis")
    p.add_argument("--graph", required=True)
    p.add_argument("--loads", required=True, help="per-link offered-load file")
    p.add_argument("--trace", action="store_true", help="include the iteration trace")
    _add_common(p)
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("simulate", help="event-driven simulation")
    p.add_argument("--graph", required=True)
    p.add_argument("--mode", choices=("saturated", "offered"), required=True)
    p.add_argument("--loads", help="per-link offered-load file (offered mode)")
    p.add_argument("--horizon", type=float, default=1e6)
    p.add_argument("--warmup", type=float, default=None)
    p.add_argument("--seed", type=int, default=12345)
    p.add_argument("--reps", type=int, default=1)
    p.add_argument(
        "--tx-dist",
        choices=("exponential", "uniform", "constant"),
        default="exponential",
    )
    _add_common(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("gen", help="generate a random contention graph")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--mean-degree", type=float, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--format", choices=("human", "json"), default="human")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser(
        "experiment", help="EAI vs simulation error sweep over random networks"
    )
    p.add_argument(
        "--degrees",
        type=lambda s: [float(x) for x in s.split(",")],
        default=[2.0, 3.0, 4.0],
        help="comma-separated mean degrees",
    )
    p.add_argument("--runs-per-degree", type=int, default=10)
    p.add_argument("--n", type=int, default=20)
    p.add_argument("--rho", type=float, default=5.3548)
    p.add_argument("--horizon", type=float, default=1e6)
    p.add_argument("--warmup", type=float, default=None)
    p.add_argument("--reps", type=int, default=1)
    p.add_argument("--seed", type=int, default=12345)
    p.add_argument("--csv", help="write per-link detail rows to this CSV file")
    p.add_argument("--format", choices=("human", "json"), default="human")
    p.add_argument("--max-states", type=int, default=DEFAULT_STATE_CAP)
    p.set_defaults(func=cmd_experiment)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except _CliFailure as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except StateSpaceTooLargeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_STATE_CAP
    except IterationLimitExceededError as exc:
        print(f"error: {exc}", file=sys.stderr)
        for rec in exc.trace:
            print(
                f"  iteration {rec.index}: TH={_vec4(rec.throughputs)} "
                f"S_next={_set_str(rec.saturated_next)}",
                file=sys.stderr,
            )
        return EXIT_NO_CONVERGENCE
    except (NoConvergenceError, InfeasibleTargetError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NO_CONVERGENCE
    except (InvalidConfigError, TooManyEdgesError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID_CONFIG
    except _PARSE_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE


if __name__ == "__main__":
    sys.exit(main())
