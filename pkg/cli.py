#!/usr/bin/env python3
"""
Tree Witness Engine CLI

Command-line interface for witness search, partition tooling and the
reduction pipeline.
"""

import argparse
import logging
import sys
import time
from pathlib import Path
from typing import Dict, List, Optional

from config import Config
from errors import (
    EXIT_INFEASIBLE, EXIT_OK, EXIT_VALIDATION, CapExceededError, PartitionError,
    ValidationError, WitnessEngineError,
)
from models.markov import underlying_graph
from models.result import ResultDocument, WitnessResult, document_base
from models.scalar import Arithmetic, format_rational, parse_rational
from models.telemetry import TelemetryEvent
from store.result_store import ResultStore
from store.telemetry_store import TelemetryStore

logger = logging.getLogger(__name__)

MODES = ("dtmc", "mdp-max", "mdp-min")


def build_parser() -> argparse.ArgumentParser:
    """Argument parser with all subcommands."""
    parser = argparse.ArgumentParser(
        prog='witness-engine',
        description='Tree Witness Engine'
    )
    parser.add_argument('--results-dir', help='Directory for stored result documents')
    parser.add_argument('--telemetry-dir', help='Directory for telemetry JSONL files')
    parser.add_argument('--run-id', default='cli', help='Run identifier for documents and telemetry')
    parser.add_argument('--store', action='store_true', help='Persist the result document')
    parser.add_argument('--verbose', action='store_true', help='Debug logging')

    subparsers = parser.add_subparsers(dest='command', required=True)

    # Partition check
    check_parser = subparsers.add_parser('check-partition', help='Validate a directed tree partition')
    check_parser.add_argument('model', help='Model file')
    check_parser.add_argument('partition', help='Partition file')

    # Witness search
    witness_parser = subparsers.add_parser('witness', help='Minimal witnessing subsystem')
    witness_parser.add_argument('model', help='Model file')
    witness_parser.add_argument('partition', nargs='?', help='Partition file (default: layer heuristic)')
    _add_query_arguments(witness_parser)
    witness_parser.add_argument('--prune', default='all', choices=['none', 'value', 'distance', 'all'])
    witness_parser.add_argument('--oracle-check', action='store_true',
                                help='Cross-check the size against the brute-force baseline')
    witness_parser.add_argument('--stats', action='store_true', help='Print solve statistics')

    # Baseline
    baseline_parser = subparsers.add_parser('baseline', help='Brute-force minimal witness')
    baseline_parser.add_argument('model', help='Model file')
    _add_query_arguments(baseline_parser)
    baseline_parser.add_argument('--stats', action='store_true', help='Print statistics')

    # Width
    width_parser = subparsers.add_parser('width', help='Directed tree/path partition width')
    width_parser.add_argument('input', help='Model or graph file')
    width_parser.add_argument('--shape', default='tree', choices=['tree', 'path'])
    width_parser.add_argument('--exact-cap', type=int, help='Vertex cap for exact search')
    width_parser.add_argument('--heuristic', action='store_true',
                              help='Fall back to the layer heuristic above the cap')
    width_parser.add_argument('--out', help='Write the partition file here')

    # Generators
    generate_parser = subparsers.add_parser('generate', help='Generate instances')
    generate_sub = generate_parser.add_subparsers(dest='generator', required=True)
    layered_parser = generate_sub.add_parser('layered', help='Layered model with path partition')
    layered_parser.add_argument('--layers', type=int, required=True)
    layered_parser.add_argument('--width', type=int, required=True)
    layered_parser.add_argument('--kind', default='dtmc', choices=['dtmc', 'mdp'])
    layered_parser.add_argument('--seed', type=int, default=0)
    layered_parser.add_argument('--out-model', required=True)
    layered_parser.add_argument('--out-partition', required=True)
    tree_parser = generate_sub.add_parser('tree', help='Random model around a block tree')
    tree_parser.add_argument('--states', type=int, required=True)
    tree_parser.add_argument('--kind', default='dtmc', choices=['dtmc', 'mdp'])
    tree_parser.add_argument('--seed', type=int, default=0)
    tree_parser.add_argument('--out-model', required=True)
    tree_parser.add_argument('--out-partition', required=True)

    # Matrix-pair chains
    mcp_parser = subparsers.add_parser('mcp', help='Matrix-pair chain instances and reductions')
    mcp_sub = mcp_parser.add_subparsers(dest='mcp_command', required=True)
    brute_parser = mcp_sub.add_parser('brute', help='Exhaustive decision')
    brute_parser.add_argument('instance', help="Instance file ('-' for stdin)")
    from_parser = mcp_sub.add_parser('from-partition', help='Reduce a partition instance')
    from_parser.add_argument('values', nargs='+', type=int)
    from_parser.add_argument('--out', help='Output file (default: stdout)')
    lift_parser = mcp_sub.add_parser('lift3', help='Lift a 2-dim instance to nonnegative 3-dim')
    lift_parser.add_argument('instance', help="Instance file ('-' for stdin)")
    lift_parser.add_argument('--out', help='Output file (default: stdout)')
    norm_parser = mcp_sub.add_parser('normalize', help='Normalize a lifted instance')
    norm_parser.add_argument('instance', help="Instance file ('-' for stdin)")
    norm_parser.add_argument('--out', help='Output file (default: stdout)')
    chain_parser = mcp_sub.add_parser('to-chain', help='Build the layered chain')
    chain_parser.add_argument('instance', help="Instance file ('-' for stdin)")
    chain_parser.add_argument('--variant', default='M2', choices=['M1', 'M2'])
    chain_parser.add_argument('--out-model', required=True)
    chain_parser.add_argument('--out-partition', required=True)
    verify_parser = mcp_sub.add_parser('verify-chain', help='Check good-subsystem values exhaustively')
    verify_parser.add_argument('instance', help="Instance file ('-' for stdin)")
    pipeline_parser = mcp_sub.add_parser('pipeline', help='Run and store the full reduction')
    pipeline_parser.add_argument('values', nargs='+', type=int)

    # Convert
    convert_parser = subparsers.add_parser('convert', help='Explicit-state import (mapping only)')
    convert_parser.add_argument('input', help='Exported transition file')
    convert_parser.add_argument('--from', dest='source_format', required=True,
                                help='Source format, e.g. prism-explicit or storm-explicit')

    # Show
    show_parser = subparsers.add_parser('show', help='Show a stored result document')
    show_parser.add_argument('document_id', help='Document ID')

    return parser


def _add_query_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument('--mode', required=True, choices=list(MODES))
    parser.add_argument('--threshold', required=True, help='Threshold as p/q or decimal')
    group = parser.add_mutually_exclusive_group()
    group.add_argument('--exact', action='store_true', help='Exact rational arithmetic (default)')
    group.add_argument('--tol', type=float, help='Float arithmetic with this tolerance')


def main(argv: Optional[List[str]] = None) -> int:
    """Main CLI entry point; returns the process exit code."""
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format='%(levelname)s %(name)s: %(message)s')
    config = Config().with_overrides(
        results_dir=args.results_dir,
        telemetry_dir=args.telemetry_dir,
        tolerance=getattr(args, 'tol', None),
        exact_width_cap=getattr(args, 'exact_cap', None),
    )
    handlers = {
        'check-partition': check_partition,
        'witness': witness,
        'baseline': baseline,
        'width': width_command,
        'generate': generate,
        'mcp': mcp,
        'show': show,
        'convert': convert,
    }
    try:
        return handlers[args.command](args, config)
    except WitnessEngineError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except (FileNotFoundError, FileExistsError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


def _emit(document: ResultDocument, args, config: Config, show_stats: bool = True) -> None:
    """Print a document and persist it when --store is set."""
    text = document.render()
    if not show_stats and "stats:\n" in text:
        text = text.split("stats:\n", 1)[0]
    print(text, end="")
    if args.store:
        store = ResultStore(config.results_dir)
        base = document_base(document.kind, args.run_id)
        document.version = store.next_version(base)
        document.document_id = f"{base}_v{document.version}"
        store.save_document(document)
        print(f"stored: {document.document_id}")


def _log_event(config: Config, args, stage: str, input_id: str, latency_ms: int,
               counters: Dict) -> None:
    TelemetryStore(config.telemetry_dir).append_event(TelemetryEvent(
        run_id=args.run_id,
        stage=stage,
        input_id=input_id,
        latency_ms=latency_ms,
        counters=counters,
    ))


def _read(path: str) -> str:
    return sys.stdin.read() if path == '-' else Path(path).read_text()


def _write(path: Optional[str], text: str) -> None:
    if path:
        Path(path).write_text(text)
    else:
        print(text, end="")


def _arith(args, config: Config) -> Arithmetic:
    if getattr(args, 'tol', None) is not None:
        return Arithmetic.float_mode(config.tolerance)
    return Arithmetic.exact_mode()


def _threshold(text: str):
    try:
        return parse_rational(text)
    except ValueError as exc:
        raise ValidationError(str(exc))


def _load_blocks(path: str) -> List[List[int]]:
    from store.formats import load_partition
    return [states for _, states in load_partition(path)]


def check_partition(args, config: Config) -> int:
    """
    Validate a partition file against a model.

    Args:
        args: Parsed arguments (model, partition)
        config: Engine configuration
    """
    from engine.partition import SHAPE_PATH, SHAPE_TREE, validate_partition
    from store.formats import load_model

    model = load_model(args.model)
    graph = underlying_graph(model)
    blocks = _load_blocks(args.partition)
    content = {"model": args.model, "partition": args.partition}
    try:
        partition = validate_partition(graph, blocks, model.initial_support(), SHAPE_TREE)
    except PartitionError as exc:
        content.update({"verdict": "invalid", "reason": str(exc)})
        _emit(ResultDocument(document_id="", kind="partition_check", content=content), args, config)
        return EXIT_VALIDATION

    try:
        validate_partition(graph, blocks, model.initial_support(), SHAPE_PATH)
        shape = SHAPE_PATH
    except PartitionError:
        shape = SHAPE_TREE
    content.update({
        "verdict": f"valid, shape={shape}, width={partition.width}",
        "blocks": str(len(partition.blocks)),
    })
    _emit(ResultDocument(document_id="", kind="partition_check", content=content), args, config)
    return EXIT_OK


def witness(args, config: Config) -> int:
    """
    Solve a witness query over a given or heuristic partition.

    Args:
        args: Parsed arguments
        config: Engine configuration
    """
    from engine.baseline import brute_force_witness
    from engine.partition import heuristic_layer_partition, split_goal_blocks, validate_partition
    from engine.witness import WitnessQuery, solve
    from store.formats import load_model

    model = load_model(args.model)
    graph = underlying_graph(model)
    initial = model.initial_support()
    if args.partition:
        partition = validate_partition(graph, _load_blocks(args.partition), initial)
    else:
        partition = split_goal_blocks(graph, heuristic_layer_partition(graph, initial), model.goal)

    threshold = _threshold(args.threshold)
    arith = _arith(args, config)
    query = WitnessQuery(model=model, partition=partition, mode=args.mode, threshold=threshold,
                         arith=arith, prune=args.prune, config=config)
    start = time.perf_counter()
    result = solve(query)
    latency_ms = int((time.perf_counter() - start) * 1000)

    content = result.content(args.mode, threshold)
    content["partition_width"] = str(partition.width)
    if args.oracle_check:
        if len(model.states) > config.brute_witness_cap:
            content["oracle"] = "skipped (state cap)"
        else:
            oracle = brute_force_witness(model, args.mode, threshold, arith, config)
            if oracle.feasible != result.feasible or oracle.size != result.size:
                raise WitnessEngineError(
                    f"oracle disagrees: tree solver size {result.size}, baseline size {oracle.size}")
            content["oracle"] = "agree"

    _log_event(config, args, "witness", args.model, latency_ms,
               TelemetryEvent.counters_from_stats(result.stats))
    document = ResultDocument(document_id="", kind="witness", content=content, stats=result.stats)
    _emit(document, args, config, show_stats=args.stats)
    return EXIT_OK if result.feasible else EXIT_INFEASIBLE


def baseline(args, config: Config) -> int:
    """
    Brute-force minimal witness for benchmarking.

    Args:
        args: Parsed arguments
        config: Engine configuration
    """
    from engine.baseline import brute_force_witness
    from store.formats import load_model

    model = load_model(args.model)
    threshold = _threshold(args.threshold)
    start = time.perf_counter()
    result: WitnessResult = brute_force_witness(model, args.mode, threshold, _arith(args, config), config)
    latency_ms = int((time.perf_counter() - start) * 1000)
    _log_event(config, args, "baseline", args.model, latency_ms, {"states": len(model.states)})
    document = ResultDocument(document_id="", kind="baseline",
                              content=result.content(args.mode, threshold), stats=result.stats)
    _emit(document, args, config, show_stats=args.stats)
    return EXIT_OK if result.feasible else EXIT_INFEASIBLE


def width_command(args, config: Config) -> int:
    """
    Compute the partition width of a model or graph file.

    Args:
        args: Parsed arguments
        config: Engine configuration
    """
    from engine.partition import exact_width, heuristic_layer_partition
    from store.formats import parse_graph, parse_model, serialize_partition

    text = Path(args.input).read_text()
    first = next((line.split('#', 1)[0].strip() for line in text.splitlines()
                  if line.split('#', 1)[0].strip()), "")
    graph = parse_graph(text) if first.lower() == "graph" else underlying_graph(parse_model(text))

    method = "exact"
    try:
        value, partition = exact_width(graph, args.shape, config)
    except CapExceededError:
        if not args.heuristic:
            raise
        partition = heuristic_layer_partition(graph, shape=args.shape)
        value, method = partition.width, "heuristic"

    content = {"input": args.input, "shape": args.shape, "width": str(value), "method": method}
    _emit(ResultDocument(document_id="", kind="width", content=content), args, config)
    if partition is not None:
        _write(args.out, serialize_partition(partition.blocks))
    return EXIT_OK


def generate(args, config: Config) -> int:
    """
    Write a generated model and its partition.

    Args:
        args: Parsed arguments
        config: Engine configuration
    """
    from engine.generate import generate_layered_model, random_tree_partition_model
    from store.formats import serialize_model, serialize_partition

    if args.generator == 'layered':
        model, blocks = generate_layered_model(args.layers, args.width, args.kind, args.seed)
    else:
        model, blocks = random_tree_partition_model(args.states, args.seed, args.kind)
    Path(args.out_model).write_text(serialize_model(model))
    Path(args.out_partition).write_text(serialize_partition(blocks))
    print(f"model: {args.out_model} ({len(model.states)} states)")
    print(f"partition: {args.out_partition} ({len(blocks)} blocks)")
    return EXIT_OK


def mcp(args, config: Config) -> int:
    """
    Matrix-pair chain subcommands.

    Args:
        args: Parsed arguments
        config: Engine configuration
    """
    from engine.mcp_search import brute_force
    from stages.lift import lift_to_nonnegative_3d
    from stages.normalize import normalize_equal_valued
    from stages.reduce import reduce_from_partition
    from store.formats import parse_mcp, serialize_mcp

    command = args.mcp_command
    if command == 'from-partition':
        _write(args.out, serialize_mcp(reduce_from_partition(args.values)))
        return EXIT_OK
    if command == 'pipeline':
        return _mcp_pipeline(args, config)

    inst = parse_mcp(_read(args.instance))
    if command == 'brute':
        accepted, sigma, value = brute_force(inst, config)
        content = {
            "accepted": "yes" if accepted else "no",
            "sigma": "".join(str(b) for b in sigma),
            "value": format_rational(value),
            "threshold": format_rational(inst.threshold),
        }
        _emit(ResultDocument(document_id="", kind="mcp_brute", content=content), args, config)
        return EXIT_OK if accepted else EXIT_INFEASIBLE
    if command == 'lift3':
        _write(args.out, serialize_mcp(lift_to_nonnegative_3d(inst)))
        return EXIT_OK
    if command == 'normalize':
        _write(args.out, serialize_mcp(normalize_equal_valued(inst)))
        return EXIT_OK
    if command == 'to-chain':
        return _to_chain(args, inst)
    return _verify_chain(args, config, inst)


def _to_chain(args, inst) -> int:
    from stages.chain import build_m1, build_m2, layer_partition
    from store.formats import serialize_model, serialize_partition

    chain = build_m1(inst) if args.variant == 'M1' else build_m2(inst)
    Path(args.out_model).write_text(serialize_model(chain.model))
    Path(args.out_partition).write_text(serialize_partition(layer_partition(chain).blocks))
    print(f"model: {args.out_model} ({len(chain.model.states)} states, {chain.variant})")
    print(f"partition: {args.out_partition}")
    return EXIT_OK


def _verify_chain(args, config: Config, inst) -> int:
    from engine.mcp_search import selections
    from stages.chain import build_m1, build_m2, verify_good_value

    if inst.n > config.chain_verify_cap:
        raise CapExceededError("chain_verify", config.chain_verify_cap, inst.n)
    chains = (build_m1(inst), build_m2(inst))
    content = {"pairs": str(inst.n)}
    all_equal = True
    for sigma in selections(inst.n):
        verdicts = []
        for chain in chains:
            chain_value, mcp_value = verify_good_value(chain, sigma)
            equal = chain_value == mcp_value
            all_equal &= equal
            verdicts.append(f"{chain.variant}={'equal' if equal else 'differ'}")
        content["sigma_" + "".join(str(b) for b in sigma)] = " ".join(verdicts)
    content["all_equal"] = "yes" if all_equal else "no"
    _emit(ResultDocument(document_id="", kind="chain_verify", content=content), args, config)
    return EXIT_OK if all_equal else 1


def _mcp_pipeline(args, config: Config) -> int:
    from pipeline import run_reduction_pipeline

    results = run_reduction_pipeline(args.values, args.run_id, config)
    chain = results["chain"]
    print()
    print("=" * 60)
    print("REDUCTION COMPLETE")
    print("=" * 60)
    print()
    print(f"Run ID: {args.run_id}")
    print(f"Chain: {len(chain.model.states)} states, good subsystems of {3 * chain.n + 4}")
    print()
    print("Stored Documents:")
    for document_id in results["documents"]:
        print(f"  - {document_id}")
    print()
    print("-" * 60)
    print("Lineage Command:")
    print(f"witness-engine show {results['documents'][-1]}")
    print("-" * 60)
    print()
    return EXIT_OK


def show(args, config: Config) -> int:
    """
    Print a stored document and its lineage.

    Args:
        args: Parsed arguments (document_id)
        config: Engine configuration
    """
    store = ResultStore(config.results_dir)
    chain = store.lineage(args.document_id)
    document = chain[0]

    print()
    print("=" * 60)
    print("RESULT DOCUMENT")
    print("=" * 60)
    print()
    print(f"Document ID: {document.document_id}")
    print(f"Kind: {document.kind}")
    print(f"Version: {document.version}")
    print()
    print(document.render(), end="")
    print()
    print("=" * 60)
    print("LINEAGE CHAIN")
    print("=" * 60)
    print()
    print(f"{document.kind} (v{document.version})")
    if len(chain) == 1:
        print("(No parent documents)")
    for level, parent in enumerate(chain[1:], start=1):
        print(f"{'   ' * level}└─ {parent.kind} (v{parent.version}) {parent.document_id}")
    print()
    return EXIT_OK



def convert(args, config: Config) -> int:
    """Refuse an explicit-state import, naming the mapping to apply by hand."""
    from store.formats import convert_explicit

    convert_explicit(args.source_format, args.input)
    return EXIT_OK

if __name__ == '__main__':
    sys.exit(main())
