#!/usr/bin/env python3
"""
Test the command-line interface end to end.
"""

import io
import tempfile
import time
from contextlib import redirect_stderr, redirect_stdout
from pathlib import Path

from cli import main
from engine.reach import reach_value
from errors import EXIT_CAP, EXIT_INFEASIBLE, EXIT_OK, EXIT_VALIDATION
from models.markov import initial_value
from models.scalar import Arithmetic
from store.formats import load_model

SAMPLES = Path(__file__).parent / "sample_inputs"


def run(*argv):
    """Run the CLI with scratch storage; returns (exit code, stdout, stderr)."""
    scratch = tempfile.mkdtemp()
    out, err = io.StringIO(), io.StringIO()
    with redirect_stdout(out), redirect_stderr(err):
        code = main(["--results-dir", f"{scratch}/results", "--telemetry-dir", f"{scratch}/telemetry",
                     *argv])
    return code, out.getvalue(), err.getvalue()


def sample(name):
    return str(SAMPLES / name)


def test_witness_command():
    code, out, _ = run("witness", sample("three_state.model"), sample("three_state.partition"),
                       "--mode", "dtmc", "--threshold", "1/4", "--oracle-check")
    assert code == EXIT_OK
    assert "size: 3\n" in out and "value: 1/4\n" in out and "oracle: agree\n" in out
    assert "stats:" not in out
    print("✅ three_state: size 3, baseline agrees")

    code, out, _ = run("witness", sample("three_state.model"), "--mode", "dtmc", "--threshold", "0.25")
    assert code == EXIT_OK and "size: 3\n" in out
    print("✅ Heuristic partition when none is given")

    code, out, _ = run("witness", sample("two_branch.model"), sample("two_branch.partition"),
                       "--mode", "mdp-max", "--threshold", "11/20", "--stats")
    assert code == EXIT_OK and "states: 0 2 3 5\n" in out and "stats:\n" in out
    print("✅ two_branch mdp-max: the looping branch is needed")

    code, out, _ = run("witness", sample("two_branch.model"), sample("two_branch.partition"),
                       "--mode", "mdp-min", "--threshold", "1/2", "--tol", "1e-9")
    assert code == EXIT_OK and "size: 6\n" in out
    print("✅ Float mode mdp-min: both branches must stay")

    code, out, _ = run("witness", sample("three_state.model"), "--mode", "dtmc", "--threshold", "1/2")
    assert code == EXIT_INFEASIBLE and "feasible: no\n" in out
    print("✅ Infeasible threshold exits 2")

    code, out, _ = run("witness", sample("three_state.model"), sample("three_state.partition"),
                       "--mode", "dtmc", "--threshold", "0")
    code_b, out_b, _ = run("baseline", sample("three_state.model"), "--mode", "dtmc", "--threshold", "0")
    assert code == code_b == EXIT_OK
    assert "states: 0 1 2\n" in out and "states: 0 1 2\n" in out_b
    print("✅ Threshold 0: both solvers return the smallest goal-reaching set")

    code, _, err = run("witness", sample("three_state.model"), "--mode", "mdp-min", "--threshold", "1/4")
    assert code == EXIT_VALIDATION and err.startswith("error:")
    print("✅ mdp-min on a DTMC exits 3")


def test_check_partition_and_width():
    code, out, _ = run("check-partition", sample("three_state.model"), sample("three_state.partition"))
    assert code == EXIT_OK and "verdict: valid, shape=path, width=1\n" in out

    code, out, _ = run("check-partition", sample("two_branch.model"), sample("two_branch.partition"))
    assert code == EXIT_OK and "verdict: valid, shape=tree, width=2\n" in out
    print("✅ Valid partitions report shape and width")

    partial = Path(tempfile.mkdtemp()) / "partial.partition"
    partial.write_text("B0: 0\nB1: 1\n")
    code, out, _ = run("check-partition", sample("three_state.model"), str(partial))
    assert code == EXIT_VALIDATION and "verdict: invalid\n" in out and "coverage" in out
    print("✅ Missing state reported as a coverage violation")

    code, out, _ = run("width", sample("cycle5.graph"))
    assert code == EXIT_OK and "width: 5\n" in out and "method: exact\n" in out
    print("✅ 5-cycle has width 5")


def test_baseline_cap():
    scratch = Path(tempfile.mkdtemp())
    model, partition = scratch / "big.model", scratch / "big.partition"
    code, _, _ = run("generate", "layered", "--layers", "8", "--width", "3", "--seed", "1",
                     "--out-model", str(model), "--out-partition", str(partition))
    assert code == EXIT_OK
    code, _, err = run("baseline", str(model), "--mode", "dtmc", "--threshold", "1/10")
    assert code == EXIT_CAP and "brute_witness" in err
    print("✅ Baseline refuses 25 states")


def test_layered_performance():
    """Width-6 layered chains of 15 and 20 layers: the tree solver finishes, the baseline refuses."""
    scratch = Path(tempfile.mkdtemp())
    for layers, seed in ((15, 1), (20, 2)):
        model, partition = scratch / f"l{layers}.model", scratch / f"l{layers}.partition"
        code, _, _ = run("generate", "layered", "--layers", str(layers), "--width", "6", "--seed", str(seed),
                         "--out-model", str(model), "--out-partition", str(partition))
        assert code == EXIT_OK

        m = load_model(model)
        full = initial_value(m, reach_value(m, "dtmc", Arithmetic.float_mode()))
        threshold = f"{full / 2:.12f}"

        start = time.perf_counter()
        code, out, _ = run("witness", str(model), str(partition), "--mode", "dtmc",
                           "--threshold", threshold, "--tol", "1e-9", "--stats")
        elapsed = time.perf_counter() - start
        assert code == EXIT_OK and "partition_width:" in out
        survivors = next(line for line in out.splitlines() if "survivors_per_block" in line)
        assert elapsed < 60, f"{layers} layers took {elapsed:.1f}s"

        code, _, err = run("baseline", str(model), "--mode", "dtmc", "--threshold", threshold)
        assert code == EXIT_CAP and "brute_witness" in err
        print(f"✅ {len(m.states)} states: witness in {elapsed:.1f}s, baseline over its cap")
        print(f"   {survivors.strip()}")


def test_mcp_commands():
    scratch = Path(tempfile.mkdtemp())
    yes, no = scratch / "yes.mcp", scratch / "no.mcp"
    assert run("mcp", "from-partition", "1", "1", "2", "--out", str(yes))[0] == EXIT_OK
    assert run("mcp", "from-partition", "1", "2", "--out", str(no))[0] == EXIT_OK

    code, out, _ = run("mcp", "brute", str(yes))
    assert code == EXIT_OK and "accepted: yes\n" in out
    code, out, _ = run("mcp", "brute", str(no))
    assert code == EXIT_INFEASIBLE and "accepted: no\n" in out
    print("✅ brute: equal split accepted, odd total rejected")

    code, out, _ = run("mcp", "from-partition", "1", "1")
    assert code == EXIT_OK and out.startswith("mcp\ndimension 2\n")
    print("✅ Instances go to stdout without --out")


def test_reduction_chain_commands():
    """from-partition, lift3, normalize, to-chain and verify-chain on {1, 1}."""
    scratch = Path(tempfile.mkdtemp())
    reduced, lifted, normalized = scratch / "a.mcp", scratch / "b.mcp", scratch / "c.mcp"
    model, partition = scratch / "m2.model", scratch / "m2.partition"
    assert run("mcp", "from-partition", "1", "1", "--out", str(reduced))[0] == EXIT_OK
    assert run("mcp", "lift3", str(reduced), "--out", str(lifted))[0] == EXIT_OK
    assert run("mcp", "normalize", str(lifted), "--out", str(normalized))[0] == EXIT_OK
    assert run("mcp", "to-chain", str(normalized), "--out-model", str(model),
               "--out-partition", str(partition))[0] == EXIT_OK

    code, out, _ = run("check-partition", str(model), str(partition))
    assert code == EXIT_OK and "verdict: valid, shape=path, width=6\n" in out
    print("✅ Generated M2 chain has a width-6 layer path")

    code, out, _ = run("mcp", "verify-chain", str(normalized))
    assert code == EXIT_OK
    assert "sigma_01: M1=equal M2=equal\n" in out and "all_equal: yes\n" in out
    print("✅ verify-chain: every selection equal in M1 and M2")

    code, _, _ = run("mcp", "lift3", str(lifted))
    assert code == EXIT_VALIDATION
    print("✅ Lifting twice is rejected")


def test_convert_names_mapping():
    code, _, err = run("convert", "brp.tra", "--from", "prism-explicit")
    assert code == EXIT_VALIDATION
    assert "not supported" in err and ".tra" in err and "goal:" in err
    print("✅ convert refuses and prints the explicit-state mapping")

    code, _, err = run("convert", "brp.tra", "--from", "jani")
    assert code == EXIT_VALIDATION and "prism-explicit" in err and "storm-explicit" in err
    print("✅ Unknown source format lists the known ones")


def test_store_and_show():
    scratch = tempfile.mkdtemp()
    base = ["--results-dir", f"{scratch}/results", "--telemetry-dir", f"{scratch}/telemetry",
            "--run-id", "demo"]

    out = io.StringIO()
    with redirect_stdout(out):
        code = main(base + ["--store", "witness", sample("three_state.model"),
                            "--mode", "dtmc", "--threshold", "1/4"])
    assert code == EXIT_OK
    stored = out.getvalue().strip().splitlines()[-1]
    assert stored.startswith("stored: witness_") and stored.endswith("_demo_v1")
    document_id = stored.split(": ", 1)[1]

    out = io.StringIO()
    with redirect_stdout(out):
        assert main(base + ["show", document_id]) == EXIT_OK
    assert f"Document ID: {document_id}" in out.getvalue() and "(No parent documents)" in out.getvalue()
    print("✅ Stored witness shown")

    out = io.StringIO()
    with redirect_stdout(out):
        assert main(base + ["mcp", "pipeline", "1", "1"]) == EXIT_OK
    chain_id = out.getvalue().split("witness-engine show ", 1)[1].split()[0]

    out = io.StringIO()
    with redirect_stdout(out):
        assert main(base + ["show", chain_id]) == EXIT_OK
    text = out.getvalue()
    assert "Kind: chain" in text and "└─ normalized" in text and "└─ mcp2" in text
    print("✅ Pipeline lineage shown")

    err = io.StringIO()
    with redirect_stderr(err):
        assert main(base + ["show", "missing_v1"]) == EXIT_VALIDATION
    print("✅ Unknown document exits 3")


if __name__ == '__main__':
    test_witness_command()
    test_check_partition_and_width()
    test_baseline_cap()
    test_layered_performance()
    test_mcp_commands()
    test_reduction_chain_commands()
    test_convert_names_mapping()
    test_store_and_show()
    print("\n✅ All CLI tests passed")
