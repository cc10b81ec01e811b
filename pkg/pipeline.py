"""
Reduction Pipeline

Orchestrates the partition → 2-MCP → nonnegative 3-MCP → normalized 3-MCP →
Markov chain reduction, persisting every stage result.
"""

import logging
import time
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

from config import Config, resolve
from engine.partition import width
from models.mcp import McpInstance
from models.result import ResultDocument, document_base
from models.scalar import format_rational
from models.telemetry import TelemetryEvent
from stages.chain import LayeredChain, build_m2, layer_partition
from stages.lift import lift_to_nonnegative_3d
from stages.normalize import normalize_equal_valued
from stages.reduce import reduce_from_partition
from store.result_store import ResultStore
from store.telemetry_store import TelemetryStore

logger = logging.getLogger(__name__)


def _instance_content(inst: McpInstance) -> Dict[str, str]:
    content = {
        "dimension": str(inst.dimension),
        "pairs": str(inst.n),
        "threshold": format_rational(inst.threshold),
        "nonnegative": "yes" if inst.nonnegative else "no",
    }
    if inst.kappa is not None:
        content["kappa"] = format_rational(inst.kappa)
    if inst.epsilon is not None:
        content["epsilon"] = format_rational(inst.epsilon)
    content["source"] = inst.source
    return content


def _chain_content(chain: LayeredChain) -> Dict[str, str]:
    return {
        "variant": chain.variant,
        "states": str(len(chain.model.states)),
        "width": str(width(layer_partition(chain))),
        "gamma": format_rational(chain.gamma),
        "threshold": format_rational(chain.instance.threshold),
        "good_size": str(3 * chain.n + 4),
    }


class ReductionPipeline:
    """Runs reduction stages with timing, persistence and telemetry."""

    def __init__(self, run_id: str, config: Optional[Config] = None,
                 store: Optional[ResultStore] = None, telemetry: Optional[TelemetryStore] = None):
        """
        Initialize pipeline.

        Args:
            run_id: Run identifier used in document ids and telemetry
            config: Supplies the default storage directories
            store: Result store (default: config.results_dir)
            telemetry: Telemetry store (default: config.telemetry_dir)
        """
        config = resolve(config)
        self.run_id = run_id
        self.store = store if store is not None else ResultStore(config.results_dir)
        self.telemetry = telemetry if telemetry is not None else TelemetryStore(config.telemetry_dir)
        self.document_ids: List[str] = []

    def run_stage(self, kind: str, compute: Callable[[], Any], content: Callable[[Any], Dict[str, str]],
                  payload: Callable[[Any], Dict[str, Any]], input_id: str) -> Tuple[Any, ResultDocument]:
        """
        Run one stage and persist its result.

        Args:
            kind: Document kind, also the telemetry stage name
            compute: Stage body
            content: Renders the result as document content
            payload: Machine-readable result data
            input_id: Document id (or input label) the stage consumed

        Returns:
            (stage result, stored document)
        """
        # Start latency timer
        start_time = time.perf_counter()
        result = compute()
        latency_ms = int((time.perf_counter() - start_time) * 1000)

        base = document_base(kind, self.run_id)
        version = self.store.next_version(base)
        document = ResultDocument(
            document_id=f"{base}_v{version}",
            kind=kind,
            content=content(result),
            derived_from=[input_id] if input_id in self.document_ids else [],
            stats={"latency_ms": latency_ms},
            payload=payload(result),
            version=version,
        )
        self.store.save_document(document)
        self.document_ids.append(document.document_id)

        self.telemetry.append_event(TelemetryEvent(
            run_id=self.run_id,
            stage=kind,
            input_id=input_id,
            output_id=document.document_id,
            latency_ms=latency_ms,
            counters={k: int(v) for k, v in document.content.items() if k in ("pairs", "states", "width")},
        ))
        logger.info("stage %s -> %s (%d ms)", kind, document.document_id, latency_ms)
        return result, document


def run_reduction_pipeline(values: Sequence[int], run_id: str, config: Optional[Config] = None,
                           store: Optional[ResultStore] = None,
                           telemetry: Optional[TelemetryStore] = None) -> Dict[str, Any]:
    """
    Run an integer multiset through the full reduction.

    Args:
        values: Partition problem instance
        run_id: Run identifier for documents and telemetry
        config: Engine configuration
        store: Result store override
        telemetry: Telemetry store override

    Returns:
        Dictionary with the "mcp2", "mcp3", "normalized" instances, the M2
        "chain" and the stored "documents" ids in stage order
    """
    pipeline = ReductionPipeline(run_id, config, store, telemetry)

    def instance_payload(inst):
        return inst.to_dict()

    # Stage 1: Partition -> 2-MCP
    mcp2, doc2 = pipeline.run_stage(
        "mcp2", lambda: reduce_from_partition(values), _instance_content, instance_payload,
        "partition_input")

    # Stage 2: Lift to nonnegative 3-MCP
    mcp3, doc3 = pipeline.run_stage(
        "mcp3", lambda: lift_to_nonnegative_3d(mcp2), _instance_content, instance_payload,
        doc2.document_id)

    # Stage 3: Normalize
    normalized, doc_norm = pipeline.run_stage(
        "normalized", lambda: normalize_equal_valued(mcp3), _instance_content, instance_payload,
        doc3.document_id)

    # Stage 4: Build M2 chain
    chain, _ = pipeline.run_stage(
        "chain", lambda: build_m2(normalized), _chain_content,
        lambda c: {"instance": c.instance.to_dict(), "gamma": format_rational(c.gamma)},
        doc_norm.document_id)

    return {
        "mcp2": mcp2,
        "mcp3": mcp3,
        "normalized": normalized,
        "chain": chain,
        "documents": list(pipeline.document_ids),
    }
