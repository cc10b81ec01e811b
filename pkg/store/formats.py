"""
Text Formats

Parsing and serialization of model, graph, partition and matrix-pair chain
instance files. Probabilities are exact: "p/q" or decimal literals on input,
"p/q" in lowest terms on output.
"""

from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

from errors import ParseError, ValidationError
from models.markov import DTMC, MDP, ProbabilisticModel, UnderlyingGraph, validate_model
from models.mcp import McpInstance, as_matrix, as_vector
from models.scalar import format_rational, parse_rational

PathLike = Union[str, Path]


def _content_lines(text: str):
    """(line number, stripped line) pairs without blanks and # comments."""
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split('#', 1)[0].strip()
        if line:
            yield number, line


def _rational(token: str, line_no: int):
    try:
        return parse_rational(token)
    except ValueError as exc:
        raise ParseError(str(exc), line_no)


def _integer(token: str, line_no: int) -> int:
    try:
        return int(token)
    except ValueError:
        raise ParseError(f"expected an integer, got '{token}'", line_no)


def parse_model(text: str) -> ProbabilisticModel:
    """
    Parse a model file.

    Layout: a "dtmc" or "mdp" header, "states N", transition lines
    "src dst prob" (DTMC) or "src act dst prob" (MDP), then an "init:"
    section of "state prob" lines, a "goal:" section of state lines and an
    optional "labels:" section of "state name" lines.

    Raises:
        ParseError: On malformed lines, with the line number
    """
    lines = list(_content_lines(text))
    if not lines:
        raise ParseError("empty model file")
    header_no, header = lines[0]
    kind = header.lower()
    if kind not in (DTMC, MDP):
        raise ParseError(f"expected 'dtmc' or 'mdp' header, got '{header}'", header_no)
    if len(lines) < 2 or not lines[1][1].startswith("states"):
        raise ParseError("expected 'states N' after the header", lines[0][0] + 1)
    count_no, count_line = lines[1]
    parts = count_line.split()
    if len(parts) != 2:
        raise ParseError("expected 'states N'", count_no)
    n = _integer(parts[1], count_no)

    transitions: Dict[int, Dict[str, Dict[int, object]]] = {}
    initial: Dict[int, object] = {}
    goal: List[int] = []
    names: Dict[int, str] = {}
    section = "transitions"

    def state(token: str, line_no: int) -> int:
        s = _integer(token, line_no)
        if not 0 <= s < n:
            raise ParseError(f"state {s} outside 0..{n - 1}", line_no)
        return s

    for line_no, line in lines[2:]:
        if line.endswith(':') and line[:-1] in ("init", "goal", "labels"):
            section = line[:-1]
            continue
        parts = line.split()
        if section == "transitions":
            if kind == DTMC:
                if len(parts) != 3:
                    raise ParseError("expected 'src dst prob'", line_no)
                src, action, dst, prob = parts[0], "tau", parts[1], parts[2]
            else:
                if len(parts) != 4:
                    raise ParseError("expected 'src act dst prob'", line_no)
                src, action, dst, prob = parts
            dist = transitions.setdefault(state(src, line_no), {}).setdefault(action, {})
            target = state(dst, line_no)
            if target in dist:
                raise ParseError(f"duplicate transition {src} -> {dst}", line_no)
            dist[target] = _rational(prob, line_no)
        elif section == "init":
            if len(parts) != 2:
                raise ParseError("expected 'state prob'", line_no)
            initial[state(parts[0], line_no)] = _rational(parts[1], line_no)
        elif section == "goal":
            goal.extend(state(token, line_no) for token in parts)
        else:
            if len(parts) != 2:
                raise ParseError("expected 'state name'", line_no)
            names[state(parts[0], line_no)] = parts[1]

    return ProbabilisticModel(
        kind=kind,
        states=tuple(range(n)),
        transitions=transitions,
        initial=initial,
        goal=frozenset(goal),
        names=names,
    )


def serialize_model(m: ProbabilisticModel) -> str:
    """
    Render a model in the model file format.

    Raises:
        ValidationError: If state ids are not 0..N-1
    """
    if list(m.states) != list(range(len(m.states))):
        raise ValidationError("model files need dense state ids 0..N-1")
    lines = [m.kind, f"states {len(m.states)}"]
    for s in m.states:
        for action in m.actions(s):
            for t, p in sorted(m.distribution(s, action).items()):
                if m.is_dtmc:
                    lines.append(f"{s} {t} {format_rational(p)}")
                else:
                    lines.append(f"{s} {action} {t} {format_rational(p)}")
    lines.append("init:")
    lines.extend(f"{s} {format_rational(p)}" for s, p in sorted(m.initial.items()))
    lines.append("goal:")
    lines.extend(str(g) for g in sorted(m.goal))
    if m.names:
        lines.append("labels:")
        lines.extend(f"{s} {name}" for s, name in sorted(m.names.items()))
    return "\n".join(lines) + "\n"


def parse_graph(text: str) -> UnderlyingGraph:
    """Parse a "graph" file: header, "vertices N", then "u v" edge lines."""
    lines = list(_content_lines(text))
    if not lines or lines[0][1].lower() != "graph":
        raise ParseError("expected 'graph' header", lines[0][0] if lines else 1)
    if len(lines) < 2 or len(lines[1][1].split()) != 2 or not lines[1][1].startswith("vertices"):
        raise ParseError("expected 'vertices N'", lines[0][0] + 1)
    n = _integer(lines[1][1].split()[1], lines[1][0])
    edges = set()
    for line_no, line in lines[2:]:
        parts = line.split()
        if len(parts) != 2:
            raise ParseError("expected 'u v'", line_no)
        u, v = _integer(parts[0], line_no), _integer(parts[1], line_no)
        if not (0 <= u < n and 0 <= v < n):
            raise ParseError(f"edge {u} {v} outside 0..{n - 1}", line_no)
        edges.add((u, v))
    return UnderlyingGraph.from_edges(range(n), edges)


def serialize_graph(g: UnderlyingGraph) -> str:
    lines = ["graph", f"vertices {len(g.vertices)}"]
    lines.extend(f"{u} {v}" for u, v in sorted(g.edges))
    return "\n".join(lines) + "\n"


def parse_partition(text: str) -> List[Tuple[str, List[int]]]:
    """
    Parse a partition file of "blockId: s1 s2 …" lines.

    Returns:
        (block id, states) pairs in file order

    Raises:
        ParseError: On a missing colon, duplicate block id or bad state id
    """
    blocks: List[Tuple[str, List[int]]] = []
    seen = set()
    for line_no, line in _content_lines(text):
        if ':' not in line:
            raise ParseError("expected 'blockId: s1 s2 ...'", line_no)
        block_id, rest = line.split(':', 1)
        block_id = block_id.strip()
        if not block_id or block_id in seen:
            raise ParseError(f"missing or duplicate block id '{block_id}'", line_no)
        seen.add(block_id)
        blocks.append((block_id, [_integer(token, line_no) for token in rest.split()]))
    return blocks


def serialize_partition(blocks: Sequence, block_ids: Optional[Sequence[str]] = None) -> str:
    """Render blocks (state collections) as "B<k>: s1 s2" lines."""
    block_ids = block_ids or [f"B{k}" for k in range(len(blocks))]
    return "".join(
        f"{bid}: {' '.join(str(s) for s in sorted(block))}\n" for bid, block in zip(block_ids, blocks)
    )


def parse_mcp(text: str) -> McpInstance:
    """
    Parse a matrix-pair chain instance file.

    Layout: an "mcp" header, then "dimension d", "threshold λ",
    "iota …", "final …", optional "kappa", "epsilon" and "source" lines, and
    one "pair j b: row ; row ; …" line per pair index j (1-based) and
    selection bit b.

    Raises:
        ParseError: On malformed or missing lines
    """
    lines = list(_content_lines(text))
    if not lines or lines[0][1].lower() != "mcp":
        raise ParseError("expected 'mcp' header", lines[0][0] if lines else 1)
    fields: Dict[str, Tuple[int, str]] = {}
    matrices: Dict[Tuple[int, int], Tuple[int, str]] = {}
    for line_no, line in lines[1:]:
        key, _, rest = line.partition(' ')
        if key == "pair":
            head, colon, body = rest.partition(':')
            parts = head.split()
            if not colon or len(parts) != 2:
                raise ParseError("expected 'pair j b: row ; row ...'", line_no)
            index = (_integer(parts[0], line_no), _integer(parts[1], line_no))
            if index in matrices:
                raise ParseError(f"duplicate pair {index[0]} bit {index[1]}", line_no)
            matrices[index] = (line_no, body)
        elif key in ("dimension", "threshold", "iota", "final", "kappa", "epsilon", "source"):
            fields[key] = (line_no, rest.strip())
        else:
            raise ParseError(f"unknown line '{key}'", line_no)

    for required in ("dimension", "threshold", "iota", "final"):
        if required not in fields:
            raise ParseError(f"missing '{required}' line")
    dimension_no, dimension = fields["dimension"]
    d = _integer(dimension, dimension_no)

    def vector(key):
        line_no, body = fields[key]
        return as_vector(_rational(token, line_no) for token in body.split())

    def scalar(key):
        if key not in fields:
            return None
        line_no, body = fields[key]
        return _rational(body, line_no)

    count = max((j for j, _ in matrices), default=0)
    pairs = []
    for j in range(1, count + 1):
        pair = []
        for bit in (0, 1):
            if (j, bit) not in matrices:
                raise ParseError(f"missing pair {j} bit {bit}")
            line_no, body = matrices[(j, bit)]
            rows = [[_rational(token, line_no) for token in row.split()] for row in body.split(';')]
            pair.append(as_matrix(rows))
        pairs.append(tuple(pair))

    try:
        return McpInstance(
            dimension=d,
            pairs=tuple(pairs),
            iota=vector("iota"),
            final=vector("final"),
            threshold=scalar("threshold"),
            kappa=scalar("kappa"),
            epsilon=scalar("epsilon"),
            source=fields.get("source", (0, ""))[1],
        )
    except ValidationError as exc:
        raise ParseError(str(exc))


def serialize_mcp(inst: McpInstance) -> str:
    """Render an instance in the MCP file format."""
    def vec(v):
        return " ".join(format_rational(x) for x in v)

    lines = ["mcp", f"dimension {inst.dimension}", f"threshold {format_rational(inst.threshold)}",
             f"iota {vec(inst.iota)}", f"final {vec(inst.final)}"]
    if inst.kappa is not None:
        lines.append(f"kappa {format_rational(inst.kappa)}")
    if inst.epsilon is not None:
        lines.append(f"epsilon {format_rational(inst.epsilon)}")
    if inst.source:
        lines.append(f"source {inst.source}")
    for j, pair in enumerate(inst.pairs, start=1):
        for bit, matrix in enumerate(pair):
            lines.append(f"pair {j} {bit}: " + " ; ".join(vec(row) for row in matrix))
    return "\n".join(lines) + "\n"


def load_model(path: PathLike) -> ProbabilisticModel:
    """
    Read and validate a model file.

    Raises:
        ParseError: On malformed text
        ValidationError: If the parsed model violates a model invariant
    """
    model = parse_model(Path(path).read_text())
    violations = validate_model(model)
    if violations:
        raise ValidationError("invalid model: " + "; ".join(violations))
    return model


def load_partition(path: PathLike) -> List[Tuple[str, List[int]]]:
    return parse_partition(Path(path).read_text())


# Explicit-state exports of external model checkers, mapped line by line onto
# the model format above. Only the mapping is documented; nothing is imported.
EXPLICIT_FORMATS = {
    "prism-explicit": (
        ".tra 'src dst prob' -> transition line 'src dst prob' (dtmc); "
        ".tra 'src choice dst prob' -> 'src a<choice> dst prob' (mdp); "
        ".lab states labelled 'init' -> 'init:' entries, the target label -> 'goal:' entries; "
        ".sta count -> 'states N'"
    ),
    "storm-explicit": (
        "same .tra/.lab layout as prism-explicit; "
        "the 'dtmc'/'mdp' header line of .tra -> the model header"
    ),
}


def convert_explicit(source_format: str, path: PathLike) -> ProbabilisticModel:
    """
    Import an explicit-state export. Not supported yet.

    Raises:
        ValidationError: Always, naming the mapping onto the model format
    """
    mapping = EXPLICIT_FORMATS.get(source_format)
    if mapping is None:
        raise ValidationError(f"unknown explicit format '{source_format}', "
                              f"known: {', '.join(sorted(EXPLICIT_FORMATS))}")
    raise ValidationError(f"import of {source_format} ({path}) is not supported; "
                          f"convert by hand with the mapping: {mapping}")
