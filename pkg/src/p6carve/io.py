"""Text formats shared by the CLI, the service, and test fixtures.

Graph file: first line ``n m``, then m lines ``u v`` with 0 <= u < v < n.
Weight file: n lines, one positive integer per line (line i = weight of i).
Forest file: one line ``v p`` per forest node, p = parent index or -1.
Family file: one vertex set per line, comma-separated indices; blank lines
are skipped, so an empty (or all-blank) file is the empty family and the
empty set itself is not representable.
"""

from __future__ import annotations

from .graphs import Graph, GraphFormatError


def parse_graph(text: str, cap: int = 64) -> Graph:
    lines = [ln for ln in (raw.strip() for raw in text.splitlines()) if ln]
    if not lines:
        raise GraphFormatError("empty graph file")
    head = lines[0].split()
    if len(head) != 2:
        raise GraphFormatError(f"header must be 'n m', got {lines[0]!r}")
    try:
        n, m = int(head[0]), int(head[1])
    except ValueError as exc:
        raise GraphFormatError(f"non-integer header {lines[0]!r}") from exc
    if n < 0 or m < 0:
        raise GraphFormatError("negative counts in header")
    if len(lines) - 1 != m:
        raise GraphFormatError(f"expected {m} edge lines, found {len(lines) - 1}")
    edges = []
    seen = set()
    for ln in lines[1:]:
        parts = ln.split()
        if len(parts) != 2:
            raise GraphFormatError(f"edge line must be 'u v', got {ln!r}")
        try:
            u, v = int(parts[0]), int(parts[1])
        except ValueError as exc:
            raise GraphFormatError(f"non-integer edge line {ln!r}") from exc
        if not (0 <= u < v < n):
            raise GraphFormatError(f"edge ({u},{v}) violates 0 <= u < v < n={n}")
        if (u, v) in seen:
            raise GraphFormatError(f"duplicate edge ({u},{v})")
        seen.add((u, v))
        edges.append((u, v))
    return Graph(n, edges, cap=cap)


def format_graph(g: Graph) -> str:
    lines = [f"{g.n} {g.m}"]
    lines.extend(f"{u} {v}" for u, v in g.edges())
    return "\n".join(lines) + "\n"


def parse_weights(text: str, n: int) -> list[int]:
    lines = [ln for ln in (raw.strip() for raw in text.splitlines()) if ln]
    if len(lines) != n:
        raise GraphFormatError(f"expected {n} weight lines, found {len(lines)}")
    weights = []
    for i, ln in enumerate(lines):
        try:
            w = int(ln)
        except ValueError as exc:
            raise GraphFormatError(f"non-integer weight on line {i + 1}: {ln!r}") from exc
        if w < 1:
            raise GraphFormatError(f"weight of vertex {i} must be >= 1, got {w}")
        weights.append(w)
    return weights


def format_weights(weights: list[int]) -> str:
    return "\n".join(str(w) for w in weights) + "\n"


def parse_forest(text: str, n: int) -> dict[int, int | None]:
    """Parent map of a rooted forest; value None marks a root."""
    parent: dict[int, int | None] = {}
    for raw in text.splitlines():
        ln = raw.strip()
        if not ln:
            continue
        parts = ln.split()
        if len(parts) != 2:
            raise GraphFormatError(f"forest line must be 'v p', got {ln!r}")
        try:
            v, p = int(parts[0]), int(parts[1])
        except ValueError as exc:
            raise GraphFormatError(f"non-integer forest line {ln!r}") from exc
        if not 0 <= v < n:
            raise GraphFormatError(f"forest node {v} out of range")
        if v in parent:
            raise GraphFormatError(f"duplicate forest node {v}")
        if p == -1:
            parent[v] = None
        elif 0 <= p < n:
            parent[v] = p
        else:
            raise GraphFormatError(f"parent {p} of node {v} out of range")
    for v, p in parent.items():
        if p is not None and p not in parent:
            raise GraphFormatError(f"parent {p} of node {v} is not a forest node")
    return parent


def format_forest(parent: dict[int, int | None]) -> str:
    lines = [f"{v} {-1 if parent[v] is None else parent[v]}" for v in sorted(parent)]
    return "\n".join(lines) + ("\n" if lines else "")


def parse_family(text: str, n: int) -> list[frozenset[int]]:
    out = []
    stripped = text.strip()
    if stripped == "":
        return out
    for raw in stripped.splitlines():
        ln = raw.strip()
        if not ln:
            continue
        members = set()
        for tok in ln.split(","):
            tok = tok.strip()
            if not tok:
                continue
            try:
                v = int(tok)
            except ValueError as exc:
                raise GraphFormatError(f"non-integer family entry {tok!r}") from exc
            if not 0 <= v < n:
                raise GraphFormatError(f"family vertex {v} out of range")
            members.add(v)
        if not members:
            raise GraphFormatError(f"family line {ln!r} encodes no vertices")
        out.append(frozenset(members))
    return out


def format_family(family: list[frozenset[int]]) -> str:
    if any(not s for s in family):
        raise GraphFormatError("family file cannot encode the empty set")
    lines = [",".join(str(v) for v in sorted(s)) for s in family]
    return "\n".join(lines) + ("\n" if lines else "")
