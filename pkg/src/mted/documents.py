"""File formats: tree documents (JSON), sample/matrix/coordinate CSVs.

The tree document format ``mt-json/1`` lists one node per stored vertex;
parents are ids (null for the root), merge nodes carry heights and weighted
nodes carry the weight of the edge to their father (null for the root).
Numeric rendering uses shortest round-trip floats, so write/read is
bit-stable.
"""

from __future__ import annotations

import json
from typing import Optional, Sequence, TextIO

from .filtration import PLFunction
from .trees import MergeTree, Tree, TreeStructure, WeightedTree, validate

FORMAT_TAG = "mt-json/1"


class DocumentError(ValueError):
    """Malformed input document or sample file."""


def tree_to_document(tree: Tree, name: Optional[str] = None) -> dict:
    s = tree.structure
    nodes = []
    for v in s.vertices():
        node: dict = {"id": v, "parent": s.parent[v]}
        if isinstance(tree, MergeTree):
            node["height"] = tree.heights[v]
        else:
            node["weight"] = None if v == s.root else tree.weights[v]
        nodes.append(node)
    doc = {
        "format": FORMAT_TAG,
        "kind": "merge" if isinstance(tree, MergeTree) else "weighted",
        "nodes": nodes,
    }
    if name is not None:
        doc["name"] = name
    return doc


def document_to_tree(doc: dict) -> tuple[Tree, Optional[str]]:
    if not isinstance(doc, dict):
        raise DocumentError("document must be a JSON object")
    if doc.get("format") != FORMAT_TAG:
        raise DocumentError(f"unsupported format tag {doc.get('format')!r}")
    kind = doc.get("kind")
    if kind not in ("merge", "weighted"):
        raise DocumentError(f"unknown kind {kind!r}")
    nodes = doc.get("nodes")
    if not isinstance(nodes, list) or not nodes:
        raise DocumentError("document has no nodes")
    ids = [n.get("id") for n in nodes]
    if sorted(ids) != list(range(len(nodes))):
        raise DocumentError("node ids must be dense integers 0..n-1")
    parent: list = [None] * len(nodes)
    payload = [0.0] * len(nodes)
    for n in nodes:
        v = n["id"]
        parent[v] = n.get("parent")
        if kind == "merge":
            if "height" not in n:
                raise DocumentError(f"merge node {v} lacks a height")
            payload[v] = float(n["height"])
        else:
            w = n.get("weight")
            payload[v] = 0.0 if w is None else float(w)
    try:
        structure = TreeStructure(tuple(parent))
        tree: Tree
        if kind == "merge":
            tree = MergeTree(structure, tuple(payload))
        else:
            payload[structure.root] = 0.0
            tree = WeightedTree(structure, tuple(payload))
    except ValueError as exc:
        raise DocumentError(str(exc)) from exc
    problems = validate(tree)
    if problems:
        raise DocumentError("; ".join(problems))
    return tree, doc.get("name")


def write_tree(path, tree: Tree, name: Optional[str] = None):
    with open(path, "w") as fh:
        json.dump(tree_to_document(tree, name), fh, indent=1)
        fh.write("\n")


def read_tree(path) -> tuple[Tree, Optional[str]]:
    with open(path) as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise DocumentError(f"invalid JSON: {exc}") from exc
    return document_to_tree(doc)


# ---------------------------------------------------------------------------
# sample CSV


def parse_samples(lines) -> PLFunction:
    """Ordered (x, y) samples as a PL function; a non-numeric first row is
    treated as a header."""
    points = []
    first = True
    for k, raw in enumerate(lines):
        line = raw.strip()
        if not line:
            continue
        parts = line.split(",")
        if len(parts) != 2:
            raise DocumentError(f"line {k + 1}: expected 'x,y', got {raw!r}")
        try:
            x, y = float(parts[0]), float(parts[1])
        except ValueError:
            if first:
                first = False
                continue
            raise DocumentError(f"line {k + 1}: non-numeric sample {raw!r}")
        first = False
        points.append((x, y))
    try:
        return PLFunction(tuple(points))
    except ValueError as exc:
        raise DocumentError(str(exc)) from exc


def read_samples(path) -> PLFunction:
    with open(path) as fh:
        return parse_samples(fh)


def write_samples(path, f: PLFunction):
    with open(path, "w") as fh:
        fh.write("x,y\n")
        for x, y in f.breakpoints:
            fh.write(f"{x!r},{y!r}\n")


# ---------------------------------------------------------------------------
# matrix and coordinate CSV


def format_matrix(names: Sequence[str], values) -> str:
    lines = [",".join(names)]
    for name, row in zip(names, values):
        lines.append(",".join([name] + [repr(float(v)) for v in row]))
    return "\n".join(lines) + "\n"


def write_matrix(path, names: Sequence[str], values):
    with open(path, "w") as fh:
        fh.write(format_matrix(names, values))


def read_matrix(path):
    with open(path) as fh:
        lines = [l.strip() for l in fh if l.strip()]
    names = lines[0].split(",")
    values = []
    for line in lines[1:]:
        parts = line.split(",")
        values.append([float(p) for p in parts[1:]])
    return names, values


def write_coordinates(path, names: Sequence[str], coords):
    with open(path, "w") as fh:
        fh.write("name,x,y\n")
        for name, (x, y) in zip(names, coords):
            fh.write(f"{name},{float(x)!r},{float(y)!r}\n")


def write_diagram(path, diagram):
    with open(path, "w") as fh:
        fh.write("birth,death\n")
        for b, d in diagram.sorted_pairs():
            fh.write(f"{b!r},{d!r}\n")
        for b in sorted(diagram.essential_births):
            fh.write(f"{b!r},inf\n")


# ---------------------------------------------------------------------------
# config files


def parse_config(lines) -> dict:
    """key = value pairs; '#' starts a comment."""
    out: dict = {}
    for k, raw in enumerate(lines):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise DocumentError(f"config line {k + 1}: expected key = value")
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip().strip('"')
        try:
            out[key] = int(value)
        except ValueError:
            try:
                out[key] = float(value)
            except ValueError:
                out[key] = value
    return out
