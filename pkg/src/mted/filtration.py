"""Merge trees and persistence diagrams of piecewise-linear scalar functions.

The sublevel-set filtration of a PL function on an interval is resolved
exactly from its breakpoints: leaves are local-minimum plateaus, internal
vertices are the separating peaks between adjacent minima, and simultaneous
merges at one height inside one component yield a single multi-child vertex.
"""

from __future__ import annotations

from dataclasses import dataclass

from .trees import EQ_TOL, MergeTree, TreeStructure, close


@dataclass(frozen=True)
class PLFunction:
    """Continuous piecewise-linear function given by its breakpoints."""

    breakpoints: tuple[tuple[float, float], ...]

    def __post_init__(self):
        if len(self.breakpoints) < 2:
            raise ValueError("a PL function needs at least 2 breakpoints")
        xs = [x for x, _ in self.breakpoints]
        if any(b <= a for a, b in zip(xs, xs[1:])):
            raise ValueError("breakpoint x coordinates must be strictly increasing")

    def __call__(self, x: float) -> float:
        pts = self.breakpoints
        if x <= pts[0][0]:
            return pts[0][1]
        if x >= pts[-1][0]:
            return pts[-1][1]
        for (x0, y0), (x1, y1) in zip(pts, pts[1:]):
            if x0 <= x <= x1:
                return y0 + (y1 - y0) * (x - x0) / (x1 - x0)
        raise AssertionError("unreachable")

    def shift(self, h: float) -> "PLFunction":
        return PLFunction(tuple((x, y + h) for x, y in self.breakpoints))


@dataclass(frozen=True)
class PersistenceDiagram:
    """Finite (birth, death) pairs plus the births of essential classes."""

    finite_pairs: tuple[tuple[float, float], ...]
    essential_births: tuple[float, ...]

    def __post_init__(self):
        for b, d in self.finite_pairs:
            if d <= b:
                raise ValueError(f"death {d!r} must exceed birth {b!r}")

    @property
    def rank(self) -> int:
        return len(self.finite_pairs) + len(self.essential_births)

    def sorted_pairs(self) -> tuple[tuple[float, float], ...]:
        return tuple(sorted(self.finite_pairs))

    def multiplicity(self, birth: float, death: float, tol: float = EQ_TOL) -> int:
        return sum(
            1
            for b, d in self.finite_pairs
            if close(b, birth, tol) and close(d, death, tol)
        )


def diagrams_equal(a: PersistenceDiagram, b: PersistenceDiagram, tol: float = EQ_TOL) -> bool:
    """Multiset equality of diagrams up to ``tol`` per coordinate."""
    if len(a.finite_pairs) != len(b.finite_pairs):
        return False
    if len(a.essential_births) != len(b.essential_births):
        return False
    pa, pb = a.sorted_pairs(), b.sorted_pairs()
    if any(
        not (close(x[0], y[0], tol) and close(x[1], y[1], tol))
        for x, y in zip(pa, pb)
    ):
        return False
    return all(
        close(x, y, tol)
        for x, y in zip(sorted(a.essential_births), sorted(b.essential_births))
    )


def _plateaus(f: PLFunction) -> list[tuple[float, int]]:
    """Collapse breakpoints into maximal constant runs: (value, kind) with
    kind -1 for a local minimum, +1 for an interior local maximum, 0 else."""
    ys = [y for _, y in f.breakpoints]
    runs: list[float] = []
    for y in ys:
        if not runs or not close(runs[-1], y):
            runs.append(y)
    kinds: list[tuple[float, int]] = []
    for i, y in enumerate(runs):
        lower_left = i > 0 and runs[i - 1] < y
        lower_right = i + 1 < len(runs) and runs[i + 1] < y
        higher_left = i > 0 and runs[i - 1] > y
        higher_right = i + 1 < len(runs) and runs[i + 1] > y
        if (higher_left or i == 0) and (higher_right or i == len(runs) - 1):
            kinds.append((y, -1))
        elif lower_left and lower_right:
            kinds.append((y, +1))
        else:
            kinds.append((y, 0))
    return kinds


def merge_tree_from_pl(f: PLFunction) -> MergeTree:
    """Merge tree of the sublevel-set filtration of ``f``.

    The output is canonical: every internal vertex has at least two
    children, and heights are the exact critical values.
    """
    kinds = _plateaus(f)
    minima = [y for y, k in kinds if k == -1]
    # the separator between consecutive minima is the highest plateau between
    # them, which for a PL function is its unique interior local maximum
    separators: list[float] = []
    current_max: float | None = None
    seen_first_min = False
    for y, k in kinds:
        if k == -1:
            if seen_first_min:
                separators.append(current_max)  # type: ignore[arg-type]
            seen_first_min = True
            current_max = None
        elif seen_first_min:
            current_max = y if current_max is None else max(current_max, y)

    n_leaves = len(minima)
    heights = list(minima)
    parent: list[int | None] = [None] * n_leaves
    top_of = list(range(n_leaves))  # component id -> current top vertex
    comp = list(range(n_leaves))  # leaf -> component id (union-find, flat)

    def find(i: int) -> int:
        while comp[i] != i:
            comp[i] = comp[comp[i]]
            i = comp[i]
        return i

    order = sorted(range(len(separators)), key=lambda i: separators[i])
    i = 0
    while i < len(order):
        # all separators at one height merge together; components joined at
        # the same event share a single multi-child vertex
        h = separators[order[i]]
        group = []
        while i < len(order) and close(separators[order[i]], h):
            group.append(order[i])
            i += 1
        pending = []
        for s in group:
            a, b = find(s), find(s + 1)
            if a != b:
                pending.append((a, b))
        # connected clusters of components merged by this height group
        adj: dict[int, set[int]] = {}
        for a, b in pending:
            adj.setdefault(a, set()).add(b)
            adj.setdefault(b, set()).add(a)
        visited: set[int] = set()
        for start in adj:
            if start in visited:
                continue
            cluster = []
            stack = [start]
            visited.add(start)
            while stack:
                u = stack.pop()
                cluster.append(u)
                for w in adj[u]:
                    if w not in visited:
                        visited.add(w)
                        stack.append(w)
            new_vertex = len(heights)
            heights.append(h)
            parent.append(None)
            for c in cluster:
                parent[top_of[c]] = new_vertex
            rep = cluster[0]
            for c in cluster[1:]:
                comp[c] = rep
            top_of[rep] = new_vertex
    return MergeTree(TreeStructure(tuple(parent)), tuple(heights))


def persistence_diagram(tree: MergeTree) -> PersistenceDiagram:
    """Persistence diagram of a merge tree under the elder rule.

    At every merge vertex the branch with the lowest birth survives (ties
    broken by smaller leaf id); each other branch contributes a finite pair
    dying at the merge height.  The surviving class is essential.
    """
    s = tree.structure
    pairs: list[tuple[float, float]] = []
    # birth of the component carried by each vertex: (birth height, leaf id)
    birth: dict[int, tuple[float, int]] = {}
    for v in reversed(s.topological_order()):
        kids = s.children[v]
        if not kids:
            birth[v] = (tree.heights[v], v)
            continue
        carried = sorted(birth[c] for c in kids)
        birth[v] = carried[0]
        h = tree.heights[v]
        for b, _leaf in carried[1:]:
            pairs.append((b, h))
    essential = birth[s.root][0]
    return PersistenceDiagram(tuple(sorted(pairs)), (essential,))
