"""The travelling-peak simulation study.

A family of piecewise-linear functions shares a fixed row of unit-height
peaks while one tall peak of height 5 moves along the row.  All functions
have identical persistence diagrams, mirrored family members have edit
distance zero, and the pairwise distance matrix recovers the travel
pattern.  Breakpoints are constructed analytically, so no discretization
error enters the assertions.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from .distance import (
    DEFAULT_CONFIG,
    SolverConfig,
    distance_matrix,
    merge_tree_distance,
)
from .documents import (
    write_coordinates,
    write_diagram,
    write_matrix,
    write_samples,
    write_tree,
)
from .filtration import PLFunction, diagrams_equal, merge_tree_from_pl, persistence_diagram
from .mds import mds_embed
from .trees import equal_up_to_order2

SMALL_HEIGHT = 1.0
BIG_HEIGHT = 5.0


class SimulationAssertionError(AssertionError):
    """A structural assertion of the simulation study failed."""


def travelling_peak_function(i: int, n_small: int) -> PLFunction:
    """Member ``i`` of the family: ``n_small`` unit peaks at ``j + 1/2`` and
    one tall peak rising at ``i + 2/3`` on the domain ``[0, n_small]``."""
    if not (0 <= i <= n_small - 2):
        raise ValueError(f"peak position {i} outside 0..{n_small - 2}")
    pts: dict[float, float] = {0.0: 0.0, float(n_small): 0.0}
    for j in range(n_small):
        pts[j + 1 / 3] = 0.0
        pts[j + 1 / 2] = SMALL_HEIGHT
        pts[j + 2 / 3] = 0.0
    pts[i + 2 / 3] = 0.0
    pts[i + 3 / 4] = BIG_HEIGHT
    pts[i + 1.0] = 0.0
    return PLFunction(tuple(sorted(pts.items())))


def travelling_peak_family(n_small: int = 11):
    """All members ``f_0 .. f_{n_small-2}``; member ``i`` mirrors member
    ``n_small - 2 - i``."""
    return [travelling_peak_function(i, n_small) for i in range(n_small - 1)]


@dataclass(frozen=True)
class SimulationReport:
    names: tuple[str, ...]
    n_small: int
    diagram_multiplicity: int
    mirror_pairs: tuple[tuple[int, int], ...]
    max_mirror_distance: float
    max_asymmetry: float
    max_mds_mirror_gap: float


def run_simulation(outdir, n_small: int = 11,
                   config: SolverConfig = DEFAULT_CONFIG,
                   workers: int = 1, figures: bool = True) -> SimulationReport:
    """Generate the family, emit every artifact, and check the structural
    assertions; raises :class:`SimulationAssertionError` on failure.

    Artifacts: per-member breakpoint CSVs, merge-tree documents and
    diagram CSVs, the pairwise distance matrix, planar MDS coordinates,
    and (optionally) rendered figures next to the delimited output.
    """
    out = Path(outdir)
    functions = travelling_peak_family(n_small)
    names = [f"f_{i}" for i in range(len(functions))]
    trees = [merge_tree_from_pl(f) for f in functions]
    diagrams = [persistence_diagram(t) for t in trees]

    for sub in ("functions", "trees", "diagrams"):
        (out / sub).mkdir(parents=True, exist_ok=True)
    for name, f, t, d in zip(names, functions, trees, diagrams):
        write_samples(out / "functions" / f"{name}.csv", f)
        write_tree(out / "trees" / f"{name}.json", t, name)
        write_diagram(out / "diagrams" / f"{name}.csv", d)

    # shared persistence diagram with one (0, 1) point per unit peak
    for d in diagrams[1:]:
        if not diagrams_equal(diagrams[0], d, tol=1e-9):
            raise SimulationAssertionError("family diagrams differ")
    multiplicity = diagrams[0].multiplicity(0.0, SMALL_HEIGHT)
    if multiplicity != n_small:
        raise SimulationAssertionError(
            f"expected {n_small} copies of (0,1), found {multiplicity}"
        )

    matrix = distance_matrix(trees, config=config, workers=workers)
    if matrix.errors:
        raise SimulationAssertionError(
            f"pairwise solves failed: {sorted(matrix.errors)}"
        )
    values = np.array(matrix.values)
    asym = float(np.abs(values - values.T).max())
    if asym > 1e-12:
        raise SimulationAssertionError(f"matrix asymmetry {asym}")

    mirrors = tuple(
        (i, len(functions) - 1 - i) for i in range(len(functions) // 2)
    )
    worst_mirror = 0.0
    for i, j in mirrors:
        eq, _ = equal_up_to_order2(trees[i], trees[j])
        if not eq:
            raise SimulationAssertionError(f"trees {i} and {j} are not mirrors")
        worst_mirror = max(worst_mirror, values[i][j])
        if values[i][j] > 1e-9:
            raise SimulationAssertionError(
                f"mirror pair ({i},{j}) at distance {values[i][j]}"
            )
    mirror_set = set(mirrors)
    for i in range(len(functions) - 1):
        if (i, i + 1) in mirror_set:
            continue
        if values[i][i + 1] <= 1e-9:
            raise SimulationAssertionError(
                f"adjacent pair ({i},{i + 1}) unexpectedly at distance 0"
            )

    coords = mds_embed(values)
    write_matrix(out / "matrix.csv", names, values)
    write_coordinates(out / "mds.csv", names, coords)
    worst_gap = 0.0
    for i, j in mirrors:
        gap = float(np.abs(coords[i] - coords[j]).max())
        worst_gap = max(worst_gap, gap)
        if gap > 1e-6:
            raise SimulationAssertionError(
                f"MDS separates mirror pair ({i},{j}) by {gap}"
            )

    report = SimulationReport(
        tuple(names),
        n_small,
        multiplicity,
        mirrors,
        worst_mirror,
        asym,
        worst_gap,
    )
    with open(out / "summary.json", "w") as fh:
        json.dump(
            {
                "names": names,
                "n_small": n_small,
                "diagram_multiplicity": multiplicity,
                "mirror_pairs": [list(p) for p in mirrors],
                "max_mirror_distance": worst_mirror,
                "max_asymmetry": asym,
                "max_mds_mirror_gap": worst_gap,
            },
            fh,
            indent=1,
        )
        fh.write("\n")

    if figures:
        from . import figures as fig

        fig_dir = out / "figures"
        fig_dir.mkdir(exist_ok=True)
        fig.render_functions(fig_dir / "functions.png", names, functions)
        fig.render_diagram(fig_dir / "diagram.png", diagrams[0])
        fig.render_matrix(fig_dir / "matrix.png", names, values)
        fig.render_embedding(fig_dir / "mds.png", names, coords)
    return report
