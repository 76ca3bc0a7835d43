"""Command-line interface.

Exit codes: 0 on success, 2 on input errors, 3 when a solver runs out of
its node budget, 4 when a simulation assertion fails.
"""

from __future__ import annotations

import json
import sys

import click

from .distance import (
    DEFAULT_CONFIG,
    BudgetExceeded,
    SolverConfig,
    distance_matrix,
    edit_distance,
    merge_tree_distance,
    truncate,
    untruncate,
)
from .documents import (
    DocumentError,
    document_to_tree,
    parse_config,
    read_samples,
    read_tree,
    tree_to_document,
    format_matrix,
    write_matrix,
)
from .filtration import merge_tree_from_pl
from .geometry import frechet_mean, geodesic, geodesic_eval
from .mds import mds_embed
from .simulation import SimulationAssertionError, run_simulation
from .trees import MergeTree, WeightedTree

EXIT_INPUT = 2
EXIT_BUDGET = 3
EXIT_ASSERTION = 4


def _fail(code: int, message: str):
    click.echo(f"error: {message}", err=True)
    sys.exit(code)


def _load_config(path) -> SolverConfig:
    if path is None:
        return DEFAULT_CONFIG
    try:
        with open(path) as fh:
            raw = parse_config(fh)
    except (OSError, DocumentError) as exc:
        _fail(EXIT_INPUT, f"config: {exc}")
    known = {}
    for key in ("node_budget", "oracle_cap"):
        if key in raw:
            known[key] = int(raw.pop(key))
    for key in raw:
        click.echo(f"warning: ignoring unknown config key {key!r}", err=True)
    return SolverConfig(**known)


def _load_tree(path):
    try:
        return read_tree(path)
    except (OSError, DocumentError) as exc:
        _fail(EXIT_INPUT, f"{path}: {exc}")


def _load_pair(path_a, path_b):
    (a, _), (b, _) = _load_tree(path_a), _load_tree(path_b)
    if isinstance(a, MergeTree) != isinstance(b, MergeTree):
        _fail(EXIT_INPUT, "trees must be of the same kind")
    return a, b


@click.group()
def main():
    """Merge-tree edit distance toolkit."""


@main.command()
@click.argument("samples", type=click.Path(exists=True, dir_okay=False))
@click.option("--name", default=None, help="Name stored in the document.")
@click.option("-o", "--out", type=click.Path(dir_okay=False), default=None,
              help="Output file (default: stdout).")
def extract(samples, name, out):
    """Extract the canonical merge tree of a sampled function (CSV x,y)."""
    try:
        f = read_samples(samples)
    except (OSError, DocumentError) as exc:
        _fail(EXIT_INPUT, f"{samples}: {exc}")
    tree = merge_tree_from_pl(f)
    doc = tree_to_document(tree, name)
    payload = json.dumps(doc, indent=1) + "\n"
    if out:
        with open(out, "w") as fh:
            fh.write(payload)
    else:
        click.echo(payload, nl=False)


@main.command()
@click.argument("tree_a", type=click.Path(exists=True, dir_okay=False))
@click.argument("tree_b", type=click.Path(exists=True, dir_okay=False))
@click.option("--witness", type=click.Path(dir_okay=False), default=None,
              help="Write the optimal mapping to this JSON file.")
@click.option("--config", "config_path", type=click.Path(exists=True), default=None)
def dist(tree_a, tree_b, witness, config_path):
    """Exact distance between two tree documents."""
    config = _load_config(config_path)
    a, b = _load_pair(tree_a, tree_b)
    try:
        if isinstance(a, MergeTree):
            res = merge_tree_distance(a, b, config)
        else:
            res = edit_distance(a, b, config)
    except BudgetExceeded as exc:
        _fail(EXIT_BUDGET, str(exc))
    click.echo(f"{res.value:.12g}")
    if witness:
        with open(witness, "w") as fh:
            json.dump(res.witness.to_dict(), fh, indent=1)
            fh.write("\n")


@main.command()
@click.argument("trees", nargs=-1, required=True,
                type=click.Path(exists=True, dir_okay=False))
@click.option("-o", "--out", type=click.Path(dir_okay=False), default=None,
              help="Output CSV (default: stdout).")
@click.option("--workers", default=1, show_default=True)
@click.option("--plot", type=click.Path(dir_okay=False), default=None,
              help="Render a heatmap next to the CSV.")
@click.option("--config", "config_path", type=click.Path(exists=True), default=None)
def matrix(trees, out, workers, plot, config_path):
    """Pairwise distance matrix of tree documents (CSV with a name header)."""
    config = _load_config(config_path)
    loaded, names = [], []
    for i, path in enumerate(trees):
        t, name = _load_tree(path)
        loaded.append(t)
        names.append(name or f"tree_{i}")
    kinds = {type(t) for t in loaded}
    if len(kinds) > 1:
        _fail(EXIT_INPUT, "trees must all be of the same kind")
    res = distance_matrix(loaded, config=config, workers=workers)
    if res.errors:
        for (i, j), msg in sorted(res.errors.items()):
            click.echo(f"error: pair ({names[i]}, {names[j]}): {msg}", err=True)
        sys.exit(EXIT_BUDGET)
    if out:
        write_matrix(out, names, res.values)
    else:
        click.echo(format_matrix(names, res.values), nl=False)
    if plot:
        from . import figures

        figures.render_matrix(plot, names, res.values)


@main.command()
@click.argument("tree_a", type=click.Path(exists=True, dir_okay=False))
@click.argument("tree_b", type=click.Path(exists=True, dir_okay=False))
@click.option("--t", "t_values", default="0,0.5,1", show_default=True,
              help="Comma-separated parameters in [0, 1].")
@click.option("-o", "--out", type=click.Path(dir_okay=False), default=None)
@click.option("--config", "config_path", type=click.Path(exists=True), default=None)
def geodesic_cmd(tree_a, tree_b, t_values, out, config_path):
    """Sample the geodesic between two tree documents (JSON array)."""
    config = _load_config(config_path)
    a, b = _load_pair(tree_a, tree_b)
    try:
        ts = [float(x) for x in t_values.split(",") if x.strip()]
    except ValueError:
        _fail(EXIT_INPUT, f"bad --t list {t_values!r}")
    if any(not (0.0 <= t <= 1.0) for t in ts):
        _fail(EXIT_INPUT, "--t values must lie in [0, 1]")
    merge_inputs = isinstance(a, MergeTree)
    if merge_inputs:
        K = max(a.max_height, b.max_height) + 1.0
        wa, wb = truncate(a, K), truncate(b, K)
    else:
        wa, wb = a, b
    try:
        g = geodesic(wa, wb, config=config)
    except BudgetExceeded as exc:
        _fail(EXIT_BUDGET, str(exc))
    docs = []
    for t in ts:
        tree = geodesic_eval(g, t)
        if merge_inputs:
            tree = untruncate(tree, K)
        docs.append(tree_to_document(tree, name=f"t={t:g}"))
    payload = json.dumps(docs, indent=1) + "\n"
    if out:
        with open(out, "w") as fh:
            fh.write(payload)
    else:
        click.echo(payload, nl=False)


main.add_command(geodesic_cmd, name="geodesic")


@main.command()
@click.argument("trees", nargs=-1, required=True,
                type=click.Path(exists=True, dir_okay=False))
@click.option("--p", default=1.0, show_default=True)
@click.option("--max-iters", default=50, show_default=True)
@click.option("--tol", default=1e-6, show_default=True)
@click.option("-o", "--out", type=click.Path(dir_okay=False), default=None)
@click.option("--trace", "trace_path", type=click.Path(dir_okay=False), default=None,
              help="Objective trace CSV (iteration, objective).")
@click.option("--config", "config_path", type=click.Path(exists=True), default=None)
def frechet(trees, p, max_iters, tol, out, trace_path, config_path):
    """Approximate the Frechet mean of tree documents."""
    config = _load_config(config_path)
    loaded = []
    for path in trees:
        t, _ = _load_tree(path)
        loaded.append(t)
    if len({type(t) for t in loaded}) > 1:
        _fail(EXIT_INPUT, "trees must all be of the same kind")
    if p < 1:
        _fail(EXIT_INPUT, "--p must be >= 1")
    try:
        res = frechet_mean(loaded, p=p, max_iters=max_iters, tol=tol, config=config)
    except BudgetExceeded as exc:
        _fail(EXIT_BUDGET, str(exc))
    doc = tree_to_document(res.mean, name="frechet-mean")
    payload = json.dumps(doc, indent=1) + "\n"
    if out:
        with open(out, "w") as fh:
            fh.write(payload)
    else:
        click.echo(payload, nl=False)
    if trace_path:
        with open(trace_path, "w") as fh:
            fh.write("iteration,objective\n")
            for i, f in enumerate(res.trace):
                fh.write(f"{i},{f!r}\n")
    click.echo(f"objective: {res.objective:.12g}", err=True)


@main.command()
@click.option("-o", "--out", type=click.Path(file_okay=False), default="simulation",
              show_default=True)
@click.option("--reduced", is_flag=True,
              help="Use the 5-peak family instead of the full 11-peak one.")
@click.option("--workers", default=1, show_default=True)
@click.option("--figures/--no-figures", "render", default=True, show_default=True)
@click.option("--config", "config_path", type=click.Path(exists=True), default=None)
def simulate(out, reduced, workers, render, config_path):
    """Run the travelling-peak study and write all artifacts."""
    config = _load_config(config_path)
    n_small = 5 if reduced else 11
    try:
        report = run_simulation(out, n_small=n_small, config=config,
                                workers=workers, figures=render)
    except BudgetExceeded as exc:
        _fail(EXIT_BUDGET, str(exc))
    except SimulationAssertionError as exc:
        _fail(EXIT_ASSERTION, str(exc))
    click.echo(
        f"{len(report.names)} functions; shared diagram holds "
        f"{report.diagram_multiplicity} copies of (0,{1:g}); "
        f"mirror distances <= {report.max_mirror_distance:.3g}; "
        f"artifacts in {out}/"
    )


if __name__ == "__main__":
    main()
