"""Figure rendering for the report path; every figure lands next to the
delimited file carrying the same data."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np


def render_functions(path, names, functions, picks=(0, 3)):
    picks = [p for p in picks if p < len(functions)] or [0]
    fig, axes = plt.subplots(len(picks), 1, figsize=(8, 2.5 * len(picks)), squeeze=False)
    for ax, p in zip(axes[:, 0], picks):
        xs = [x for x, _ in functions[p].breakpoints]
        ys = [y for _, y in functions[p].breakpoints]
        ax.plot(xs, ys, lw=1.2)
        ax.set_title(names[p])
        ax.set_xlabel("x")
        ax.set_ylabel("f(x)")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def render_diagram(path, diagram):
    fig, ax = plt.subplots(figsize=(4.5, 4.5))
    pairs = diagram.sorted_pairs()
    if pairs:
        births = [b for b, _ in pairs]
        deaths = [d for _, d in pairs]
        counts = {}
        for p in pairs:
            counts[p] = counts.get(p, 0) + 1
        ax.scatter(births, deaths, s=30, zorder=3)
        for (b, d), c in counts.items():
            if c > 1:
                ax.annotate(f"x{c}", (b, d), textcoords="offset points", xytext=(6, 4))
        top = max(deaths)
    else:
        top = 1.0
    lo = min([b for b, _ in pairs] + list(diagram.essential_births) + [0.0])
    hi = top * 1.1 + 0.1
    ax.plot([lo, hi], [lo, hi], color="gray", lw=0.8, zorder=1)
    for b in diagram.essential_births:
        ax.scatter([b], [hi], marker="^", color="crimson", zorder=3)
    ax.set_xlabel("birth")
    ax.set_ylabel("death")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def render_matrix(path, names, values):
    fig, ax = plt.subplots(figsize=(5.5, 4.8))
    im = ax.imshow(np.asarray(values), cmap="viridis")
    ax.set_xticks(range(len(names)), labels=names, rotation=90)
    ax.set_yticks(range(len(names)), labels=names)
    fig.colorbar(im, ax=ax, shrink=0.85)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def render_embedding(path, names, coords):
    coords = np.asarray(coords)
    n = len(names)
    fig, ax = plt.subplots(figsize=(5, 4.5))
    shades = [str(0.85 * (1 - i / max(n - 1, 1))) for i in range(n)]
    ax.scatter(coords[:, 0], coords[:, 1], c=shades, edgecolors="black", s=60)
    for name, (x, y) in zip(names, coords):
        ax.annotate(name, (x, y), textcoords="offset points", xytext=(5, 5), fontsize=8)
    ax.set_xlabel("mds 1")
    ax.set_ylabel("mds 2")
    ax.set_aspect("equal", adjustable="datalim")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
