from __future__ import annotations

from pathlib import Path

import networkx as nx

from bvqo.execution.benchmark import BreakevenSeries
from bvqo.graph.join_graph import JoinGraph


def render_join_graph(graph: JoinGraph, output_path: Path) -> None:
    """Relations sized by log cardinality; PKFK edges point at the key side."""
    import matplotlib.pyplot as plt
    import numpy as np

    drawing = nx.DiGraph()
    for unit in graph.units:
        drawing.add_node(unit, size=300 + 180 * float(np.log10(max(1.0, graph.cardinality(unit)))))
    directed, undirected = [], []
    for a, b in graph.edges():
        key = graph.key_side(a, b)
        if key is None:
            drawing.add_edge(a, b)
            undirected.append((a, b))
        else:
            source = a if key == b else b
            drawing.add_edge(source, key)
            directed.append((source, key))

    plt.figure(figsize=(10, 8))
    pos = nx.spring_layout(drawing.to_undirected(), seed=7, k=1.2)
    sizes = [drawing.nodes[n]["size"] for n in drawing.nodes]
    nx.draw_networkx_nodes(drawing, pos, node_size=sizes, node_color="#0ea5e9", alpha=0.9)
    if directed:
        nx.draw_networkx_edges(drawing, pos, edgelist=directed, edge_color="#64748b", arrows=True, arrowsize=18, node_size=sizes)
    if undirected:
        nx.draw_networkx_edges(drawing, pos, edgelist=undirected, edge_color="#f97316", style="dashed", arrows=False)
    labels = {n: f"{n}\n{int(graph.cardinality(n))}" for n in drawing.nodes}
    nx.draw_networkx_labels(drawing, pos, labels=labels, font_size=9, font_color="#0f172a")

    plt.title("Join Graph", fontsize=16)
    plt.axis("off")
    output_path.parent.mkdir(parents=True, exist_ok=True)
    plt.tight_layout()
    plt.savefig(output_path, dpi=220)
    plt.close()


def render_breakeven_chart(series: BreakevenSeries, output_path: Path) -> None:
    import matplotlib.pyplot as plt

    eliminated = [p.eliminated for p in series.points]
    plt.figure(figsize=(9, 6))
    plt.plot(eliminated, [p.cost_with for p in series.points], marker="o", color="#0ea5e9", label="with bitvector")
    plt.plot(eliminated, [p.cost_without for p in series.points], marker="s", color="#64748b", label="without bitvector")
    breakeven = series.breakeven
    if breakeven is not None:
        plt.axvline(breakeven, color="#f97316", linestyle="--", label=f"break-even e={breakeven:.2f}")
    plt.xlabel("eliminated fraction of probe tuples")
    plt.ylabel("simulated cost units")
    plt.title(f"Bitvector break-even (fact={series.fact_size}, dim={series.dim_size})", fontsize=14)
    plt.legend()
    output_path.parent.mkdir(parents=True, exist_ok=True)
    plt.tight_layout()
    plt.savefig(output_path, dpi=220)
    plt.close()
