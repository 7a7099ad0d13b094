#!/usr/bin/env python3
"""Regenerate the bundled data files: demo machine profiles and hardware graphs.

Requires dwave-networkx for the Zephyr and Chimera topologies.
Usage: python3 tools/gen_fixtures.py [data-dir]
"""

import json
import sys
from pathlib import Path

import dwave_networkx as dnx
import networkx as nx

TAUS = [1, 10, 100, 200, 500, 1000, 2000]

# Illustrative tables, shaped to decrease in tau and saturate. Only b1_kelvin
# of Advantage_system4.1 and the 15 mK cryostat temperature are quoted values.
PROFILES = {
    "Advantage_system4.1": {
        "b1_kelvin": 0.407,
        "alpha": [2.40, 2.10, 1.85, 1.78, 1.70, 1.65, 1.62],
        "tbar": [0.40, 0.37, 0.34, 0.33, 0.32, 0.31, 0.31],
        "notes": "Nominal B(1) and T_machine; alpha/tbar tables are illustrative, not measured.",
    },
    "Advantage_system6.4": {
        "b1_kelvin": 0.42,
        "alpha": [2.30, 2.00, 1.80, 1.72, 1.66, 1.60, 1.58],
        "tbar": [0.39, 0.36, 0.33, 0.32, 0.31, 0.30, 0.30],
        "notes": "Illustrative profile; B(1) is a representative value.",
    },
    "Advantage2_Prototype2.6": {
        "b1_kelvin": 0.65,
        "alpha": [1.90, 1.60, 1.40, 1.34, 1.28, 1.24, 1.22],
        "tbar": [0.30, 0.27, 0.25, 0.24, 0.23, 0.22, 0.22],
        "notes": "Illustrative profile; B(1) is a representative value.",
    },
    "Advantage2_System1.1": {
        "b1_kelvin": 0.70,
        "alpha": [1.40, 1.15, 0.98, 0.94, 0.90, 0.87, 0.86],
        "tbar": [0.28, 0.25, 0.23, 0.22, 0.21, 0.20, 0.20],
        "notes": "Illustrative profile; B(1) is a representative value.",
    },
}


def write_profiles(root: Path) -> None:
    out = root / "profiles"
    out.mkdir(parents=True, exist_ok=True)
    for name, p in PROFILES.items():
        doc = {
            "name": name,
            "b1_kelvin": p["b1_kelvin"],
            "t_machine_kelvin": 0.015,
            "alpha_table": [[t, a] for t, a in zip(TAUS, p["alpha"])],
            "tbar_table": [[t, b] for t, b in zip(TAUS, p["tbar"])],
            "notes": p["notes"],
        }
        (out / f"{name}.json").write_text(json.dumps(doc, indent=2) + "\n")


def write_graph(path: Path, graph, label: str) -> dict:
    edges = sorted(tuple(sorted(e)) for e in graph.edges())
    with path.open("w") as f:
        f.write(f"# {label}\n")
        f.write(f"# {graph.number_of_nodes()} nodes, {len(edges)} edges\n")
        for a, b in edges:
            f.write(f"{a} {b}\n")
    return {"file": path.name, "nodes": graph.number_of_nodes(), "edges": len(edges)}


def write_graphs(root: Path) -> None:
    out = root / "graphs"
    out.mkdir(parents=True, exist_ok=True)
    entries = []
    z = dnx.zephyr_graph(4, 4)
    info = write_graph(out / "zephyr_m4_t4.edges", z, "Zephyr Z(4,4), linear indices")
    info["bipartite"] = nx.is_bipartite(z)
    info["topology"] = "zephyr m=4 t=4"
    entries.append(info)
    c = dnx.chimera_graph(4, 4, 4)
    info = write_graph(out / "chimera_c4.edges", c, "Chimera C(4,4,4), linear indices")
    info["bipartite"] = nx.is_bipartite(c)
    info["topology"] = "chimera m=4 n=4 t=4"
    entries.append(info)
    (out / "manifest.json").write_text(json.dumps({"graphs": entries}, indent=2) + "\n")


def main() -> None:
    root = Path(sys.argv[1]) if len(sys.argv) > 1 else Path(__file__).resolve().parent.parent / "data"
    write_profiles(root)
    write_graphs(root)


if __name__ == "__main__":
    main()
