"""Smoke test for the qteleroute_py extension.

Build and install first:
    (cd crates/python && maturin build --release -o dist && pip install dist/*.whl)
"""

import json
import math

import qteleroute_py as q


def check(name, ok, detail=""):
    print(f"{'PASS' if ok else 'FAIL'} {name} {detail}".rstrip())
    if not ok:
        raise SystemExit(1)


def main():
    w = q.StateVector.channel("wbell")
    check("wbell is normalized", abs(w.norm() - 1.0) < 1e-12, f"qubits={w.num_qubits}")

    bell = q.StateVector(2).apply("h", 0).apply("cnot", 0, 1)
    probs = bell.probabilities()
    check("bell circuit", abs(probs[0] - 0.5) < 1e-12 and abs(probs[3] - 0.5) < 1e-12)

    report = q.channel_report("ghzbell")
    check("channel report", report["max_amplitude_error"] < 1e-12)

    table = q.correction_table("bell", bidirectional=False)
    check("bell correction table", len(table["entries"]) == 4)

    for ch in ("wbell", "ghzbell", "clusterbell"):
        r = q.teleport(ch, 0.7, 2.1, seed=5)
        check(f"bidirectional teleport over {ch}", r["success"] and r["fidelity_b_to_a"] > 1 - 1e-9)

    g = q.Graph.waxman(30, width=200.0, height=400.0, epsilon=0.3, seed=1)
    g2 = q.Graph.from_json(g.to_json())
    check("graph json round trip", json.loads(g2.to_json()) == json.loads(g.to_json()))

    target = 5
    p = g.dijkstra(0, target)
    gp, stats = g.grover_dijkstra(0, target, seed=3)
    check("grover dijkstra matches", math.isclose(p.total_cost, gp.total_cost), f"queries={stats['oracle_queries']}")
    fwd, back = g.route(0, target, seed=3)
    check("bidirectional route", fwd.nodes[0] == 0 and back.nodes[0] == target)
    check("svg", g.svg(0, target).startswith("<svg"))

    walk = q.walk([0, 1, 2, 3], shots=200, seed=2)
    check("walk histogram", sum(walk["histogram"].values()) == 200)

    try:
        q.walk(list(range(30)))
        check("walk guard", False)
    except MemoryError:
        check("walk guard", True)

    rows = q.simulate(preset="smoke", node_counts=[60], runs=2, seed=4)
    check("simulate", len(rows) == 2 and all(r["runs"] == 2 for r in rows), f"modes={[r['mode'] for r in rows]}")
    check("chain fidelity", q.chain_fidelity(0.95, 1) == 0.95)


if __name__ == "__main__":
    main()
