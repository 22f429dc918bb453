"""Smoke test for the capagg Python extension.

Build and install with `maturin build -m crates/python/Cargo.toml` and
`pip install target/wheels/capagg-*.whl`, then run this script.
"""

import capagg


def close(a, b, tol=1e-9):
    return all(abs(x - y) <= tol for x, y in zip(a, b))


def main():
    e = capagg.Event("p & !q")
    assert str(e) == "p & !q"
    assert e.canonical_key() == capagg.Event("!q & p").canonical_key()
    assert e.evaluate({"p": True, "q": False})
    assert e.support() == ["p", "q"]

    poly = capagg.Polytope(["p", "q", "p & q"])
    assert close(poly.project([0.95, 0.0, 0.6]), [0.95, 0.3, 0.3])
    assert poly.is_coherent([0.5, 0.5, 0.25])
    assert len(poly.vertices()) == 4

    rows = [("j1", "p", 0.7, None), ("j1", "!p", 0.5, None)]
    agg = capagg.aggregate(rows)
    assert close(agg.probs, [0.6, 0.4]) and agg.converged
    assert close([agg.as_dict()["p"]], [0.6])

    pooled = capagg.pool([("a", "p & q", 0.2, None), ("b", "q & p", 0.4, None)])
    assert len(pooled) == 1 and pooled[0][2] == 2 and abs(pooled[0][1] - 0.3) < 1e-12

    assert close(capagg.oracle(["p", "!p", "p & q", "q"], [0.9, 0.3, 0.5, 0.2]), [0.8, 0.2, 0.35, 0.35], 1e-7)
    assert capagg.brier([0.5, 0.5], [True, False]) == (0.5, 0.25)
    assert abs(capagg.slope([0.8, 0.3], [True, False]) - 0.5) < 1e-12

    panel = capagg.generate(seed=7)
    assert len(panel) == 1020
    scores = capagg.evaluate_cases(panel)
    assert scores["aggregate"] <= scores["individual"] <= scores["raw"]

    try:
        capagg.Event("p & (q")
    except ValueError as err:
        assert "position 4" in str(err)
    else:
        raise AssertionError("expected a syntax error")

    print("capagg smoke test passed:", {k: round(v, 4) for k, v in sorted(scores.items())})


if __name__ == "__main__":
    main()
