"""Smoke test for the flowcert Python module.

Build the module first (see README), then run:

    python3 python/smoke_test.py
"""

import os
import sys

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

import flowcert  # noqa: E402


def main():
    z2 = flowcert.Group.cyclic(2)
    z3 = flowcert.Group([3])
    assert z2.order == 2 and z3.factors == [3]
    assert str(flowcert.Group([2, 2])) == "Z2xZ2"
    assert z3.add(2, 2) == 1 and z3.neg(1) == 2
    assert sorted(z3.automorphisms()) == [[0, 1, 2], [0, 2, 1]]

    flows = flowcert.enumerate_flows(z2, 3)
    assert [f.codes for f in flows] == [[0, 0, 0], [0, 1, 1], [1, 0, 1], [1, 1, 0]]
    assert flows[1].vertex_embedding() == [1, 0, 0, 1, 0, 1]
    assert len(flowcert.enumerate_flows(z3, 4)) == 27

    m1 = flowcert.FlowMultiset(z2, 6, [[1, 1, 1, 1, 1, 1], [0, 0, 0, 0, 0, 0], [1, 1, 1, 1, 0, 0]])
    m2 = flowcert.FlowMultiset(z2, 6, [[0, 1, 0, 1, 0, 0], [1, 1, 1, 0, 1, 0], [1, 0, 1, 1, 0, 1]])
    assert flowcert.compatible(m1, m2) and m1.signature() == m2.signature()
    path = flowcert.find_move_path(m1, m2, 2)
    assert path is not None and len(path) == 3
    assert path[0] == m1 and path[-1] == m2
    assert all(step.compatible(m1) for step in path)
    assert m1 in m1.fiber()

    f = flowcert.Flow(z3, [1, 2, 0, 0])
    g = flowcert.Flow(z3, [2, 1, 1, 2])
    subset = flowcert.find_exchange_subset(f, g, {0, 1})
    f2, g2 = flowcert.exchange_pair(f, g, set(subset))
    before = flowcert.FlowMultiset(z3, 4, [f.codes, g.codes])
    after = flowcert.FlowMultiset(z3, 4, [f2.codes, g2.codes])
    assert before.compatible(after)

    report = flowcert.certify(z2, 4, 4, 2, threads=2)
    assert report["verdict"] == "verified"
    assert report["statement"].startswith("verified up to degree 4 for n = 4")

    search = flowcert.find_indispensable(z3, 3, 2, 4)
    witness = search["witness"]
    assert witness["degree"] == 3
    a = flowcert.FlowMultiset(z3, 3, witness["first"])
    b = flowcert.FlowMultiset(z3, 3, witness["second"])
    assert flowcert.find_move_path(a, b, 2) is None
    assert flowcert.find_move_path(a, b, 3) is not None

    try:
        flowcert.Flow(z3, [1, 1, 0])
    except flowcert.FlowcertError as e:
        assert str(e).startswith("not-a-flow")
    else:
        raise AssertionError("expected FlowcertError")

    print("flowcert python smoke test: ok")


if __name__ == "__main__":
    main()
