"""Smoke test for the pytfsm extension module.

Build and install first:
    cd crates/python && maturin build --release -o dist && pip install dist/pytfsm-*.whl
"""

from fractions import Fraction

import pytfsm
from pytfsm import Machine


def main() -> None:
    m1 = Machine.fixture("m1")
    m2 = Machine.fixture("m2")
    assert m1.kind == "timeout" and m2.kind == "guarded"
    assert m1.validate()["ok"]

    assert m1.simulate([("i", "5/2")]) == [("o1", "5/2")]
    assert m2.simulate([("i", Fraction(5, 2))]) == [("o2", "5/2")]
    try:
        m1.simulate([("i", 2.5)])
    except ValueError:
        pass
    else:
        raise AssertionError("float timestamps must be rejected")

    fig1b = Machine.fixture("fig1a").abstraction(n=1)
    assert len(fig1b["states"]) == 2 and len(fig1b["transitions"]) == 8

    verdict = pytfsm.equivalent(m1, m2)
    assert not verdict["equivalent"]
    cx = verdict["counterexample"]
    word = [(e["symbol"], e["timestamp"]) for e in cx["word"]]
    k = cx["divergence"]
    assert m1.simulate(word)[k][0] != m2.simulate(word)[k][0]

    try:
        m1.convert("guarded")
    except pytfsm.TfsmError as e:
        assert "q0" in str(e)
    else:
        raise AssertionError("m1 has a timeout cycle")

    fig2a = Machine.fixture("fig2a")
    embedded = fig2a.embed()
    assert embedded.kind == "general"
    assert pytfsm.equivalent(fig2a, embedded)["equivalent"]
    assert Machine.from_json(m2.to_json()) == m2

    print("pytfsm smoke test: ok")


if __name__ == "__main__":
    main()
