"""Full-scale acceptance run: every criterion at its stated tolerance and runtime budget.

One PASS/FAIL line per criterion is written to the terminal even under output capture.
"""

import pytest

from gaussmax.checks import run_all

CRITERIA = {
    1: "kernel stochasticity and thermal covariance",
    2: "amplifier/attenuator duality",
    3: "log-Sobolev margin",
    4: "F_a bound",
    5: "p->p closed form",
    6: "Gaussian maximizer vs brute force",
    7: "shooting z0 vs scan z_star",
    8: "KKT stationarity and ratio monotonicity",
    9: "q < p divergence slope",
    10: "minimum output entropy",
    11: "composite bound",
    12: "derivative identities",
}


@pytest.fixture(scope="module")
def results():
    return {r.number: r for r in run_all(scale=1.0, seed=42)}


@pytest.mark.parametrize("number", sorted(CRITERIA), ids=[f"{k:02d}-{v.replace(' ', '_')}" for k, v in sorted(CRITERIA.items())])
def test_criterion(number, results, capsys):
    r = results[number]
    with capsys.disabled():
        scalars = {k: v for k, v in r.measured.items() if not isinstance(v, (list, dict))}
        print(f"\n{r.line()}  {scalars}")
    assert r.passed, f"{r.line()} measured={r.measured}"
