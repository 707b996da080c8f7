"""One test per acceptance criterion, each at its stated tolerance.

All suites run once under the default configuration; each test then asserts
that every report tagged with its criterion passed.  Criteria that are known
not to hold numerically are left failing rather than relaxed.
"""
import pytest

from lamefrac.checks import run_suite
from lamefrac.config import default_config

from conftest import ACCEPTANCE_LINES

TITLES = {
    1: "Helmholtz splitting of the symbol",
    2: "fractional power: exponent law, realness, subordination",
    3: "Macdonald function values, recurrences, small-argument limit",
    4: "extension multiplier: closed form against heat-kernel quadrature",
    5: "Dirichlet trace convergence",
    6: "Neumann trace convergence",
    7: "energy bounds of the extension",
    8: "reduced system residual for U*",
    9: "potential matrices commute; closed-form exponential",
    10: "W-transform Neumann decay and equation ratio",
    11: "grid pipelines agree with the single-frequency multipliers",
    12: "non-degeneracy and Legendre-Hadamard bound",
}


@pytest.fixture(scope="module")
def reports():
    return run_suite(default_config(), "all").reports


def _describe(r):
    bound = r.target if r.comparator in ("within", "eq") else r.tolerance
    s = f" s={r.s:g}" if r.s is not None else ""
    return f"{r.check}{s} value={r.value:.4g} {r.comparator} {bound}"


@pytest.mark.parametrize("criterion", sorted(TITLES))
def test_criterion(reports, criterion):
    mine = [r for r in reports if r.criterion == criterion]
    assert mine, f"no checks registered for criterion {criterion}"
    failed = [r for r in mine if r.status == "fail"]
    ran = [r for r in mine if r.status != "skip"]
    verdict = "FAIL" if failed or not ran else "PASS"
    line = f"{verdict} criterion {criterion:2d}: {TITLES[criterion]} ({len(ran)} checks"
    line += f", {len(failed)} failed)" if failed else ")"
    if failed:
        line += " -- " + "; ".join(_describe(r) for r in failed)
    ACCEPTANCE_LINES[criterion] = line
    print(line)
    assert not failed, "\n".join(_describe(r) for r in failed)
    assert ran
