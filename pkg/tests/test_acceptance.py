"""Acceptance criteria, one check per criterion.

Run with pytest (a PASS/FAIL line per criterion is printed in the terminal
summary) or directly: ``python tests/test_acceptance.py``.
"""

import contextlib
import io
import subprocess
import sys
from fractions import Fraction
from pathlib import Path

import mpmath
import pytest

from dst_protected import asymptotics, cli, dst_sim, exact_sequence
from dst_protected.qseries import PrecisionConfig, fixed, verify_euler_identity

FIGURE1 = Path(__file__).parent / "data" / "figure1.txt"
SEED = 20110301
RESULTS = {}


def c01_initial_values():
    values = exact_sequence.l_sequence_recursion(3).values
    ok = values == (0, 0, 0, Fraction(1, 2))
    return ok, f"l_0..l_3 = {[str(v) for v in values]}"


def c02_route_equivalence():
    N = 200
    rec = exact_sequence.l_sequence_recursion(N)
    m = exact_sequence.m_sequence_recursion(N)
    bad = [n for n in range(N + 1) if exact_sequence.l_from_m(m, n) != rec[n]]
    bad += [n for n in range(1, N + 1) if exact_sequence.l_closed_form(n) != rec[n]]
    bad += [n for n in range(2, N + 1) if exact_sequence.m_closed_form(n) != m[n]]
    return not bad, f"mismatches at {sorted(set(bad))}" if bad else "all routes equal for N <= 200"


def c03_spot_value():
    value = exact_sequence.l_sequence_recursion(500)[500]
    shown = fixed(value / 500, 6)
    return shown == "0.305710", f"l_500/500 = {shown}"


def c04_constant():
    shown = fixed(asymptotics.protected_constant(PrecisionConfig(23)).value, 23)
    return shown == "0.30707981393605921828549", f"C = {shown}"


def c05_b0_limit():
    cfg = PrecisionConfig(30)
    ctx = cfg.context()
    b0 = asymptotics.b_coefficient(0, cfg)
    closed_ok = abs(b0 - (ctx.mpf(37) / (12 * ctx.ln2) - 4)) < ctx.mpf(10) ** -30
    errors = [abs(asymptotics.b_closed(1 - ctx.mpf(10) ** -e, cfg) - b0) for e in (3, 4, 5)]
    shrinking = errors[0] > errors[1] > errors[2]
    # six agreeing digits: |error| below 1e-6 at the closest point
    final_ok = errors[-1] < 1e-6
    detail = "errors " + ", ".join(mpmath.nstr(e, 4) for e in errors)
    return closed_ok and shrinking and final_ok, detail


def c06_brute_force_oracle():
    l = exact_sequence.l_sequence_recursion(8)
    bad = [n for n in range(9) if dst_sim.exact_expectation_by_enumeration(n, 2) != l[n]]
    return not bad, "enumeration equals l_n for n <= 8" if not bad else f"mismatch at {bad}"


def c07_figure1():
    tree = dst_sim.build_from_strings(dst_sim.read_strings(FIGURE1))
    shape_ok = tree.render() == "A(B(C,E(F,-)),D(-,G(I,H)))"
    labels = {n.label for n in dst_sim.k_protected_nodes(tree, 2)}
    counts = (dst_sim.count_k_protected(tree, 2), dst_sim.count_k_protected(tree, 1), dst_sim.count_leaves(tree))
    ok = shape_ok and labels == {"A", "D"} and counts == (2, 5, 4)
    return ok, f"{tree.render()} protected2={sorted(labels)} counts={counts}"


def c08_monte_carlo_500():
    exact = float(exact_sequence.l_values([500])[500])
    result = dst_sim.monte_carlo(500, 10**5, SEED, dst_sim.Statistic.protected(2))
    z = (result.mean - exact) / result.std_error
    return abs(z) <= 3, f"mean {result.mean:.4f} vs l_500 {exact:.4f}, z = {z:.2f}"


def c09_endnodes():
    beta = 0.372046812
    n = 2000
    result = dst_sim.monte_carlo(n, 10**4, SEED, dst_sim.Statistic.leaves())
    ratio = result.mean / n
    tol = max(3 * result.std_error / n, 0.002)
    return abs(ratio - beta) <= tol, f"leaf fraction {ratio:.6f}, |diff| {abs(ratio - beta):.2e} <= {tol:.2e}"


def c10_residual_envelope():
    rows = asymptotics.residual_table([2**j for j in range(5, 12)], PrecisionConfig(20))
    A = asymptotics.residual_envelope(rows)
    within = all(abs(float(r.residual)) <= A / r.N + 1e-4 + 1e-15 for r in rows)
    return within and A <= 2, f"A = {A:.4f}"


def c11_euler_identity():
    cfg = PrecisionConfig(25)
    residuals = {t: verify_euler_identity(t, 40, cfg) for t in (-1, Fraction(1, 2), 1)}
    ok = all(r < mpmath.mpf(10) ** -20 for r in residuals.values())
    return ok, "residuals " + ", ".join(f"t={t}: {mpmath.nstr(r, 3)}" for t, r in residuals.items())


def c12_determinism():
    args = ["simulate", "--n", "500", "--trials", "20000", "--seed", str(SEED)]
    outputs = []
    for workers in ("1", "4"):
        buf = io.StringIO()
        with contextlib.redirect_stdout(buf):
            cli.main(args + ["--workers", workers])
        outputs.append(buf.getvalue())
    proc = subprocess.run(
        [sys.executable, "-m", "dst_protected", *args, "--workers", "2"], capture_output=True, text=True, check=True
    )
    outputs.append(proc.stdout)
    return len(set(outputs)) == 1, f"{len(outputs)} runs, {len(set(outputs))} distinct outputs"


CRITERIA = [
    ("1 initial values", c01_initial_values),
    ("2 route equivalence N<=200", c02_route_equivalence),
    ("3 l_500/500 = 0.305710", c03_spot_value),
    ("4 constant to 23 digits", c04_constant),
    ("5 b_0 limit", c05_b0_limit),
    ("6 brute-force oracle n<=8", c06_brute_force_oracle),
    ("7 Figure 1 reconstruction", c07_figure1),
    ("8 Monte Carlo n=500", c08_monte_carlo_500),
    ("9 endnode fraction", c09_endnodes),
    ("10 residual envelope", c10_residual_envelope),
    ("11 Euler identity", c11_euler_identity),
    ("12 determinism", c12_determinism),
]


@pytest.mark.parametrize("name, check", CRITERIA, ids=[name for name, _ in CRITERIA])
def test_criterion(name, check):
    ok, detail = check()
    RESULTS[name] = (ok, detail)
    assert ok, detail


if __name__ == "__main__":
    failures = 0
    for name, check in CRITERIA:
        ok, detail = check()
        failures += not ok
        print(f"[{'PASS' if ok else 'FAIL'}] criterion {name}: {detail}")
    sys.exit(1 if failures else 0)
