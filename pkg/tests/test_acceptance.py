"""Acceptance gate: every criterion at its stated tolerance and time budget.

Each test prints one pass/fail line.  The seed is fixed; all sampling flows
through platform-stable generators, so reruns are bit-reproducible.
"""

from polyball_lab import suites

SEED = 20260810


def report(name, ok, seconds, budget, detail=""):
    status = "PASS" if ok else "FAIL"
    print(f"[{status}] {name}: {seconds:.3f}s (budget {budget}s) {detail}")


def run_records(records, budget, name):
    elapsed = sum(r.seconds for r in records)
    ok = all(r.passed for r in records if r.passed is not None)
    detail = "; ".join(
        f"{r.name}={r.residual:.2e}" for r in records if r.residual is not None
    )
    report(name, ok and elapsed < budget, elapsed, budget, detail)
    assert ok, [r.to_json() for r in records if r.passed is False]
    assert elapsed < budget, f"{name} took {elapsed:.2f}s over budget {budget}s"
    return records


def test_criterion_1_interior_relations():
    records = suites.suite_interior_relations(D=4)
    run_records(records, 1.0, "1 interior relations (cfg_a, cfg_b, D=4)")
    for r in records:
        assert r.residual == 0.0  # exact phase-integer equality, zero failures


def test_criterion_2_confluence_and_faithfulness():
    records = suites.suite_rewrite_confluence(SEED, n_words=500, max_len=12, D=4)
    run_records(records, 5.0, "2 rewrite confluence + faithfulness (500 words)")
    for r in records:
        assert r.residual == 0.0


def test_criterion_3_uniqueness_oracle():
    records = suites.suite_uniqueness_oracle(SEED, n_polys=500)
    run_records(records, 5.0, "3 uniqueness oracle (500 polynomials)")
    for r in records:
        assert r.residual == 0.0  # zero false positives or negatives


def test_criterion_4_norm_benchmark():
    records = suites.suite_norm_benchmark()
    run_records(records, 0.1, "4 truncated norm = 2cos(pi/12) at D=10")
    assert records[0].residual <= 1e-12


def test_criterion_5_berezin_suite():
    records = suites.suite_berezin(SEED, n_tuples=100)
    run_records(records, 10.0, "5 Berezin suite (100 nilpotent members)")
    for r in records:
        assert r.residual <= 1e-10


def test_criterion_6_von_neumann():
    records = suites.suite_vn(SEED, n_pairs=200)
    run_records(records, 30.0, "6 von Neumann inequality (200 pairs)")
    assert records[0].residual == 0.0  # zero violations at 1e-9


def test_criterion_7_wold_roundtrip():
    records = suites.suite_wold_roundtrip(SEED, n_specs=100, moduli=(2, 3, 4, 6))
    run_records(records, 30.0, "7 Wold round trip (100 specs)")
    dims, proj = records
    assert dims.residual == 0.0  # recovered dimensions exactly
    assert proj.residual <= 1e-10


def test_criterion_8_beurling_factorization():
    records = suites.suite_beurling(SEED, n_cases=50, D=4)
    run_records(records, 20.0, "8 Beurling factorization (50 planted ranges)")
    factor, multi, rejected = records
    assert factor.residual <= 1e-8
    assert multi.residual <= 1e-8
    assert rejected.passed  # the planted negative defect is refused


def test_criterion_9_dilation_moments():
    records = suites.suite_dilation_moments(SEED, n_cases=50, M=3)
    run_records(records, 10.0, "9 dilation moments (50 members, |m| <= 3)")
    assert records[0].residual <= 1e-9


def test_criterion_10_rank_one_decay():
    records = suites.suite_rank_one(D=12)
    run_records(records, 1.0, "10 rank-one approximation decay (D=12)")
    gaps = records[0].details["gaps"]
    assert all(b <= a + 1e-15 for a, b in zip(gaps, gaps[1:]))  # monotone
    assert gaps[12] <= 1e-3
