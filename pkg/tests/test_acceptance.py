"""One test per acceptance criterion, at the full stated ranges.

Each test records a PASS/FAIL line; the lines are printed together at the end
of the pytest run (and directly when this file is run as a script).
"""

import time

from treehash.verify import (
    check_bounded,
    check_digest,
    check_h2,
    check_leaf_arity,
    check_oracle,
    check_rate,
    check_speedup,
    check_t1,
    check_unrestricted,
)

RESULTS: list[str] = []


def record(label, results, elapsed, extra=""):
    ok = all(r.passed for r in results)
    cases = sum(r.checked for r in results)
    line = f"{'PASS' if ok else 'FAIL'}  {label}: {cases} cases in {elapsed:.1f}s"
    if extra:
        line += f"; {extra}"
    for r in results:
        if not r.passed:
            line += f"\n        {r.name} counterexample: {r.counterexample}"
        for note in r.notes:
            line += f"\n        {r.name}: {note}"
    RESULTS.append(line)
    print(line)
    return ok


def timed(fn, *args, **kwargs):
    start = time.perf_counter()
    res = fn(*args, **kwargs)
    return res, time.perf_counter() - start


def test_criterion_1_unrestricted_sweep():
    res, elapsed = timed(check_unrestricted, "unrestricted", (1, 2, 3, 4), 2, 2048)
    ok = record("criterion 1 (l<=2048, d=1..4, time and processors)", [res], elapsed, "target < 60s")
    assert ok
    assert elapsed < 60


def test_criterion_2_oracle_binary():
    start = time.perf_counter()
    res = check_oracle(l_min=1, l_max=24, ds=(1,))
    elapsed = time.perf_counter() - start
    ok = record("criterion 2, d=1 part (l<=24, enumeration l<=8, 4 blocks -> 3)", [res], elapsed)
    assert ok


def test_criterion_2_oracle_wide_blocks():
    # the brute force finds trees faster than ceil(log_{d+1}(l/2)) + 2 for
    # d >= 2; this is reported, not hidden
    res, elapsed = timed(check_oracle, l_min=2, l_max=18, ds=(2, 3))
    ok = record("criterion 2, d=2,3 part (l<=18)", [res], elapsed, "target < 300s")
    assert elapsed < 300
    assert ok, res.summary()


def test_criterion_3_height2():
    start = time.perf_counter()
    results = [check_h2(2, 4096), check_t1(2, 4096, search_max=4096)]
    elapsed = time.perf_counter() - start
    assert record("criterion 3 (height-2 l<=4096, trimmed plan vs exhaustive search, l=22)", results, elapsed)


def test_criterion_4_leaf_arity():
    res, elapsed = timed(check_leaf_arity, "leaf arity", (1, 2, 3), 2, 10_000)
    assert record("criterion 4 (l<=10^4, d=1..3, b=3 intervals and makespan)", [res], elapsed)


def test_criterion_5_bounded():
    start = time.perf_counter()
    results = [check_bounded("bounded d=1", (1,), 2, 1024, 64), check_bounded("bounded d=2,3", (2, 3), 2, 1024, 64)]
    elapsed = time.perf_counter() - start
    assert record("criterion 5 (l<=1024, P<=64: d=1 exact, d=2,3 bound, split)", results, elapsed)


def test_criterion_6_digest_coherence():
    res, elapsed = timed(check_digest, 200, 2024, 0.0002)
    assert record("criterion 6 (200 random cases, three modes, rounds, call counts)", [res], elapsed)


def test_criterion_7_rate():
    res, elapsed = timed(check_rate, 64, (1, 2, 3, 4))
    assert record("criterion 7 (s<=64 blocks, 4 type codes, 16-entry table)", [res], elapsed)


def test_criterion_8_speedup():
    res, elapsed = timed(check_speedup, 729, 1, 1.6)
    assert record("criterion 8 (l=729: 18 vs 11, ratio >= 1.6, large-l limit)", [res], elapsed)


if __name__ == "__main__":
    import sys

    failed = 0
    for name, fn in list(globals().items()):
        if name.startswith("test_criterion"):
            try:
                fn()
            except AssertionError:
                failed += 1
    print("\n".join(["", "acceptance summary:"] + RESULTS))
    sys.exit(1 if failed else 0)
