import time

# Offline acceptance budget: the whole suite must finish well inside two
# minutes. Enforced here so a slow regression fails the run, not just a
# stopwatch reading in CI logs.
SUITE_BUDGET_SECONDS = 120.0

_suite_started = {}


def pytest_sessionstart(session):
    _suite_started["t"] = time.monotonic()


def pytest_sessionfinish(session, exitstatus):
    elapsed = time.monotonic() - _suite_started.get("t", time.monotonic())
    ok = elapsed < SUITE_BUDGET_SECONDS
    print(
        f"\nACCEPTANCE {'PASS' if ok else 'FAIL'}: "
        f"offline suite wall time {elapsed:.1f}s (budget {SUITE_BUDGET_SECONDS:.0f}s)"
    )
    if not ok and exitstatus == 0:
        session.exitstatus = 1
