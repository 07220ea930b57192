import pytest

CRITERIA = {
    1: "trivial-kernel identities",
    2: "k=2 algebraic identity",
    3: "Fourier-symbol oracle",
    4: "dilation law",
    5: "local bound scan",
    6: "gradient-integral closed form",
    7: "i11 scaling identity",
    8: "equivalence band (translation, dilation, refinement)",
    9: "k-consistency of the binomial ratios",
    10: "CLI reproducibility",
}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n): acceptance criterion number")


def _criterion(item):
    mark = item.get_closest_marker("criterion")
    return mark.args[0] if mark else None


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    num = _criterion(item)
    if num is not None:
        rep.user_properties.append(("criterion", num))


def pytest_terminal_summary(terminalreporter):
    results = {}
    for key in ("passed", "failed", "error"):
        for rep in terminalreporter.stats.get(key, []):
            nums = [v for k, v in getattr(rep, "user_properties", []) if k == "criterion"]
            for num in nums:
                ok = rep.passed if rep.when == "call" else not rep.failed
                results[num] = results.get(num, True) and ok
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(results):
        status = "PASS" if results[num] else "FAIL"
        terminalreporter.write_line(f"criterion {num:2d} [{status}] {CRITERIA.get(num, '')}")
