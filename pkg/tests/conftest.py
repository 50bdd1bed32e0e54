import re

_RESULTS = {}


def pytest_runtest_makereport(item, call):
    m = re.match(r"test_ac(\d+)_", item.name)
    if not m or call.when not in ("setup", "call"):
        return
    key = int(m.group(1))
    ok = call.excinfo is None
    doc = (item.function.__doc__ or item.name).strip().splitlines()[0]
    prev = _RESULTS.get(key, (True, doc))
    _RESULTS[key] = (prev[0] and ok, doc)


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(_RESULTS):
        ok, doc = _RESULTS[key]
        terminalreporter.write_line(f"AC{key} {'PASS' if ok else 'FAIL'}  {doc}")
