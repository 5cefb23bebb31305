import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent))

_RESULTS = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n, text): acceptance criterion number and summary")


def pytest_runtest_makereport(item, call):
    mark = item.get_closest_marker("criterion")
    if mark is None or call.when != "call":
        return
    _RESULTS[mark.kwargs["n"]] = (mark.kwargs["text"], call.excinfo is None,
                                  None if call.excinfo is None else str(call.excinfo.value).splitlines()[0])


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_RESULTS):
        text, ok, why = _RESULTS[n]
        line = f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {text}"
        if not ok:
            line += f"\n               {why}"
        terminalreporter.write_line(line)
