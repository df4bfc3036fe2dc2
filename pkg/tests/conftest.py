import os

from hypothesis import HealthCheck, settings

settings.register_profile(
    "default",
    deadline=None,
    max_examples=40,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

#: (criterion number or tag, title, passed, detail) appended by the acceptance tests.
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    # numbered criteria first, then the qualitative orderings
    order = lambda r: (isinstance(r[0], str), r[0] if isinstance(r[0], int) else 0, r[1])  # noqa: E731
    for num, title, ok, detail in sorted(ACCEPTANCE_LINES, key=order):
        label = f"criterion {num:>2}" if isinstance(num, int) else str(num)
        terminalreporter.write_line(f"[{'PASS' if ok else 'FAIL'}] {label}: {title} | {detail}")
