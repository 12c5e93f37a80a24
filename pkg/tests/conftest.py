from hypothesis import settings

from helpers import ACCEPTANCE_LINES

settings.register_profile("suite", deadline=None, max_examples=60)
settings.load_profile("suite")


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    # acceptance verdicts stay visible without -s, one line per criterion
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
