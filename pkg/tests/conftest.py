from hypothesis import settings

# compiled kernels and a shared CPU make first-call timings noisy
settings.register_profile("default", deadline=None)
settings.load_profile("default")

ACCEPTANCE_LINES = []


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: long-running acceptance checks")


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
