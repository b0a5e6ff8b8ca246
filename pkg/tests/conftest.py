import pytest


@pytest.fixture
def criterion(request):
    """Report an acceptance criterion with a line that always reaches the
    terminal, then assert it."""

    def _report(name, ok, detail):
        line = f"{name}: {'PASS' if ok else 'FAIL'} ({detail})"
        reporter = request.config.pluginmanager.get_plugin("terminalreporter")
        if reporter is not None:
            reporter.ensure_newline()
            reporter.write_line(line)
        else:
            print(line)
        assert ok, line

    return _report
