"""One line per acceptance criterion, at the stated tolerances."""

import pytest

from freefall.cli import main


@pytest.mark.slow
@pytest.mark.parametrize("number", range(1, 11))
def test_criterion(suite, number, capsys):
    result = suite.run(number)
    with capsys.disabled():
        print("\n" + result.line())
    assert result.passed, result.line()


def test_verify_command_reuses_suite(monkeypatch, suite, capsys):
    # the full suite runs above; here only the exit-code plumbing is checked
    import freefall.cli as cli

    monkeypatch.setattr(cli, "Acceptance", lambda **_: suite)
    code = main(["verify", "--jobs", "1"])
    out = capsys.readouterr().out
    assert "10/10 criteria passed" in out
    assert code == 0
