"""Acceptance criteria 1-14, each at its stated tolerance.

Every criterion prints one ``[PASS]`` or ``[FAIL]`` line, shown even when
pytest captures output.  Run alone with ``pytest tests/test_acceptance.py -v``.
"""
import pytest

from ifsmap.verify import CRITERIA, VerifyConfig, run_one

CONFIG = VerifyConfig()


@pytest.mark.parametrize("number", [c[0] for c in CRITERIA], ids=lambda n: f"criterion_{n:02d}")
def test_criterion(number, capsys):
    result = run_one(number, CONFIG)
    with capsys.disabled():
        print("\n" + result.line())
    assert result.passed, result.summary
