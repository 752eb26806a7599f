from collections import OrderedDict

import pytest

# criterion id -> list of (check name, passed, detail)
ACCEPTANCE = OrderedDict()

CRITERIA = OrderedDict([
    ("AC1", "pH 8 calibration from replicate means"),
    ("AC2", "interferent slopes (Cl direct, SO4/NO3 after fill-in)"),
    ("AC3", "detection limits and intermediate currents"),
    ("AC4", "two-way ANOVA tables from raw fixtures"),
    ("AC5", "one-sample t tests"),
    ("AC6", "wastewater inversion with rounded coefficients"),
    ("AC7", "property suites"),
    ("AC8", "raw fixtures re-aggregate to averaged tables"),
])


@pytest.fixture
def record(request):
    """record(criterion, passed, detail) then assert."""
    def _record(criterion, passed, detail=""):
        ACCEPTANCE.setdefault(criterion, []).append((request.node.name, bool(passed), detail))
        assert passed, f"{criterion} {request.node.name}: {detail}"
    return _record


@pytest.fixture(autouse=True)
def _isolated_data_dir(monkeypatch):
    monkeypatch.delenv("VOLTACAL_DATA_DIR", raising=False)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for cid, title in CRITERIA.items():
        checks = ACCEPTANCE.get(cid)
        if not checks:
            tr.write_line(f"{cid} NOT RUN  {title}")
            continue
        failed = [c for c in checks if not c[1]]
        status = "PASS" if not failed else "FAIL"
        tr.write_line(f"{cid} {status}  {title} ({len(checks) - len(failed)}/{len(checks)} checks)")
        for name, _, detail in failed:
            tr.write_line(f"      failed: {name}: {detail}")
