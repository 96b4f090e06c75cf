import pytest

from rnsens import backend, model


class FixedStream:
    """Stream stand-in returning preset uniforms."""

    def __init__(self, values):
        self.values = list(values)

    def uniform(self):
        return self.values.pop(0)


@pytest.fixture
def bd():
    return model.birth_death()


@pytest.fixture
def prod():
    return model.product_birth_death()


@pytest.fixture(params=["python", "cython"])
def backend_name(request):
    if request.param == "cython" and not backend.COMPILED:
        pytest.skip("compiled core not built")
    return request.param


def sigma_check(res, target, k=3.0):
    assert abs(res.mean - target) <= k * res.stderr, (
        f"mean {res.mean:.6f} vs {target:.6f}: {abs(res.mean - target) / res.stderr:.2f} stderr"
    )


def pytest_terminal_summary(terminalreporter):
    """One PASS/FAIL line per acceptance criterion."""
    lines = []
    for outcome in ("passed", "failed"):
        for rep in terminalreporter.stats.get(outcome, []):
            if rep.when != "call" or "test_acceptance" not in rep.nodeid:
                continue
            props = dict(rep.user_properties)
            if "criterion" not in props:
                continue
            word = "PASS" if outcome == "passed" else "FAIL"
            lines.append((props["criterion"], f"{word}  {props['criterion']}: {props.get('detail', '')}"))
    if lines:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(lines, key=lambda p: int(p[0].split()[0].rstrip("."))):
            terminalreporter.write_line(line)
