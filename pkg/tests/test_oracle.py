import math

import pytest

from rnsens import oracle
from rnsens.errors import InvalidRate

NAMES = [(), ("th1",), ("th2",), ("th1", "th1"), ("th1", "th2"), ("th2", "th2")]


def test_mean_value():
    assert oracle.linear_bd_mean(0, 10, 1, 1) == pytest.approx(6.32120558829, abs=1e-10)


def test_mean_limits():
    assert oracle.linear_bd_mean(7, 10, 1, 0.0) == 7
    assert abs(oracle.linear_bd_mean(0, 10, 1, 50) - 10) < 1e-10


def test_invalid_rate():
    with pytest.raises(InvalidRate):
        oracle.linear_bd_mean(0, 10, 0.0, 1)
    with pytest.raises(InvalidRate):
        oracle.linear_bd_sens(0, 10, -1.0, 1, ["th1"])
    assert oracle.immigration_mean(2, 10, 1.5) == 17


@pytest.mark.parametrize("wrt,value", [
    (("th1",), 0.632120558829),
    (("th2",), -2.64241117657),
    (("th1", "th2"), -0.264241117657),
    (("th2", "th2"), 1.60602794143),
    (("th1", "th1"), 0.0),
])
def test_sens_values(wrt, value):
    assert oracle.linear_bd_sens(0, 10, 1, 1, wrt) == pytest.approx(value, abs=1e-10)


def test_th2_th2_closed_form():
    assert oracle.linear_bd_sens(0, 10, 1, 1, ["th2", "th2"]) == pytest.approx(
        10 * (2 - 5 * math.exp(-1)), rel=1e-14)


def test_mixed_symmetry():
    for x0, a, b, t in [(0, 10, 1, 1), (3, 2.5, 0.7, 2.0)]:
        assert (oracle.linear_bd_sens(x0, a, b, t, ["th1", "th2"])
                == oracle.linear_bd_sens(x0, a, b, t, ["th2", "th1"]))


@pytest.mark.parametrize("x0,a,b,t", [(0, 10, 1, 1), (3, 2.5, 0.7, 2.0), (12, 0.4, 3.0, 0.3)])
def test_partials_match_central_differences(x0, a, b, t):
    h = 1e-5

    def m(a_, b_):
        return oracle.linear_bd_mean(x0, a_, b_, t)

    def d(name, a_, b_):
        return oracle.linear_bd_sens(x0, a_, b_, t, [name])

    fd = {
        ("th1",): (m(a + h, b) - m(a - h, b)) / (2 * h),
        ("th2",): (m(a, b + h) - m(a, b - h)) / (2 * h),
        ("th1", "th2"): (d("th1", a, b + h) - d("th1", a, b - h)) / (2 * h),
        ("th2", "th2"): (d("th2", a, b + h) - d("th2", a, b - h)) / (2 * h),
    }
    for wrt, approx in fd.items():
        exact = oracle.linear_bd_sens(x0, a, b, t, wrt)
        assert exact == pytest.approx(approx, rel=1e-6, abs=1e-9), wrt


def test_unknown_name():
    with pytest.raises(ValueError):
        oracle.linear_bd_sens(0, 10, 1, 1, ["th3"])


def bd_mean(th):
    return oracle.linear_bd_mean(0, th[0], th[1], 1.0)


def test_fd_on_oracle_values():
    assert oracle.fd_on_oracle(0, 1, 0.1, bd_mean, (10, 1)) == pytest.approx(
        -0.256397258268, abs=1e-9)
    exact = oracle.linear_bd_sens(0, 10, 1, 1, ["th1", "th2"])
    assert abs(oracle.fd_on_oracle(0, 1, 0.01, bd_mean, (10, 1)) - exact) < 1e-3
    assert abs(oracle.fd_on_oracle(0, 1, 1e-4, bd_mean, (10, 1)) - exact) < 1e-4


def test_fd_on_linear_direction_is_zero():
    for eps in (0.5, 0.1, 0.01):
        assert abs(oracle.fd_on_oracle(0, 0, eps, bd_mean, (10, 1))) < 1e-8 / eps**2


def test_fd_on_oracle_needs_positive_eps():
    with pytest.raises(ValueError):
        oracle.fd_on_oracle(0, 1, 0.0, bd_mean, (10, 1))


def test_product_oracle():
    assert oracle.product_bd_mean(0, (2, 5, 1), 1) == oracle.linear_bd_mean(0, 10, 1, 1)
    h = 1e-4

    def m(a, b):
        return oracle.product_bd_mean(0, (a, b, 1.0), 1.0)

    fd = (m(2 + h, 5 + h) - m(2 + h, 5 - h) - m(2 - h, 5 + h) + m(2 - h, 5 - h)) / (4 * h * h)
    assert oracle.product_bd_mixed12((2, 5, 1), 1) == pytest.approx(fd, rel=1e-6)
    assert oracle.product_bd_mixed12((2, 5, 1), 1) == pytest.approx(1 - math.exp(-1))
