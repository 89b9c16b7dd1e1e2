import math

import numpy as np
import pytest

from bernoulli_ensembles.quadrature import integrate, integrate_2d


def test_polynomial_exact():
    # x^6/6 - x^3 from -1 to 2
    assert integrate(lambda x: x**5 - 3 * x**2, -1, 2) == pytest.approx((64 / 6 - 8) - (1 / 6 + 1), abs=1e-12)
    assert integrate(lambda x: x**3, 0, 1) == pytest.approx(0.25, abs=1e-15)


def test_smooth_functions():
    assert integrate(np.exp, 0, 1) == pytest.approx(math.e - 1, abs=1e-14)
    assert integrate(np.sin, 0, math.pi) == pytest.approx(2.0, abs=1e-14)


def test_sharp_logistic():
    # steep transition forces subdivision
    val = integrate(lambda x: 1 / (1 + np.exp(-200 * x)), -1, 1)
    assert val == pytest.approx(1.0, abs=1e-12)


def test_reversed_and_empty():
    assert integrate(np.exp, 1, 0) == pytest.approx(-(math.e - 1), abs=1e-14)
    assert integrate(np.exp, 0.3, 0.3) == 0.0


def test_two_dimensional():
    assert integrate_2d(lambda x, y: x * y * y, (0, 1), (0, 2)) == pytest.approx(0.5 * 8 / 3, abs=1e-10)
