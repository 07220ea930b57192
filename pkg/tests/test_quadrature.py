import math

import numpy as np
import pytest

from ballsquare.errors import ConvergenceError
from ballsquare.quadrature import adaptive_cubature


def test_polynomial_is_exact_on_one_cell():
    res = adaptive_cubature(lambda p: p[:, 0] ** 6 * p[:, 1] ** 3, 2, rtol=1e-14)
    assert res.value == pytest.approx(1 / 28, rel=1e-14)
    assert res.cells == 1


def test_smooth_3d():
    res = adaptive_cubature(lambda p: np.exp(p.sum(axis=1)), 3, rtol=1e-12)
    assert res.value == pytest.approx((math.e - 1) ** 3, rel=1e-12)
    assert res.achieved <= 1e-12


def test_endpoint_singularity():
    res = adaptive_cubature(lambda p: p[:, 0] ** -0.5 + 0 * p[:, 1], 2, rtol=1e-8)
    # the companion-rule estimate is heuristic next to an unresolved singularity
    assert res.value == pytest.approx(2.0, rel=1e-7)


def test_anisotropic_refinement_on_a_line_kink():
    # |x - 1/3| has a kink along a line; refinement should follow one axis only
    f = lambda p: np.abs(p[:, 0] - 1 / 3) * (1 + p[:, 1])
    res = adaptive_cubature(f, 2, rtol=1e-10)
    assert res.value == pytest.approx(1.5 * 5 / 18, rel=1e-10)
    cut = adaptive_cubature(f, 2, rtol=1e-10, cuts=[[1 / 3], None])
    assert cut.cells < res.cells


def test_budget_exhaustion_reports_progress():
    with pytest.raises(ConvergenceError) as info:
        adaptive_cubature(lambda p: p[:, 0] ** -0.9 + 0 * p[:, 1], 2, rtol=1e-12, max_cells=50)
    assert info.value.achieved > 1e-12


def test_zero_integrand():
    res = adaptive_cubature(lambda p: np.zeros(len(p)), 2, rtol=1e-10)
    assert res.value == 0.0 and res.achieved == 0.0
