import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gpelab.errors import GridMismatch, ZeroField
from gpelab.grid import (
    Grid2D,
    ScalarField,
    apply_laplacian,
    gn_quotient,
    gradient_sq_integral,
    integrate,
    integrate_values,
    normalize,
)


def gaussian(grid, sigma2=1.0):
    return ScalarField.from_function(grid, lambda x, y: np.exp(-(x**2 + y**2) / (2 * sigma2)))


def test_grid_validation():
    with pytest.raises(ValueError):
        Grid2D(12.0, 255)
    with pytest.raises(ValueError):
        Grid2D(12.0, 16)
    with pytest.raises(ValueError):
        Grid2D(-1.0, 64)


def test_axis_and_spacing(grid256):
    assert grid256.h == pytest.approx(2 * 12.0 / 256)
    assert grid256.axis[0] == -12.0
    assert grid256.axis[-1] == pytest.approx(12.0 - grid256.h)


def test_integrate_gaussian_closed_form(grid256):
    # int exp(-|x|^2/2) dx = 2*pi; int exp(-|x|^2) dx = pi
    f = gaussian(grid256)
    assert integrate(f) == pytest.approx(2 * math.pi, rel=1e-12)
    g = ScalarField(grid256, f.values**2)
    assert integrate(g) == pytest.approx(math.pi, rel=1e-12)


def test_gradient_sq_gaussian(grid256):
    # int |grad e^{-r^2/2}|^2 = int r^2 e^{-r^2} = pi
    assert gradient_sq_integral(gaussian(grid256)) == pytest.approx(math.pi, rel=1e-10)


def test_parseval(grid256):
    rng = np.random.default_rng(7)
    vals = rng.standard_normal((256, 256))
    f = ScalarField(grid256, vals)
    direct = integrate_values(grid256, vals**2)
    spectral = grid256.spectral_sq_integral(np.fft.rfft2(vals))
    assert spectral == pytest.approx(direct, rel=1e-12)


def test_laplacian_of_gaussian(grid256):
    f = gaussian(grid256)
    lap = apply_laplacian(f)
    x, y = grid256.coords
    r2 = x**2 + y**2
    exact = (r2 - 2.0) * f.values
    assert np.max(np.abs(lap.values - exact)) < 1e-10


def test_gn_quotient_gaussian(grid256):
    # J(e^{-r^2/2}) = pi * pi / (pi/2) = 2*pi
    assert gn_quotient(gaussian(grid256)) == pytest.approx(2 * math.pi, rel=1e-10)


def test_gn_quotient_scale_invariance(grid256):
    f = gaussian(grid256)
    assert gn_quotient(ScalarField(grid256, 3.7 * f.values)) == pytest.approx(
        gn_quotient(f), rel=1e-12
    )


def test_gn_zero_field(grid256):
    with pytest.raises(ZeroField):
        gn_quotient(ScalarField(grid256, np.zeros((256, 256))))
    with pytest.raises(ZeroField):
        normalize(ScalarField(grid256, np.zeros((256, 256))))


def test_normalize(grid256):
    f = normalize(gaussian(grid256))
    assert integrate_values(grid256, f.values**2) == pytest.approx(1.0, abs=1e-14)


def test_shape_mismatch(grid256, grid128):
    with pytest.raises(ValueError):
        ScalarField(grid256, np.zeros((128, 128)))


@settings(max_examples=25, deadline=None)
@given(
    a=st.floats(-5, 5, allow_nan=False),
    b=st.floats(-5, 5, allow_nan=False),
)
def test_integrate_linearity(a, b):
    grid = Grid2D(8.0, 64)
    rng = np.random.default_rng(0)
    u = rng.standard_normal((64, 64))
    v = rng.standard_normal((64, 64))
    lhs = integrate_values(grid, a * u + b * v)
    rhs = a * integrate_values(grid, u) + b * integrate_values(grid, v)
    assert lhs == pytest.approx(rhs, rel=1e-9, abs=1e-9)


@settings(max_examples=20, deadline=None)
@given(sigma2=st.floats(0.3, 3.0, allow_nan=False))
def test_dirichlet_energy_positive(sigma2):
    grid = Grid2D(8.0, 64)
    f = gaussian(grid, sigma2)
    assert gradient_sq_integral(f) >= 0.0
