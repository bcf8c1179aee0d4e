import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from eeqt_arrival.errors import ContourError
from eeqt_arrival.laplace import DEFAULT_NODES, invert, talbot_contour
from eeqt_arrival.specfun import erfc_scaled_ray_derivative


@pytest.mark.parametrize("t", [0.01, 0.5, 3.0, 40.0])
def test_exponential(t):
    assert invert(lambda z: 1 / (z + 1), t) == pytest.approx(np.exp(-t), rel=1e-8, abs=1e-12)


def test_branch_cut_transform():
    # 1/sqrt(z) <-> 1/sqrt(pi t)
    t = np.array([0.1, 1.0, 10.0, 100.0])
    assert np.allclose(invert(lambda z: 1 / np.sqrt(z), t), 1 / np.sqrt(np.pi * t), rtol=1e-10)


def test_complex_valued_transform_both_halves():
    # exp(i t) is not real, so a half-contour shortcut would fail here
    t = np.linspace(0.1, 5, 7)
    assert np.allclose(invert(lambda z: 1 / (z - 1j), t), np.exp(1j * t), rtol=1e-9)


@given(kappa=st.floats(0.05, 10), t=st.floats(0.01, 100))
def test_memory_kernel_matches_closed_form(kappa, t):
    eps = kappa / (2 * np.sqrt(2)) * np.exp(-1j * np.pi / 4)
    num = invert(lambda z: -eps / (np.sqrt(z) + eps), t)
    exact = erfc_scaled_ray_derivative(eps, t)
    assert abs(num - exact) <= 1e-8 * max(abs(exact), 1e-3)


def test_contour_shape():
    z, w = talbot_contour(np.array([1.0, 2.0]), 10)
    assert z.shape == w.shape == (2, 19)
    # symmetric under conjugation: nodes come in pairs
    assert np.allclose(z[:, ::-1], np.conj(z))
    assert DEFAULT_NODES == 22


def test_nonpositive_time_rejected():
    with pytest.raises(ValueError):
        invert(lambda z: 1 / z, 0.0)


def test_non_finite_transform_names_the_node():
    with pytest.raises(ContourError, match="contour node"):
        invert(lambda z: np.where(z.imag > 0, np.nan, 1 / z), 1.0)
