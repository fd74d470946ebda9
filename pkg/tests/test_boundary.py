import numpy as np
import pytest

from pcpcdg.boundary import Boundaries, BoundaryCondition, mode_parity, pad
from pcpcdg.grid import Mesh1d, Mesh2d

OUT = BoundaryCondition("outflow")
WALL = BoundaryCondition("reflecting")


def _arr(n, M=3, nv=3, seed=0):
    return np.random.default_rng(seed).standard_normal((n, M, nv))


def test_periodic_wraps():
    a = _arr(5)
    m = Mesh1d(0, 1, 5, True)
    p = pad(a, m, Boundaries(), False, 2)
    np.testing.assert_array_equal(p[0], a[-1])
    np.testing.assert_array_equal(p[-1], a[0])
    np.testing.assert_array_equal(p[1:-1], a)


def test_outflow_copies_average_only():
    a = _arr(4)
    p = pad(a, Mesh1d(0, 1, 4), Boundaries.all(OUT), False, 2)
    np.testing.assert_array_equal(p[0, 0], a[0, 0])
    np.testing.assert_array_equal(p[0, 1:], 0.0)
    np.testing.assert_array_equal(p[-1, 0], a[-1, 0])


def test_reflecting_mirrors_primal_and_dual():
    a = _arr(4)
    m = Mesh1d(0, 1, 4)
    bc = Boundaries(OUT, WALL)
    p = pad(a, m, bc, False, 2)
    g = p[-1]
    np.testing.assert_allclose(g[:, 0], a[-1, :, 0] * [1, -1, 1])
    np.testing.assert_allclose(g[:, 1], -a[-1, :, 1] * [1, -1, 1])
    d = _arr(5, seed=1)
    pd = pad(d, m, bc, True, 2)
    # the last dual cell is centred on the wall, so the ghost mirrors the one before it
    np.testing.assert_allclose(pd[-1][:, 2], d[-2, :, 2] * [1, -1, 1])


def test_inflow_window_2d():
    m = Mesh2d.build(0, 1, 4, 0, 1, 4)
    state = (2.0, 0.5, 0.0, 4.0)
    bc = Boundaries(OUT, OUT, BoundaryCondition("inflow", state, (0.0, 0.3)), OUT)
    a = np.random.default_rng(2).standard_normal((4, 4, 6, 4))
    p = pad(a, m, bc, False, 2)
    assert p.shape == (6, 6, 6, 4)
    # bottom ghosts of the first primal column (x centre 0.125) see the jet
    np.testing.assert_allclose(p[1, 0, 0], state)
    np.testing.assert_allclose(p[1, 0, 1:], 0.0)
    # x centre 0.375 lies outside the window: outflow
    np.testing.assert_allclose(p[2, 0, 0], a[1, 0, 0])


def test_mode_parity():
    assert mode_parity(1, 2, 0).tolist() == [1, -1, 1]
    assert mode_parity(2, 2, 0).tolist() == [1, -1, 1, 1, -1, 1]
    assert mode_parity(2, 2, 1).tolist() == [1, 1, -1, 1, -1, 1]
    assert mode_parity(2, 1, 1).tolist() == [1, 1, -1]


def test_invalid_conditions():
    with pytest.raises(ValueError):
        BoundaryCondition("sponge")
    with pytest.raises(ValueError):
        BoundaryCondition("inflow")
    with pytest.raises(ValueError):
        Boundaries(left=OUT)
