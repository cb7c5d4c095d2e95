import random
from fractions import Fraction

import pytest

from nilfill.chains import PLChain, boundary
from nilfill.families import random_point, random_polygon, random_sphere
from nilfill.grid import (
    BoundaryNotOnGrid,
    DimensionUnsupported,
    GridChain,
    GridSpec,
    _ladder,
    deform_chain,
    grid_deform,
)

F = Fraction


def test_aligned_segment_unchanged():
    seg = PLChain.simplex((0, 0), (1, 0))
    P, R = grid_deform(seg, GridSpec(eps=1))
    assert P.to_pl() == seg
    assert R.is_zero()


def test_diagonal_segment():
    seg = PLChain.simplex((0, 0), (1, 1))
    P, R = grid_deform(seg, GridSpec(eps=1))
    assert P.cell_count() == 2
    assert P.to_pl() == seg + boundary(R)
    assert len(R) == 1


def test_diagonal_square_loop():
    loop = PLChain.polygon([(F(1, 2), 0), (1, F(1, 2)), (F(1, 2), 1), (0, F(1, 2))])
    res = deform_chain(loop, GridSpec(eps=F(1, 2)))
    assert res.P.boundary().is_zero()
    assert res.P.to_pl() == loop + boundary(res.R) + res.boundary_term


def test_ladder_boundary():
    g = GridChain(1, 1)
    g.add((2, 1, 0), (1,), 1)
    H = _ladder((2, 1, 0), 1, (0, 0, 3), 1)
    from nilfill.grid import _staircase

    expect = _staircase((0, 0, 3), (2, 1, 0), 1) + g + _staircase((0, 0, 3), (2, 2, 0), 1).scaled(-1)
    assert H.boundary() == expect


def test_grid_boundary_squared():
    g = GridChain(2, 1)
    g.add((0, 0, 0), (0, 1), 2)
    g.add((1, 0, 0), (1, 2), -1)
    assert g.boundary().boundary().is_zero()
    assert boundary(g.to_pl()) == g.boundary().to_pl()


def test_errors():
    with pytest.raises(DimensionUnsupported):
        grid_deform(PLChain.simplex((0, 0, 0), (1, 0, 0), (0, 1, 0), (0, 0, 1)))
    with pytest.raises(BoundaryNotOnGrid):
        grid_deform(PLChain.simplex((0, 0), (F(1, 2), 1)))
    with pytest.raises(ValueError):
        GridSpec(eps=0)


def test_identity_random_chains():
    rng = random.Random(9)
    for trial in range(30):
        n = rng.choice([2, 3])
        c = random_polygon(rng, n, (3, 5))
        res = deform_chain(c, GridSpec(eps=F(1, rng.randint(1, 2))))
        assert res.P.to_pl() == c + boundary(res.R) + res.boundary_term
        assert res.P.boundary().is_zero()
        assert res.boundary_term.is_zero()


def test_identity_surfaces():
    rng = random.Random(4)
    for _ in range(3):
        s = random_sphere(rng, 3, 10)
        P, R = grid_deform(s, GridSpec(eps=1))
        assert P.to_pl() == s + boundary(R)
        assert P.boundary().is_zero()
