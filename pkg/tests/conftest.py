import pathlib
import random

import pytest

from algcalc.algebroid import (FrameDiffeoData, GeneralizedAlgebroid,
                               from_frame)
from algcalc.exprlang import parse_field
from algcalc.jets import ScalarField
from algcalc.metric import MetricStructure
from algcalc.nlconn import NonlinearConnection, zero_connection
from algcalc.sampling import SampleBox, generate

FIXTURES = pathlib.Path(__file__).resolve().parent.parent / "fixtures"


def fixture_path(name):
    return str(FIXTURES / name)


def const(m, r, v):
    return ScalarField.const(m, r, v)


def field_grid(strings, m, r):
    """Nested lists of expression strings -> nested lists of fields."""
    if isinstance(strings, (list, tuple)):
        return [field_grid(s, m, r) for s in strings]
    return parse_field(str(strings), m, r)


def identity_algebroid(m=2, r=None):
    r = m if r is None else r
    rho = [[const(m, r, 1.0 if i == a else 0.0) for a in range(m)]
           for i in range(m)]
    zero = const(m, r, 0.0)
    L = [[[zero] * m for _ in range(m)] for _ in range(m)]
    return GeneralizedAlgebroid(m=m, p=m, r=r, rho=rho, L=L)


def random_poly(rng, m, r, x_only=False, scale=0.4):
    names = [f"x{i + 1}" for i in range(m)]
    if not x_only:
        names += [f"y{a + 1}" for a in range(r)]
    terms = [f"({rng.uniform(-1, 1):.4f})"]
    for name in names:
        terms.append(f"({rng.uniform(-scale, scale):.4f}*{name})")
    return parse_field(" + ".join(terms), m, r)


def random_spd_block(rng, m, r, n):
    """A^T A + I from random affine A: symmetric positive definite fields."""
    a = [[random_poly(rng, m, r) for _ in range(n)] for _ in range(n)]
    g = [[None] * n for _ in range(n)]
    for i in range(n):
        for j in range(n):
            f = const(m, r, 1.0 if i == j else 0.0)
            for k in range(n):
                f = f + a[k][i] * a[k][j]
            g[i][j] = f
    return g


def random_geometry(seed):
    """Frame-derived structure with nonzero structure functions, random
    nonlinear connection, and random SPD metric blocks (m = p = r = 2)."""
    rng = random.Random(seed)
    m = p = r = 2
    off = random_poly(rng, m, r, x_only=True)
    one, zero = const(m, r, 1.0), const(m, r, 0.0)
    frame = FrameDiffeoData(m, r, theta=[[one, off], [zero, one]],
                            theta_inv=[[one, -1.0 * off], [zero, one]])
    A = from_frame(frame)
    C = NonlinearConnection(A, [[random_poly(rng, m, r) for _ in range(p)]
                                for _ in range(r)])
    G = MetricStructure(A, gh=random_spd_block(rng, m, r, p),
                        gv=random_spd_block(rng, m, r, r))
    return A, C, G, rng


def poincare_geometry():
    """Hyperbolic half-plane metric on both blocks, trivial structure."""
    m = r = 2
    A = identity_algebroid(m, r)
    g = field_grid([["1/x2^2", "0"], ["0", "1/x2^2"]], m, r)
    G = MetricStructure(A, gh=g, gv=g, h_riemannian=True, v_riemannian=True)
    return A, zero_connection(A), G


def so3_geometry():
    """Constant totally antisymmetric structure functions, zero anchor,
    identity metric (m = 1, p = r = 3)."""
    m, n, r = 1, 3, 3
    eps = {(0, 1, 2): 1.0, (1, 2, 0): 1.0, (2, 0, 1): 1.0,
           (0, 2, 1): -1.0, (2, 1, 0): -1.0, (1, 0, 2): -1.0}
    L = [[[const(m, r, eps.get((g, a, b), 0.0)) for b in range(n)]
          for a in range(n)] for g in range(n)]
    rho = [[const(m, r, 0.0) for _ in range(n)]]
    A = GeneralizedAlgebroid(m=m, p=n, r=r, rho=rho, L=L)
    g_id = [[const(m, r, 1.0 if i == j else 0.0) for j in range(n)]
            for i in range(n)]
    G = MetricStructure(A, gh=g_id, gv=g_id,
                        h_riemannian=True, v_riemannian=True)
    return A, zero_connection(A), G


def box_samples(m, r, count, seed, x_box=None, y_box=None, fiber_floor=None):
    box = SampleBox(x=tuple(x_box or ((-1.0, 1.0),) * m),
                    y=tuple(y_box or ((-1.0, 1.0),) * r))
    return generate(box, count, seed, fiber_floor)


@pytest.fixture
def rng():
    return random.Random(0)
