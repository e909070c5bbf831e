"""Lagrange and Finsler structures on an anchored bundle with p = r.

The fundamental function induces a vertical Hessian metric; a Levi-Civita
style normal d-connection makes it parallel, and prescribing torsion pair
(T, S) singles out a unique metrical deformation whose torsions can be
recovered afterwards.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

from . import linalg
from .algebroid import GeneralizedAlgebroid, _check_grid
from .dtensor import DConnection
from .errors import DimensionMismatch, ShapeError, SingularMetric
from .jets import Point, ScalarField
from .metric import MetricStructure, _vertical_christoffel
from .nlconn import NonlinearConnection, delta_action
from .sampling import ValidationReport, fields_sweep_max

RANK_TOL = 1e-10


@dataclass(frozen=True)
class FundamentalFunction:
    """An energy function on the bundle.  ``kind`` is 'lagrange' (the
    Hessian of the function itself is the metric) or 'finsler' (the Hessian
    of its square)."""

    algebroid: GeneralizedAlgebroid
    value: ScalarField
    kind: str = "lagrange"

    def __post_init__(self):
        if self.kind not in ("lagrange", "finsler"):
            raise ShapeError("kind must be 'lagrange' or 'finsler'")

    def energy(self) -> ScalarField:
        if self.kind == "finsler":
            return self.value * self.value
        return self.value


def hessian_metric(fund: FundamentalFunction):
    """Half the vertical Hessian of the energy, as a symmetric r x r block
    of fields.  Symmetric entries are the same field object."""
    A = fund.algebroid
    m, r = A.m, A.r
    energy = fund.energy()
    block = [[None] * r for _ in range(r)]
    for a in range(r):
        da = energy.partial(m + a)
        for b in range(a, r):
            entry = 0.5 * da.partial(m + b)
            block[a][b] = block[b][a] = entry
    return block


def regularity_check(block, samples: Sequence[Point],
                     tol: float = RANK_TOL) -> ValidationReport:
    """Rank of the Hessian block at every sample; regular means full rank."""
    r = len(block)
    report = ValidationReport()
    worst_rank, arg = r, None
    for point in samples:
        coords = list(point.coords())
        values = [[float(f(coords)) for f in row] for row in block]
        rk = linalg.rank(values, tol)
        if rk < worst_rank or arg is None:
            worst_rank, arg = rk, point
    report.add("hessian_rank_defect", float(r - worst_rank), arg, 0.0)
    report.metadata["rank"] = worst_rank
    report.metadata["dimension"] = r
    return report


def finsler_checks(fund: FundamentalFunction, samples: Sequence[Point],
                   tol: float = 1e-8,
                   scales=(0.5, 2.0, 3.0)) -> ValidationReport:
    """Positive 1-homogeneity in the fiber, the Euler identity residual,
    and positive-definiteness of the induced metric at the samples."""
    if fund.kind != "finsler":
        raise ShapeError("finsler checks need a 'finsler' fundamental"
                         " function")
    A = fund.algebroid
    m, r = A.m, A.r
    F = fund.value
    report = ValidationReport()

    worst, arg = 0.0, None
    for point in samples:
        coords = list(point.coords())
        base_value = float(F(coords))
        for lam in scales:
            scaled = list(point.x) + [lam * v for v in point.y]
            res = abs(float(F(scaled)) - lam * base_value)
            if arg is None or res > worst:
                worst, arg = res, point
    report.add("homogeneity", worst, arg, tol)

    euler = ScalarField.const(m, r, 0.0)
    for a in range(r):
        euler = euler + ScalarField.coordinate(m, r, m + a) * F.partial(m + a)
    euler = euler - F
    value, arg = fields_sweep_max([euler], samples)
    report.add("euler_identity", value, arg, tol)

    block = hessian_metric(fund)
    worst, arg = 0.0, None
    for point in samples:
        coords = list(point.coords())
        values = [[float(f(coords)) for f in row] for row in block]
        pivots = linalg.sym_pivots(values)
        defect = 0.0 if all(p > RANK_TOL for p in pivots) else 1.0
        if arg is None or defect > worst:
            worst, arg = defect, point
    report.add("positive_definite_defect", worst, arg, 0.0)
    return report


def build_gl_space(C: NonlinearConnection, block,
                   v_riemannian: bool = False) -> MetricStructure:
    """Metric structure using the same block horizontally and vertically;
    needs p = r."""
    A = C.algebroid
    if A.p != A.r:
        raise DimensionMismatch("shared metric block needs p = r")
    return MetricStructure(A, gh=block, gv=block,
                           h_riemannian=v_riemannian,
                           v_riemannian=v_riemannian)


@dataclass(frozen=True)
class NormalDConnection:
    """A d-connection whose two H-blocks coincide and whose two V-blocks
    coincide (p = r)."""

    nlconn: NonlinearConnection
    h: tuple  # h[a][b][c]
    v: tuple  # v[a][b][c]

    def __post_init__(self):
        A = self.nlconn.algebroid
        if A.p != A.r:
            raise DimensionMismatch("normal d-connections need p = r")
        _check_grid("h", self.h, (A.r, A.r, A.r))
        _check_grid("v", self.v, (A.r, A.r, A.r))
        for name in ("h", "v"):
            value = getattr(self, name)
            object.__setattr__(self, name, tuple(
                tuple(tuple(row) for row in plane) for plane in value))

    @property
    def algebroid(self):
        return self.nlconn.algebroid

    def as_dconnection(self) -> DConnection:
        return DConnection(self.nlconn, hh=self.h, hv=self.h,
                           vh=self.v, vv=self.v)

    def block_at(self, name, point: Point):
        coords = list(point.coords())
        return [[[float(f(coords)) for f in row] for row in plane]
                for plane in getattr(self, name)]


def levi_civita_normal(C: NonlinearConnection,
                       G: MetricStructure) -> NormalDConnection:
    """The torsion-adapted Koszul construction for a shared metric block:
    adapted-frame derivatives plus structure-function corrections
    horizontally, fiber Christoffel symbols vertically."""
    A = G.algebroid
    if A.p != A.r:
        raise DimensionMismatch("this construction needs p = r")
    n = A.r
    g = G.gv
    ginv = G.gv_inv()
    L = A.L
    h = []
    for a in range(n):
        plane = []
        for b in range(n):
            row = []
            for c in range(n):
                f = A.zero_field()
                for e in range(n):
                    term = (delta_action(C, b, g[e][c])
                            + delta_action(C, c, g[b][e])
                            - delta_action(C, e, g[b][c]))
                    for d in range(n):
                        term = term - g[c][d] * L[d][b][e]
                        term = term + g[b][d] * L[d][e][c]
                        term = term - g[e][d] * L[d][b][c]
                    f = f + ginv[a][e] * term
                row.append(f * 0.5)
            plane.append(row)
        h.append(plane)
    v = _vertical_christoffel(G)
    return NormalDConnection(C, h=h, v=v)


@dataclass(frozen=True)
class TorsionPair:
    """Prescribed torsion tensors ``t[a][b][c]`` (horizontal) and
    ``s[a][b][c]`` (vertical), antisymmetric in the lower pair."""

    t: tuple
    s: tuple

    def __post_init__(self):
        object.__setattr__(self, "t", tuple(
            tuple(tuple(row) for row in plane) for plane in self.t))
        object.__setattr__(self, "s", tuple(
            tuple(tuple(row) for row in plane) for plane in self.s))


def torsion_deform(base: NormalDConnection, G: MetricStructure,
                   torsions: TorsionPair) -> NormalDConnection:
    """The unique metrical connection with the prescribed torsions: the
    contorsion of (T, S) added to the torsion-adapted base."""
    A = G.algebroid
    n = A.r
    _check_grid("t", torsions.t, (n, n, n))
    _check_grid("s", torsions.s, (n, n, n))
    g = G.gv
    ginv = G.gv_inv()

    def deform(block, tor):
        out = []
        for a in range(n):
            plane = []
            for b in range(n):
                row = []
                for c in range(n):
                    f = block[a][b][c]
                    for e in range(n):
                        corr = A.zero_field()
                        for d in range(n):
                            corr = corr + g[e][d] * tor[d][b][c]
                            corr = corr - g[b][d] * tor[d][e][c]
                            corr = corr + g[c][d] * tor[d][b][e]
                        f = f + (0.5 * ginv[a][e]) * corr
                    row.append(f)
                plane.append(row)
            out.append(plane)
        return out

    return NormalDConnection(base.nlconn, h=deform(base.h, torsions.t),
                             v=deform(base.v, torsions.s))


def recover_torsions(N: NormalDConnection,
                     convention: str = "consistent") -> TorsionPair:
    """Torsion tensors of a normal d-connection.

    Horizontal torsion is the antisymmetric part of the H-block plus the
    structure functions ('consistent', the default, under which the
    torsion-adapted base is exactly torsion free) or minus them
    ('verbatim').  Vertical torsion is the antisymmetric part of the
    V-block under both conventions.
    """
    if convention not in ("consistent", "verbatim"):
        raise ShapeError("convention must be 'consistent' or 'verbatim'")
    A = N.algebroid
    n = A.r
    sign = 1.0 if convention == "consistent" else -1.0
    t = [[[N.h[a][b][c] - N.h[a][c][b] + sign * A.L[a][b][c]
           for c in range(n)] for b in range(n)] for a in range(n)]
    s = [[[N.v[a][b][c] - N.v[a][c][b]
           for c in range(n)] for b in range(n)] for a in range(n)]
    return TorsionPair(t=t, s=s)
