"""Nonlinear connections, adapted frames, and frame/coordinate changes.

A nonlinear connection is the coefficient table ``gamma[a][alpha]`` (r x p
scalar fields over the bundle coordinates).  The adapted horizontal frame
subtracts the connection from the natural horizontal frame; its dual coframe
adds it back on the vertical covectors, so frame and coframe matrices are
exactly mutually inverse at every point.

Frame changes carry a base map together with horizontal (Lambda) and
vertical (M) transition matrices, all functions of x only.  Transformed
coefficients stay expressed over the original coordinates, composed with
the transition data; chaining a change with its inverse therefore
reproduces the original coefficients up to roundoff, no map inversion
involved.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

from . import linalg
from .algebroid import GeneralizedAlgebroid, _check_grid, _check_x_only, \
    _flatten
from .errors import DimensionMismatch, IndexOutOfRange, ShapeError, \
    SingularTransition
from .jets import Point, ScalarField, compose
from .sampling import ValidationReport, fields_sweep_max


@dataclass(frozen=True)
class NonlinearConnection:
    """Connection coefficients ``gamma[a][alpha]`` bound to their structure."""

    algebroid: GeneralizedAlgebroid
    gamma: tuple

    def __post_init__(self):
        A = self.algebroid
        _check_grid("gamma", self.gamma, (A.r, A.p))
        object.__setattr__(self, "gamma",
                           tuple(tuple(row) for row in self.gamma))

    @property
    def m(self):
        return self.algebroid.m

    @property
    def p(self):
        return self.algebroid.p

    @property
    def r(self):
        return self.algebroid.r

    def gamma_at(self, point: Point):
        coords = list(point.coords())
        return [[float(f(coords)) for f in row] for row in self.gamma]


def zero_connection(A: GeneralizedAlgebroid) -> NonlinearConnection:
    zero = A.zero_field()
    return NonlinearConnection(A, tuple(tuple(zero for _ in range(A.p))
                                        for _ in range(A.r)))


def from_ehresmann(A: GeneralizedAlgebroid,
                   coefficients) -> NonlinearConnection:
    """Pull classical Ehresmann coefficients ``coefficients[a][k]`` (r x m)
    back through the anchor: gamma[a][alpha] = sum_k rho[k][alpha] * c[a][k]."""
    _check_grid("ehresmann coefficients", coefficients, (A.r, A.m))
    gamma = []
    for a in range(A.r):
        row = []
        for alpha in range(A.p):
            f = A.zero_field()
            for k in range(A.m):
                f = f + A.rho[k][alpha] * coefficients[a][k]
            row.append(f)
        gamma.append(row)
    return NonlinearConnection(A, gamma)


def delta_action(C: NonlinearConnection, alpha: int,
                 f: ScalarField) -> ScalarField:
    """Derivation along the adapted horizontal frame field: anchor part
    minus the connection times the vertical partials."""
    A = C.algebroid
    if not 0 <= alpha < A.p:
        raise IndexOutOfRange(f"horizontal index {alpha} out of range")
    out = A.zero_field()
    for i in range(A.m):
        out = out + A.rho[i][alpha] * f.partial(i)
    for a in range(A.r):
        out = out - C.gamma[a][alpha] * f.partial(A.m + a)
    return out


def vertical_action(C: NonlinearConnection, c: int,
                    f: ScalarField) -> ScalarField:
    """Derivation along the vertical frame field (plain fiber partial)."""
    A = C.algebroid
    if not 0 <= c < A.r:
        raise IndexOutOfRange(f"vertical index {c} out of range")
    return f.partial(A.m + c)


# -- adapted frame ---------------------------------------------------------


def adapted_frame_matrix(C: NonlinearConnection, point: Point):
    """Columns are the adapted frame fields expanded in the natural frame
    (horizontal block first, then vertical), a (p+r) x (p+r) matrix."""
    p, r = C.p, C.r
    gamma = C.gamma_at(point)
    n = p + r
    out = [[0.0] * n for _ in range(n)]
    for alpha in range(p):
        out[alpha][alpha] = 1.0
        for a in range(r):
            out[p + a][alpha] = -gamma[a][alpha]
    for a in range(r):
        out[p + a][p + a] = 1.0
    return out


def adapted_coframe_matrix(C: NonlinearConnection, point: Point):
    """Rows are the adapted coframe covectors expanded in the natural
    coframe; exactly inverse to the frame matrix."""
    p, r = C.p, C.r
    gamma = C.gamma_at(point)
    n = p + r
    out = [[0.0] * n for _ in range(n)]
    for alpha in range(p):
        out[alpha][alpha] = 1.0
    for a in range(r):
        out[p + a][p + a] = 1.0
        for alpha in range(p):
            out[p + a][alpha] = gamma[a][alpha]
    return out


def to_adapted_vector(C: NonlinearConnection, point: Point, z, y):
    """Natural components (z, y) of a vector -> adapted components."""
    gamma = C.gamma_at(point)
    z = list(z)
    y_ad = [y[a] + sum(gamma[a][alpha] * z[alpha] for alpha in range(C.p))
            for a in range(C.r)]
    return z, y_ad


def from_adapted_vector(C: NonlinearConnection, point: Point, z, y_ad):
    gamma = C.gamma_at(point)
    z = list(z)
    y = [y_ad[a] - sum(gamma[a][alpha] * z[alpha] for alpha in range(C.p))
         for a in range(C.r)]
    return z, y


def to_adapted_covector(C: NonlinearConnection, point: Point, wh, wv):
    """Natural components (wh, wv) of a covector -> adapted components."""
    gamma = C.gamma_at(point)
    wh_ad = [wh[alpha] - sum(wv[a] * gamma[a][alpha] for a in range(C.r))
             for alpha in range(C.p)]
    return wh_ad, list(wv)


def from_adapted_covector(C: NonlinearConnection, point: Point, wh_ad, wv):
    gamma = C.gamma_at(point)
    wh = [wh_ad[alpha] + sum(wv[a] * gamma[a][alpha] for a in range(C.r))
          for alpha in range(C.p)]
    return wh, list(wv)


# -- frame changes ---------------------------------------------------------


@dataclass(frozen=True)
class FrameChange:
    """Transition data, every entry a field over the original coordinates.

    ``lam[ap][a]`` and ``mmat[ap][a]`` are the horizontal and vertical
    transition matrices with their supplied pointwise inverses; ``basemap``
    gives the image base coordinates, ``basemap_inv`` the inverse map
    written over the image coordinates.
    """

    m: int
    r: int
    lam: tuple
    lam_inv: tuple
    mmat: tuple
    mmat_inv: tuple
    basemap: tuple
    basemap_inv: tuple

    def __post_init__(self):
        p = len(self.lam)
        rdim = len(self.mmat)
        _check_grid("lam", self.lam, (p, p))
        _check_grid("lam_inv", self.lam_inv, (p, p))
        _check_grid("mmat", self.mmat, (rdim, rdim))
        _check_grid("mmat_inv", self.mmat_inv, (rdim, rdim))
        _check_grid("basemap", self.basemap, (self.m,))
        _check_grid("basemap_inv", self.basemap_inv, (self.m,))
        for name in ("lam", "lam_inv", "mmat", "mmat_inv", "basemap",
                     "basemap_inv"):
            _check_x_only(name, _flatten(getattr(self, name)), self.m)
        for name in ("lam", "lam_inv", "mmat", "mmat_inv", "basemap",
                     "basemap_inv"):
            value = getattr(self, name)
            if name.startswith("basemap"):
                object.__setattr__(self, name, tuple(value))
            else:
                object.__setattr__(self, name,
                                   tuple(tuple(row) for row in value))

    @property
    def p(self):
        return len(self.lam)

    def full_maps(self):
        """Coordinate maps (length m + r) sending original coordinates to
        image ones; fiber part is M applied to the fiber coordinates."""
        maps = list(self.basemap)
        for ap in range(self.r):
            f = ScalarField.const(self.m, self.r, 0.0)
            for a in range(self.r):
                f = f + self.mmat[ap][a] \
                    * ScalarField.coordinate(self.m, self.r, self.m + a)
            maps.append(f)
        return maps

    def inverse(self) -> "FrameChange":
        """The reverse transition, still expressed over the original
        coordinates: matrices swap with their inverses, and the base map
        becomes the inverse map composed with the forward one."""
        maps = self.full_maps()
        back = tuple(compose(f, maps) for f in self.basemap_inv)
        fwd = tuple(ScalarField.coordinate(self.m, self.r, k)
                    for k in range(self.m))
        return FrameChange(self.m, self.r, self.lam_inv, self.lam,
                           self.mmat_inv, self.mmat, back, fwd)

    def check_consistency(self, points: Sequence[Point],
                          tol: float = 1e-8) -> ValidationReport:
        """Mutual-inverse residuals of the matrices and of the base maps."""
        report = ValidationReport()
        for name, mat, inv in (("lam", self.lam, self.lam_inv),
                               ("mmat", self.mmat, self.mmat_inv)):
            worst, arg = 0.0, None
            for point in points:
                coords = list(point.coords())
                a = [[float(f(coords)) for f in row] for row in mat]
                b = [[float(f(coords)) for f in row] for row in inv]
                res = linalg.residual_identity(a, b)
                if arg is None or res > worst:
                    worst, arg = res, point
            report.add(f"{name}_inverse", worst, arg, tol)
        maps = self.full_maps()
        fields = []
        for k in range(self.m):
            roundtrip = compose(self.basemap_inv[k], maps)
            fields.append(roundtrip
                          - ScalarField.coordinate(self.m, self.r, k))
        value, arg = fields_sweep_max(fields, points)
        report.add("basemap_inverse", value, arg, tol)
        return report


@dataclass(frozen=True)
class ChartFrame:
    """Derivative data of a (possibly transformed) coordinate frame.

    ``anchor[k][gamma]`` are the anchor components in this frame, ``ddx``
    the base-derivative operators (valid on x-only fields), and ``fiber``
    the current fiber coordinates, everything expressed over the original
    coordinates.
    """

    anchor: tuple
    ddx: tuple
    fiber: tuple


def default_chart(A: GeneralizedAlgebroid) -> ChartFrame:
    ddx = tuple((lambda k: lambda f: f.partial(k))(k) for k in range(A.m))
    fiber = tuple(ScalarField.coordinate(A.m, A.r, A.m + a)
                  for a in range(A.r))
    return ChartFrame(anchor=A.rho, ddx=ddx, fiber=fiber)


def transform_chart(chart: ChartFrame, F: FrameChange) -> ChartFrame:
    """Chart data after the change: Jacobian-corrected derivatives, the
    transformed anchor, and the new fiber coordinates."""
    m, r, p = F.m, F.r, F.p
    jac = [[chart.ddx[k](F.basemap[kp]) for k in range(m)] for kp in range(m)]
    jac_inv = linalg.field_matrix_inverse(jac, m, r, exc=SingularTransition)

    def make_ddx(kp):
        def op(f):
            out = ScalarField.const(m, r, 0.0)
            for k in range(m):
                out = out + jac_inv[k][kp] * chart.ddx[k](f)
            return out
        return op

    anchor = []
    for kp in range(m):
        row = []
        for gp in range(p):
            f = ScalarField.const(m, r, 0.0)
            for k in range(m):
                for g in range(p):
                    f = f + jac[kp][k] * chart.anchor[k][g] * F.lam_inv[g][gp]
            row.append(f)
        anchor.append(tuple(row))
    fiber = []
    for ap in range(r):
        f = ScalarField.const(m, r, 0.0)
        for a in range(r):
            f = f + F.mmat[ap][a] * chart.fiber[a]
        fiber.append(f)
    return ChartFrame(anchor=tuple(anchor),
                      ddx=tuple(make_ddx(kp) for kp in range(m)),
                      fiber=tuple(fiber))


def transform_gamma(C: NonlinearConnection, F: FrameChange,
                    chart: Optional[ChartFrame] = None) -> NonlinearConnection:
    """Connection coefficients in the transformed frame, as fields over the
    original coordinates: the vertical matrix conjugation plus the derivative
    term of the inverse vertical matrix against the new fiber coordinates."""
    A = C.algebroid
    if (F.m, F.r) != (A.m, A.r) or F.p != A.p:
        raise DimensionMismatch("frame change does not match the structure")
    if chart is None:
        chart = default_chart(A)
    new_chart = transform_chart(chart, F)
    m, p, r = A.m, A.p, A.r
    gamma = []
    for ap in range(r):
        row = []
        for gp in range(p):
            f = ScalarField.const(m, r, 0.0)
            for g in range(p):
                inner = ScalarField.const(m, r, 0.0)
                for a in range(r):
                    term = C.gamma[a][g]
                    for k in range(m):
                        for bp in range(r):
                            term = term + chart.anchor[k][g] \
                                * chart.ddx[k](F.mmat_inv[a][bp]) \
                                * new_chart.fiber[bp]
                    inner = inner + F.mmat[ap][a] * term
                f = f + inner * F.lam_inv[g][gp]
            row.append(f)
        gamma.append(row)
    return NonlinearConnection(A, gamma)
