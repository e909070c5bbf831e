"""Metric structures on the generalized tangent bundle and the d-connections
compatible with them.

A metric structure pairs a symmetric horizontal block ``gh[alpha][beta]``
with a symmetric vertical block ``gv[a][b]``, both scalar fields over the
bundle coordinates.  Symmetric entries share the same field object, so the
stored blocks equal their transposes exactly.  Inverses are computed
pointwise by pivoted elimination and cached per point.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from . import linalg
from .algebroid import GeneralizedAlgebroid, _check_grid
from .dtensor import DConnection, DTensorField, IndexSignature, DOWN, \
    HORIZONTAL, VERTICAL, h_cov_deriv, v_cov_deriv
from .errors import ShapeError, SingularMetric
from .jets import Point, ScalarField
from .nlconn import NonlinearConnection, delta_action
from .sampling import ValidationReport, fields_sweep_max


def _symmetrize(name, block):
    """Reuse the upper-triangle field object for the mirror entry, making
    the stored block exactly symmetric."""
    n = len(block)
    out = [[None] * n for _ in range(n)]
    for i in range(n):
        for j in range(i, n):
            out[i][j] = out[j][i] = block[i][j]
    return tuple(tuple(row) for row in out)


@dataclass(frozen=True)
class MetricStructure:
    """Horizontal and vertical metric blocks with Riemannian flags.

    A Riemannian flag asserts the block depends on x only; it lets the
    constructions drop vertical derivatives of that block exactly.
    """

    algebroid: GeneralizedAlgebroid
    gh: tuple
    gv: tuple
    h_riemannian: bool = False
    v_riemannian: bool = False

    def __post_init__(self):
        A = self.algebroid
        _check_grid("gh", self.gh, (A.p, A.p))
        _check_grid("gv", self.gv, (A.r, A.r))
        object.__setattr__(self, "gh", _symmetrize("gh", self.gh))
        object.__setattr__(self, "gv", _symmetrize("gv", self.gv))
        for flag, name, block in ((self.h_riemannian, "gh", self.gh),
                                  (self.v_riemannian, "gv", self.gv)):
            if flag:
                for row in block:
                    for f in row:
                        if f.deps is None or any(i >= A.m for i in f.deps):
                            raise ShapeError(
                                f"{name} flagged Riemannian but depends on"
                                " fiber coordinates")
        object.__setattr__(self, "_gh_inv", None)
        object.__setattr__(self, "_gv_inv", None)

    @property
    def m(self):
        return self.algebroid.m

    @property
    def p(self):
        return self.algebroid.p

    @property
    def r(self):
        return self.algebroid.r

    def gh_inv(self):
        if self._gh_inv is None:
            inv = linalg.field_matrix_inverse(
                [list(row) for row in self.gh], self.m, self.r,
                exc=SingularMetric)
            object.__setattr__(self, "_gh_inv", _symmetrize("gh_inv", inv))
        return self._gh_inv

    def gv_inv(self):
        if self._gv_inv is None:
            inv = linalg.field_matrix_inverse(
                [list(row) for row in self.gv], self.m, self.r,
                exc=SingularMetric)
            object.__setattr__(self, "_gv_inv", _symmetrize("gv_inv", inv))
        return self._gv_inv

    def inverse_at(self, point: Point):
        """Numeric inverses of both blocks at a point, with the residual
        max |g.g_inv - id| for each."""
        coords = list(point.coords())
        out = {}
        for name, block, inv in (("h", self.gh, self.gh_inv()),
                                 ("v", self.gv, self.gv_inv())):
            g = [[float(f(coords)) for f in row] for row in block]
            gi = [[float(f(coords)) for f in row] for row in inv]
            out[name] = (gi, linalg.residual_identity(g, gi))
        return out

    def signature_at(self, point: Point):
        """Pivot-sign signature (pos, neg, null) of each block at a point."""
        coords = list(point.coords())
        out = {}
        for name, block in (("h", self.gh), ("v", self.gv)):
            values = [[float(f(coords)) for f in row] for row in block]
            out[name] = linalg.signature(values)
        return out

    def h_tensor(self) -> DTensorField:
        sig = IndexSignature(((HORIZONTAL, DOWN), (HORIZONTAL, DOWN)))
        return DTensorField.from_nested(self.algebroid, sig, self.gh)

    def v_tensor(self) -> DTensorField:
        sig = IndexSignature(((VERTICAL, DOWN), (VERTICAL, DOWN)))
        return DTensorField.from_nested(self.algebroid, sig, self.gv)


def metrizability_residual(D: DConnection, G: MetricStructure,
                           samples: Sequence[Point],
                           tol: float = 1e-8) -> ValidationReport:
    """The four covariant derivatives of the metric blocks, as max residuals
    over the samples.  All four vanish iff the connection is metrical."""
    gh, gv = G.h_tensor(), G.v_tensor()
    report = ValidationReport()
    for name, tensor in (("gh_h_deriv", h_cov_deriv(D, gh)),
                         ("gv_h_deriv", h_cov_deriv(D, gv)),
                         ("gh_v_deriv", v_cov_deriv(D, gh)),
                         ("gv_v_deriv", v_cov_deriv(D, gv))):
        value, arg = fields_sweep_max(tensor.fields(), samples)
        report.add(name, value, arg, tol)
    return report


def _vertical_christoffel(G: MetricStructure):
    """vv[a][b][c] = (1/2) gv_inv^{ae} (d_c g_{eb} + d_b g_{ec} - d_e g_{bc})
    with d the fiber partials."""
    A = G.algebroid
    m, r = A.m, A.r
    ginv = G.gv_inv()
    out = []
    for a in range(r):
        plane = []
        for b in range(r):
            row = []
            for c in range(r):
                f = A.zero_field()
                for e in range(r):
                    term = (G.gv[e][b].partial(m + c)
                            + G.gv[e][c].partial(m + b)
                            - G.gv[b][c].partial(m + e))
                    f = f + ginv[a][e] * term
                row.append(f * 0.5)
            plane.append(row)
        out.append(plane)
    return out


def _hh_christoffel(G: MetricStructure, C: NonlinearConnection):
    """hh[alpha][beta][gamma]: the adapted-frame Koszul formula for the
    horizontal block, with the structure-function correction terms."""
    A = G.algebroid
    L = A.L
    ginv = G.gh_inv()
    p = A.p
    out = []
    for alpha in range(p):
        plane = []
        for beta in range(p):
            row = []
            for gamma in range(p):
                f = A.zero_field()
                for eps in range(p):
                    term = (delta_action(C, gamma, G.gh[eps][beta])
                            + delta_action(C, beta, G.gh[eps][gamma])
                            - delta_action(C, eps, G.gh[beta][gamma]))
                    for theta in range(p):
                        term = term + G.gh[theta][eps] * L[theta][gamma][beta]
                        term = term - G.gh[beta][theta] * L[theta][gamma][eps]
                        term = term - G.gh[theta][gamma] * L[theta][beta][eps]
                    f = f + ginv[alpha][eps] * term
                row.append(f * 0.5)
            plane.append(row)
        out.append(plane)
    return out


def canonical_dconnection(G: MetricStructure,
                          base: DConnection) -> DConnection:
    """The metrical d-connection built over ``base``: Koszul horizontal and
    vertical Christoffel blocks, plus base-connection corrections on the
    mixed blocks."""
    A = G.algebroid
    C = base.nlconn
    m, p, r = A.m, A.p, A.r
    gh_inv, gv_inv = G.gh_inv(), G.gv_inv()

    hh = _hh_christoffel(G, C)
    vv = _vertical_christoffel(G)

    gv_h0 = h_cov_deriv(base, G.v_tensor())   # g_{bc} h-derivative at base
    hv = []
    for a in range(r):
        plane = []
        for b in range(r):
            row = []
            for gamma in range(p):
                f = base.hv[a][b][gamma]
                for c in range(r):
                    f = f + 0.5 * gv_inv[a][c] * gv_h0[(b, c, gamma)]
                row.append(f)
            plane.append(row)
        hv.append(plane)

    gh_v0 = v_cov_deriv(base, G.h_tensor())   # g_{beta eps} v-derivative
    vh = []
    for alpha in range(p):
        plane = []
        for beta in range(p):
            row = []
            for c in range(r):
                f = base.vh[alpha][beta][c]
                for eps in range(p):
                    f = f + 0.5 * gh_inv[alpha][eps] * gh_v0[(beta, eps, c)]
                row.append(f)
            plane.append(row)
        vh.append(plane)

    return DConnection(C, hh=hh, hv=hv, vh=vh, vv=vv)


def berwald_canonical(G: MetricStructure,
                      C: NonlinearConnection) -> DConnection:
    """The canonical construction with the fiber-derivative base connection
    written out directly; valid for any p, r."""
    A = G.algebroid
    m, p, r = A.m, A.p, A.r
    gh_inv, gv_inv = G.gh_inv(), G.gv_inv()

    hh = _hh_christoffel(G, C)
    vv = _vertical_christoffel(G)

    dgamma = [[[C.gamma[a][g].partial(m + b) for g in range(p)]
               for b in range(r)] for a in range(r)]

    hv = []
    for a in range(r):
        plane = []
        for b in range(r):
            row = []
            for gamma in range(p):
                f = A.zero_field() + dgamma[a][b][gamma]
                for c in range(r):
                    cov = delta_action(C, gamma, G.gv[b][c])
                    for e in range(r):
                        cov = cov - dgamma[e][b][gamma] * G.gv[e][c]
                        cov = cov - dgamma[e][c][gamma] * G.gv[b][e]
                    f = f + 0.5 * gv_inv[a][c] * cov
                row.append(f)
            plane.append(row)
        hv.append(plane)

    vh = []
    for alpha in range(p):
        plane = []
        for beta in range(p):
            row = []
            for c in range(r):
                f = A.zero_field()
                for eps in range(p):
                    f = f + 0.5 * gh_inv[alpha][eps] \
                        * G.gh[beta][eps].partial(m + c)
                row.append(f)
            plane.append(row)
        vh.append(plane)

    return DConnection(C, hh=hh, hv=hv, vh=vh, vv=vv)


@dataclass(frozen=True)
class ObataPair:
    """Numeric Obata projector values at a point, for both families."""

    oh: tuple        # oh[alpha][eps][beta][gamma]
    oh_star: tuple
    ov: tuple        # ov[a][e][b][d]
    ov_star: tuple


def obata_pair(G: MetricStructure, point: Point) -> ObataPair:
    """O = (id - g-transpose)/2 and O* = (id + g-transpose)/2 on each
    family; they sum to the identity on (1,1)-tensors exactly."""
    coords = list(point.coords())

    def build(block, inv_block, n):
        g = [[float(f(coords)) for f in row] for row in block]
        gi = [[float(f(coords)) for f in row] for row in inv_block]
        o = [[[[0.0] * n for _ in range(n)] for _ in range(n)]
             for _ in range(n)]
        o_star = [[[[0.0] * n for _ in range(n)] for _ in range(n)]
                  for _ in range(n)]
        for a in range(n):
            for e in range(n):
                for b in range(n):
                    for c in range(n):
                        ident = 1.0 if (a == b and e == c) else 0.0
                        cross = 0.5 * g[b][c] * gi[a][e]
                        # complement twice so the pair sums to the identity
                        # exactly in floating point: after the second pass
                        # the rounding error in o is below half an ulp of
                        # ident, so the addition rounds back to ident
                        star = ident - (0.5 * ident - cross)
                        o[a][e][b][c] = ident - star
                        o_star[a][e][b][c] = star
        return o, o_star

    oh, oh_star = build(G.gh, G.gh_inv(), G.p)
    ov, ov_star = build(G.gv, G.gv_inv(), G.r)
    return ObataPair(oh=oh, oh_star=oh_star, ov=ov, ov_star=ov_star)


def _obata_fields(G: MetricStructure, block, inv_block, n, star):
    """Obata projector entries as fields: index order [a][e][b][c]."""
    A = G.algebroid
    sign = 1.0 if star else -1.0
    out = []
    for a in range(n):
        p1 = []
        for e in range(n):
            p2 = []
            for b in range(n):
                row = []
                for c in range(n):
                    ident = 0.5 if (a == b and e == c) else 0.0
                    f = ScalarField.const(A.m, A.r, ident)
                    f = f + (0.5 * sign) * block[b][c] * inv_block[a][e]
                    row.append(f)
                p2.append(row)
            p1.append(p2)
        out.append(p1)
    return out


def obata_deform(G: MetricStructure, C: NonlinearConnection,
                 xh, yh, xv, yv) -> DConnection:
    """Deform the canonical connection by arbitrary d-tensors through the
    Obata projectors; every member of this family stays metrical.

    ``xh[eta][eps][gamma]`` (p,p,p) and ``yh[d][e][gamma]`` (r,r,p) feed the
    H-blocks; ``xv[eta][eps][c]`` (p,p,r) and ``yv[d][e][c]`` (r,r,r) feed
    the V-blocks.  The last index of each parameter is the derivative index.
    """
    A = G.algebroid
    p, r = A.p, A.r
    _check_grid("xh", xh, (p, p, p))
    _check_grid("yh", yh, (r, r, p))
    _check_grid("xv", xv, (p, p, r))
    _check_grid("yv", yv, (r, r, r))
    base = berwald_canonical(G, C)
    oh = _obata_fields(G, G.gh, G.gh_inv(), p, star=False)
    ov = _obata_fields(G, G.gv, G.gv_inv(), r, star=False)

    # each deformation projects the parameter tensor onto the piece whose
    # g-lowering is antisymmetric in (upper index, differentiated index);
    # the derivative index rides along untouched, so compatibility with the
    # metric survives term by term
    def deform(block, proj, param, dim, deriv_dim):
        out = []
        for a in range(dim):
            plane = []
            for b in range(dim):
                row = []
                for c in range(deriv_dim):
                    f = block[a][b][c]
                    for e in range(dim):
                        for d in range(dim):
                            f = f + proj[a][e][d][b] * param[d][e][c]
                    row.append(f)
                plane.append(row)
            out.append(plane)
        return out

    return DConnection(C,
                       hh=deform(base.hh, oh, xh, p, p),
                       hv=deform(base.hv, ov, yh, r, p),
                       vh=deform(base.vh, oh, xv, p, r),
                       vv=deform(base.vv, ov, yv, r, r))


def base_deform(G: MetricStructure, base: DConnection) -> DConnection:
    """Metrical connection obtained from an arbitrary base d-connection by
    absorbing half of each covariant derivative of the metric."""
    A = G.algebroid
    p, r = A.p, A.r
    gh_inv, gv_inv = G.gh_inv(), G.gv_inv()
    gh_h = h_cov_deriv(base, G.h_tensor())
    gv_h = h_cov_deriv(base, G.v_tensor())
    gh_v = v_cov_deriv(base, G.h_tensor())
    gv_v = v_cov_deriv(base, G.v_tensor())

    hh = []
    for alpha in range(p):
        plane = []
        for beta in range(p):
            row = []
            for gamma in range(p):
                f = base.hh[alpha][beta][gamma]
                for eps in range(p):
                    f = f + 0.5 * gh_inv[alpha][eps] \
                        * gh_h[(eps, beta, gamma)]
                row.append(f)
            plane.append(row)
        hh.append(plane)

    hv = []
    for a in range(r):
        plane = []
        for b in range(r):
            row = []
            for gamma in range(p):
                f = base.hv[a][b][gamma]
                for e in range(r):
                    f = f + 0.5 * gv_inv[a][e] * gv_h[(e, b, gamma)]
                row.append(f)
            plane.append(row)
        hv.append(plane)

    vh = []
    for alpha in range(p):
        plane = []
        for beta in range(p):
            row = []
            for c in range(r):
                f = base.vh[alpha][beta][c]
                for eps in range(p):
                    f = f + 0.5 * gh_inv[alpha][eps] * gh_v[(eps, beta, c)]
                row.append(f)
            plane.append(row)
        vh.append(plane)

    vv = []
    for a in range(r):
        plane = []
        for b in range(r):
            row = []
            for c in range(r):
                f = base.vv[a][b][c]
                for e in range(r):
                    f = f + 0.5 * gv_inv[a][e] * gv_v[(e, b, c)]
                row.append(f)
            plane.append(row)
        vv.append(plane)

    return DConnection(base.nlconn, hh=hh, hv=hv, vh=vh, vv=vv)
