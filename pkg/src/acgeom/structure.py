"""Almost complex structures as truncated jet data.

A structure is stored through the two n x n blocks A(z), B(z) of its matrix
in the complexified coordinate frame (d/dz, d/dzbar),

    M(z) = [[A, conj(B)], [B, conj(A)]],

adapted so that A(0) = i I and B(0) = 0.  This module builds the canonical
(1,0)-frame and its dual, Lie-bracket coefficient tables, the torsion tensor
with an independent cross-check, and transport under coordinate changes.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .jets import (Jet, JetError, JetMatrix, SingularMatrixError, block2x2,
                   series_inverse)


class VectorField:
    """Complexified vector field: 2n jet components on (d/dz_k, d/dzbar_k)."""

    __slots__ = ("n", "order", "components")

    def __init__(self, components):
        self.components = list(components)
        self.n = len(self.components) // 2
        self.order = self.components[0].order
        if len(self.components) != 2 * self.n:
            raise JetError("vector field needs 2n components")

    @classmethod
    def zero(cls, n, order):
        return cls([Jet.zero(n, order) for _ in range(2 * n)])

    @classmethod
    def coordinate(cls, n, order, a):
        """The coordinate field d/dz_a (a < n) or d/dzbar_{a-n} (a >= n)."""
        comps = [Jet.zero(n, order) for _ in range(2 * n)]
        comps[a] = Jet.one(n, order)
        return cls(comps)

    def __add__(self, other):
        return VectorField([x + y for x, y in zip(self.components, other.components)])

    def __sub__(self, other):
        return VectorField([x - y for x, y in zip(self.components, other.components)])

    def __mul__(self, f):
        return VectorField([f * x for x in self.components])

    __rmul__ = __mul__

    def __neg__(self):
        return VectorField([-x for x in self.components])

    def conj(self):
        comps = [c.conj() for c in self.components]
        return VectorField(comps[self.n:] + comps[: self.n])

    def is_real(self, tol=1e-12):
        return max((a - b).max_abs()
                   for a, b in zip(self.components, self.conj().components)) <= tol

    def derive(self, f: Jet) -> Jet:
        """Directional derivative of a jet function along this field."""
        acc = Jet.zero(f.n, f.order)
        for a, comp in enumerate(self.components):
            if not comp.terms:
                continue
            d = f.dz(a) if a < self.n else f.dzbar(a - self.n)
            acc = acc + comp * d
        return acc

    def bracket(self, other: "VectorField") -> "VectorField":
        """Lie bracket [X, Y] = X . grad Y - Y . grad X, componentwise."""
        return VectorField([self.derive(c) for c in other.components]) - \
            VectorField([other.derive(c) for c in self.components])

    def eval(self, point):
        return np.array([c.eval(point) for c in self.components])

    def max_abs(self, max_degree=None):
        return max(c.max_abs(max_degree) for c in self.components)

    @property
    def effective_order(self):
        return min(c.effective_order for c in self.components)


@dataclass
class ValidationReport:
    residual_square: float          # A^2 + I + conj(B) B
    residual_mixed: float           # conj(A) B + B A
    checked_order: int

    @property
    def max_residual(self):
        return max(self.residual_square, self.residual_mixed)


class AlmostComplexStructure:
    """Blocks A, B of an almost complex structure in a coordinate chart germ."""

    def __init__(self, A: JetMatrix, B: JetMatrix):
        if A.rows != A.cols or B.rows != B.cols or A.rows != B.rows:
            raise JetError("A and B must be square of equal size")
        if A.order != B.order or A.n != B.n or A.rows != A.n:
            raise JetError("A, B must be n x n jet matrices in n variables")
        self.n = A.rows
        self.order = A.order
        self.A = A
        self.B = B

    @classmethod
    def standard(cls, n, order):
        a = JetMatrix.identity(n, n, order) * 1j
        b = JetMatrix.zeros(n, n, n, order)
        return cls(a, b)

    def matrix(self) -> JetMatrix:
        """Full 2n x 2n complexified matrix of J."""
        return block2x2(self.A, self.B.conj(), self.B, self.A.conj())

    def apply(self, x: VectorField) -> VectorField:
        m = self.matrix()
        comps = []
        for i in range(2 * self.n):
            acc = Jet.zero(self.n, self.order)
            for j in range(2 * self.n):
                acc = acc + m[i, j] * x.components[j]
            comps.append(acc)
        return VectorField(comps)

    def validate(self) -> ValidationReport:
        eff = min(self.A.effective_order, self.B.effective_order)
        ident = JetMatrix.identity(self.n, self.n, self.order)
        r1 = (self.A @ self.A + ident + self.B.conj() @ self.B).max_abs(eff)
        r2 = (self.A.conj() @ self.B + self.B @ self.A).max_abs(eff)
        return ValidationReport(r1, r2, eff)

    def is_adapted(self, tol=1e-12):
        a0 = self.A.constant()
        b0 = self.B.constant()
        return (np.abs(a0 - 1j * np.eye(self.n)).max() <= tol
                and np.abs(b0).max() <= tol)

    def b_coefficients(self):
        """All B^{alpha,beta}_{k,l} coefficients as {(alpha, beta): n x n array}."""
        fam = {}
        for k in range(self.n):
            for l in range(self.n):
                for key, c in self.B[k, l].terms.items():
                    fam.setdefault(key, np.zeros((self.n, self.n), dtype=complex))
                    fam[key][k, l] = c
        return fam

    def truncated(self, new_order):
        return AlmostComplexStructure(self.A.truncated(new_order),
                                      self.B.truncated(new_order))


def validate_structure(s: AlmostComplexStructure) -> ValidationReport:
    return s.validate()


class Frame:
    """Canonical (1,0)-frame zeta and its dual, as 2n x 2n change matrices.

    Columns 0..n-1 of ``G`` carry the components of zeta_k on the coordinate
    fields; columns n..2n-1 carry conj(zeta_k).  Rows of ``Ginv`` carry the
    dual covectors on (dz, dzbar).
    """

    def __init__(self, g: JetMatrix, ginv: JetMatrix):
        self.G = g
        self.Ginv = ginv
        self.n = g.rows // 2
        self.order = g.order

    @classmethod
    def standard(cls, n, order):
        ident = JetMatrix.identity(2 * n, n, order)
        return cls(ident, ident)

    def zeta(self, k) -> VectorField:
        return VectorField([self.G[i, k] for i in range(2 * self.n)])

    def zeta_bar(self, k) -> VectorField:
        return VectorField([self.G[i, self.n + k] for i in range(2 * self.n)])

    def real_frame_field(self, k) -> VectorField:
        """zeta_k + conj(zeta_k), a real tangent field."""
        return self.zeta(k) + self.zeta_bar(k)

    def dual_pair(self, k, x: VectorField) -> Jet:
        """Pairing of zeta*_k (k < n) or its conjugate (k >= n) with x."""
        acc = Jet.zero(self.n, self.order)
        for a in range(2 * self.n):
            acc = acc + self.Ginv[k, a] * x.components[a]
        return acc

    def to_frame_components(self, x: VectorField):
        return [self.dual_pair(k, x) for k in range(2 * self.n)]

    def from_frame_components(self, comps) -> VectorField:
        out = []
        for i in range(2 * self.n):
            acc = Jet.zero(self.n, self.order)
            for a in range(2 * self.n):
                acc = acc + self.G[i, a] * comps[a]
            out.append(acc)
        return VectorField(out)

    def project10(self, x: VectorField) -> VectorField:
        comps = self.to_frame_components(x)
        zero = Jet.zero(self.n, self.order)
        return self.from_frame_components(comps[: self.n] + [zero] * self.n)

    def project01(self, x: VectorField) -> VectorField:
        comps = self.to_frame_components(x)
        zero = Jet.zero(self.n, self.order)
        return self.from_frame_components([zero] * self.n + comps[self.n:])

    def scaled(self, factors):
        """Frame with zeta_k replaced by factors[k] * zeta_k (factors[k](0) != 0)."""
        n = self.n
        diag = JetMatrix.zeros(2 * n, 2 * n, n, self.order)
        for k in range(n):
            diag.entries[k][k] = factors[k]
            diag.entries[n + k][n + k] = factors[k].conj()
        g = self.G @ diag
        return Frame(g, g.inverse())


def frame_and_dual(s: AlmostComplexStructure) -> Frame:
    """Frame zeta_k = (d/dz_k)^{1,0} and dual via the 2n x 2n inverse."""
    n, order = s.n, s.order
    ident = JetMatrix.identity(n, n, order)
    fz = (ident - 1j * s.A) * 0.5
    fzb = s.B * (-0.5j)
    g = block2x2(fz, fzb.conj(), fzb, fz.conj())
    try:
        ginv = g.inverse()
    except SingularMatrixError as exc:
        raise SingularMatrixError(
            "frame matrix singular at the origin; structure is not adapted") from exc
    return Frame(g, ginv)


def projection_via_matrix(s: AlmostComplexStructure, x: VectorField, kind: str):
    """(I -+ iJ)/2 projection, kept as an independent path for testing."""
    jx = s.apply(x)
    sign = -1j if kind == "10" else 1j
    return VectorField([(c + sign * jc) * 0.5
                        for c, jc in zip(x.components, jx.components)])


class BracketCoefficients:
    """Tables M, N, U, V of frame-bracket coefficients.

    Families are indexed by the output direction k; entries by the bracket
    arguments (j, r):

        [zetabar_j, zetabar_r]^{1,0} = sum_k N^k_{j,r} zeta_k
        [zetabar_j, zetabar_r]^{0,1} = sum_k M^k_{j,r} zetabar_k
        [zeta_j, zetabar_r]^{1,0}    = sum_k U^k_{j,r} zeta_k
        [zeta_j, zetabar_r]^{0,1}    = sum_k V^k_{j,r} zetabar_k
    """

    def __init__(self, M, N, U, V):
        self.M = M
        self.N = N
        self.U = U
        self.V = V
        self.n = len(M)

    @property
    def effective_order(self):
        return min(fam[k, l].effective_order
                   for tab in (self.M, self.N, self.U, self.V)
                   for fam in tab for k in range(self.n) for l in range(self.n))

    def max_abs(self):
        return max(fam.max_abs() for tab in (self.M, self.N, self.U, self.V)
                   for fam in tab)


def bracket_coefficients(s: AlmostComplexStructure, frame: Frame | None = None):
    """Coefficient tables of the frame-field Lie brackets."""
    frame = frame_and_dual(s) if frame is None else frame
    n, order = s.n, s.order
    mbar = [JetMatrix.zeros(n, n, n, order) for _ in range(n)]
    nbar = [JetMatrix.zeros(n, n, n, order) for _ in range(n)]
    u = [JetMatrix.zeros(n, n, n, order) for _ in range(n)]
    v = [JetMatrix.zeros(n, n, n, order) for _ in range(n)]
    zetas = [frame.zeta(k) for k in range(n)]
    zetabars = [frame.zeta_bar(k) for k in range(n)]
    for j in range(n):
        for r in range(n):
            if r > j:
                fc = frame.to_frame_components(zetas[j].bracket(zetas[r]))
                for k in range(n):
                    mbar[k].entries[j][r] = fc[k]
                    mbar[k].entries[r][j] = -fc[k]
                    nbar[k].entries[j][r] = fc[n + k]
                    nbar[k].entries[r][j] = -fc[n + k]
            fc = frame.to_frame_components(zetas[j].bracket(zetabars[r]))
            for k in range(n):
                u[k].entries[j][r] = fc[k]
                v[k].entries[j][r] = fc[n + k]
    m = [mb.conj() for mb in mbar]
    nn = [nb.conj() for nb in nbar]
    return BracketCoefficients(m, nn, u, v)


class TorsionTensor:
    """Components Nbar^r_{k,l} of the torsion in the zeta-frame."""

    def __init__(self, nbar, frame: Frame):
        self.nbar = nbar          # list over r of antisymmetric n x n JetMatrix
        self.frame = frame
        self.n = len(nbar)

    def max_abs(self, max_degree=None):
        return max(m.max_abs(max_degree) for m in self.nbar)

    def coefficient(self, r, k, l) -> Jet:
        return self.nbar[r][k, l]

    def apply(self, xi: VectorField, eta: VectorField) -> VectorField:
        """tau_J(xi, eta) as a vector field (values in T^{0,1})."""
        fr = self.frame
        n, order = self.n, fr.order
        xi_c = fr.to_frame_components(xi)
        eta_c = fr.to_frame_components(eta)
        out_frame = [Jet.zero(n, order) for _ in range(2 * n)]
        for k in range(n):
            for l in range(k + 1, n):
                pair = xi_c[k] * eta_c[l] - eta_c[k] * xi_c[l]
                if not pair.terms:
                    continue
                for r in range(n):
                    out_frame[n + r] = out_frame[n + r] + self.nbar[r][k, l] * pair
        return fr.from_frame_components(out_frame)

    def nijenhuis(self, xi: VectorField, eta: VectorField) -> VectorField:
        """N_J = tau_J + conj(tau_J) evaluated on (complexified) fields."""
        fr = self.frame
        n, order = self.n, fr.order
        xi_c = fr.to_frame_components(xi)
        eta_c = fr.to_frame_components(eta)
        out_frame = [Jet.zero(n, order) for _ in range(2 * n)]
        for k in range(n):
            for l in range(k + 1, n):
                pair10 = xi_c[k] * eta_c[l] - eta_c[k] * xi_c[l]
                pair01 = (xi_c[n + k] * eta_c[n + l] - eta_c[n + k] * xi_c[n + l])
                for r in range(n):
                    if pair10.terms:
                        out_frame[n + r] = out_frame[n + r] + self.nbar[r][k, l] * pair10
                    if pair01.terms:
                        out_frame[r] = out_frame[r] + self.nbar[r][k, l].conj() * pair01
        return fr.from_frame_components(out_frame)


def torsion_tensor(s: AlmostComplexStructure, frame: Frame | None = None,
                   bc: BracketCoefficients | None = None) -> TorsionTensor:
    frame = frame_and_dual(s) if frame is None else frame
    bc = bracket_coefficients(s, frame) if bc is None else bc
    nbar = [b.conj() for b in bc.N]
    return TorsionTensor(nbar, frame)


def nijenhuis_bracket_formula(s: AlmostComplexStructure, xi: VectorField,
                              eta: VectorField) -> VectorField:
    """4 N_J(xi, eta) = [xi,eta] + J[xi,J eta] + J[J xi,eta] - [J xi,J eta]."""
    jxi, jeta = s.apply(xi), s.apply(eta)
    total = (xi.bracket(eta) + s.apply(xi.bracket(jeta))
             + s.apply(jxi.bracket(eta)) - jxi.bracket(jeta))
    return VectorField([0.25 * c for c in total.components])


def nijenhuis_check(s: AlmostComplexStructure, tors: TorsionTensor | None = None):
    """Max deviation between frame-bracket torsion and the 4N_J identity.

    Both paths are evaluated on all coordinate-field pairs and compared up to
    the joint effective order.
    """
    tors = torsion_tensor(s) if tors is None else tors
    n, order = s.n, s.order
    worst = 0.0
    for a in range(2 * n):
        for b in range(a + 1, 2 * n):
            xi = VectorField.coordinate(n, order, a)
            eta = VectorField.coordinate(n, order, b)
            via_tensor = tors.nijenhuis(xi, eta)
            via_brackets = nijenhuis_bracket_formula(s, xi, eta)
            diff = via_tensor - via_brackets
            eff = min(via_tensor.effective_order, via_brackets.effective_order)
            worst = max(worst, diff.max_abs(eff))
    return worst


def _jacobian(phi, order):
    """Complexified 2n x 2n Jacobian of a polynomial coordinate change."""
    n = len(phi)
    rows = []
    for k in range(n):
        rows.append([phi[k].dz(s).trusted(order) for s in range(n)]
                    + [phi[k].dzbar(s).trusted(order) for s in range(n)])
    for k in range(n):
        rows.append([phi[k].dzbar(s).conj().trusted(order) for s in range(n)]
                    + [phi[k].dz(s).conj().trusted(order) for s in range(n)])
    return JetMatrix(rows)


def transform_structure(s: AlmostComplexStructure, phi) -> AlmostComplexStructure:
    """Push the structure through the coordinate change Z = phi(z).

    ``phi`` lists the n jets of the new coordinates (polynomial germs); the
    matrix transforms by conjugation with the Jacobian and composition with
    the inverse germ.  Working one order above the truncation keeps every
    reported degree trustworthy.
    """
    w = max(s.order, max(p.order for p in phi)) + 1
    phi_w = [p.padded(w) for p in phi]
    psi = series_inverse(phi_w)
    dphi = _jacobian(phi_w, w)
    dpsi = _jacobian(psi, w)
    m = s.matrix().with_order(w)
    m_of_psi = m.compose(psi)
    dphi_of_psi = dphi.compose(psi)
    m_new = dphi_of_psi @ m_of_psi @ dpsi
    n = s.n
    a_new = JetMatrix([[m_new[i, j].truncated(s.order) for j in range(n)]
                       for i in range(n)])
    b_new = JetMatrix([[m_new[n + i, j].truncated(s.order) for j in range(n)]
                       for i in range(n)])
    return AlmostComplexStructure(a_new, b_new)


def transform_vector_field(x: VectorField, phi, psi=None) -> VectorField:
    """Components of x in the new coordinates Z = phi(z)."""
    w = max(x.order, max(p.order for p in phi)) + 1
    phi_w = [p.padded(w) for p in phi]
    psi = series_inverse(phi_w) if psi is None else [p.padded(w) for p in psi]
    dphi_of_psi = _jacobian(phi_w, w).compose(psi)
    comps = [c.with_order(w).compose(psi) for c in x.components]
    out = []
    for i in range(2 * x.n):
        acc = Jet.zero(x.n, w)
        for j in range(2 * x.n):
            acc = acc + dphi_of_psi[i, j] * comps[j]
        out.append(acc.truncated(x.order))
    return VectorField(out)


def adapt_linear(s: AlmostComplexStructure):
    """Complex-linear change making A(0) = i I, B(0) = 0.

    Returns (adapted structure, phi) where phi is the linear change germ.
    Built from a basis of the +i eigenspace of the constant matrix.
    """
    n, order = s.n, s.order
    m0 = s.matrix().constant()
    if np.abs(m0 @ m0 + np.eye(2 * n)).max() > 1e-8:
        raise JetError("constant term does not square to -identity")
    w, vecs = np.linalg.eig(m0)
    plus = [vecs[:, i] for i in range(2 * n) if abs(w[i] - 1j) < 1e-6]
    if len(plus) != n:
        raise JetError("defective eigenstructure: +i eigenspace has wrong dimension")
    q = np.zeros((2 * n, 2 * n), dtype=complex)
    for j, vec in enumerate(plus):
        q[:, j] = vec
        q[:, n + j] = np.concatenate([vec[n:], vec[:n]]).conjugate()
    if abs(np.linalg.det(q)) < 1e-10:
        raise JetError("eigenvectors do not span; cannot adapt")
    lin = np.linalg.inv(q)
    phi = []
    for k in range(n):
        acc = Jet.zero(n, order)
        for l in range(n):
            acc = acc + lin[k, l] * Jet.variable(n, order, l) \
                + lin[k, n + l] * Jet.variable(n, order, l, conjugate=True)
        phi.append(acc)
    return transform_structure(s, phi), phi


def structure_from_deformation(n, order, seed=0, magnitude=0.08, entries=6,
                               max_degree=2):
    """Seeded test generator: J = (I+P) J0 (I+P)^{-1} with P a small real
    perturbation, then a linear adaptation at the origin."""
    rng = np.random.default_rng(seed)
    p = JetMatrix.zeros(2 * n, 2 * n, n, order)
    for _ in range(entries):
        i = int(rng.integers(0, 2 * n))
        j = int(rng.integers(0, 2 * n))
        d = int(rng.integers(0, max_degree + 1))
        exps = [0] * (2 * n)
        for _ in range(d):
            exps[int(rng.integers(0, 2 * n))] += 1
        c = magnitude * complex(rng.normal(), rng.normal())
        p.entries[i][j] = p.entries[i][j] + Jet.monomial(
            n, order, tuple(exps[:n]), tuple(exps[n:]), c)
    # conjugate-symmetrize for reality of J
    swapped = JetMatrix([[p[(i + n) % (2 * n), (j + n) % (2 * n)].conj()
                          for j in range(2 * n)] for i in range(2 * n)])
    p = (p + swapped) * 0.5
    p0 = np.abs(p.constant())
    if p0.sum(axis=1).max() >= 1.0:
        raise JetError("perturbation too large: I+P may be singular")
    ident = JetMatrix.identity(2 * n, n, order)
    j0 = JetMatrix.from_constant(
        np.diag([1j] * n + [-1j] * n), n, order)
    m = (ident + p) @ j0 @ (ident + p).inverse()
    a = JetMatrix([[m[i, j] for j in range(n)] for i in range(n)])
    b = JetMatrix([[m[n + i, j] for j in range(n)] for i in range(n)])
    raw = AlmostComplexStructure(a, b)
    adapted, _ = adapt_linear(raw)
    return adapted
