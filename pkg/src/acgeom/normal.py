"""Almost-complex normal coordinates of order N.

Implements the stagewise normalization of the structure blocks, the closed
combinatorial formula reconstructing A from the B coefficient family, an
independent degree-by-degree solver of A^2 = -I - conj(B) B used as oracle,
the order-one torsion jet in normal coordinates, and invariance under
top-degree holomorphic changes.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .jets import Jet, JetError, JetMatrix, QC
from .structure import AlmostComplexStructure, transform_structure


def lmax(alpha):
    """Largest index carrying a nonzero exponent; -1 for the zero multi-index."""
    out = -1
    for i, a in enumerate(alpha):
        if a:
            out = i
    return out


def _sub(a, b):
    return tuple(x - y for x, y in zip(a, b))


def _fits(part, whole):
    return all(x <= y for x, y in zip(part, whole))


def _mat_zeros(n, exact):
    if exact:
        return np.full((n, n), QC(0), dtype=object)
    return np.zeros((n, n), dtype=complex)


def _mat_conj(m, exact):
    if exact:
        return np.array([[c.conjugate() for c in row] for row in m], dtype=object)
    return m.conjugate()


def a_from_b_closed_form(bfam, alpha, beta, n, exact=False):
    """Coefficient matrix of the A-expansion from the B family.

    ``bfam`` maps (alpha, beta) multi-index pairs to n x n matrices; pairs
    with a vanishing first index are treated as absent.  The result is the
    sum over ordered chains of two-sided factors conj(B)^{lam,mu} B^{rho,gam}
    with the (-4)^{-(k-1)} weight per chain length k.
    """
    alpha, beta = tuple(alpha), tuple(beta)
    total = sum(alpha) + sum(beta)
    keys = [k for k in bfam if sum(k[0]) >= 1]
    factors = []
    for lam_mu in keys:
        conj_mat = _mat_conj(np.asarray(bfam[lam_mu], dtype=object if exact else complex),
                             exact)
        for rho_gam in keys:
            mat = conj_mat @ np.asarray(bfam[rho_gam],
                                        dtype=object if exact else complex)
            # z-exponent rho + mu, zbar-exponent lam + gam
            ze = tuple(r + m for r, m in zip(rho_gam[0], lam_mu[1]))
            zbe = tuple(l + g for l, g in zip(lam_mu[0], rho_gam[1]))
            factors.append((ze, zbe, mat))
    memo = {}

    def ordered_sum(a_rem, b_rem, slots):
        if slots == 0:
            if not any(a_rem) and not any(b_rem):
                return "unit"
            return None
        key = (a_rem, b_rem, slots)
        if key in memo:
            return memo[key]
        acc = None
        for ze, zbe, mat in factors:
            if not (_fits(ze, a_rem) and _fits(zbe, b_rem)):
                continue
            rest = ordered_sum(_sub(a_rem, ze), _sub(b_rem, zbe), slots - 1)
            if rest is None:
                continue
            contrib = mat if isinstance(rest, str) else mat @ rest
            acc = contrib if acc is None else acc + contrib
        memo[key] = acc
        return acc

    out = _mat_zeros(n, exact)
    for k in range(1, total // 2 + 1):
        chain = ordered_sum(alpha, beta, k)
        if chain is None or isinstance(chain, str):
            continue
        if exact:
            weight = QC(Fraction(1, (-4) ** (k - 1)))
        else:
            weight = (-4.0) ** (-(k - 1))
        out = out + weight * chain
    return out


def solve_a_degree_by_degree(b: JetMatrix) -> JetMatrix:
    """Oracle: solve A^2 = -I - conj(B) B for A = iI + S degree by degree.

    The recursion S = (i/2)(conj(B) B + S^2) gains one trusted degree per
    sweep; it is exact in rational mode.
    """
    n, order, exact = b.rows, b.order, b.exact
    r = b.conj() @ b
    half_i = QC(0, Fraction(1, 2)) if exact else 0.5j
    s = JetMatrix.zeros(n, n, b.n, order, exact=exact)
    for _ in range(order):
        s = (r + s @ s) * half_i
    ident = JetMatrix.identity(n, b.n, order, exact=exact)
    i_unit = QC(0, 1) if exact else 1j
    return ident * i_unit + s


def structure_from_b_family(bfam, n, order, exact_check=False) -> AlmostComplexStructure:
    """Build the structure whose B expansion is the given normal family.

    A is reconstructed with the closed formula; the result satisfies both
    block constraints of J^2 = -I up to truncation.
    """
    b = JetMatrix.zeros(n, n, n, order)
    for (alpha, beta), mat in bfam.items():
        if sum(alpha) + sum(beta) > order:
            raise JetError("B family entry exceeds truncation order")
        if sum(alpha) < 1:
            raise JetError("B family entries need |alpha| >= 1")
        mat = np.asarray(mat, dtype=complex)
        for k in range(n):
            for l in range(n):
                if mat[k, l]:
                    b.entries[k][l] = b.entries[k][l] + Jet.monomial(
                        n, order, alpha, beta, mat[k, l])
    a = JetMatrix.identity(n, n, order) * 1j
    for alpha, beta, mat in iter_a_family(bfam, n, order):
        for k in range(n):
            for l in range(n):
                if abs(mat[k, l]) > 0:
                    a.entries[k][l] = a.entries[k][l] + Jet.monomial(
                        n, order, alpha, beta, 0.5j * mat[k, l])
    s = AlmostComplexStructure(a, b)
    if exact_check:
        rep = s.validate()
        if rep.max_residual > 1e-10:
            raise JetError(f"reconstructed structure violates J^2 = -I "
                           f"({rep.max_residual:.2e})")
    return s


def iter_a_family(bfam, n, order):
    """All nonzero closed-form A coefficients with |alpha|,|beta| >= 1."""
    for alpha in _multi_indices(n, order):
        da = sum(alpha)
        if da < 1:
            continue
        for beta in _multi_indices(n, order - da):
            if sum(beta) < 1:
                continue
            mat = a_from_b_closed_form(bfam, alpha, beta, n)
            if np.abs(mat).max() > 0:
                yield alpha, beta, mat


def _multi_indices(n, max_total):
    if n == 0:
        yield ()
        return
    for head in range(max_total + 1):
        for tail in _multi_indices(n - 1, max_total - head):
            yield (head,) + tail


def extract_a_family(s: AlmostComplexStructure):
    """A^{alpha,beta} matrices of the structure's A-expansion (the i/2-scaled
    coefficients beyond the constant iI)."""
    n = s.n
    fam = {}
    zero_key = ((0,) * n, (0,) * n)
    for k in range(n):
        for l in range(n):
            for key, c in s.A[k, l].terms.items():
                if key == zero_key:
                    continue
                fam.setdefault(key, np.zeros((n, n), dtype=complex))
                fam[key][k, l] = -2j * c
    return fam


def pattern_violation(s: AlmostComplexStructure, max_degree=None):
    """Largest B coefficient sitting where the normal form demands zero.

    The pattern: B^{alpha,beta}_{k,l} = 0 whenever l >= lmax(alpha), which in
    particular kills every coefficient with alpha = 0.
    """
    worst = 0.0
    eff = s.B.effective_order
    cap = eff if max_degree is None else min(max_degree, eff)
    for k in range(s.n):
        for l in range(s.n):
            for (alpha, beta), c in s.B[k, l].terms.items():
                if sum(alpha) + sum(beta) > cap:
                    continue
                if l >= lmax(alpha):
                    worst = max(worst, abs(c))
    return worst


@dataclass
class NormalCoordinateResult:
    structure: AlmostComplexStructure
    phi: list                      # accumulated change, n jets of order N+1
    phi_stages: list = field(default_factory=list)
    violation: float = 0.0

    def b_family(self):
        return self.structure.b_coefficients()

    def a_family(self):
        return extract_a_family(self.structure)


def stage_change(s: AlmostComplexStructure, m: int, target_order: int):
    """Coordinate change killing the non-normal degree-m part of B."""
    n = s.n
    phi = [Jet.variable(n, target_order, k) for k in range(n)]
    bcoef = s.b_coefficients()
    changed = False
    for alpha in _multi_indices(n, m + 1):
        da = sum(alpha)
        if da < 1:
            continue
        big_l = lmax(alpha)
        for beta in _multi_indices(n, m + 1 - da):
            if da + sum(beta) != m + 1:
                continue
            ref_key = (_sub(alpha, tuple(1 if i == big_l else 0 for i in range(n))),
                       beta)
            mat = bcoef.get(ref_key)
            if mat is None:
                continue
            for k in range(n):
                c = mat[k, big_l]
                if not c:
                    continue
                changed = True
                coeff = -0.5j * np.conj(c) / alpha[big_l]
                phi[k] = phi[k] + Jet.monomial(n, target_order, beta, alpha, coeff)
    return phi, changed


def normalize_to_order(s: AlmostComplexStructure, n_order=None) -> NormalCoordinateResult:
    """Iterative normalization: for m = 1..N the degree-m part of B is pushed
    into the vanishing pattern by a degree-(m+1) change tangent to the
    identity; earlier degrees are untouched."""
    if not s.is_adapted(tol=1e-10):
        raise JetError("structure must be adapted at the origin (A(0)=iI, B(0)=0)")
    n_order = s.order if n_order is None else n_order
    if n_order > s.order:
        raise JetError("cannot normalize beyond the truncation order")
    n = s.n
    target = n_order + 1
    total = [Jet.variable(n, target, k) for k in range(n)]
    stages = []
    cur = s
    for m in range(1, n_order + 1):
        phi, changed = stage_change(cur, m, target)
        stages.append(phi)
        if changed:
            cur = transform_structure(cur, phi)
            total = [p.compose(total) for p in phi]
    return NormalCoordinateResult(cur, total, stages, pattern_violation(cur))


def torsion_jet_normal(s_normal: AlmostComplexStructure):
    """Order-one jets of the torsion coefficients from the B families.

    Returns nbar[r][k][l] (k < l) as jets of order 1 built out of the linear
    and quadratic coefficient families of B in normal coordinates.
    """
    if pattern_violation(s_normal, max_degree=2) > 1e-9:
        raise JetError("structure is not in normal form through degree 2")
    n = s_normal.n
    bcoef = s_normal.b_coefficients()
    zero = (0,) * n

    def delta(r):
        return tuple(1 if i == r else 0 for i in range(n))

    def b1(r):
        return bcoef.get((delta(r), zero), np.zeros((n, n), dtype=complex))

    def b2(r, t):
        key = (tuple(x + y for x, y in zip(delta(r), delta(t))), zero)
        m = bcoef.get(key, np.zeros((n, n), dtype=complex))
        return m if r == t else m * 0.5

    def b2bar(r, t):
        return bcoef.get((delta(r), delta(t)), np.zeros((n, n), dtype=complex))

    out = [[[Jet.zero(n, 1) for _ in range(n)] for _ in range(n)] for _ in range(n)]
    for r in range(n):
        for k in range(n):
            for l in range(k + 1, n):
                jet = Jet.constant(n, 1, 0.5j * b1(l)[r, k])
                for t in range(n):
                    cz = 0.5j * (2 * (b2(l, t)[r, k] - b2(k, t)[r, l]))
                    czb = 0.5j * b2bar(l, t)[r, k]
                    if cz:
                        jet = jet + Jet.monomial(n, 1, delta(t), zero, cz)
                    if czb:
                        jet = jet + Jet.monomial(n, 1, zero, delta(t), czb)
                out[r][k][l] = jet
                out[r][l][k] = -jet
    return out


def torsion_jet_equivalence(s_normal: AlmostComplexStructure, k: int, tol=1e-11):
    """Diagnostic for: the order-k torsion jet vanishes iff B vanishes at
    order k+1 (k in {0, 1})."""
    from .structure import torsion_tensor
    if k not in (0, 1):
        raise JetError("diagnostic defined for jet orders 0 and 1")
    tors = torsion_tensor(s_normal)
    torsion_jet_zero = tors.max_abs(max_degree=k) <= tol
    b_zero = s_normal.B.max_abs(max_degree=k + 1) <= tol
    return {"torsion_jet_zero": torsion_jet_zero,
            "b_vanishes": b_zero,
            "consistent": torsion_jet_zero == b_zero}


def verify_holomorphic_invariance(s_normal: AlmostComplexStructure, change,
                                  n_order=None):
    """Transform by Z_k = z_k + sum_{|alpha| = N+1} C^k_alpha z^alpha and
    report how much the degree <= N B coefficients moved.

    ``change`` maps (k, alpha) to a complex coefficient with |alpha| = N+1.
    """
    n = s_normal.n
    n_order = s_normal.order if n_order is None else n_order
    target = n_order + 1
    phi = [Jet.variable(n, target, k) for k in range(n)]
    zero = (0,) * n
    for (k, alpha), c in change.items():
        if sum(alpha) != n_order + 1:
            raise JetError("holomorphic change must be homogeneous of degree N+1")
        phi[k] = phi[k] + Jet.monomial(n, target, alpha, zero, c)
    base = s_normal.truncated(n_order)
    moved = transform_structure(base, phi)
    before = base.b_coefficients()
    after = moved.b_coefficients()
    worst = 0.0
    for key in set(before) | set(after):
        if sum(key[0]) + sum(key[1]) > n_order:
            continue
        mb = before.get(key, np.zeros((n, n)))
        ma = after.get(key, np.zeros((n, n)))
        worst = max(worst, np.abs(ma - mb).max())
    return {"deviation": worst,
            "pattern_violation": pattern_violation(moved),
            "structure": moved}
