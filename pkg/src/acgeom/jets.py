"""Sparse graded arithmetic of truncated power series in conjugate-pair variables.

A jet is a polynomial in (z_1..z_n, zbar_1..zbar_n) truncated at a fixed total
degree.  Coefficients are ``complex`` by default; an exact rational-complex
mode (:class:`QC`) is available for oracle computations that must be checked
with zero discrepancy.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Sequence

import numpy as np

# Coefficients smaller than this are dropped after float arithmetic; the value
# sits below every test tolerance in the suite.
PRUNE_EPS = 1e-14

# Above this many coefficient pairs, multiplication switches to the vectorised
# numpy convolution path.
_MUL_NUMPY_CUTOFF = 400


class JetError(ValueError):
    """Structural misuse: dimension/order mismatch or bad variable index."""


class SingularMatrixError(JetError):
    """Constant term of a jet matrix is not invertible."""

    def __init__(self, message: str, cond: float | None = None):
        super().__init__(message)
        self.cond = cond


class QC:
    """Exact complex scalar with rational real and imaginary parts."""

    __slots__ = ("re", "im")

    def __init__(self, re=0, im=0):
        self.re = re if isinstance(re, Fraction) else Fraction(re)
        self.im = im if isinstance(im, Fraction) else Fraction(im)

    def __add__(self, other):
        other = _coerce_qc(other)
        if other is None:
            return NotImplemented
        return QC(self.re + other.re, self.im + other.im)

    __radd__ = __add__

    def __sub__(self, other):
        other = _coerce_qc(other)
        if other is None:
            return NotImplemented
        return QC(self.re - other.re, self.im - other.im)

    def __rsub__(self, other):
        other = _coerce_qc(other)
        if other is None:
            return NotImplemented
        return other - self

    def __mul__(self, other):
        other = _coerce_qc(other)
        if other is None:
            return NotImplemented
        return QC(self.re * other.re - self.im * other.im,
                  self.re * other.im + self.im * other.re)

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = _as_qc(other)
        d = other.re * other.re + other.im * other.im
        if d == 0:
            raise ZeroDivisionError("division by exact zero")
        return QC((self.re * other.re + self.im * other.im) / d,
                  (self.im * other.re - self.re * other.im) / d)

    def __neg__(self):
        return QC(-self.re, -self.im)

    def conjugate(self):
        return QC(self.re, -self.im)

    def __eq__(self, other):
        if isinstance(other, QC):
            return self.re == other.re and self.im == other.im
        if isinstance(other, (int, Fraction)):
            return self.im == 0 and self.re == other
        return NotImplemented

    def __hash__(self):
        return hash((self.re, self.im))

    def __bool__(self):
        return self.re != 0 or self.im != 0

    def __abs__(self):
        return abs(complex(self))

    def __complex__(self):
        return complex(self.re) + 1j * complex(self.im)

    def __repr__(self):
        return f"QC({self.re!r}, {self.im!r})"


def _coerce_qc(x):
    if isinstance(x, QC):
        return x
    if isinstance(x, (int, Fraction)):
        return QC(x)
    if isinstance(x, str):
        return QC(Fraction(x))
    return None


def _as_qc(x):
    got = _coerce_qc(x)
    if got is None:
        raise JetError(f"cannot mix exact jets with coefficient {x!r}")
    return got


QC_I = QC(0, 1)
QC_HALF_I = QC(0, Fraction(1, 2))


def _degree(key):
    alpha, beta = key
    return sum(alpha) + sum(beta)


def _grade_key(key):
    return (_degree(key), key[0], key[1])


class Jet:
    """Truncated power series; immutable value type.

    ``terms`` maps ``(alpha, beta)`` exponent-tuple pairs to nonzero
    coefficients; no stored key exceeds total degree ``order``.
    ``effective_order`` tracks the degree up to which coefficients are
    trusted (differentiation decrements it).
    """

    __slots__ = ("n", "order", "effective_order", "exact", "terms", "_pack")

    def __init__(self, n, order, terms=None, effective_order=None, exact=False):
        if order < 0:
            raise JetError("order must be >= 0")
        self.n = n
        self.order = order
        self.exact = exact
        self.effective_order = order if effective_order is None else min(effective_order, order)
        self._pack = None
        clean = {}
        if terms:
            for key in sorted(terms, key=_grade_key):
                c = terms[key]
                if self._negligible(c):
                    continue
                alpha, beta = key
                if len(alpha) != n or len(beta) != n:
                    raise JetError(f"multi-index length mismatch for n={n}: {key}")
                if _degree(key) > order:
                    raise JetError(f"term {key} exceeds truncation order {order}")
                clean[(tuple(alpha), tuple(beta))] = c if exact else complex(c)
        self.terms = clean

    def _negligible(self, c):
        if self.exact:
            return not c
        return abs(c) < PRUNE_EPS

    # -- constructors -------------------------------------------------------

    @classmethod
    def zero(cls, n, order, exact=False):
        return cls(n, order, {}, exact=exact)

    @classmethod
    def constant(cls, n, order, c, exact=False):
        z = (0,) * n
        return cls(n, order, {(z, z): c}, exact=exact)

    @classmethod
    def one(cls, n, order, exact=False):
        return cls.constant(n, order, QC(1) if exact else 1.0, exact=exact)

    @classmethod
    def variable(cls, n, order, k, conjugate=False, exact=False):
        if not 0 <= k < n:
            raise JetError(f"variable index {k} out of range for n={n}")
        alpha = tuple(1 if i == k and not conjugate else 0 for i in range(n))
        beta = tuple(1 if i == k and conjugate else 0 for i in range(n))
        c = QC(1) if exact else 1.0
        return cls(n, order, {(alpha, beta): c}, exact=exact)

    @classmethod
    def monomial(cls, n, order, alpha, beta, c, exact=False):
        return cls(n, order, {(tuple(alpha), tuple(beta)): c}, exact=exact)

    # -- bookkeeping --------------------------------------------------------

    def _check_binary(self, other):
        if self.n != other.n or self.order != other.order:
            raise JetError(
                f"jet mismatch: (n={self.n}, order={self.order}) vs "
                f"(n={other.n}, order={other.order})")
        if self.exact != other.exact:
            raise JetError("cannot mix exact and floating jets")

    def truncated(self, new_order):
        """Copy truncated to a (usually lower) order."""
        terms = {k: c for k, c in self.terms.items() if _degree(k) <= new_order}
        return Jet(self.n, new_order, terms,
                   effective_order=min(self.effective_order, new_order),
                   exact=self.exact)

    def with_order(self, new_order):
        """Re-embed at a higher truncation order; trusted degrees unchanged."""
        if new_order < self.order:
            return self.truncated(new_order)
        return Jet(self.n, new_order, self.terms,
                   effective_order=self.effective_order, exact=self.exact)

    def padded(self, new_order):
        """Re-embed treating the content as an exact polynomial: every degree
        up to the new order is trusted.  Only valid for germ data that really
        is polynomial (coordinate changes, constructed fixtures)."""
        if new_order < self.order:
            return self.truncated(new_order)
        return Jet(self.n, new_order, self.terms,
                   effective_order=new_order, exact=self.exact)

    def trusted(self, eff):
        """Copy with the stated effective order (caller vouches for it)."""
        return Jet(self.n, self.order, self.terms, effective_order=eff,
                   exact=self.exact)

    def coeff(self, alpha, beta):
        default = QC(0) if self.exact else 0j
        return self.terms.get((tuple(alpha), tuple(beta)), default)

    @property
    def constant_term(self):
        z = (0,) * self.n
        return self.coeff(z, z)

    def degree_slice(self, d):
        """Coefficients of total degree exactly d, as a dict."""
        return {k: c for k, c in self.terms.items() if _degree(k) == d}

    def max_abs(self, max_degree=None):
        m = 0.0
        for k, c in self.terms.items():
            if max_degree is not None and _degree(k) > max_degree:
                continue
            m = max(m, abs(c))
        return m

    def is_zero(self, tol=0.0, max_degree=None):
        return self.max_abs(max_degree) <= tol

    # -- ring operations ----------------------------------------------------

    def __add__(self, other):
        if not isinstance(other, Jet):
            other = Jet.constant(self.n, self.order, other, exact=self.exact)
        self._check_binary(other)
        terms = dict(self.terms)
        for k, c in other.terms.items():
            terms[k] = terms.get(k, 0 if not self.exact else QC(0)) + c
        return Jet(self.n, self.order, terms,
                   effective_order=min(self.effective_order, other.effective_order),
                   exact=self.exact)

    __radd__ = __add__

    def __neg__(self):
        return Jet(self.n, self.order, {k: -c for k, c in self.terms.items()},
                   effective_order=self.effective_order, exact=self.exact)

    def __sub__(self, other):
        if not isinstance(other, Jet):
            other = Jet.constant(self.n, self.order, other, exact=self.exact)
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, Jet):
            return self._scale(other)
        self._check_binary(other)
        if (not self.exact and len(self.terms) * len(other.terms) > _MUL_NUMPY_CUTOFF):
            return self._mul_numpy(other)
        terms = {}
        zero = QC(0) if self.exact else 0j
        for (a1, b1), c1 in self.terms.items():
            d1 = sum(a1) + sum(b1)
            for (a2, b2), c2 in other.terms.items():
                if d1 + sum(a2) + sum(b2) > self.order:
                    continue
                key = (tuple(x + y for x, y in zip(a1, a2)),
                       tuple(x + y for x, y in zip(b1, b2)))
                terms[key] = terms.get(key, zero) + c1 * c2
        return Jet(self.n, self.order, terms,
                   effective_order=min(self.effective_order, other.effective_order),
                   exact=self.exact)

    def _scale(self, c):
        if self.exact:
            c = _as_qc(c)
        elif isinstance(c, (int, float, complex, np.integer, np.floating,
                            np.complexfloating)):
            c = complex(c)
        else:
            return NotImplemented
        return Jet(self.n, self.order, {k: v * c for k, v in self.terms.items()},
                   effective_order=self.effective_order, exact=self.exact)

    __rmul__ = __mul__

    def _packed(self):
        if self._pack is None:
            t = len(self.terms)
            alphas = np.zeros((t, self.n), dtype=np.int64)
            betas = np.zeros((t, self.n), dtype=np.int64)
            coeffs = np.zeros(t, dtype=complex)
            for i, ((a, b), c) in enumerate(self.terms.items()):
                alphas[i] = a
                betas[i] = b
                coeffs[i] = c
            self._pack = (alphas, betas, coeffs)
        return self._pack

    def _mul_numpy(self, other):
        a1, b1, c1 = self._packed()
        a2, b2, c2 = other._packed()
        ea = (a1[:, None, :] + a2[None, :, :]).reshape(-1, self.n)
        eb = (b1[:, None, :] + b2[None, :, :]).reshape(-1, self.n)
        cc = (c1[:, None] * c2[None, :]).ravel()
        keep = (ea.sum(axis=1) + eb.sum(axis=1)) <= self.order
        ea, eb, cc = ea[keep], eb[keep], cc[keep]
        radix = self.order + 1
        powers = radix ** np.arange(2 * self.n, dtype=np.int64)
        keys = np.concatenate([ea, eb], axis=1) @ powers
        uniq, first, inv = np.unique(keys, return_index=True, return_inverse=True)
        acc = np.zeros(len(uniq), dtype=complex)
        np.add.at(acc, inv, cc)
        terms = {}
        for i, j in enumerate(first):
            c = acc[i]
            if abs(c) >= PRUNE_EPS:
                terms[(tuple(int(x) for x in ea[j]), tuple(int(x) for x in eb[j]))] = c
        return Jet(self.n, self.order, terms,
                   effective_order=min(self.effective_order, other.effective_order),
                   exact=False)

    def __eq__(self, other):
        if not isinstance(other, Jet):
            return NotImplemented
        return (self.n == other.n and self.order == other.order
                and self.terms == other.terms)

    def __hash__(self):
        return hash((self.n, self.order, tuple(self.terms.items())))

    # -- calculus -----------------------------------------------------------

    def conj(self):
        """Anti-involution: (alpha, beta, c) -> (beta, alpha, conj c)."""
        terms = {(b, a): c.conjugate() for (a, b), c in self.terms.items()}
        return Jet(self.n, self.order, terms,
                   effective_order=self.effective_order, exact=self.exact)

    def dz(self, k):
        """Formal partial derivative with respect to z_k."""
        return self._partial(k, conjugate=False)

    def dzbar(self, k):
        """Formal partial derivative with respect to zbar_k."""
        return self._partial(k, conjugate=True)

    def _partial(self, k, conjugate):
        if not 0 <= k < self.n:
            raise JetError(f"variable index {k} out of range for n={self.n}")
        terms = {}
        for (a, b), c in self.terms.items():
            e = b[k] if conjugate else a[k]
            if e == 0:
                continue
            if conjugate:
                key = (a, b[:k] + (e - 1,) + b[k + 1:])
            else:
                key = (a[:k] + (e - 1,) + a[k + 1:], b)
            terms[key] = c * e
        return Jet(self.n, self.order, terms,
                   effective_order=self.effective_order - 1, exact=self.exact)

    def eval(self, point):
        """Evaluate with zbar_k = conj(z_k)."""
        z = np.asarray(point, dtype=complex)
        if z.shape != (self.n,):
            raise JetError(f"point must have {self.n} complex components")
        zb = z.conjugate()
        total = 0j
        for (a, b), c in self.terms.items():
            m = complex(c)
            for i in range(self.n):
                if a[i]:
                    m *= z[i] ** a[i]
                if b[i]:
                    m *= zb[i] ** b[i]
            total += m
        return total

    def compose(self, subs: Sequence["Jet"], allow_affine=False):
        """Substitute z_k -> subs[k] and zbar_k -> conj(subs[k]).

        ``subs`` may also carry 2n jets, the last n of which must be the
        conjugates of the first n.
        """
        subs = list(subs)
        if len(subs) == 2 * self.n:
            for k in range(self.n):
                if (subs[self.n + k] - subs[k].conj()).max_abs() > 1e-12:
                    raise JetError(
                        f"substitution for zbar_{k} is not the conjugate of the one for z_{k}")
            subs = subs[: self.n]
        if len(subs) != self.n:
            raise JetError(f"expected {self.n} substitution jets, got {len(subs)}")
        subs = [s.truncated(self.order) if s.order > self.order else s for s in subs]
        for k, s in enumerate(subs):
            if s.order != self.order:
                raise JetError("substitution jets must match the composed jet's order")
            if s.exact != self.exact:
                raise JetError("cannot mix exact and floating jets")
            if not allow_affine and abs(s.constant_term) > (0 if self.exact else PRUNE_EPS):
                raise JetError(
                    f"substitution for z_{k} has a nonzero constant term; "
                    "pass allow_affine=True to opt in")
        conj_subs = [s.conj() for s in subs]
        eff = min([self.effective_order] + [s.effective_order for s in subs])
        out = Jet.zero(subs[0].n, self.order, exact=self.exact)
        pow_cache = {}

        def power(base_jet, tag, e):
            if e == 0:
                return None
            got = pow_cache.get((tag, e))
            if got is None:
                lower = power(base_jet, tag, e - 1)
                got = base_jet if lower is None else lower * base_jet
                pow_cache[(tag, e)] = got
            return got

        for (a, b), c in self.terms.items():
            term = None
            for k in range(self.n):
                for tag, base, e in (("z", subs[k], a[k]), ("zb", conj_subs[k], b[k])):
                    p = power(base, (tag, k), e)
                    if p is not None:
                        term = p if term is None else term * p
            if term is None:
                out = out + Jet.constant(subs[0].n, self.order, c, exact=self.exact)
            else:
                out = out + term * c
        return Jet(out.n, out.order, out.terms, effective_order=eff, exact=self.exact)

    # -- serialization ------------------------------------------------------

    def to_records(self):
        """Graded-lex sorted list of {alpha, beta, re, im} records."""
        recs = []
        for (a, b) in sorted(self.terms, key=_grade_key):
            c = complex(self.terms[(a, b)])
            recs.append({"alpha": list(a), "beta": list(b), "re": c.real, "im": c.imag})
        return recs

    @classmethod
    def from_records(cls, n, order, records):
        terms = {}
        for r in records:
            key = (tuple(r["alpha"]), tuple(r["beta"]))
            terms[key] = complex(r["re"], r["im"])
        return cls(n, order, terms)

    def __repr__(self):
        if not self.terms:
            return f"Jet(n={self.n}, N={self.order}; 0)"
        bits = []
        for key in list(self.terms)[:4]:
            a, b = key
            mono = "".join(f"z{i + 1}^{e}" for i, e in enumerate(a) if e)
            mono += "".join(f"zb{i + 1}^{e}" for i, e in enumerate(b) if e)
            bits.append(f"({self.terms[key]})*{mono or '1'}")
        more = " + ..." if len(self.terms) > 4 else ""
        return f"Jet(n={self.n}, N={self.order}; {' + '.join(bits)}{more})"


class JetMatrix:
    """Dense matrix with Jet entries, all sharing (n, order)."""

    __slots__ = ("rows", "cols", "n", "order", "exact", "entries")

    def __init__(self, entries):
        self.entries = [list(row) for row in entries]
        self.rows = len(self.entries)
        self.cols = len(self.entries[0]) if self.rows else 0
        probe = self.entries[0][0]
        self.n, self.order, self.exact = probe.n, probe.order, probe.exact
        for row in self.entries:
            if len(row) != self.cols:
                raise JetError("ragged jet matrix")
            for e in row:
                if e.n != self.n or e.order != self.order or e.exact != self.exact:
                    raise JetError("jet matrix entries must share (n, order, mode)")

    # -- constructors -------------------------------------------------------

    @classmethod
    def zeros(cls, rows, cols, n, order, exact=False):
        return cls([[Jet.zero(n, order, exact=exact) for _ in range(cols)]
                    for _ in range(rows)])

    @classmethod
    def identity(cls, size, n, order, exact=False):
        m = cls.zeros(size, size, n, order, exact=exact)
        for i in range(size):
            m.entries[i][i] = Jet.one(n, order, exact=exact)
        return m

    @classmethod
    def from_constant(cls, array, n, order, exact=False):
        if exact:
            return cls([[Jet.constant(n, order, c, exact=True) for c in row]
                        for row in array])
        array = np.asarray(array, dtype=complex)
        return cls([[Jet.constant(n, order, array[i, j])
                     for j in range(array.shape[1])] for i in range(array.shape[0])])

    # -- structure ----------------------------------------------------------

    def __getitem__(self, idx):
        i, j = idx
        return self.entries[i][j]

    @property
    def effective_order(self):
        return min(e.effective_order for row in self.entries for e in row)

    def map(self, fn):
        return JetMatrix([[fn(e) for e in row] for row in self.entries])

    def truncated(self, new_order):
        return self.map(lambda e: e.truncated(new_order))

    def with_order(self, new_order):
        return self.map(lambda e: e.with_order(new_order))

    def conj(self):
        return self.map(lambda e: e.conj())

    @property
    def T(self):
        return JetMatrix([[self.entries[i][j] for i in range(self.rows)]
                          for j in range(self.cols)])

    @property
    def H(self):
        return self.conj().T

    def dz(self, k):
        return self.map(lambda e: e.dz(k))

    def dzbar(self, k):
        return self.map(lambda e: e.dzbar(k))

    def compose(self, subs, allow_affine=False):
        return self.map(lambda e: e.compose(subs, allow_affine=allow_affine))

    def eval(self, point):
        out = np.zeros((self.rows, self.cols), dtype=complex)
        for i in range(self.rows):
            for j in range(self.cols):
                out[i, j] = self.entries[i][j].eval(point)
        return out

    def constant(self):
        """Constant-term matrix as a numpy array (or QC nested list when exact)."""
        if self.exact:
            return [[e.constant_term for e in row] for row in self.entries]
        return np.array([[e.constant_term for e in row] for row in self.entries],
                        dtype=complex)

    def max_abs(self, max_degree=None):
        return max(e.max_abs(max_degree) for row in self.entries for e in row)

    # -- algebra ------------------------------------------------------------

    def __add__(self, other):
        self._shape_check(other)
        return JetMatrix([[a + b for a, b in zip(r1, r2)]
                          for r1, r2 in zip(self.entries, other.entries)])

    def __sub__(self, other):
        self._shape_check(other)
        return JetMatrix([[a - b for a, b in zip(r1, r2)]
                          for r1, r2 in zip(self.entries, other.entries)])

    def __neg__(self):
        return self.map(lambda e: -e)

    def __mul__(self, scalar):
        return self.map(lambda e: e * scalar)

    __rmul__ = __mul__

    def __matmul__(self, other):
        if self.cols != other.rows:
            raise JetError(f"matmul shape mismatch {self.rows}x{self.cols} @ "
                           f"{other.rows}x{other.cols}")
        out = []
        for i in range(self.rows):
            row = []
            for j in range(other.cols):
                acc = Jet.zero(self.n, self.order, exact=self.exact)
                for s in range(self.cols):
                    acc = acc + self.entries[i][s] * other.entries[s][j]
                row.append(acc)
            out.append(row)
        return JetMatrix(out)

    def _shape_check(self, other):
        if self.rows != other.rows or self.cols != other.cols:
            raise JetError("jet matrix shape mismatch")

    def inverse(self):
        """Neumann-series inverse; requires an invertible constant term."""
        if self.rows != self.cols:
            raise JetError("only square jet matrices can be inverted")
        size = self.rows
        if self.exact:
            m0_inv = _exact_inverse(self.constant(), size)
            m0_inv_mat = JetMatrix.from_constant(m0_inv, self.n, self.order, exact=True)
        else:
            m0 = self.constant()
            cond = np.linalg.cond(m0)
            if not np.isfinite(cond) or cond > 1e12:
                raise SingularMatrixError(
                    f"constant term is numerically singular (cond={cond:.3e})", cond)
            m0_inv_mat = JetMatrix.from_constant(np.linalg.inv(m0), self.n, self.order)
        # M = M0 (I + M0^-1 (M - M0));  (I + X)^-1 = sum (-X)^k, X nilpotent mod order.
        const = JetMatrix.from_constant(self.constant(), self.n, self.order,
                                        exact=self.exact) if self.exact else \
            JetMatrix.from_constant(self.constant(), self.n, self.order)
        x = m0_inv_mat @ (self - const)
        acc = JetMatrix.identity(size, self.n, self.order, exact=self.exact)
        power = JetMatrix.identity(size, self.n, self.order, exact=self.exact)
        for _ in range(self.order):
            power = -(power @ x)
            if power.max_abs() == 0:
                break
            acc = acc + power
        out = acc @ m0_inv_mat
        eff = self.effective_order
        return out.map(lambda e: Jet(e.n, e.order, e.terms, effective_order=eff,
                                     exact=e.exact))

    def __repr__(self):
        return f"JetMatrix({self.rows}x{self.cols}, n={self.n}, N={self.order})"


def _exact_inverse(rows, size):
    """Gauss-Jordan inverse of a QC matrix given as nested lists."""
    a = [[QC(0) + rows[i][j] for j in range(size)] for i in range(size)]
    inv = [[QC(1) if i == j else QC(0) for j in range(size)] for i in range(size)]
    for col in range(size):
        pivot = next((r for r in range(col, size) if a[r][col]), None)
        if pivot is None:
            raise SingularMatrixError("exact constant term is singular")
        a[col], a[pivot] = a[pivot], a[col]
        inv[col], inv[pivot] = inv[pivot], inv[col]
        p = a[col][col]
        a[col] = [v / p for v in a[col]]
        inv[col] = [v / p for v in inv[col]]
        for r in range(size):
            if r == col or not a[r][col]:
                continue
            f = a[r][col]
            a[r] = [v - f * w for v, w in zip(a[r], a[col])]
            inv[r] = [v - f * w for v, w in zip(inv[r], inv[col])]
    return inv


def block2x2(tl, tr, bl, br):
    """Assemble a 2x2 block JetMatrix."""
    rows = []
    for i in range(tl.rows):
        rows.append(tl.entries[i] + tr.entries[i])
    for i in range(bl.rows):
        rows.append(bl.entries[i] + br.entries[i])
    return JetMatrix(rows)


def series_inverse(phi: Sequence[Jet], order=None):
    """Compositional inverse of a coordinate-change germ.

    ``phi`` lists the images of z_1..z_n (conjugates implicit); the linear
    part must be invertible.  Returns psi with phi(psi(Z)) = Z up to order.
    """
    n = len(phi)
    order = phi[0].order if order is None else order
    phi = [p.with_order(order) for p in phi]
    lin = np.zeros((2 * n, 2 * n), dtype=complex)
    for k in range(n):
        for l in range(n):
            ek = tuple(1 if i == l else 0 for i in range(n))
            zz = (0,) * n
            lin[k, l] = complex(phi[k].coeff(ek, zz))
            lin[k, n + l] = complex(phi[k].coeff(zz, ek))
            lin[n + k, l] = lin[k, n + l].conjugate()
            lin[n + k, n + l] = lin[k, l].conjugate()
    if abs(np.linalg.det(lin)) < 1e-12:
        raise SingularMatrixError("coordinate change has a singular linear part")
    lin_inv = np.linalg.inv(lin)
    ident = [Jet.variable(n, order, k) for k in range(n)]
    # start from the inverse of the linear part, then sharpen degree by degree
    psi = []
    for k in range(n):
        acc = Jet.zero(n, order)
        for l in range(n):
            acc = acc + lin_inv[k, l] * ident[l] + lin_inv[k, n + l] * ident[l].conj()
        psi.append(acc)
    for _ in range(order):
        err = [phi[k].compose(psi) - ident[k] for k in range(n)]
        if max(e.max_abs() for e in err) < PRUNE_EPS:
            break
        new_psi = []
        for k in range(n):
            corr = Jet.zero(n, order)
            for l in range(n):
                corr = corr + lin_inv[k, l] * err[l] + lin_inv[k, n + l] * err[l].conj()
            new_psi.append(psi[k] - corr)
        psi = new_psi
    # the inverse germ is polynomial-exact through the truncation order
    return [p.trusted(order) for p in psi]
