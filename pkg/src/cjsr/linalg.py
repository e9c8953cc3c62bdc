"""Dense linear algebra helpers: Kronecker products, spectral quantities and
the scaled symmetric-power (Veronese) lift of a matrix.

All routines work on plain numpy arrays of modest size (tens of rows); nothing
here is tuned for large or sparse problems.
"""

import math
from dataclasses import dataclass, field
from itertools import combinations_with_replacement

import numpy as np


class DimensionError(ValueError):
    """Raised when matrix shapes do not conform."""


def kron(a, b):
    """Kronecker product of two matrices: block (i, j) equals a[i, j] * b."""
    return np.kron(np.asarray(a, dtype=float), np.asarray(b, dtype=float))


def spectral_radius(a):
    """Largest eigenvalue modulus of a square matrix."""
    a = np.asarray(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionError("spectral_radius requires a square matrix, got shape %s" % (a.shape,))
    return float(np.max(np.abs(np.linalg.eigvals(a))))


def spectral_norm(a):
    """Largest singular value, computed as sqrt(lambda_max(a^T a))."""
    a = np.asarray(a, dtype=float)
    if a.ndim != 2:
        raise DimensionError("spectral_norm requires a matrix, got shape %s" % (a.shape,))
    w = np.linalg.eigvalsh(a.T @ a)
    return float(math.sqrt(max(float(w[-1]), 0.0)))


def _monomials(num_vars, degree):
    """All exponent multi-indices of total degree `degree`, graded-lex order."""
    out = []
    for combo in combinations_with_replacement(range(num_vars), degree):
        alpha = [0] * num_vars
        for v in combo:
            alpha[v] += 1
        out.append(tuple(alpha))
    return tuple(out)


@dataclass(frozen=True)
class MonomialBasis:
    """Ordered basis of degree-d monomials in N variables, with multinomial
    square-root scaling so that the induced Veronese lift is multiplicative.

    The lifted coordinate vector is x^[d] with entries scale(alpha) * x^alpha.
    """

    num_vars: int
    degree: int
    monomials: tuple = field(init=False)
    scales: np.ndarray = field(init=False)

    def __post_init__(self):
        if self.num_vars < 1 or self.degree < 1:
            raise ValueError("num_vars and degree must be >= 1")
        monos = _monomials(self.num_vars, self.degree)
        fact_d = math.factorial(self.degree)
        scales = np.array(
            [math.sqrt(fact_d / math.prod(math.factorial(e) for e in alpha)) for alpha in monos]
        )
        object.__setattr__(self, "monomials", monos)
        object.__setattr__(self, "scales", scales)
        object.__setattr__(self, "_index", {alpha: i for i, alpha in enumerate(monos)})

    def __len__(self):
        return len(self.monomials)

    def index(self, alpha):
        return self._index[tuple(alpha)]

    def lift_vector(self, x):
        """Evaluate x^[d] (scaled monomial vector) at a point x."""
        x = np.asarray(x, dtype=float)
        return np.array(
            [s * math.prod(x[v] ** e for v, e in enumerate(alpha)) for alpha, s in zip(self.monomials, self.scales)]
        )


def expand_power_product(rows, alpha, num_vars):
    """Coefficients of prod_j (rows[j] . x)^alpha[j] as {exponent tuple: coeff}.

    `rows` is indexable by j; only j with alpha[j] > 0 are touched.
    """
    poly = {(0,) * num_vars: 1.0}
    for j, mult in enumerate(alpha):
        for _ in range(mult):
            nxt = {}
            row = rows[j]
            for mono, c in poly.items():
                for v in range(num_vars):
                    w = row[v]
                    if w == 0.0:
                        continue
                    key = mono[:v] + (mono[v] + 1,) + mono[v + 1:]
                    nxt[key] = nxt.get(key, 0.0) + c * w
            poly = nxt
    return poly


def veronese_lift(a, basis):
    """Matrix V(a) on the scaled monomial basis with (a x)^[d] = V(a) x^[d].

    Multiplicative: V(ab) = V(a) V(b); V(I) = I; for d = 1 it is `a` itself.
    """
    a = np.asarray(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] != basis.num_vars:
        raise DimensionError(
            "veronese_lift requires a square matrix matching basis.num_vars=%d, got shape %s"
            % (basis.num_vars, a.shape)
        )
    if basis.degree == 1:
        return a.copy()
    size = len(basis)
    v = np.zeros((size, size))
    for r, alpha in enumerate(basis.monomials):
        poly = expand_power_product(a, alpha, basis.num_vars)
        sr = basis.scales[r]
        for mono, c in poly.items():
            col = basis.index(mono)
            v[r, col] = sr * c / basis.scales[col]
    return v


def veronese_transfer(a, basis):
    """Matrix P on *unscaled* monomial coefficients: if z[gamma] collects the
    coefficient view of moments, (P z)[gamma] expands (a x)^gamma over the
    basis monomials.  P = diag(1/s) V(a) diag(s)."""
    v = veronese_lift(a, basis)
    s = basis.scales
    return (v / s[:, None]) * s[None, :]
