"""Dual SOS feasibility program: pseudo-expectations as degree-2d moment
vectors, their moment-matrix views, the pushforward under a mode matrix, and
a bisection that returns the largest gamma with a verifiable dual certificate.

Certificates are verified independently of the solver: feasibility is always
re-checked from eigenvalues and residuals of the returned moment vectors.
"""

import math
from dataclasses import dataclass, field

import cvxpy as cp
import numpy as np

from .linalg import DimensionError, MonomialBasis, spectral_norm, veronese_transfer
from .sdp import SolverInconclusive, pick_solver

# Moment matrices of feasible duals can be singular when some lifted
# coordinate is unreachable (a state with no incoming edge), so feasibility is
# judged at the PSD boundary rather than demanding a strict interior.
FEASIBLE_MARGIN = -1e-9
INFEASIBLE_MARGIN = -1e-7


@dataclass(frozen=True)
class PseudoExpectation:
    """Linear functional on homogeneous degree-2d polynomials, stored as one
    moment per degree-2d monomial (ordering from MonomialBasis(num_vars, 2d))."""

    num_vars: int
    degree: int  # 2d
    moments: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "moments", np.asarray(self.moments, dtype=float))
        if not np.all(np.isfinite(self.moments)):
            raise ValueError("moments must be finite")

    def full_basis(self):
        return MonomialBasis(self.num_vars, self.degree)

    def value(self, coeffs):
        """Pair with a polynomial given as {monomial tuple: coefficient}."""
        basis = self.full_basis()
        return float(sum(c * self.moments[basis.index(mono)] for mono, c in coeffs.items()))


@dataclass(frozen=True)
class DualCertificate:
    gamma: float
    duals: tuple  # m PseudoExpectations
    margins: dict = field(default_factory=dict)
    normalization_residual: float = 0.0


def _pair_indexing(basis_d, basis_2d):
    """Index and scale tables: moment_matrix[a, b] = S[a, b] * moments[IDX[a, b]]."""
    size = len(basis_d)
    idx = np.empty((size, size), dtype=int)
    for a, alpha in enumerate(basis_d.monomials):
        for b, beta in enumerate(basis_d.monomials):
            idx[a, b] = basis_2d.index(tuple(x + y for x, y in zip(alpha, beta)))
    s = np.outer(basis_d.scales, basis_d.scales)
    return idx, s


def moment_matrix(e, basis):
    """Symmetric matrix M[a, b] = scale(a) scale(b) moments[a + b] on the
    scaled degree-d basis; tr(G M) = E[p] for any Gram G of p."""
    if basis.num_vars != e.num_vars or 2 * basis.degree != e.degree:
        raise DimensionError("basis (N=%d, d=%d) does not match pseudo-expectation (N=%d, 2d=%d)"
                             % (basis.num_vars, basis.degree, e.num_vars, e.degree))
    idx, s = _pair_indexing(basis, e.full_basis())
    return s * e.moments[idx]


def pushforward(e, phi):
    """Pseudo-expectation z with z[gamma] = E[(phi x)^gamma] for |gamma| = 2d."""
    phi = np.asarray(phi, dtype=float)
    if phi.ndim != 2 or phi.shape[0] != phi.shape[1] or phi.shape[0] != e.num_vars:
        raise DimensionError("phi must be square of size %d, got %s" % (e.num_vars, phi.shape))
    transfer = veronese_transfer(phi, e.full_basis())
    return PseudoExpectation(e.num_vars, e.degree, transfer @ e.moments)


def _pure_power_indices(basis_2d):
    n = basis_2d.num_vars
    deg = basis_2d.degree
    out = []
    for j in range(n):
        alpha = [0] * n
        alpha[j] = deg
        out.append(basis_2d.index(tuple(alpha)))
    return out


def verify_certificate(lifted, d, gamma, duals):
    """Solver-independent feasibility check of Program-2 conditions.

    Returns (moment_margins, coupling_margin, normalization_residual) where
    margins are minimum eigenvalues of the respective moment matrices.
    """
    basis_d = MonomialBasis(lifted.dim, d)
    basis_2d = duals[0].full_basis()
    moment_margins = [float(np.linalg.eigvalsh(moment_matrix(e, basis_d))[0]) for e in duals]
    coupling = sum(pushforward(e, phi).moments for e, phi in zip(duals, lifted.phis))
    coupling = coupling - gamma ** (2 * d) * sum(e.moments for e in duals)
    coupling_e = PseudoExpectation(lifted.dim, 2 * d, coupling)
    coupling_margin = float(np.linalg.eigvalsh(moment_matrix(coupling_e, basis_d))[0])
    pure = _pure_power_indices(basis_2d)
    total = sum(float(np.sum(e.moments[pure])) for e in duals)
    return moment_margins, coupling_margin, abs(total - 1.0)


def solve_dual(lifted, d, gamma, solver=None):
    """Solve the dual feasibility program at a fixed gamma.

    Returns a DualCertificate on success, None when a negative max-min margin
    certifies infeasibility, and raises SolverInconclusive otherwise.
    """
    if gamma <= 0:
        raise ValueError("gamma must be > 0")
    if d < 1:
        raise ValueError("d must be >= 1")
    solver = pick_solver(solver)
    n = lifted.dim
    m = lifted.num_modes
    basis_d = MonomialBasis(n, d)
    basis_2d = MonomialBasis(n, 2 * d)
    idx, s = _pair_indexing(basis_d, basis_2d)
    size = len(basis_d)
    num_moments = len(basis_2d)
    # normalize the mode matrices so the SDP is well conditioned; by
    # homogeneity, gamma/scale feasibility for Phi/scale is equivalent
    scale = max(spectral_norm(p) for p in lifted.phis)
    if scale == 0.0:
        return None
    phis = [p / scale for p in lifted.phis]
    gam = gamma / scale
    transfers = [veronese_transfer(p, basis_2d) for p in phis]
    pure = _pure_power_indices(basis_2d)

    flat_idx = idx.flatten().tolist()
    s_flat = s.flatten()

    def mom(vec):
        mat = cp.reshape(cp.multiply(s_flat, vec[flat_idx]), (size, size), order="C")
        return 0.5 * (mat + mat.T)

    zs = [cp.Variable(num_moments) for _ in range(m)]
    t = cp.Variable()
    eye = np.eye(size)
    cons = [sum(cp.sum(z[pure]) for z in zs) == 1.0]
    for z in zs:
        cons.append(mom(z) >> t * eye)
    coupling = sum(tr @ z for tr, z in zip(transfers, zs)) - gam ** (2 * d) * sum(zs)
    cons.append(mom(coupling) >> t * eye)
    prob = cp.Problem(cp.Maximize(t), cons)
    try:
        prob.solve(solver=solver)
    except cp.error.SolverError as exc:
        raise SolverInconclusive("SDP solver failed: %s" % exc) from exc
    if prob.status not in (cp.OPTIMAL, cp.OPTIMAL_INACCURATE):
        raise SolverInconclusive("unexpected solver status", status=prob.status)
    margin = float(t.value)
    if margin >= FEASIBLE_MARGIN:
        duals = tuple(PseudoExpectation(n, 2 * d, z.value) for z in zs)
        mm, cm, res = verify_certificate(lifted, d, gamma, duals)
        return DualCertificate(gamma, duals,
                               {"moment": mm, "coupling": cm, "solver_margin": margin}, res)
    if margin <= INFEASIBLE_MARGIN:
        return None
    raise SolverInconclusive("margin %.3e is neither clearly feasible nor infeasible" % margin)


def max_feasible_gamma(lifted, d, tol=1e-4, solver=None):
    """Bisection over gamma in [0, max ||Phi||]; returns the largest gamma
    (within tol) whose dual certificate verifies, plus that certificate."""
    if tol <= 0:
        raise ValueError("tol must be > 0")
    hi = max(spectral_norm(p) for p in lifted.phis)
    if hi == 0.0:
        raise ValueError("all-zero matrix set has no feasible gamma > 0")
    lo = 0.0
    best = None
    # descend geometrically until a feasible gamma seeds the bracket; the
    # spectral radius (hence the largest feasible gamma) can sit far below
    # the norm bound
    probe = 0.5 * hi
    for _ in range(24):
        cert = _try_solve(lifted, d, probe, solver)
        if cert is not None:
            lo, best = probe, cert
            hi = min(hi, 2.0 * probe)
            break
        hi = probe
        probe *= 0.5
    if best is None:
        raise ValueError("no feasible gamma found above 0")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        cert = _try_solve(lifted, d, mid, solver)
        if cert is not None:
            lo, best = mid, cert
        else:
            hi = mid
    return lo, best


def _try_solve(lifted, d, gamma, solver):
    try:
        return solve_dual(lifted, d, gamma, solver=solver)
    except SolverInconclusive:
        return None
