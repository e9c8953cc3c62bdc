"""Certified lower/upper bounds on the joint spectral radius of a matrix set:
brute-force enumeration, Gripenberg-style branch and bound, and a
sum-of-squares upper bound obtained by bisecting an SDP feasibility test.
"""

import math
from dataclasses import dataclass, field

import cvxpy as cp
import numpy as np

from .automaton import word_product
from .linalg import MonomialBasis, spectral_norm, spectral_radius, veronese_lift
from .sdp import SolverInconclusive, pick_solver

ENUMERATION_CAP = 10**7


class EnumerationCapError(ValueError):
    """Brute force would enumerate too many words; use Gripenberg instead."""


@dataclass(frozen=True)
class BoundsReport:
    lower: float
    upper: float
    method: str  # brute | gripenberg | sos_primal
    budget_used: dict = field(default_factory=dict)
    witness_word: tuple = ()  # canonical orientation; product per A_sigma convention


def _as_arrays(mats):
    mats = [np.asarray(a, dtype=float) for a in mats]
    if not mats:
        raise ValueError("matrix set must be nonempty")
    return mats


def brute_force_rho_k(mats, k, accept_filter=None, cap=ENUMERATION_CAP):
    """Enumerate all words up to length k.

    lower: best averaged spectral radius over enumerated (accepted) words.
    upper: max ||product||^(1/k) over length-k words, a valid JSR upper bound
    for the unfiltered case; +inf when an acceptance filter restricts words.
    """
    mats = _as_arrays(mats)
    m = len(mats)
    if k < 1:
        raise ValueError("k must be >= 1")
    if m**k > cap:
        raise EnumerationCapError(
            "m^k = %d exceeds cap %d; use gripenberg_bounds instead" % (m**k, cap)
        )
    lower = 0.0
    witness = ()
    upper = math.inf
    count = 0
    # level l holds (canonical word, A-product); extension appends a letter.
    level = [((j,), mats[j - 1]) for j in range(1, m + 1)]
    for length in range(1, k + 1):
        if length > 1:
            level = [
                (word + (j,), mats[j - 1] @ prod)
                for word, prod in level
                for j in range(1, m + 1)
            ]
        for word, prod in level:
            count += 1
            if accept_filter is not None and not np.any(word_product(accept_filter, word) != 0.0):
                continue
            val = spectral_radius(prod) ** (1.0 / length)
            if val > lower:
                lower, witness = val, word
        if length == k and accept_filter is None:
            upper = max(spectral_norm(prod) ** (1.0 / k) for _, prod in level)
    return BoundsReport(lower, max(lower, upper) if upper != math.inf else math.inf,
                        "brute", {"words": count}, witness)


def _batch_spectral_norm(stack):
    gram = np.einsum("nki,nkj->nij", stack, stack)
    w = np.linalg.eigvalsh(gram)[..., -1]
    return np.sqrt(np.maximum(w, 0.0))


def _batch_spectral_radius(stack):
    return np.max(np.abs(np.linalg.eigvals(stack)), axis=-1)


def gripenberg_search(mats, epsilon, max_depth, chunk=20000):
    """Branch-and-bound core shared by bound reporting and sequence generation.

    Returns (alpha, best_word, frontier, nodes) where best_word is in
    canonical left-to-right orientation (its A_sigma product is the branch
    product) and frontier holds surviving (word, product, dmin) triples.
    Each depth level is processed with batched matmul/eig calls, chunked to
    bound peak memory.
    """
    mats = _as_arrays(mats)
    m = len(mats)
    if epsilon < 0:
        raise ValueError("epsilon must be >= 0")
    stack = np.stack(mats)
    vals = _batch_spectral_radius(stack)
    alpha = float(np.max(vals))
    best = (int(np.argmax(vals)) + 1,)
    if alpha <= 0.0:
        raise ValueError("all modes have zero spectral radius; need max rho > 0")
    nodes = m
    words = [(j,) for j in range(1, m + 1)]
    prods = stack.copy()
    dmins = _batch_spectral_norm(stack)
    for depth in range(2, max_depth + 1):
        alpha_prev = alpha
        nxt_words = []
        nxt_prods = []
        nxt_dmins = []
        nxt_vals = []
        for start in range(0, len(words), chunk):
            wchunk = words[start:start + chunk]
            pchunk = prods[start:start + chunk]
            dchunk = dmins[start:start + chunk]
            nodes += len(wchunk) * m
            # generation order appends on the right of the product, i.e.
            # prepends the letter of the canonical word; node-major layout
            # keeps the original enumeration order
            ext = np.einsum("fab,mbc->fmac", pchunk, stack).reshape(-1, *stack.shape[1:])
            norms = _batch_spectral_norm(ext) ** (1.0 / depth)
            dmin2 = np.minimum(np.repeat(dchunk, m), norms)
            keep = np.nonzero(dmin2 > alpha_prev + epsilon)[0]
            if keep.size == 0:
                continue
            nxt_words.extend((int(idx) % m + 1,) + wchunk[int(idx) // m] for idx in keep)
            nxt_prods.append(ext[keep])
            nxt_dmins.append(dmin2[keep])
            nxt_vals.append(_batch_spectral_radius(ext[keep]) ** (1.0 / depth))
        if not nxt_words:
            words, prods, dmins = [], prods[:0], dmins[:0]
            break
        words = nxt_words
        prods = np.concatenate(nxt_prods)
        dmins = np.concatenate(nxt_dmins)
        vals = np.concatenate(nxt_vals)
        level_best = float(np.max(vals))
        if level_best > alpha:
            alpha = level_best
            best = words[int(np.argmax(vals))]
    frontier = [(w, prods[i], float(dmins[i])) for i, w in enumerate(words)]
    return alpha, best, frontier, nodes


def gripenberg_bounds(mats, epsilon, max_depth):
    alpha, best, frontier, nodes = gripenberg_search(mats, epsilon, max_depth)
    if len(mats) == 1:
        # a single matrix has joint spectral radius exactly rho(A) (Gelfand),
        # so the bracket collapses regardless of epsilon
        return BoundsReport(alpha, alpha, "gripenberg",
                            {"nodes": nodes, "frontier": len(frontier)}, best)
    upper = alpha + epsilon
    if frontier:
        upper = max(upper, max(dmin for _, _, dmin in frontier))
    return BoundsReport(alpha, upper, "gripenberg",
                        {"nodes": nodes, "frontier": len(frontier)}, best)


def _gram_aggregator(basis):
    """Sparse map from a vectorized Gram matrix to polynomial coefficients:
    row gamma sums scale(a) scale(b) M[a, b] over all a + b = gamma."""
    from scipy import sparse

    full = MonomialBasis(basis.num_vars, 2 * basis.degree)
    size = len(basis)
    rows, cols, vals = [], [], []
    for a, alpha in enumerate(basis.monomials):
        for b, beta in enumerate(basis.monomials):
            gamma_idx = full.index(tuple(x + y for x, y in zip(alpha, beta)))
            rows.append(gamma_idx)
            cols.append(a * size + b)
            vals.append(basis.scales[a] * basis.scales[b])
    return sparse.csr_matrix((vals, (rows, cols)), shape=(len(full), size * size))


def _primal_feasible(vs, gamma, two_d, basis, agg, solver):
    """Primal test: exists G >= tau*I and PSD Grams H_i representing the same
    polynomials as gamma^{2d} G - V_i^T G V_i (Gram ambiguity included)."""
    size = vs[0].shape[0]
    eye = np.eye(size)
    g = cp.Variable((size, size), symmetric=True)
    t = cp.Variable()
    # normalize min eig(G) = 1 (any strictly feasible Gram can be scaled to
    # this); infeasibility then shows up as a macroscopic negative margin
    # instead of vanishing with a tiny eigenvalue of G.  The trace cap bounds
    # the condition number and only ever makes the bound more conservative.
    cons = [g >> eye, cp.trace(g) <= 1e6 * size]

    def flat(expr):
        return cp.reshape(expr, (size * size,), order="C")

    for v in vs:
        rep = gamma**two_d * g - v.T @ g @ v
        if basis.degree == 1:
            # degree-2 monomials decompose uniquely; no Gram ambiguity
            cons.append(rep >> t * eye)
        else:
            h = cp.Variable((size, size), symmetric=True)
            cons.append(h >> t * eye)
            cons.append(agg @ flat(h) == agg @ flat(rep))
    prob = cp.Problem(cp.Maximize(t), cons)
    for attempt, s in enumerate((solver, "SCS")):
        try:
            prob.solve(solver=s)
        except cp.error.SolverError:
            continue
        if prob.status in (cp.OPTIMAL, cp.OPTIMAL_INACCURATE):
            return float(t.value) >= -1e-9
    raise SolverInconclusive("SDP solver failed at gamma=%g" % gamma,
                             status=getattr(prob, "status", None))


def sos_primal_upper(mats, d, bisect_tol=1e-3, solver=None):
    """Upper bound on the JSR from the degree-2d SOS program, via bisection
    over the feasibility of the restricted Gram condition."""
    mats = _as_arrays(mats)
    if d < 1:
        raise ValueError("d must be >= 1")
    solver = pick_solver(solver)
    basis = MonomialBasis(mats[0].shape[0], d)
    vs = [veronese_lift(a, basis) for a in mats]
    agg = _gram_aggregator(basis) if d > 1 else None
    norm_bound = max(spectral_norm(a) for a in mats)
    if norm_bound == 0.0:
        return 0.0
    hi = norm_bound * 1.01
    for _ in range(8):
        try:
            if _primal_feasible(vs, hi, 2 * d, basis, agg, solver):
                break
        except SolverInconclusive:
            pass
        hi *= 2.0
    else:
        raise SolverInconclusive("no feasible gamma found up to %g" % hi)
    lo = 0.0
    while hi - lo > bisect_tol:
        mid = 0.5 * (lo + hi)
        try:
            feasible = _primal_feasible(vs, mid, 2 * d, basis, agg, solver)
        except SolverInconclusive:
            # conservative: an unresolved solve only pushes the bound up
            feasible = False
        if feasible:
            hi = mid
        else:
            lo = mid
    return hi
