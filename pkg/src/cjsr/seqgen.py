"""High-growth switching sequence generation on the lifted system.

Two generators are provided: a dual-greedy horizon-h search driven by the
pseudo-expectations of the dual SOS program, and the Gripenberg-style branch
and bound.  Both emit words in canonical left-to-right orientation (the
reversal of the order in which the matrix product is accumulated), so the
standard acceptance test applies verbatim.  Cycle extraction and growth-rate
verification close the loop back to the original constrained system.
"""

import math
from dataclasses import dataclass, field
from itertools import product as iter_product

import numpy as np

from .automaton import is_accepted, is_repeatable_cycle, path_from_state, word_product
from .bounds import gripenberg_search
from .dual import moment_matrix
from .lift import build_lift, lifted_word_product
from .linalg import MonomialBasis, spectral_norm, spectral_radius, veronese_lift

TUPLE_CAP = 10**6


class DegenerateCertificateError(RuntimeError):
    """All candidate scores were nonpositive; the dual certificate is unusable."""


@dataclass(frozen=True)
class GramPoly:
    basis: MonomialBasis
    gram: np.ndarray  # symmetric; p(x) = (x^[d])^T G (x^[d])
    log_scale: float = 0.0


@dataclass(frozen=True)
class SwitchingWord:
    labels: tuple  # canonical orientation, reads left to right
    orientation: str = "reads_left_to_right"
    theta_trace: tuple = ()  # (k, log theta_k) per horizon block, alg1 only
    source: str = "alg1"  # alg1 | alg2 | brute
    value: float = None  # best averaged spectral radius, alg2 only

    @property
    def generation_order(self):
        return tuple(reversed(self.labels))


@dataclass(frozen=True)
class CycleReport:
    cycle: tuple  # canonical minimal rotation
    value: float  # rho(A_{c_T} ... A_{c_1})^{1/T}
    lifted_value: float
    path: object  # AcceptancePath witnessing repeatability
    length: int


@dataclass(frozen=True)
class GrowthReport:
    word_length: int
    phi_growth: float  # ||Phi-product||^{1/k}
    a_growth: float  # ||A-product||^{1/k}
    growth_floor: float  # gamma / m^{1/(2d)}
    best_cycle_value: float
    satisfied: bool


def random_interior_poly(basis, seed):
    """Random strictly interior SOS Gram, deterministic per seed.

    A half-rank Wishart plus a small ridge: anisotropic starts let the greedy
    block selection lock onto extremal directions far more reliably than an
    identity-dominated Gram, which pulls every seed into the same basin."""
    rng = np.random.default_rng(seed)
    size = len(basis)
    r = rng.standard_normal((size, max(1, size // 2)))
    g = r @ r.T
    g += 1e-6 * (np.trace(g) / size + 1.0) * np.eye(size)
    return GramPoly(basis, g / np.trace(g))


def alg1_generate(lifted, cert, h, k, seed, tuple_cap=TUPLE_CAP):
    """Dual-greedy generation: at each horizon block pick the h-tuple whose
    composed polynomial pairs best with the chosen mode's pseudo-expectation.

    The per-block score trace satisfies theta_k >= (gamma^{2dh}/m^h) theta_{k-h}.
    """
    m = lifted.num_modes
    if h < 1 or k < 1 or k % h != 0:
        raise ValueError("k must be a positive multiple of h")
    if m**h > tuple_cap:
        raise ValueError("m^h = %d exceeds cap %d" % (m**h, tuple_cap))
    duals = cert.duals
    d = duals[0].degree // 2
    basis = MonomialBasis(lifted.dim, d)
    mode_moments = [moment_matrix(e, basis) for e in duals]
    tuples = list(iter_product(range(1, m + 1), repeat=h))
    lifts = []
    for tup in tuples:
        prod = lifted.phis[tup[0] - 1]
        for lab in tup[1:]:
            prod = prod @ lifted.phis[lab - 1]
        # precompute V(product) M_{last} V(product)^T once; scores against the
        # running Gram are then plain traces
        v = veronese_lift(prod, basis)
        lifts.append((v, v @ mode_moments[tup[-1] - 1] @ v.T))

    poly = random_interior_poly(basis, seed)
    gram = poly.gram
    log_scale = poly.log_scale
    generation = []
    theta_trace = []
    for block in range(k // h):
        best_val = 0.0
        best_idx = None
        for idx, (_, vmv) in enumerate(lifts):
            val = float(np.sum(gram * vmv))
            if val > best_val:
                best_val, best_idx = val, idx
        if best_idx is None:
            raise DegenerateCertificateError("all candidate scores <= 0 at block %d" % block)
        generation.extend(tuples[best_idx])
        theta_trace.append(((block + 1) * h, math.log(best_val) + log_scale))
        v = lifts[best_idx][0]
        gram = v.T @ gram @ v
        tr = float(np.trace(gram))
        gram = gram / tr
        log_scale += math.log(tr)
    canonical = tuple(reversed(generation))
    if not is_accepted(lifted.tsm, canonical):
        raise AssertionError("generated word failed the acceptance test")
    return SwitchingWord(canonical, theta_trace=tuple(theta_trace), source="alg1")


def check_theta_trace(word, gamma, d, h, m, rtol=1e-8):
    """Per-block geometric recursion on the recorded log-theta trace."""
    floor = 2 * d * h * math.log(gamma) - h * math.log(m)
    trace = word.theta_trace
    return all(
        trace[i][1] >= trace[i - 1][1] + floor - rtol for i in range(1, len(trace))
    )


def alg2_generate(lifted, epsilon, t):
    """Gripenberg-style generation on the lifted set; the returned word is the
    best averaged-spectral-radius tuple of length <= t and is always accepted."""
    alpha, best, _, _ = gripenberg_search(lifted.phis, epsilon, t)
    if not is_accepted(lifted.tsm, best):
        raise AssertionError("generated word failed the acceptance test")
    return SwitchingWord(best, source="alg2", value=alpha)


def _min_rotation(word):
    return min(tuple(word[i:] + word[:i]) for i in range(len(word)))


def extract_cycles(word, tsm, matrix_set, max_len=12):
    """All repeatable cycles among contiguous subwords of length <= max_len,
    deduplicated by rotation class and sorted by decreasing value."""
    labels = word.labels if isinstance(word, SwitchingWord) else tuple(word)
    if len(labels) == 0 or max_len < 1:
        raise ValueError("word must be nonempty and max_len >= 1")
    dfa = tsm.to_dfa()
    lifted = build_lift(matrix_set, tsm)
    seen = {}
    for start in range(len(labels)):
        for length in range(1, max_len + 1):
            if start + length > len(labels):
                break
            sub = labels[start:start + length]
            key = _min_rotation(sub)
            if key in seen:
                continue
            if not is_repeatable_cycle(tsm, key):
                continue
            diag = np.diag(word_product(tsm, key))
            state = int(np.nonzero(diag)[0][0]) + 1
            path = path_from_state(dfa, key, state)
            value = spectral_radius(matrix_set.word_product(key)) ** (1.0 / length)
            lifted_value = spectral_radius(lifted_word_product(lifted, key)) ** (1.0 / length)
            seen[key] = CycleReport(key, value, lifted_value, path, length)
    return sorted(seen.values(), key=lambda c: -c.value)


def _log_norm_product(mats_by_label, labels):
    """log ||A_{w_k} ... A_{w_1}|| with per-step renormalization."""
    prod = np.eye(mats_by_label[0].shape[0])
    total = 0.0
    for lab in labels:
        prod = mats_by_label[lab - 1] @ prod
        nrm = spectral_norm(prod)
        if nrm == 0.0:
            return -math.inf
        prod = prod / nrm
        total += math.log(nrm)
    return total


def growth_report(word, lifted, matrix_set, gamma, d, max_cycle_len=12):
    """Finite-k growth summary and the guaranteed floor gamma / m^{1/(2d)}."""
    labels = word.labels
    k = len(labels)
    m = lifted.num_modes
    phi_growth = math.exp(_log_norm_product(list(lifted.phis), labels) / k)
    a_growth = math.exp(_log_norm_product(list(matrix_set.modes), labels) / k)
    floor = gamma / m ** (1.0 / (2 * d))
    cycles = extract_cycles(word, lifted.tsm, matrix_set, max_cycle_len)
    best = cycles[0].value if cycles else 0.0
    return GrowthReport(k, phi_growth, a_growth, floor, best, best >= floor - 1e-6)
