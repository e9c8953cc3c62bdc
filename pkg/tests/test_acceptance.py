"""Acceptance gate: ten end-to-end criteria, one pass/fail line each.

Run with `pytest tests/test_acceptance.py -v`; the verdict lines are written
to the terminal summary (and to stdout, visible with -s).  Shared expensive
artifacts (dual certificates, the 100-seed generation sweep, the 500-system
randomized harness) are computed once per session.
"""

import time

import numpy as np
import pytest

import cjsr
from cjsr.automaton import Dfa, build_tsm, is_accepted
from cjsr.bounds import brute_force_rho_k, gripenberg_bounds, sos_primal_upper
from cjsr.dual import verify_certificate
from cjsr.lift import MatrixSet, build_lift
from cjsr.linalg import MonomialBasis, kron, spectral_norm, spectral_radius, veronese_lift
from cjsr.seqgen import (alg1_generate, alg2_generate, check_theta_trace,
                         extract_cycles, growth_report)

import conftest

TARGET_CYCLE = (1, 1, 2, 1, 2, 3, 1, 1)
TARGET_VALUE = 0.97481720

_cache = {}


def record(num, ok, detail):
    line = "criterion %2d: %s  %s" % (num, "PASS" if ok else "FAIL", detail)
    conftest.criterion_lines.append(line)
    print(line)
    assert ok, line


def _rotations(word):
    return {word[i:] + word[:i] for i in range(len(word))}


@pytest.fixture(scope="module")
def gripenberg_example1(example1_lifted):
    if "grip" not in _cache:
        t0 = time.perf_counter()
        rep = gripenberg_bounds(list(example1_lifted.phis), 1e-3, 20)
        _cache["grip"] = (rep, time.perf_counter() - t0)
    return _cache["grip"]


@pytest.fixture(scope="module")
def alg1_sweep(example1_lifted, example1_gamma_cert):
    """100 seeded generation runs on the Example-1 lift (2d = 2, h = 3)."""
    if "sweep" not in _cache:
        gamma, cert = example1_gamma_cert
        t0 = time.perf_counter()
        words = [alg1_generate(example1_lifted, cert, 3, 72, seed=s)
                 for s in range(1, 101)]
        _cache["sweep"] = (words, time.perf_counter() - t0)
    return _cache["sweep"]


@pytest.fixture(scope="module")
def randomized_harness():
    """500 random systems; every generated word's acceptance verdict plus the
    per-run score-trace verdicts for the dual-greedy generator."""
    if "harness" not in _cache:
        rng = np.random.default_rng(2024)
        acceptance = []
        theta_ok = []
        t0 = time.perf_counter()
        for i in range(500):
            mats, tsm, lifted = conftest.random_system(rng, num_states=int(rng.integers(2, 6)))
            gamma, cert = cjsr.max_feasible_gamma(lifted, 1, tol=1e-3)
            word1 = alg1_generate(lifted, cert, 2, 16, seed=i)
            word2 = alg2_generate(lifted, 0.01, 6)
            acceptance.append(is_accepted(tsm, word1.labels))
            acceptance.append(is_accepted(tsm, word2.labels))
            theta_ok.append(check_theta_trace(word1, gamma, 1, 2, lifted.num_modes))
        _cache["harness"] = (acceptance, theta_ok, time.perf_counter() - t0)
    return _cache["harness"]


def test_criterion_01_lift_regression(example1, example1_lifted):
    t0 = time.perf_counter()

    def delta(i):
        col = np.zeros(4)
        if i > 0:
            col[i - 1] = 1.0
        return col

    expected_f = [
        np.column_stack([delta(i) for i in cols])
        for cols in ((3, 3, 3, 3), (0, 1, 1, 0), (2, 0, 2, 0), (0, 0, 4, 0))
    ]
    blocks_exact = all(np.array_equal(f, e)
                       for f, e in zip(example1.tsm.blocks, expected_f))
    phi_err = max(
        float(np.max(np.abs(phi - kron(f, a))))
        for phi, f, a in zip(example1_lifted.phis, example1.tsm.blocks,
                             example1.matrix_set.modes)
    )
    elapsed = time.perf_counter() - t0
    record(1, blocks_exact and phi_err <= 1e-12 and elapsed < 0.1,
           "lift regression: F blocks exact=%s, max |Phi - F(x)A| = %.1e, %.3fs"
           % (blocks_exact, phi_err, elapsed))


def test_criterion_02_cjsr_bracket(gripenberg_example1):
    rep, elapsed = gripenberg_example1
    ok = (rep.lower >= 0.9748172 - 1e-6
          and rep.lower <= 0.97481720 + 1e-9
          and rep.upper >= 0.97481730 - 1e-9
          and elapsed < 60.0)
    record(2, ok, "bracket [%.8f, %.8f] contains [0.97481720, 0.97481730], %.1fs"
           % (rep.lower, rep.upper, elapsed))


def test_criterion_03_cycle_anchors(example1, example3, example4):
    t0 = time.perf_counter()
    anchors = [
        (example1.matrix_set, TARGET_CYCLE, TARGET_VALUE),
        (example3.matrix_set, (3, 1, 1, 1), 0.84135421),
        (example4.matrix_set, (4, 1, 4), 1.03337866),
    ]
    errs = []
    for mats, cycle, target in anchors:
        value = spectral_radius(mats.word_product(cycle)) ** (1.0 / len(cycle))
        errs.append(abs(value - target))
    elapsed = time.perf_counter() - t0
    record(3, max(errs) <= 1e-6 and elapsed < 1.0,
           "cycle anchors: max error %.2e across 3 anchors, %.3fs" % (max(errs), elapsed))


def test_criterion_04_dual_pipeline(example1, example1_lifted,
                                    example1_gamma_cert, alg1_sweep):
    t0 = time.perf_counter()
    gamma, cert = example1_gamma_cert
    mm, cm, res = verify_certificate(example1_lifted, 1, gamma, cert.duals)
    scale = max(1.0, max(abs(x) for e in cert.duals for x in e.moments))
    cert_ok = min(mm) >= -1e-9 * scale and cm >= -1e-9 * scale and res <= 1e-8
    words, sweep_time = alg1_sweep
    target_class = _rotations(TARGET_CYCLE)
    hits = 0
    for word in words:
        cycles = extract_cycles(word, example1.tsm, example1.matrix_set)
        if cycles and cycles[0].cycle in target_class:
            hits += 1
    elapsed = sweep_time + time.perf_counter() - t0
    record(4, cert_ok and hits >= 80 and elapsed < 600.0,
           "gamma=%.5f certificate verified=%s; %d/100 runs recover the "
           "target cycle class (need >= 80), %.1fs" % (gamma, cert_ok, hits, elapsed))


def test_criterion_05_acceptance_guarantee(randomized_harness):
    acceptance, _, elapsed = randomized_harness
    failures = acceptance.count(False)
    record(5, failures == 0,
           "acceptance guarantee: %d/%d generated words accepted (%d failures), %.1fs"
           % (len(acceptance) - failures, len(acceptance), failures, elapsed))


def test_criterion_06_score_trace_recursion(example1_gamma_cert, alg1_sweep,
                                            randomized_harness):
    gamma, _ = example1_gamma_cert
    words, _ = alg1_sweep
    example1_ok = all(check_theta_trace(w, gamma, 1, 3, 4) for w in words)
    _, theta_ok, _ = randomized_harness
    random_ok = all(theta_ok)
    record(6, example1_ok and random_ok,
           "per-block score recursion holds on %d Example-1 runs and %d randomized runs"
           % (len(words), len(theta_ok)))


def test_criterion_07_growth_floor(example1, example1_lifted, example1_gamma_cert,
                                   alg1_sweep):
    gamma, _ = example1_gamma_cert
    words, _ = alg1_sweep
    rep = growth_report(words[6], example1_lifted, example1.matrix_set, gamma, 1)
    ok = rep.best_cycle_value >= rep.growth_floor - 1e-6 and rep.satisfied
    record(7, ok, "best cycle %.8f >= floor gamma/m^(1/2) = %.8f"
           % (rep.best_cycle_value, rep.growth_floor))


def test_criterion_08_oracle_equivalence():
    rng = np.random.default_rng(88)
    t0 = time.perf_counter()
    tsm = build_tsm(Dfa(1, 2, frozenset((1, j, 1) for j in (1, 2))))
    worst = 0.0
    checked = 0
    while checked < 100:
        mats = [rng.standard_normal((2, 2)) * 0.8 for _ in range(2)]
        if max(spectral_radius(a) for a in mats) < 1e-9:
            continue
        checked += 1
        lifted = build_lift(MatrixSet(tuple(mats)), tsm)
        word = alg2_generate(lifted, 0.0, 6)
        brute = brute_force_rho_k(mats, 6)
        worst = max(worst, abs(word.value - brute.lower))
    elapsed = time.perf_counter() - t0
    record(8, worst <= 1e-10,
           "branch-and-bound vs exhaustive enumeration: max |difference| = %.2e "
           "over 100 systems, %.1fs" % (worst, elapsed))


def test_criterion_09_primal_sos(example1_lifted, gripenberg_example1):
    t0 = time.perf_counter()
    upper = sos_primal_upper(list(example1_lifted.phis), 2)
    elapsed = time.perf_counter() - t0
    lower = gripenberg_example1[0].lower
    ok = upper <= 0.99632317 and upper >= lower and elapsed < 900.0
    record(9, ok, "degree-4 SOS upper bound %.8f in [%.8f, 0.99632317], %.1fs"
           % (upper, lower, elapsed))


def test_criterion_10_property_suites():
    rng = np.random.default_rng(100)
    t0 = time.perf_counter()
    n = 200

    kron_err = 0.0
    norm_err = 0.0
    for _ in range(n):
        a, b, c, d = (rng.standard_normal((2, 2)) for _ in range(4))
        kron_err = max(kron_err, float(np.max(np.abs(
            kron(a, b) @ kron(c, d) - kron(a @ c, b @ d)))))
        norm_err = max(norm_err, abs(
            spectral_norm(kron(a, b)) - spectral_norm(a) * spectral_norm(b)))

    basis2 = MonomialBasis(3, 2)
    veronese_err = 0.0
    for _ in range(n):
        a = rng.standard_normal((3, 3))
        b = rng.standard_normal((3, 3))
        veronese_err = max(veronese_err, float(np.max(np.abs(
            veronese_lift(a @ b, basis2)
            - veronese_lift(a, basis2) @ veronese_lift(b, basis2)))))

    basis1 = MonomialBasis(3, 1)
    full = MonomialBasis(3, 2)
    push_err = 0.0
    for _ in range(n):
        x = rng.standard_normal(3)
        phi = rng.standard_normal((3, 3))
        e = cjsr.PseudoExpectation(3, 2, np.array(
            [np.prod(x ** alpha) for alpha in full.monomials]))
        before = cjsr.moment_matrix(e, basis1)
        after = cjsr.moment_matrix(cjsr.pushforward(e, phi), basis1)
        push_err = max(push_err, float(np.max(np.abs(after - phi @ before @ phi.T))))

    # two different Grams of the same degree-4 polynomial: shift along the
    # kernel element relating (x1 x2)^2 and (x1^2)(x2^2)
    basis22 = MonomialBasis(2, 2)
    full22 = MonomialBasis(2, 4)
    size = len(basis22)
    s = basis22.scales
    i_xx, i_xy, i_yy = basis22.index((2, 0)), basis22.index((1, 1)), basis22.index((0, 2))
    delta = np.zeros((size, size))
    delta[i_xy, i_xy] = 1.0 / s[i_xy] ** 2
    delta[i_xx, i_yy] = -0.5 / (s[i_xx] * s[i_yy])
    delta[i_yy, i_xx] = -0.5 / (s[i_xx] * s[i_yy])
    gram_err = 0.0
    for _ in range(n):
        e = cjsr.PseudoExpectation(2, 4, rng.standard_normal(len(full22)))
        m = cjsr.moment_matrix(e, basis22)
        g = rng.standard_normal((size, size))
        g = 0.5 * (g + g.T)
        t = rng.standard_normal()
        gram_err = max(gram_err, abs(float(np.sum(g * m)) - float(np.sum((g + t * delta) * m))))

    elapsed = time.perf_counter() - t0
    ok = (kron_err <= 1e-10 and norm_err <= 1e-8 and veronese_err <= 1e-9
          and push_err <= 1e-9 and gram_err <= 1e-10)
    record(10, ok,
           "property suites (%d instances each): kron %.1e, norm %.1e, veronese %.1e, "
           "pushforward %.1e, pairing %.1e, %.1fs"
           % (n, kron_err, norm_err, veronese_err, push_err, gram_err, elapsed))
