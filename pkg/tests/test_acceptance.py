"""Acceptance suite: one PASS/FAIL line per criterion, at the stated tolerances.

Run with ``pytest tests/test_acceptance.py -v``; the lines are printed even
without ``-s``.
"""

import itertools
import json
import math
import time
from collections import Counter
from fractions import Fraction

import numpy as np
import pytest

from freiman import (AffineMap, GroupSpec, SubsetSample, all_affine_maps, build_psi, build_relations,
                     enumerate_quadruples, extraction_report, freiman_dimension, homs_to_cyclic,
                     is_additively_connected, is_freiman_hom, l12_fourier, M_value, Verdict)
from freiman.cli import main
from freiman.diagnostics import character_twist
from freiman.experiments import hitting_trial, run_hitting_time, run_threshold_scan
from freiman.homs import relation_rank

from conftest import is_hom_by_definition, quads_by_definition, random_group, random_subset
from instances import INEQUALITY_CHECKS, ShadowCheck, conv_direct, count_violations, dense_enough_size, planted_isolated


@pytest.fixture
def verdict(capsys):
    def emit(num, title, ok, detail, elapsed=None, limit=None):
        timing = ""
        if elapsed is not None:
            timing = f" [{elapsed:.1f}s" + (f" < {limit}s" if limit else "") + "]"
            if limit is not None:
                ok = ok and elapsed < limit
        line = f"{'PASS' if ok else 'FAIL'} criterion {num:>2} {title}: {detail}{timing}"
        with capsys.disabled():
            print("\n" + line)
        assert ok, line
    return emit


def test_criterion_01_quadruple_oracle(verdict):
    rng = np.random.default_rng(101)
    bad, spent, total = 0, 0.0, 0
    for _ in range(200):
        A = random_subset(rng, random_group(rng, 30), 12)
        t0 = time.perf_counter()
        got = enumerate_quadruples(A).as_set()
        spent += time.perf_counter() - t0
        want = quads_by_definition(A)
        bad += got != want
        total += len(want)
    verdict(1, "quadruple oracle", bad == 0, f"200 instances, {total} quadruples, {bad} mismatches", spent, 10)


def test_criterion_02_dimension_oracle(verdict):
    rng = np.random.default_rng(102)
    bad, certified = 0, 0
    t0 = time.perf_counter()
    for i in range(100):
        g = random_group(rng, 400) if i % 2 else GroupSpec.cyclic(int(rng.integers(40, 400)))
        A = random_subset(rng, g, 40, min_size=2)
        rel = build_relations(A)
        modular = relation_rank(rel)
        exact = relation_rank(rel, exact=True)
        bad += modular.rank != exact.rank
        certified += modular.certified
    elapsed = time.perf_counter() - t0
    verdict(2, "Freiman dimension oracle", bad == 0,
            f"100 instances, {bad} rank mismatches, {certified} certified by the component bound", elapsed, 60)


def test_criterion_03_full_group_dimension(verdict):
    t0 = time.perf_counter()
    bad = [n for n in range(2, 51) if freiman_dimension(SubsetSample.explicit(GroupSpec.cyclic(n), range(n))) != 0]
    verdict(3, "full-group dimension", not bad, f"n in [2, 50], nonzero at {bad}", time.perf_counter() - t0, 30)


def test_criterion_04_hom_space_brute_force(verdict):
    rng = np.random.default_rng(104)
    bad, homs_seen = 0, 0
    t0 = time.perf_counter()
    for _ in range(50):
        A = random_subset(rng, random_group(rng, 30), 8, min_size=3)
        R = build_relations(A)
        for m in range(2, 6):
            H = GroupSpec.cyclic(m)
            want = {v for v in itertools.product(range(m), repeat=len(A)) if is_freiman_hom(A, v, H, relations=R)}
            got = set(homs_to_cyclic(A, m))
            bad += got != want
            homs_seen += len(want)
    verdict(4, "hom-space brute force", bad == 0, f"50 instances x m in 2..5, {homs_seen} homs, {bad} mismatches",
            time.perf_counter() - t0)


def test_criterion_05_extension_mechanism(verdict):
    rng = np.random.default_rng(105)
    eta = Fraction(3, 10)
    connected, violations, checked = 0, 0, 0
    t0 = time.perf_counter()
    for _ in range(500):
        U = random_subset(rng, random_group(rng, 24, max_factors=2), 10, min_size=2)
        if is_additively_connected(U, float(eta)).verdict is not Verdict.CONNECTED:
            continue
        connected += 1
        k = len(U)
        need = math.ceil((1 - eta) * k)
        for m in range(2, 6):
            H = GroupSpec.cyclic(m)
            affine = {tuple(np.atleast_1d(a(U.elements)).tolist()) for a in all_affine_maps(U.group, H)}
            for v in homs_to_cyclic(U, m):
                for a in affine:
                    if sum(x == y for x, y in zip(v, a)) >= need:
                        checked += 1
                        violations += v != a
    verdict(5, "extension mechanism", violations == 0 and connected > 0,
            f"{connected}/500 connected at eta=0.3, {checked} (hom, affine) pairs checked, {violations} violations",
            time.perf_counter() - t0, 300)


def test_criterion_06_exact_identities(verdict):
    rng = np.random.default_rng(106)
    fails = Counter()
    # mass identity, exact rationals
    for _ in range(20):
        g = random_group(rng, 60)
        U = random_subset(rng, g, 10, min_size=2)
        H = GroupSpec.cyclic(int(rng.integers(2, 7)))
        phi = rng.integers(0, H.order, size=len(U))
        psi = build_psi(U, phi, H, exact=True)
        n, k = g.order, len(U)
        counts = Counter(g.add(g.add(a, b), c) for a, b, c in itertools.product(U.tolist(), repeat=3))
        fails["mass"] += any(psi.mass(x) != Fraction(n * counts[x], k**3) for x in range(n))
    # M(f_chi) = M(mu) for verified homs
    twists = 0
    for _ in range(30):
        U = random_subset(rng, GroupSpec.cyclic(int(rng.integers(8, 40))), 10, min_size=4)
        Q = enumerate_quadruples(U)
        if len(Q) == 0:
            continue
        mu = np.zeros(U.group.order)
        mu[U.elements] = U.group.order / len(U)
        M_mu = M_value(mu, Q)
        for m in (2, 3, 5):
            H = GroupSpec.cyclic(m)
            for v in list(homs_to_cyclic(U, m))[:4]:
                if not is_hom_by_definition(U, dict(zip(U.tolist(), v)), H):
                    fails["verify"] += 1
                    continue
                for t in range(1, m):
                    twists += 1
                    fails["M"] += abs(M_value(character_twist(U, v, H, t), Q) - M_mu) > 1e-10 * abs(M_mu)
    # l12 norm against the 6-fold convolution, and Parseval
    for n in (7, 12, 20, 31, 40):
        g = GroupSpec.cyclic(n)
        U = random_subset(rng, g, 8, min_size=3)
        H = GroupSpec.cyclic(4)
        phi = rng.integers(0, 4, size=len(U))
        f = character_twist(U, phi, H, 1)
        f6 = f.astype(complex)
        for _ in range(5):
            f6 = conv_direct(g, f6, f)
        expect = np.mean(np.abs(f6) ** 2)
        fails["l12"] += abs(l12_fourier(U, phi, H, 1) - expect) > 1e-9 * expect
        for h in (f, rng.normal(size=n) + 1j * rng.normal(size=n)):
            lhs = np.mean(np.abs(h) ** 2)
            fails["parseval"] += abs(lhs - np.sum(np.abs(g.dft(h)) ** 2)) > 1e-10 * lhs
    ok = sum(fails.values()) == 0 and twists > 0
    verdict(6, "exact identities", ok, f"failures {dict(fails) or 0}; {twists} twisted M checks")


def test_criterion_07_inequalities(verdict):
    t0 = time.perf_counter()
    counts = {name: count_violations(check, 10**4, seed=2024) for name, check in INEQUALITY_CHECKS.items()}
    verdict(7, "inequality suite", sum(counts.values()) == 0, f"violations per 10^4 draws {counts}",
            time.perf_counter() - t0)


def random_affine(rng, n):
    """A random affine map out of ``Z_n`` into ``Z_n`` or a cyclic quotient."""
    src = GroupSpec.cyclic(n)
    divisors = [d for d in range(2, n + 1) if n % d == 0]
    m = n if rng.random() < 0.5 else int(rng.choice(divisors))
    return AffineMap(src, GroupSpec.cyclic(m), (int(rng.integers(m)),), int(rng.integers(m)))


def test_criterion_08_extraction_roundtrip(verdict):
    rng = np.random.default_rng(108)
    good, skipped, bad = 0, 0, 0
    t0 = time.perf_counter()
    while good + bad < 50 and skipped < 200:
        n = int(rng.integers(50, 2001))
        U = SubsetSample.explicit(GroupSpec.cyclic(n), rng.choice(n, size=dense_enough_size(n), replace=False))
        phi = random_affine(rng, n)
        rep = extraction_report(U, np.atleast_1d(phi(U.elements)), phi.target)
        if not rep.gamma.total:
            skipped += 1
            continue
        G = U.group.elements()
        same = rep.alpha is not None and np.array_equal(rep.alpha(G), phi(G))
        if same and rep.agreement == 1.0:
            good += 1
        else:
            bad += 1
    planted_ok = 0
    sizes = (700, 900, 1200, 1600, 2000)
    for n in sizes:
        U, x = planted_isolated(n, dense_enough_size(n), rng)
        src = U.group
        phi = AffineMap(src, src, (int(rng.integers(1, n)),), int(rng.integers(n)))
        vals = np.asarray(phi(U.elements)).copy()
        vals[U.index[x]] = (vals[U.index[x]] + int(rng.integers(1, n))) % n
        rep = extraction_report(U, vals, src)
        k = len(U)
        planted_ok += (rep.alpha is not None and np.array_equal(rep.alpha(src.elements()), phi(src.elements()))
                       and rep.agreement == (k - 1) / k)
    ok = good == 50 and bad == 0 and planted_ok == len(sizes)
    verdict(8, "extraction round-trip", ok,
            f"affine: {good} exact, {bad} wrong, {skipped} draws with gamma not total skipped; "
            f"planted: {planted_ok}/{len(sizes)}", time.perf_counter() - t0)


def test_criterion_09_threshold_behaviour(verdict):
    n = 10**5
    grid = [0.25, 0.5, 1, 2, 4, 8]
    p_low = 0.5 * n ** (-2 / 3)
    t0 = time.perf_counter()
    rows, recs = run_threshold_scan(GroupSpec.cyclic(n), C_grid=grid, p_grid=[p_low], trials=200, seed=2024)
    elapsed = time.perf_counter() - t0
    low = next(r for r in rows if r["p"] == p_low)
    frac_iso = sum(r.isolated > 0 for r in recs[low["C"]]) / 200
    by_C = [next(r for r in rows if r["C"] == C and r["p"] != p_low) for C in grid]
    monotone = all(b["frac_dim0"] >= a["frac_dim0"] or a["frac_dim0"] - b["frac_dim0"] <= a["ci_half"] + b["ci_half"]
                   for a, b in zip(by_C, by_C[1:]))
    ok = frac_iso >= 0.9 and monotone and by_C[-1]["frac_dim0"] > by_C[0]["frac_dim0"]
    table = ", ".join(f"C={r['C']:g}: {r['frac_dim0']:.3f}+-{r['ci_half']:.3f}" for r in by_C)
    verdict(9, "threshold behaviour", ok,
            f"isolated fraction at p=0.5n^(-2/3) {frac_iso:.3f}; frac_dim0 {table}", elapsed, 900)


def test_criterion_10_hitting_times(verdict):
    t0 = time.perf_counter()
    lines, bad, confirmed = [], 0, 0
    for n in (500, 2000):
        g = GroupSpec.cyclic(n)
        recs = run_hitting_time(g, trials=50, seed=2024)
        for rec in recs:
            if rec.tau_iso is None or rec.tau_dim0 is None or rec.tau_dim0 < rec.tau_iso:
                bad += 1
                continue
            # confirm the declared hit against exact rational rank
            perm = np.random.default_rng(rec.seed).permutation(n).tolist()
            dims = [freiman_dimension(SubsetSample.explicit(g, sorted(perm[:k])), exact=True)
                    for k in range(rec.tau_iso, rec.tau_dim0 + 1)]
            confirmed += dims[-1] == 0 and all(d > 0 for d in dims[:-1])
        coincide = sum(r.coincide for r in recs)
        lines.append(f"n={n}: coincide {coincide}/50, uncertified steps {sum(r.uncertified for r in recs)}")
    shadow_bad = 0
    for t in range(5):
        shadow = ShadowCheck()
        hitting_trial(GroupSpec.cyclic(50), t, 2024, shadow=shadow)
        shadow_bad += shadow.mismatches
    ok = bad == 0 and confirmed == 100 and shadow_bad == 0
    verdict(10, "hitting times", ok,
            f"{bad} order violations, {confirmed}/100 hits confirmed exactly, {shadow_bad} shadow mismatches; "
            + "; ".join(lines), time.perf_counter() - t0)


def test_criterion_11_determinism(verdict, tmp_path, capsys):
    cases = {
        "scan": {"n": 3000, "C": [1.0, 4.0], "trials": 16, "seed": 5},
        "hitting": {"n": 500, "trials": 16, "seed": 5},
    }
    same = []
    for cmd, cfg in cases.items():
        path = tmp_path / f"{cmd}.json"
        path.write_text(json.dumps(cfg))
        outs = []
        for i, workers in enumerate((1, 1, 2)):
            out = tmp_path / f"{cmd}{i}.csv"
            code = main([cmd, "--config", str(path), "--workers", str(workers), "--out", str(out)])
            outs.append(out.read_bytes() if code == 0 else None)
        same.append(outs[0] is not None and outs[0] == outs[1] == outs[2])
    capsys.readouterr()
    verdict(11, "determinism", all(same), f"scan identical: {same[0]}, hitting identical: {same[1]} (workers 1, 1, 2)")
