"""Seeded battery behind ``envlab selftest``.

Reduced-size versions of the package's acceptance checks. The report holds
only the seed and computed quantities (no timings), so equal seeds give
byte-identical output.
"""

from __future__ import annotations

import math
from itertools import combinations

import numpy as np

from ._config import EPS_EQ, EPS_RECON
from .envariance import (
    SwapSpec,
    envariance_residual,
    envariant_description,
    optimal_counter,
    swap_detectability,
    swap_pair,
)
from .finegrain import apply_cshift, born_from_probability, build_fine_grained_state_multi
from .frequency import ensemble_counts, ensemble_oracle, ensemble_probabilities, gaussian_approx
from .hilbert import PureState, SchmidtDecomposition, apply_local, schmidt
from .sampling import random_local_unitary, random_moduli, random_schmidt_state, random_state


def _check(name: str, passed: bool, **detail) -> dict:
    clean = {}
    for k, v in detail.items():
        if isinstance(v, (np.floating, np.integer, np.bool_)):
            v = v.item()
        clean[k] = v
    return {"name": name, "passed": bool(passed), "detail": clean}


def check_born_exact() -> dict:
    r = born_from_probability(1 / 3, 3)
    ok = abs(r.probabilities[0] - 1 / 3) <= 1e-15 and abs(r.probabilities[1] - 2 / 3) <= 1e-15
    tenths = all(born_from_probability(k / 10, 10).probabilities[0] == k / 10 for k in range(1, 10))
    return _check("born_exact", ok and tenths, p_third=list(r.probabilities), tenths_exact=tenths)


def check_envariance_criterion(rng, trials: int) -> dict:
    agree, worst_gap_residual = 0, math.inf
    for _ in range(trials):
        rank = int(rng.integers(2, 7))
        d_sys, d_env = int(rng.integers(rank, 9)), int(rng.integers(rank, 9))
        state = random_schmidt_state(rng, random_moduli(rng, rank), d_sys, d_env)
        sd = schmidt(state, "S")
        i, j = (int(x) for x in rng.choice(sd.rank, size=2, replace=False))
        u_s, u_e = swap_pair(sd, SwapSpec(i, j, rng.uniform(0, 2 * np.pi)))
        equal = abs(sd.moduli[i] - sd.moduli[j]) < EPS_EQ
        envariant = envariance_residual(state, u_s, u_e) < EPS_RECON
        agree += equal == envariant
        gap = abs(sd.moduli[i] - sd.moduli[j])
        if gap > 0.05:
            worst_gap_residual = min(worst_gap_residual, optimal_counter(state, u_s).residual)
    ok = agree == trials and worst_gap_residual > 0.01
    return _check("envariance_criterion", ok, trials=trials, agreeing=agree,
                  min_residual_gap_over_0_05=None if math.isinf(worst_gap_residual)
                  else worst_gap_residual)


def check_certificate() -> dict:
    state = SchmidtDecomposition.from_coefficients([math.sqrt(0.2), math.sqrt(0.8)]).to_state()
    sd = schmidt(state, "S")
    u_s, _ = swap_pair(sd, SwapSpec(0, 1))
    best = optimal_counter(state, u_s)
    achieved = envariance_residual(state, u_s, best.counter)
    ok = (abs(best.certificate - 0.8) <= 1e-8 and abs(best.residual - math.sqrt(0.4)) <= 1e-6
          and abs(achieved - best.residual) <= 1e-8)
    return _check("optimal_counter_certificate", ok, certificate=best.certificate,
                  residual=best.residual, achieved_residual=achieved)


def check_no_signaling(rng, trials: int) -> dict:
    agree = 0
    for _ in range(trials):
        d_sys, d_env = int(rng.integers(1, 7)), int(rng.integers(1, 7))
        state = random_state(rng, (d_sys, d_env), ("S", "E"))
        after = apply_local(state, random_local_unitary(rng, "E", d_env))
        agree += envariant_description(state, "S").agrees_with(
            envariant_description(after, "S"), 1e-9, 1e-8)
    return _check("no_signaling", agree == trials, trials=trials, agreeing=agree)


def check_fine_graining(rng, max_M: int) -> dict:
    worst_mod, worst_res, cases = 0.0, 0.0, 0
    for M in range(2, max_M + 1):
        for m in range(1, M):
            phases = rng.uniform(0, 2 * np.pi, size=2)
            shifted = apply_cshift(build_fine_grained_state_multi(phases, (m, M - m)))
            sd = schmidt(shifted, ("S", "C"))
            worst_mod = max(worst_mod, float(np.abs(sd.moduli[:M] - 1 / math.sqrt(M)).max()))
            for i, j in combinations(range(M), 2):
                u_s, u_e = swap_pair(sd, SwapSpec(i, j))
                worst_res = max(worst_res, envariance_residual(shifted, u_s, u_e))
            cases += 1
    ok = worst_mod <= 1e-10 and worst_res <= 1e-8
    return _check("fine_graining", ok, cases=cases, max_modulus_error=worst_mod,
                  max_swap_residual=worst_res)


def check_convergence() -> dict:
    errs = []
    for M in (10, 100, 1000, 10000):
        r = born_from_probability(1 / math.pi, M)
        errs.append(abs(r.probabilities[0] - 1 / math.pi) * 2 * M)
    return _check("convergence", all(e <= 1.0 for e in errs), scaled_errors=errs)


def check_oracle() -> dict:
    cases = 0
    ok = True
    for N in range(1, 4):
        for M in range(2, 4):
            for m in range(1, M):
                ok &= ensemble_oracle(N, m, M).counts == ensemble_counts(N, m, M).counts
                cases += 1
    big = ensemble_counts(50, 3, 10).total == 10 ** 50
    return _check("frequency_oracle", ok and big, cases=cases, total_50_exact=big)


def check_gaussian() -> dict:
    moments_ok, trend_ok = True, True
    sups = {}
    for p0 in (0.1, 0.3, 0.5):
        prev = math.inf
        for N in (100, 1000, 10000):
            n = np.arange(N + 1)
            pm = ensemble_probabilities(N, p0)
            mean = float(np.sum(n * pm))
            var = float(np.sum((n - mean) ** 2 * pm))
            moments_ok &= abs(mean / (p0 * N) - 1) <= 1e-8
            moments_ok &= abs(var / (p0 * (1 - p0) * N) - 1) <= 1e-8
            sup = float(np.abs(pm - gaussian_approx(N, p0, n)).max())
            trend_ok &= sup <= prev
            prev = sup
            sups[f"{p0}/{N}"] = sup
    tail = sups["0.5/10000"] < 2 / 10000
    return _check("gaussian_limit", moments_ok and trend_ok and tail, sup_gaps=sups)


def check_distinguish() -> dict:
    chi = PureState.from_amplitudes([1, 1, -1], (3,), ("S",))
    det = swap_detectability(chi, SwapSpec(0, 2))
    entangled = SchmidtDecomposition.from_coefficients([1, 1, -1])
    u_s, u_e = swap_pair(entangled, SwapSpec(0, 2))
    res = envariance_residual(entangled.to_state(), u_s, u_e)
    ok = (abs(det.overlap + 1 / 3) <= 1e-12
          and abs(det.distinguish_prob - (1 + math.sqrt(8) / 3) / 2) <= 1e-5
          and res <= EPS_RECON)
    return _check("distinguishability", ok, overlap=[det.overlap.real, det.overlap.imag],
                  distinguish_prob=det.distinguish_prob, entangled_swap_residual=res)


def run_selftest(seed: int, trials: int = 200, fine_max_M: int = 10) -> dict:
    rng = np.random.default_rng(seed)
    checks = [
        check_born_exact(),
        check_envariance_criterion(rng, trials),
        check_certificate(),
        check_no_signaling(rng, trials // 2),
        check_fine_graining(rng, fine_max_M),
        check_convergence(),
        check_oracle(),
        check_gaussian(),
        check_distinguish(),
    ]
    return {"seed": seed, "passed": all(c["passed"] for c in checks), "checks": checks}
