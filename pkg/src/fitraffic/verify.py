"""Cross-checks tying the simulator, the preimage enumeration and the closed forms together.

Every check returns a :class:`CheckResult`; :func:`run_checks` runs the full
battery (or a reduced one with ``quick=True``). The car-based update used by
the dynamical checks can be replaced through ``step_fn``, which is how the
harness is tested against deliberately broken rules.
"""

from __future__ import annotations

import itertools
from dataclasses import asdict, dataclass
from fractions import Fraction
from typing import Callable

import numpy as np

from . import analytic, lattice, measure, preimages, simulation

StepFn = Callable[[lattice.Configuration, int], lattice.Configuration]


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str = ""

    def line(self) -> str:
        return f"{'PASS' if self.passed else 'FAIL'}  {self.name}: {self.detail}"


def _random_configs(rng: np.random.Generator, L: int, count: int):
    for _ in range(count):
        rho = rng.random()
        yield lattice.Configuration((rng.random(L) < rho).astype(np.uint8))


def check_conservation(step_fn: StepFn, rng, count: int = 300) -> CheckResult:
    for m in (1, 2, 3):
        for L in (1, 2, 5, 12, 64):
            for c in _random_configs(rng, L, count // 15 + 1):
                d = step_fn(c, m)
                if d.n_cars != c.n_cars:
                    return CheckResult("conservation", False, f"m={m} {c} -> {d}")
    return CheckResult("conservation", True, "car count preserved")


def check_rule_equivalence(step_fn: StepFn, rng, max_L: int = 14, random_count: int = 1000) -> CheckResult:
    checked = 0
    for m in (1, 2, 3):
        for L in range(1, max_L + 1):
            for code in range(2**L):
                c = lattice.Configuration([(code >> k) & 1 for k in range(L)])
                if step_fn(c, m) != lattice.step_local(c, m):
                    return CheckResult("rule-equivalence", False, f"m={m} config {c}")
                checked += 1
        for c in _random_configs(rng, 256, random_count // 3):
            if step_fn(c, m) != lattice.step_local(c, m):
                return CheckResult("rule-equivalence", False, f"m={m} random L=256 config")
            checked += 1
    return CheckResult("rule-equivalence", True, f"{checked} configurations, L <= {max_L} exhaustive")


def check_rule_184() -> CheckResult:
    code = lattice.wolfram_number(1)
    return CheckResult("rule-184", code == 184, f"m=1 local rule has Wolfram code {code}")


def check_figure_fixture() -> CheckResult:
    got = lattice.iterate_open("101110100", 2, 2)
    return CheckResult("light-cone-fixture", got == "100", f"101110100 -> {got} after 2 steps (m=2)")


def check_light_cone(step_fn: StepFn, rng, count: int = 200) -> CheckResult:
    for _ in range(count):
        m = int(rng.integers(1, 4))
        t = int(rng.integers(0, 5))
        p = (m + 1) * t + 1 + int(rng.integers(0, 10))
        word = rng.integers(0, 2, p).astype(np.uint8)
        pad = int(rng.integers(t + 1, 3 * t + 6))
        ring = np.concatenate([rng.integers(0, 2, pad), word, rng.integers(0, 2, pad)]).astype(np.uint8)
        c = lattice.Configuration(ring)
        for _ in range(t):
            c = step_fn(c, m)
        lo, hi = lattice.determined_span(p, m, t)
        want = lattice.bits_to_str(c.cells[pad + lo:pad + hi])
        got = lattice.iterate_open(word, m, t)
        if got != want:
            return CheckResult("light-cone", False, f"m={m} t={t} word={lattice.bits_to_str(word)}")
    return CheckResult("light-cone", True, f"{count} random words agree with ring evolution")


def check_flow_identity(step_fn: StepFn, rng, count: int = 1000) -> CheckResult:
    worst = 0.0
    for m in (1, 2, 3):
        for L in (12, 256):
            for c in _random_configs(rng, L, count):
                c = step_fn(c, m)
                rho = c.n_cars / L
                lhs = measure.flow(c, m)
                rhs = 1 - rho - measure.block_frequency(c, "0" * (m + 1))
                worst = max(worst, abs(lhs - rhs))
    ok = worst <= 1e-12
    return CheckResult("flow-identity", ok, f"max |flow - (1 - rho - P(0^(m+1)))| = {worst:.3g}")


def _oracle_cases(max_p: int):
    for m in range(1, max_p):
        for n in itertools.count():
            if (n + 1) * (m + 1) > max_p:
                break
            yield m, n


def check_preimage_sets(max_p: int = 20) -> CheckResult:
    cases = 0
    for m, n in _oracle_cases(max_p):
        p = (n + 1) * (m + 1)
        if not np.array_equal(preimages.preimage_mask(m, n), preimages.admissible_mask(p, m)):
            return CheckResult("preimage-sets", False, f"admissible set differs from preimages at m={m}, n={n}")
        cases += 1
    return CheckResult("preimage-sets", True, f"set equality on {cases} (m, n) cases with p <= {max_p}")


def check_path_counts(max_p: int = 20) -> CheckResult:
    for m, n in _oracle_cases(max_p):
        brute = preimages.enumerate_preimages_bruteforce(m, n, limit=max_p)
        formula = preimages.count_admissible(m, n)
        if brute.by_ones != formula.by_ones:
            return CheckResult("path-counts", False, f"m={m}, n={n}: {brute.by_ones} != {formula.by_ones}")
    return CheckResult("path-counts", True, f"ballot counts match the exhaustive scan for p <= {max_p}")


def check_lemma(max_p: int = 16) -> CheckResult:
    checked = 0
    for m in (1, 2, 3):
        for p in range(m + 2, max_p + 1):
            for w in preimages.admissible_words(p, m):
                img = lattice.iterate_open(w, m, 1)
                if not preimages.is_admissible(img, m):
                    return CheckResult("admissible-shrinkage", False, f"m={m}: {w} -> {img}")
                checked += 1
    return CheckResult("admissible-shrinkage", True, f"{checked} admissible words stay admissible after one step")


def check_probability_routes(max_p: int = 20) -> CheckResult:
    rhos = [Fraction(1, 10), Fraction(3, 10), Fraction(1, 3), Fraction(1, 2), Fraction(9, 10)]
    for m, n in _oracle_cases(max_p):
        for r in rhos:
            if preimages.preimage_probability(m, n, r) != analytic.exact_block_prob(m, n, r):
                return CheckResult("probability-routes", False, f"m={m}, t={n}, rho={r}")
            if abs(preimages.preimage_probability(m, n, float(r)) - analytic.exact_block_prob(m, n, float(r))) > 1e-12:
                return CheckResult("probability-routes", False, f"float mismatch m={m}, t={n}, rho={r}")
    return CheckResult("probability-routes", True, "ballot-weighted sum equals the closed form exactly")


def check_hypergeometric(t_max: int = 50) -> CheckResult:
    worst = 0.0
    for m in (1, 2, 3):
        for t in range(t_max + 1):
            for k in range(1, 21):
                rho = k / 20
                a = analytic.exact_flow(m, t, rho)
                b = analytic.flow_hypergeometric(m, t, rho)
                err = abs(a - b) / abs(a) if a else abs(b)
                worst = max(worst, err)
    return CheckResult("hypergeometric-form", worst <= 1e-10, f"max relative error {worst:.3g} for t <= {t_max}")


def check_steady_state_limit(t: int = 2000) -> CheckResult:
    worst = 0.0
    for m in (1, 2):
        for rho in (0.1, 0.2, 0.5, 0.8):
            if abs(rho - 1 / (m + 1)) < 0.05:
                continue
            worst = max(worst, abs(analytic.exact_block_prob(m, t, rho) - analytic.steady_state_block_prob(m, rho)))
    return CheckResult("steady-state-limit", worst <= 0.02, f"max deviation {worst:.3g} at t={t}")


def check_monte_carlo(L: int, t_max: int, replicas: int, seed: int,
                      rhos=(0.3, 1 / 3, 0.35), m: int = 2) -> CheckResult:
    worst = 0.0
    for rho in rhos:
        z = monte_carlo_z_scores(m, L, t_max, replicas, seed, rho)
        worst = max(worst, float(np.max(np.abs(z))))
    return CheckResult("monte-carlo-flow", worst <= 3.0,
                       f"max |measured - exact| = {worst:.2f} standard errors (L={L}, R={replicas}, t <= {t_max})")


def monte_carlo_z_scores(m: int, L: int, t_max: int, replicas: int, seed: int, rho: float) -> np.ndarray:
    """Per-step deviation of the replica-mean flow from the exact curve, in standard errors.

    Fixed-count initial states, so the realized density is the same in every
    replica and is the one fed to the exact formula.
    """
    run = simulation.run_replicas(m, L, t_max, seed, replicas, "fixed", rho=rho)
    density = float(run.densities[0])
    exact = np.array([analytic.exact_flow(m, t, density) for t in range(t_max + 1)])
    se = run.stderr()[:, 1]
    return (run.mean()[:, 1] - exact) / np.where(se > 0, se, np.inf)


def run_checks(quick: bool = False, step_fn: StepFn = lattice.step, seed: int = 2024) -> list[CheckResult]:
    rng = np.random.default_rng(seed)
    if quick:
        exhaustive_L, oracle_p, lemma_p, hyp_t = 8, 12, 12, 20
        mc = dict(L=20_000, t_max=30, replicas=32)
    else:
        exhaustive_L, oracle_p, lemma_p, hyp_t = 14, 20, 16, 50
        mc = dict(L=100_000, t_max=100, replicas=32)
    checks = [
        lambda: check_conservation(step_fn, rng),
        lambda: check_rule_equivalence(step_fn, rng, exhaustive_L, 300 if quick else 1000),
        check_rule_184,
        check_figure_fixture,
        lambda: check_light_cone(step_fn, rng, 50 if quick else 200),
        lambda: check_flow_identity(step_fn, rng, 100 if quick else 1000),
        lambda: check_preimage_sets(oracle_p),
        lambda: check_path_counts(oracle_p),
        lambda: check_lemma(lemma_p),
        lambda: check_probability_routes(oracle_p),
        lambda: check_hypergeometric(hyp_t),
        lambda: check_steady_state_limit(),
        lambda: check_monte_carlo(seed=seed, **mc),
    ]
    results = []
    for check in checks:
        try:
            results.append(check())
        except Exception as exc:  # a crashing check is a failed check
            name = getattr(check, "__name__", "check")
            results.append(CheckResult(name, False, f"{type(exc).__name__}: {exc}"))
    return results


def report(results: list[CheckResult]) -> dict:
    return {"passed": all(r.passed for r in results), "checks": [asdict(r) for r in results]}
