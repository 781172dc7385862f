"""The twelve acceptance criteria as runnable checks.

Each criterion returns a ``CriterionResult``; a criterion passes only if its
check holds and it finishes inside its time budget.  ``perturb`` lets a test
fixture corrupt the canonical table seen by the quadratic-identity check, which that
check must then detect.
"""
from __future__ import annotations

import random
import time
from dataclasses import dataclass, field
from fractions import Fraction
from math import factorial
from typing import Callable, Iterable

from .canonical import abscissa_check, canonical_Z, verify_quad_rec, zero_temperature_value
from .cylinderprob import (
    CylinderEvent,
    gc_cylinder_gf,
    parse_event,
    prob_canonical,
    prob_canonical_full,
    push_down_check,
)
from .exactnum import RF, rf_eval, rf_eval_float, rf_substitute_power, u_from_beta
from .grandcanonical import gc_Z, verify_functional_equation, verify_gcz, verify_thm4
from .mcoracle import Estimate, estimate_event_prob, estimate_multi_Z, estimate_Z
from .multicomponent import ChargeProfile, multi_canonical_Z, verify_multi_qpower
from .starring import StarSeries, overline, star_mul, star_pow, substitute_t_scale
from .ultrametric import Ball, BallFamily

Perturbation = Callable[[int, int, RF], RF]


@dataclass
class CriterionResult:
    number: int
    title: str
    passed: bool
    seconds: float
    budget: float
    details: dict = field(default_factory=dict)

    def line(self) -> str:
        tag = "PASS" if self.passed else "FAIL"
        return f"[{tag}] criterion {self.number:2d}: {self.title} ({self.seconds:.2f} s, budget {self.budget:.0f} s)"

    def to_json(self) -> dict:
        return {
            "number": self.number,
            "title": self.title,
            "passed": self.passed,
            "seconds": round(self.seconds, 3),
            "budget_seconds": self.budget,
            "details": self.details,
        }


# -- typeset closed forms, with q**beta = 1/u ---------------------------------


def display_Z2(q: int) -> RF:
    qb = 1 / RF.u()
    return (q - 1) * qb / (q * qb - 1)


def display_Z3(q: int) -> RF:
    qb = 1 / RF.u()
    inner = -2 * q * qb + q * q * qb + 2 * q - 1
    return (q - 1) * qb**3 * inner / ((q * qb - 1) * (q * q * qb**3 - 1))


def display_Z4(q: int) -> RF:
    qb = 1 / RF.u()
    A = -2 * q * qb + q * q * qb + 2 * q - 1
    d1 = q * qb - 1
    d3 = q * q * qb**3 - 1
    num = (
        -(q - 1) ** 2 * (4 - 2 * (q + 1)) * qb * Fraction(1, q * q) / (4 * d1**2)
        - (3 - q) * (q - 1) * A * qb**3 * Fraction(1, q) / (6 * d1 * d3)
        - (q - 1) * (4 - 3 * (q + 1)) * A / (6 * q**3 * d1 * d3)
    )
    den = Fraction(1, 24) * (4 - 4 * (q + 1)) * qb ** (-6) * Fraction(1, q**4) + Fraction(1, 6)
    return num / den


def exact_float(f: RF, q: int, beta) -> float:
    """f at u = q**-beta as a float, exact first when u is rational."""
    u0 = u_from_beta(q, beta)
    return float(rf_eval(f, u0)) if isinstance(u0, Fraction) else rf_eval_float(f, u0)


# -- random generators --------------------------------------------------------


def random_rf(rng: random.Random) -> RF:
    num = [Fraction(rng.randint(-5, 5), rng.randint(1, 4)) for _ in range(rng.randint(1, 3))]
    if rng.random() < 0.5:
        return RF(num)
    return RF(num, [1, Fraction(rng.randint(-3, 3), rng.randint(1, 3))])


def random_series(rng: random.Random, q: int, dmax: int) -> StarSeries:
    return StarSeries.from_coeffs([random_rf(rng) for _ in range(dmax + 1)], q, dmax)


def random_event(rng: random.Random, q: int, max_balls: int = 3, max_depth: int = 2, max_total: int = 3) -> CylinderEvent:
    balls: list[Ball] = []
    for _ in range(rng.randint(1, max_balls)):
        b = Ball(q, tuple(rng.randrange(q) for _ in range(rng.randint(1, max_depth))))
        if all(not (b.contains(c) or c.contains(b)) for c in balls):
            balls.append(b)
    counts = [0] * len(balls)
    for _ in range(rng.randint(0, max_total)):
        counts[rng.randrange(len(balls))] += 1
    return CylinderEvent(BallFamily(q, tuple(balls)), tuple(counts))


def covering_families(q: int, max_balls: int) -> list[BallFamily]:
    """Every covering family of o by at most ``max_balls`` disjoint balls."""
    out = []
    seen = set()

    def rec(balls: tuple[Ball, ...]):
        key = tuple(sorted(balls))
        if key in seen:
            return
        seen.add(key)
        out.append(BallFamily(q, key))
        if len(balls) + q - 1 > max_balls:
            return
        for i, b in enumerate(balls):
            rec(balls[:i] + balls[i + 1 :] + tuple(b.children()))

    rec((Ball.whole(q),))
    return out


def occupancies(total: int, parts: int) -> Iterable[tuple[int, ...]]:
    from .canonical import weak_compositions

    return weak_compositions(total, parts)


# -- criteria -----------------------------------------------------------------


def c1_small_table(**_) -> tuple[bool, dict]:
    bad = []
    for q in (2, 3, 4, 5, 7, 9):
        if not (canonical_Z(q, 0) == 1 and canonical_Z(q, 1) == 1 and canonical_Z(q, 2) == display_Z2(q)):
            bad.append(q)
    return not bad, {"q_values": [2, 3, 4, 5, 7, 9], "mismatches": bad}


def c2_z3_display(**_) -> tuple[bool, dict]:
    bad = [q for q in (2, 3, 5) if canonical_Z(q, 3) != display_Z3(q)]
    return not bad, {"q_values": [2, 3, 5], "mismatches": bad}


def c3_quadratic_identity(perturb: Perturbation | None = None, **_) -> tuple[bool, dict]:
    bad = []
    for q in (2, 3, 4, 5, 7):
        zf = (lambda n, q=q: perturb(q, n, canonical_Z(q, n))) if perturb else None
        for N in range(1, 13):
            if not verify_quad_rec(q, N, zf):
                bad.append([q, N])
    return not bad, {"N_max": 12, "failures": bad}


def c4_edges(**_) -> tuple[bool, dict]:
    bad = []
    for q in (2, 3, 5):
        for N in range(13):
            R = canonical_Z(q, N)
            if rf_eval(R, 1) != 1 or rf_eval(R, 0) != zero_temperature_value(q, N):
                bad.append([q, N])
    return not bad, {"failures": bad}


def c5_poles(**_) -> tuple[bool, dict]:
    bad = [[q, N] for q in (2, 3, 5) for N in range(2, 7) if not abscissa_check(q, N)]
    return not bad, {"failures": bad}


def c6_grand_canonical(**_) -> tuple[bool, dict]:
    results = {}
    for q, d in ((2, 8), (3, 8), (5, 6)):
        results[str(q)] = {
            "dmax": d,
            "gcz": verify_gcz(q, d),
            "funceq": verify_functional_equation(q, d),
            "thm4": [verify_thm4(q, ell, d) for ell in (0, 1, 2)],
        }
    ok = all(r["gcz"] and r["funceq"] and all(r["thm4"]) for r in results.values())
    return ok, results


def c7_star_laws(seed: int = 7, **_) -> tuple[bool, dict]:
    rng = random.Random(seed)
    fails = {"assoc": 0, "distrib": 0, "convolution": 0}
    for _ in range(100):
        q = rng.choice((2, 3, 5))
        ell = rng.choice((0, 1, 2))
        a, b, c = (random_series(rng, q, 6) for _ in range(3))
        if star_mul(star_mul(a, b, ell), c, ell) != star_mul(a, star_mul(b, c, ell), ell):
            fails["assoc"] += 1
        if star_mul(a, b + c, ell) != star_mul(a, b, ell) + star_mul(a, c, ell):
            fails["distrib"] += 1
        if star_mul(overline(a, ell), overline(b, ell), ell) != overline(a * b, ell):
            fails["convolution"] += 1
    return not any(fails.values()), {"triples": 100, "dmax": 6, "failures": fails}


def c8_cylinder_total(seed: int = 8, **_) -> tuple[bool, dict]:
    bad = []
    n_fam = 0
    for q in (2, 3):
        for fam in covering_families(q, 4):
            n_fam += 1
            for N in range(6):
                total = RF.const(0)
                for occ in occupancies(N, len(fam)):
                    total = total + prob_canonical_full(q, N, CylinderEvent(fam, occ))
                if total != 1:
                    bad.append([q, [str(b) for b in fam], N])
    rng = random.Random(seed)
    push_bad = []
    for _ in range(20):
        q = rng.choice((2, 3))
        ev = random_event(rng, q, max_total=2)
        n = rng.randint(max(ev.total, 1), 4)
        prefix = tuple(rng.randrange(q) for _ in range(rng.randint(1, 2)))
        if not push_down_check(q, n, ev, prefix):
            push_bad.append([q, str(ev), n, list(prefix)])
    return not bad and not push_bad, {"families": n_fam, "total_failures": bad, "push_down_failures": push_bad}


def c9_ensembles(seed: int = 9, **_) -> tuple[bool, dict]:
    rng = random.Random(seed)
    bad = []
    for _ in range(10):
        q = rng.choice((2, 3))
        ev = random_event(rng, q)
        g = gc_cylinder_gf(q, ev, 6)
        for N in range(7):
            expect = canonical_Z(q, N) * prob_canonical(q, N, ev) / factorial(N) if N >= ev.total else 0
            if g[N] != expect:
                bad.append([q, str(ev), N])
    return not bad, {"events": 10, "failures": bad}


def five_adic_closed_form(dmax: int) -> StarSeries:
    u = RF.u()
    z = gc_Z(5, 0, dmax)
    zbar = overline(substitute_t_scale(z, Fraction(1, 5)), 1)
    six = StarSeries.monomial(5, dmax, 6, canonical_Z(5, 6) * u**15 * Fraction(1, 5**6) / factorial(6))
    four = StarSeries.monomial(5, dmax, 4, canonical_Z(5, 4) * u**12 * Fraction(1, 25**4) / factorial(4))
    zbar2 = overline(substitute_t_scale(z, Fraction(1, 25)), 2)
    return zbar**3 * six * star_mul(four, star_pow(zbar2, 4, 1), 1)


FIVE_ADIC_EVENT = "5:1:1=6,5:2:2.3=4"


def c10_five_adic(**_) -> tuple[bool, dict]:
    ev = parse_event(FIVE_ADIC_EVENT)
    ok = gc_cylinder_gf(5, ev, 14) == five_adic_closed_form(14)
    return ok, {"event": FIVE_ADIC_EVENT, "dmax": 14}


def _mc_rule(checks: list[dict], rerun: Callable[[dict, int], Estimate]) -> tuple[bool, dict]:
    """Allow one marginal z-failure if a fresh-seed re-run passes; any more fails."""
    failed = [c for c in checks if not c["pass"]]
    retry = None
    if len(failed) == 1:
        c = failed[0]
        est = rerun(c, c["seed"] + 1_000_003)
        retry = {"check": c["label"], "z_score": est.z_score(c["exact"]), "pass": est.agrees(c["exact"])}
    ok = not failed or (retry is not None and retry["pass"])
    return ok, {"checks": len(checks), "failures": failed, "retry": retry}


def _record(label: str, exact: float, est: Estimate, seed: int, spec: dict) -> dict:
    return {
        "label": label,
        "exact": exact,
        "estimate": est.mean,
        "std_error": est.std_error,
        "z_score": est.z_score(exact),
        "capped": est.capped_valuations,
        "seed": seed,
        "pass": est.agrees(exact),
        "spec": spec,
    }


def c11_monte_carlo(seed: int = 11, n_samples: int = 100_000, threads: int | None = None, **_) -> tuple[bool, dict]:
    checks = []
    s = seed * 1000
    for q in (2, 3, 5):
        for beta in (Fraction(1, 2), Fraction(1), Fraction(2)):
            for N in (2, 3, 4):
                s += 1
                exact = exact_float(canonical_Z(q, N), q, beta)
                est = estimate_Z(q, N, float(beta), 30, n_samples, s, threads=threads)
                checks.append(_record(f"Z q={q} N={N} beta={beta}", exact, est, s, {"kind": "Z", "q": q, "N": N, "beta": beta}))
    rng = random.Random(seed)
    for _ in range(10):
        s += 1
        q = rng.choice((2, 3, 5))
        beta = rng.choice((Fraction(1, 2), Fraction(1), Fraction(2)))
        ev = random_event(rng, q, max_balls=2, max_total=2)
        N = rng.randint(max(ev.total, 2), 4)
        exact = exact_float(prob_canonical(q, N, ev), q, beta)
        est = estimate_event_prob(q, N, float(beta), ev, 30, n_samples, s, threads=threads)
        checks.append(_record(f"P q={q} N={N} beta={beta} {ev}", exact, est, s, {"kind": "P", "q": q, "N": N, "beta": beta, "event": ev}))

    def rerun(c: dict, new_seed: int) -> Estimate:
        sp = c["spec"]
        if sp["kind"] == "Z":
            return estimate_Z(sp["q"], sp["N"], float(sp["beta"]), 30, n_samples, new_seed, threads=threads)
        return estimate_event_prob(sp["q"], sp["N"], float(sp["beta"]), sp["event"], 30, n_samples, new_seed, threads=threads)

    ok, info = _mc_rule(checks, rerun)
    for c in checks:
        c.pop("spec")
    info["max_abs_z"] = max(abs(c["z_score"]) for c in checks)
    info["failures"] = [c["label"] for c in info["failures"]]
    return ok, info


def c12_multicomponent(seed: int = 12, n_samples: int = 100_000, threads: int | None = None, **_) -> tuple[bool, dict]:
    qpower = {f"q={q} Q={prof}": verify_multi_qpower(q, prof, 4) for q in (2, 3) for prof in ((1, 2), (2, 3))}
    unit = all(
        multi_canonical_Z(q, ChargeProfile((1, 1), distinct=False), (a, b)) == canonical_Z(q, a + b)
        for q in (2, 3)
        for a in range(6)
        for b in range(6 - a)
    )
    single = all(
        multi_canonical_Z(q, (Q,), (N,)) == rf_substitute_power(canonical_Z(q, N), Q * Q)
        for q in (2, 3)
        for Q in (2, 3)
        for N in range(6)
    )
    checks = []
    s = seed * 1000
    for q in (2, 3):
        for prof in ((1, 2), (2, 3)):
            for counts in ((1, 1), (2, 1), (1, 2)):
                s += 1
                exact = exact_float(multi_canonical_Z(q, prof, counts), q, 1)
                est = estimate_multi_Z(q, prof, counts, 1.0, 30, n_samples, s, threads=threads)
                checks.append(_record(f"q={q} Q={prof} N={counts}", exact, est, s, {"q": q, "prof": prof, "counts": counts}))

    def rerun(c: dict, new_seed: int) -> Estimate:
        sp = c["spec"]
        return estimate_multi_Z(sp["q"], sp["prof"], sp["counts"], 1.0, 30, n_samples, new_seed, threads=threads)

    mc_ok, info = _mc_rule(checks, rerun)
    for c in checks:
        c.pop("spec")
    info["failures"] = [c["label"] for c in info["failures"]]
    ok = all(qpower.values()) and unit and single and mc_ok
    return ok, {"qpower": qpower, "unit_charges": unit, "single_charge": single, "monte_carlo": info}


CRITERIA: list[tuple[int, str, float, Callable, tuple[str, ...]]] = [
    (1, "small-N table matches the typeset Z(0), Z(1), Z(2)", 1, c1_small_table, ("exact",)),
    (2, "Z(3) matches its typeset closed form", 1, c2_z3_display, ("exact",)),
    (3, "quadratic identity among table entries for N <= 12", 30, c3_quadratic_identity, ("exact",)),
    (4, "normalization and edge temperatures", 5, c4_edges, ("exact",)),
    (5, "pole at u**N = q**2", 5, c5_poles, ("exact",)),
    (6, "grand canonical identities", 60, c6_grand_canonical, ("exact",)),
    (7, "star-ring laws on random triples", 30, c7_star_laws, ("exact",)),
    (8, "cylinder total probability and push-down scaling", 60, c8_cylinder_total, ("exact",)),
    (9, "grand canonical and canonical cylinder agreement", 60, c9_ensembles, ("exact",)),
    (10, "worked 5-adic cylinder example", 120, c10_five_adic, ("exact",)),
    (11, "Monte Carlo agreement", 300, c11_monte_carlo, ("mc",)),
    (12, "multi-component identities and sampling", 120, c12_multicomponent, ("exact", "mc")),
]


def select(only: str | None) -> list[tuple]:
    """``only`` is None, a tag ("mc", "exact") or a comma list of criterion numbers."""
    if not only:
        return list(CRITERIA)
    if only in ("mc", "exact"):
        return [c for c in CRITERIA if only in c[4]]
    wanted = {int(x) for x in only.split(",")}
    unknown = wanted - {c[0] for c in CRITERIA}
    if unknown:
        raise ValueError(f"unknown criteria: {sorted(unknown)}")
    return [c for c in CRITERIA if c[0] in wanted]


def run_criterion(entry, **kwargs) -> CriterionResult:
    number, title, budget, fn, _ = entry
    t0 = time.perf_counter()
    try:
        ok, details = fn(**kwargs)
    except Exception as exc:  # a crash is a failed criterion, reported with its message
        ok, details = False, {"error": f"{type(exc).__name__}: {exc}"}
    dt = time.perf_counter() - t0
    if dt > budget:
        details["over_budget"] = True
    return CriterionResult(number, title, bool(ok) and dt <= budget, dt, budget, details)


def run_suite(only: str | None = None, perturb: Perturbation | None = None, threads: int | None = None, echo: Callable[[str], None] | None = None) -> list[CriterionResult]:
    results = []
    for entry in select(only):
        res = run_criterion(entry, perturb=perturb, threads=threads)
        if echo:
            echo(res.line())
        results.append(res)
    return results
