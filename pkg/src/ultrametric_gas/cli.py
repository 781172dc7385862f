"""Command-line interface: every command prints one JSON document on stdout.

Exact rationals are written as "num/den" strings and floats as JSON numbers
in separate fields.  Exit status: 0 success, 1 domain error, 2 usage error.
"""
from __future__ import annotations

import argparse
import datetime as _dt
import json
import sys
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Sequence

from . import __version__
from .canonical import canonical_Z, energy_distribution
from .cylinderprob import CompositionLimitError, gc_cylinder_prob, parse_event, prob_canonical
from .exactnum import PoleError, RF, format_rational, parse_beta, rf_eval, rf_eval_float, u_from_beta
from .grandcanonical import (
    TruncationError,
    gc_Z,
    occupancy_pmf,
    verify_functional_equation,
    verify_gcz,
    verify_thm4,
)
from .mcoracle import estimate_event_prob, estimate_multi_Z, estimate_Z, resolve_threads, rng_metadata
from .multicomponent import ChargeProfile, multi_canonical_Z

SCHEMA_VERSION = "1.0"
COMMANDS = ("zcan", "zgc", "zmulti", "cylprob", "mc-verify", "acceptance")


class DomainError(Exception):
    """A well-formed request that the mathematics or resource limits reject."""


@dataclass
class RunConfig:
    subcommand: str
    options: dict = field(default_factory=dict)
    output: str | None = None

    def echo(self) -> dict:
        return {k: _jsonable(v) for k, v in sorted(self.options.items())}


def _jsonable(v: Any):
    if isinstance(v, Fraction):
        return format_rational(v)
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    return v


# -- argument types -----------------------------------------------------------


def _int_at_least(lo: int):
    def conv(text: str) -> int:
        try:
            v = int(text)
        except ValueError:
            raise argparse.ArgumentTypeError(f"{text!r} is not an integer")
        if v < lo:
            raise argparse.ArgumentTypeError(f"{v} must be at least {lo}")
        return v

    return conv


def _beta(text: str) -> Fraction:
    try:
        return parse_beta(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc))


def _nonneg_rational(text: str) -> Fraction:
    try:
        v = Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"{text!r} is not a rational number")
    if v < 0:
        raise argparse.ArgumentTypeError(f"{text} must be non-negative")
    return v


def _int_list(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(x) for x in text.split(",") if x.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"{text!r} is not a comma-separated integer list")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="ultrametric-gas", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)
    q = dict(type=_int_at_least(2), required=True, help="residue field size")

    def common(sp):
        sp.add_argument("--output", help="write the JSON document to this path instead of stdout")

    s = sub.add_parser("zcan", help="canonical partition function Z(N, o) as a rational function of u = q^-beta")
    s.add_argument("--q", **q)
    s.add_argument("--n", type=_int_at_least(0), required=True)
    s.add_argument("--beta", type=_beta, help="evaluate at this inverse temperature (rational or decimal)")
    s.add_argument("--dist", type=_int_at_least(0), metavar="K", help="energy distribution p_0..p_K")
    common(s)

    s = sub.add_parser("zgc", help="grand canonical series and its functional equations")
    s.add_argument("--q", **q)
    s.add_argument("--dmax", type=_int_at_least(0), required=True)
    s.add_argument("--check", choices=("gcz", "funceq", "thm4"))
    s.add_argument("--ell", type=_int_at_least(0), default=0)
    s.add_argument("--t", type=_nonneg_rational, help="fugacity for the occupancy law")
    s.add_argument("--beta", type=_beta)
    s.add_argument("--pmf", type=_int_at_least(0), metavar="NMAX", help="occupancy law of N_o up to NMAX")
    common(s)

    s = sub.add_parser("zmulti", help="multi-species canonical partition function")
    s.add_argument("--q", **q)
    s.add_argument("--charges", type=_int_list, required=True)
    s.add_argument("--counts", type=_int_list, required=True)
    s.add_argument("--beta", type=_beta)
    common(s)

    s = sub.add_parser("cylprob", help="probability of a cylinder event {N_B = n}")
    s.add_argument("--q", **q)
    s.add_argument("--balls", required=True, help='ball=count pairs, e.g. "5:1:1=6,5:2:2.3=4"')
    mode = s.add_mutually_exclusive_group(required=True)
    mode.add_argument("--n", type=_int_at_least(0), help="canonical ensemble with N particles")
    mode.add_argument("--t", type=_nonneg_rational, help="grand canonical ensemble at fugacity t")
    s.add_argument("--beta", type=_beta)
    s.add_argument("--tolerance", type=float, default=1e-12)
    common(s)

    s = sub.add_parser("mc-verify", help="compare an exact value with an importance-sampling estimate")
    s.add_argument("--q", **q)
    s.add_argument("--n", type=_int_at_least(0))
    s.add_argument("--beta", type=_beta, required=True)
    s.add_argument("--balls", help="estimate this event probability instead of Z")
    s.add_argument("--charges", type=_int_list, help="multi-species mode (with --counts)")
    s.add_argument("--counts", type=_int_list)
    s.add_argument("--samples", type=_int_at_least(2), default=100_000)
    s.add_argument("--seed", type=_int_at_least(0), default=0)
    s.add_argument("--precision", type=_int_at_least(1), default=30)
    s.add_argument("--threads", type=_int_at_least(1))
    common(s)

    s = sub.add_parser("acceptance", help="run the acceptance suite")
    s.add_argument("--only", help='"mc", "exact" or a comma list of criterion numbers')
    s.add_argument("--threads", type=_int_at_least(1))
    common(s)
    return p


# -- helpers ------------------------------------------------------------------


def _evaluate(f: RF, q: int, beta: Fraction) -> dict:
    u0 = u_from_beta(q, beta)
    if isinstance(u0, Fraction):
        v = rf_eval(f, u0)
        return {"u": format_rational(u0), "exact": format_rational(v), "float": float(v)}
    return {"u": None, "u_float": u0, "exact": None, "float": rf_eval_float(f, u0)}


def _rf_out(f: RF) -> dict:
    return {"rational_function": f.to_json(), "text": str(f)}


def _require_nonneg_beta(beta: Fraction) -> None:
    if beta < 0:
        raise DomainError("beta must be non-negative here (u = q^-beta must lie in [0, 1])")


def _scalar(x) -> dict:
    if isinstance(x, Fraction):
        return {"exact": format_rational(x), "float": float(x)}
    return {"exact": None, "float": float(x)}


# -- commands -----------------------------------------------------------------


def cmd_zcan(a) -> dict:
    Z = canonical_Z(a.q, a.n)
    out = {"q": a.q, "N": a.n, "Z": _rf_out(Z)}
    if a.beta is not None:
        out["value"] = _evaluate(Z, a.q, a.beta)
    if a.dist is not None:
        dist = energy_distribution(a.q, a.n, a.dist)
        out["energy_distribution"] = {"exact": [format_rational(p) for p in dist], "float": [float(p) for p in dist]}
    return out


def cmd_zgc(a) -> dict:
    out: dict = {"q": a.q, "dmax": a.dmax}
    if a.check:
        if a.check == "gcz":
            holds = verify_gcz(a.q, a.dmax)
        elif a.check == "funceq":
            holds = verify_functional_equation(a.q, a.dmax)
        else:
            holds = verify_thm4(a.q, a.ell, a.dmax)
            out["ell"] = a.ell
        out.update(check=a.check, holds=holds)
    if a.pmf is not None:
        if a.t is None or a.beta is None:
            raise DomainError("--pmf needs both --t and --beta")
        _require_nonneg_beta(a.beta)
        u0 = u_from_beta(a.q, a.beta)
        pmf = occupancy_pmf(a.q, a.t, u0, a.pmf)
        probs = pmf.probabilities
        out["pmf"] = {
            "t": format_rational(a.t),
            "exact": [format_rational(p) for p in probs] if isinstance(u0, Fraction) else None,
            "float": [float(p) for p in probs],
            "truncation_error_bound": pmf.error_bound,
        }
    if not a.check and a.pmf is None:
        series = gc_Z(a.q, a.ell, a.dmax)
        out.update(ell=a.ell, coefficients=[c.to_json() for c in series.coeffs])
    return out


def cmd_zmulti(a) -> dict:
    if len(a.charges) != len(a.counts):
        raise DomainError("--charges and --counts must have the same length")
    try:
        prof = ChargeProfile(a.charges)
    except ValueError as exc:
        raise DomainError(str(exc))
    Z = multi_canonical_Z(a.q, prof, a.counts)
    out = {"q": a.q, "charges": list(a.charges), "counts": list(a.counts), "Z": _rf_out(Z)}
    if a.beta is not None:
        out["value"] = _evaluate(Z, a.q, a.beta)
    return out


def cmd_cylprob(a) -> dict:
    ev = parse_event(a.balls, a.q)
    out: dict = {"q": a.q, "event": str(ev)}
    if a.n is not None:
        P = prob_canonical(a.q, a.n, ev)
        out.update(ensemble="canonical", N=a.n, probability=_rf_out(P))
        if a.beta is not None:
            out["value"] = _evaluate(P, a.q, a.beta)
            out["value"]["error_bound"] = 0.0
        return out
    if a.beta is None:
        raise DomainError("grand canonical mode needs --beta")
    _require_nonneg_beta(a.beta)
    if a.t <= 0:
        raise DomainError("fugacity must be positive")
    res = gc_cylinder_prob(a.q, ev, a.t, u_from_beta(a.q, a.beta), a.tolerance)
    out.update(ensemble="grand_canonical", t=format_rational(a.t))
    out["value"] = {**_scalar(res.value), "error_bound": res.error_bound, "dmax": res.dmax}
    return out


def cmd_mc_verify(a) -> tuple[dict, dict]:
    _require_nonneg_beta(a.beta)
    threads = resolve_threads(a.threads)
    L, S, seed = a.precision, a.samples, a.seed
    if a.charges is not None or a.counts is not None:
        if a.charges is None or a.counts is None or len(a.charges) != len(a.counts):
            raise DomainError("multi-species mode needs --charges and --counts of equal length")
        exact_rf = multi_canonical_Z(a.q, ChargeProfile(a.charges), a.counts)
        est = estimate_multi_Z(a.q, a.charges, a.counts, float(a.beta), L, S, seed, threads)
        target = "multi_Z"
    else:
        if a.n is None:
            raise DomainError("--n is required unless --charges/--counts are given")
        if a.balls:
            ev = parse_event(a.balls, a.q)
            exact_rf = prob_canonical(a.q, a.n, ev)
            est = estimate_event_prob(a.q, a.n, float(a.beta), ev, L, S, seed, threads)
            target = "event_probability"
        else:
            exact_rf = canonical_Z(a.q, a.n)
            est = estimate_Z(a.q, a.n, float(a.beta), L, S, seed, threads=threads)
            target = "Z"
    ev_exact = _evaluate(exact_rf, a.q, a.beta)
    exact_f = ev_exact["float"]
    out = {
        "target": target,
        "exact": ev_exact["exact"],
        "exact_float": exact_f,
        "estimate": est.mean,
        "std_error": est.std_error,
        "z_score": est.z_score(exact_f),
        "capped": est.capped_valuations,
        "bias_bound": est.bias_bound,
        "n_samples": est.n_samples,
        "agrees_3sigma": est.agrees(exact_f),
    }
    return out, {"rng": rng_metadata(seed, S)}


def cmd_acceptance(a) -> dict:
    from .acceptance import run_suite

    results = run_suite(a.only, threads=a.threads, echo=lambda s: print(s, file=sys.stderr))
    return {
        "all_passed": all(r.passed for r in results),
        "criteria": [r.to_json() for r in results],
    }


DISPATCH = {
    "zcan": cmd_zcan,
    "zgc": cmd_zgc,
    "zmulti": cmd_zmulti,
    "cylprob": cmd_cylprob,
    "mc-verify": cmd_mc_verify,
    "acceptance": cmd_acceptance,
}

DOMAIN_ERRORS = (DomainError, ValueError, ZeroDivisionError, PoleError, TruncationError, CompositionLimitError)


def envelope(config: RunConfig, results: dict | None, metadata: dict | None = None, error: str | None = None) -> dict:
    doc = {
        "schema_version": SCHEMA_VERSION,
        "command": config.subcommand,
        "config": config.echo(),
        "timestamp": _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds"),
        "results": results if results is not None else {},
    }
    if metadata:
        doc["metadata"] = metadata
    if error is not None:
        doc["error"] = error
    return doc


def run(config: RunConfig, args: argparse.Namespace) -> tuple[int, dict]:
    try:
        res = DISPATCH[config.subcommand](args)
    except DOMAIN_ERRORS as exc:
        return 1, envelope(config, None, error=f"{type(exc).__name__}: {exc}")
    metadata = None
    if isinstance(res, tuple):
        res, metadata = res
    code = 0
    if config.subcommand == "acceptance" and not res["all_passed"]:
        code = 1
    return code, envelope(config, res, metadata)


def main(argv: Sequence[str] | None = None) -> int:
    # exact rationals at large N easily exceed the default 4300-digit str() limit
    if hasattr(sys, "set_int_max_str_digits"):
        sys.set_int_max_str_digits(0)
    parser = build_parser()
    args = parser.parse_args(argv)
    opts = {k: v for k, v in vars(args).items() if k not in ("command", "output")}
    config = RunConfig(args.command, opts, args.output)
    code, doc = run(config, args)
    text = json.dumps(doc, indent=2, sort_keys=False)
    if config.output:
        with open(config.output, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)
    if "error" in doc:
        print(doc["error"], file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
