"""Monte Carlo oracle: uniform Haar samples at finite digit precision plus importance weights.

A point of o is drawn as L independent uniform base-q digits, which is exact
Haar sampling of the ball containing it at depth L.  The valuation of a
difference is the index of the first differing digit; pairs that agree on all
L digits are capped at v = L and counted.

RNG contract: numpy PCG64.  The root ``SeedSequence(seed)`` is spawned into
one child per chunk of ``CHUNK`` samples, chunk i always uses child i, and
chunk sums are reduced in chunk order, so results are bit-for-bit identical
for any thread count.
"""
from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from typing import Sequence

import numpy as np

from .cylinderprob import CylinderEvent

CHUNK = 10_000
RNG_NAME = "numpy.random.PCG64 via SeedSequence(seed).spawn(n_chunks), one child per 10000-sample chunk"
THREADS_ENV = "ULTRAMETRIC_GAS_THREADS"


@dataclass(frozen=True)
class Estimate:
    mean: float
    std_error: float
    n_samples: int
    capped_valuations: int
    bias_bound: float = 0.0

    def z_score(self, exact: float) -> float:
        if self.std_error == 0:
            return 0.0 if self.mean == exact else math.inf
        return (self.mean - exact) / self.std_error

    def agrees(self, exact: float, nsigma: float = 3.0) -> bool:
        """|mean - exact| <= nsigma * std_error, with exact equality required when std_error is 0."""
        if self.std_error == 0:
            return self.mean == exact
        return abs(self.mean - exact) <= nsigma * self.std_error

    def to_json(self) -> dict:
        return asdict(self)


def resolve_threads(threads: int | None = None) -> int:
    if threads is None:
        env = os.environ.get(THREADS_ENV)
        threads = int(env) if env else 1
    if threads < 1:
        raise ValueError("thread count must be positive")
    return threads


def _generator(seed) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed))


def sample_state(q: int, N: int, L: int, rng_seed, n_states: int | None = None, prefix: Sequence[int] = ()) -> np.ndarray:
    """N uniform points of zeta + pi^r o as digit arrays of length L (leading digits = prefix).

    Returns shape (N, L), or (n_states, N, L) when ``n_states`` is given.
    """
    if L < 1:
        raise ValueError("precision L must be at least 1")
    if len(prefix) > L:
        raise ValueError("prefix longer than the digit precision")
    rng = rng_seed if isinstance(rng_seed, np.random.Generator) else _generator(rng_seed)
    shape = (N, L) if n_states is None else (n_states, N, L)
    digits = rng.integers(0, q, size=shape, dtype=np.int16)
    if len(prefix):
        digits[..., : len(prefix)] = np.asarray(prefix, dtype=np.int16)
    return digits


def pair_valuations(states: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Valuations of all pairwise differences, capped at L.

    ``states`` has shape (S, N, L); returns (v, capped) of shape (S, P) with
    the pairs (i, j), i < j, in lexicographic order.
    """
    S, N, L = states.shape
    iu, ju = np.triu_indices(N, k=1)
    eq = states[:, iu, :] == states[:, ju, :]
    capped = eq.all(axis=-1)
    v = np.where(capped, L, np.argmin(eq, axis=-1))
    return v, capped


def boltzmann_weight(state: np.ndarray, beta: float, q: int, charges: Sequence[int] | None = None) -> tuple[float, int]:
    """prod_{i<j} q**(-beta Q_i Q_j v_ij) for one state of shape (N, L), and the number of capped pairs."""
    v, capped = pair_valuations(np.asarray(state)[None])
    w, _ = _weights(v, q, beta, _pair_charges(state.shape[0], charges))
    return float(w[0]), int(capped.sum())


def _pair_charges(N: int, charges: Sequence[int] | None) -> np.ndarray | None:
    if charges is None:
        return None
    iu, ju = np.triu_indices(N, k=1)
    c = np.asarray(charges, dtype=np.int64)
    return c[iu] * c[ju]


def _weights(v: np.ndarray, q: int, beta: float, pair_charge: np.ndarray | None) -> tuple[np.ndarray, np.ndarray]:
    k = (v * pair_charge).sum(axis=-1) if pair_charge is not None else v.sum(axis=-1)
    if beta == 0:
        return np.ones(k.shape), k
    return np.exp(-beta * math.log(q) * k.astype(np.float64)), k


def _event_indicator(states: np.ndarray, event: CylinderEvent | None) -> np.ndarray:
    S = states.shape[0]
    ind = np.ones(S, dtype=bool)
    if event is None:
        return ind
    for ball, n in event.items():
        if ball.r > states.shape[2]:
            raise ValueError(f"ball {ball} is finer than the sampling precision")
        if ball.r == 0:
            inside = np.full(states.shape[:2], True)
        else:
            inside = (states[:, :, : ball.r] == np.asarray(ball.digits, dtype=np.int16)).all(axis=-1)
        ind &= inside.sum(axis=1) == n
    return ind


@dataclass(frozen=True)
class _Sums:
    n: int
    w: float
    w2: float
    iw: float
    iw2: float
    capped: int

    def __add__(self, o: "_Sums") -> "_Sums":
        return _Sums(self.n + o.n, self.w + o.w, self.w2 + o.w2, self.iw + o.iw, self.iw2 + o.iw2, self.capped + o.capped)


def _chunk(q, N, beta, L, size, seed_seq, event, prefix, pair_charge) -> _Sums:
    states = sample_state(q, N, L, _generator(seed_seq), n_states=size, prefix=prefix)
    if N >= 2:
        v, capped = pair_valuations(states)
        w, _ = _weights(v, q, beta, pair_charge)
        n_capped = int(capped.sum())
    else:
        w, n_capped = np.ones(size), 0
    ind = _event_indicator(states, event)
    iw = np.where(ind, w, 0.0)
    return _Sums(size, float(w.sum()), float((w * w).sum()), float(iw.sum()), float((iw * w).sum()), n_capped)


def _run(q, N, beta, L, n_samples, seed, event=None, prefix=(), charges=None, threads=None) -> _Sums:
    if beta < 0:
        raise ValueError("beta must be non-negative")
    if n_samples < 2:
        raise ValueError("at least two samples are required")
    sizes = [CHUNK] * (n_samples // CHUNK)
    if n_samples % CHUNK:
        sizes.append(n_samples % CHUNK)
    children = np.random.SeedSequence(seed).spawn(len(sizes))
    pair_charge = _pair_charges(N, charges)
    jobs = [(q, N, beta, L, s, c, event, tuple(prefix), pair_charge) for s, c in zip(sizes, children)]
    threads = resolve_threads(threads)
    if threads == 1:
        parts = [_chunk(*j) for j in jobs]
    else:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            parts = list(ex.map(lambda j: _chunk(*j), jobs))
    total = parts[0]
    for p in parts[1:]:
        total = total + p
    return total


def _bias_bound(q: int, beta: float, L: int, s: _Sums, N: int, scale: int = 1) -> float:
    """Capping changes a weight by at most q**(-beta L) per capped pair (scaled by the largest charge product)."""
    if beta == 0 or s.capped == 0:
        return 0.0
    return scale * q ** (-beta * L) * s.capped / s.n


def _mean_and_se(s: _Sums) -> tuple[float, float]:
    mean = s.w / s.n
    var = max(s.w2 / s.n - mean * mean, 0.0) * s.n / (s.n - 1)
    return mean, math.sqrt(var / s.n)


def estimate_Z(q: int, N: int, beta: float, L: int = 30, n_samples: int = 100_000, seed: int = 0, prefix: Sequence[int] = (), threads: int | None = None) -> Estimate:
    """E[prod |alpha_i - alpha_j|^beta] for N uniform points of the ball with digits ``prefix``.

    With an empty prefix this is Z(N, o, beta); for a ball B it equals
    Z(N, B, beta) / mu(B)**N.
    """
    s = _run(q, N, beta, L, n_samples, seed, prefix=prefix, threads=threads)
    mean, se = _mean_and_se(s)
    return Estimate(mean, se, s.n, s.capped, _bias_bound(q, beta, L, s, N))


def estimate_event_prob(q: int, N: int, beta: float, event: CylinderEvent, L: int = 30, n_samples: int = 100_000, seed: int = 0, threads: int | None = None) -> Estimate:
    """Ratio estimate E[1_B w] / E[w] of P_N(event), with a delta-method standard error."""
    if event.q != q:
        raise ValueError(f"event is over q={event.q}, expected q={q}")
    s = _run(q, N, beta, L, n_samples, seed, event=event, threads=threads)
    R = s.iw / s.w
    # residuals r_i = (1_i - R) w_i, whose mean is zero by construction
    ss = (1 - 2 * R) * s.iw2 + R * R * s.w2
    var = max(ss, 0.0) / (s.n - 1)
    se = math.sqrt(var / s.n) / (s.w / s.n)
    # numerator and denominator each shift by at most delta; since R <= 1 the ratio moves by <= 2 delta / mean(w)
    bias = _bias_bound(q, beta, L, s, N) / (s.w / s.n) * 2
    return Estimate(R, se, s.n, s.capped, bias)


def estimate_multi_Z(q: int, charges: Sequence[int], counts: Sequence[int], beta: float, L: int = 30, n_samples: int = 100_000, seed: int = 0, threads: int | None = None) -> Estimate:
    """Multi-species Z(N, o, beta): pairs weighted by q**(-beta Q Q' v)."""
    per_particle = [Q for Q, n in zip(charges, counts) for _ in range(n)]
    N = len(per_particle)
    s = _run(q, N, beta, L, n_samples, seed, charges=per_particle, threads=threads)
    mean, se = _mean_and_se(s)
    top = max(per_particle) ** 2 if per_particle else 1
    return Estimate(mean, se, s.n, s.capped, _bias_bound(q, beta, L, s, N, top))


def rng_metadata(seed: int, n_samples: int) -> dict:
    return {"generator": RNG_NAME, "seed": seed, "chunk_size": CHUNK, "n_chunks": -(-n_samples // CHUNK)}
