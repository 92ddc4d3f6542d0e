"""Counting laws attached to the coherent-state families.

Poisson, binomial, negative binomial, multinomial and negative multinomial
probability mass functions (evaluated in log space), the negative-binomial
generating function and its moments, Poisson-limit distances, multiple-Poisson
shell slicing, and a Bernoulli waiting-time Monte Carlo sampler.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln, xlogy

TAIL_MASS_POLICY = 1e-14  # infinite sums truncate once cumulative mass reaches 1 - this


def _as_eta_tuple(eta):
    eta = tuple(float(e) for e in eta)
    if not eta:
        raise ValueError("eta vector must have at least one component")
    if any(e <= 0.0 for e in eta):
        raise ValueError("eta components must be strictly positive (degenerate modes are rejected)")
    return eta


@dataclass(frozen=True)
class PoissonParams:
    alpha2: float  # mean photon number |alpha|^2

    def __post_init__(self):
        if self.alpha2 < 0:
            raise ValueError("alpha2 must be non-negative")


@dataclass(frozen=True)
class BinomialParams:
    eta2: float
    M: int

    def __post_init__(self):
        if not 0.0 <= self.eta2 <= 1.0:
            raise ValueError("eta2 must lie in [0, 1]")
        if int(self.M) != self.M or self.M < 1:
            raise ValueError("M must be a positive integer")
        object.__setattr__(self, "M", int(self.M))


@dataclass(frozen=True)
class NegBinomialParams:
    eta2: float
    M: float  # real M > 0 is allowed

    def __post_init__(self):
        if not 0.0 <= self.eta2 < 1.0:
            raise ValueError("eta2 must lie in [0, 1)")
        if not self.M > 0:
            raise ValueError("M must be positive")


@dataclass(frozen=True)
class MultinomialParams:
    eta: tuple  # (eta_1 .. eta_r), all > 0, sum of squares <= 1
    M: int

    def __post_init__(self):
        object.__setattr__(self, "eta", _as_eta_tuple(self.eta))
        if sum(e * e for e in self.eta) > 1.0 + 1e-15:
            raise ValueError("sum of eta_j^2 must not exceed 1")
        if int(self.M) != self.M or self.M < 1:
            raise ValueError("M must be a positive integer")
        object.__setattr__(self, "M", int(self.M))

    @property
    def r(self):
        return len(self.eta)


@dataclass(frozen=True)
class NegMultinomialParams:
    eta: tuple
    M: float

    def __post_init__(self):
        object.__setattr__(self, "eta", _as_eta_tuple(self.eta))
        if sum(e * e for e in self.eta) >= 1.0:
            raise ValueError("sum of eta_j^2 must be below 1")
        if not self.M > 0:
            raise ValueError("M must be positive")

    @property
    def r(self):
        return len(self.eta)


def _check_count(n):
    if int(n) != n or n < 0:
        raise ValueError(f"count must be a non-negative integer, got {n!r}")
    return int(n)


def poisson_log_pmf(p: PoissonParams, n: int) -> float:
    n = _check_count(n)
    return float(-p.alpha2 + xlogy(n, p.alpha2) - gammaln(n + 1))


def poisson_pmf(p: PoissonParams, n: int) -> float:
    return math.exp(poisson_log_pmf(p, n))


def binomial_log_pmf(p: BinomialParams, n: int) -> float:
    n = _check_count(n)
    if n > p.M:
        raise ValueError(f"n={n} is outside the support 0..{p.M}")
    logc = gammaln(p.M + 1) - gammaln(n + 1) - gammaln(p.M - n + 1)
    return float(logc + xlogy(n, p.eta2) + xlogy(p.M - n, 1.0 - p.eta2))


def binomial_pmf(p: BinomialParams, n: int) -> float:
    return math.exp(binomial_log_pmf(p, n))


def neg_binomial_log_pmf(p: NegBinomialParams, n: int) -> float:
    n = _check_count(n)
    logc = gammaln(p.M + n) - gammaln(p.M) - gammaln(n + 1)
    return float(logc + xlogy(n, p.eta2) + p.M * math.log1p(-p.eta2))


def neg_binomial_pmf(p: NegBinomialParams, n: int) -> float:
    return math.exp(neg_binomial_log_pmf(p, n))


def multinomial_log_pmf(p: MultinomialParams, n_vec) -> float:
    """log pmf at (n_1..n_r); the zeroth count is implied, n_0 = M - sum(n_vec)."""
    n_vec = tuple(_check_count(n) for n in n_vec)
    if len(n_vec) != p.r:
        raise ValueError(f"expected {p.r} counts, got {len(n_vec)}")
    n0 = p.M - sum(n_vec)
    if n0 < 0:
        raise ValueError("counts exceed M")
    logc = gammaln(p.M + 1) - gammaln(n0 + 1) - sum(gammaln(n + 1) for n in n_vec)
    rest = 1.0 - sum(e * e for e in p.eta)
    return float(
        logc
        + sum(xlogy(n, e * e) for n, e in zip(n_vec, p.eta))
        + xlogy(n0, max(rest, 0.0))
    )


def multinomial_pmf(p: MultinomialParams, n_vec) -> float:
    return math.exp(multinomial_log_pmf(p, n_vec))


def neg_multinomial_log_pmf(p: NegMultinomialParams, n_vec) -> float:
    n_vec = tuple(_check_count(n) for n in n_vec)
    if len(n_vec) != p.r:
        raise ValueError(f"expected {p.r} counts, got {len(n_vec)}")
    tot = sum(n_vec)
    logc = gammaln(p.M + tot) - gammaln(p.M) - sum(gammaln(n + 1) for n in n_vec)
    rest = 1.0 - sum(e * e for e in p.eta)
    return float(logc + sum(xlogy(n, e * e) for n, e in zip(n_vec, p.eta)) + p.M * math.log(rest))


def neg_multinomial_pmf(p: NegMultinomialParams, n_vec) -> float:
    return math.exp(neg_multinomial_log_pmf(p, n_vec))


def neg_binomial_gf(p: NegBinomialParams, t: float) -> float:
    """Probability generating function ((1 - eta^2) / (1 - eta^2 t))^M."""
    if p.eta2 * t >= 1.0:
        raise ValueError("generating function diverges for eta2 * t >= 1")
    return float(((1.0 - p.eta2) / (1.0 - p.eta2 * t)) ** p.M)


@dataclass(frozen=True)
class GfMoments:
    mean: float
    variance: float
    mandel_q: float


def moments_from_gf(p: NegBinomialParams) -> GfMoments:
    """Mean, variance and Mandel Q from the generating-function derivatives.

    G'(1) = M eta^2/(1-eta^2);  G''(1) + G'(1) - G'(1)^2 gives the variance
    M eta^2/(1-eta^2)^2; Q = variance/mean - 1 = eta^2/(1-eta^2) > 0
    (super-Poissonian for every eta2 > 0).
    """
    ratio = p.eta2 / (1.0 - p.eta2)
    mean = p.M * ratio
    variance = mean / (1.0 - p.eta2)
    return GfMoments(mean=mean, variance=variance, mandel_q=ratio)


def neg_binomial_cutoff(p: NegBinomialParams, tail_mass: float = TAIL_MASS_POLICY) -> int:
    """Smallest n_max whose tail mass falls below ``tail_mass``."""
    cumulative = 0.0
    n = 0
    log_pmf = neg_binomial_log_pmf(p, 0)
    while True:
        cumulative += math.exp(log_pmf)
        if cumulative >= 1.0 - tail_mass:
            return n
        n += 1
        # recurrence pmf(n+1)/pmf(n) = eta^2 (M+n)/(n+1)
        log_pmf += math.log(p.eta2) + math.log(p.M + n - 1) - math.log(n)
        if n > 10_000_000:
            raise ValueError("tail policy not reached; eta2 too close to 1")


def poisson_cutoff(p: PoissonParams, tail_mass: float = TAIL_MASS_POLICY) -> int:
    cumulative = 0.0
    n = 0
    log_pmf = poisson_log_pmf(p, 0)
    while True:
        cumulative += math.exp(log_pmf)
        if cumulative >= 1.0 - tail_mass:
            return n
        n += 1
        log_pmf += math.log(p.alpha2) - math.log(n)


def poisson_limit_distance(family: str, M, alpha2: float) -> float:
    """Total-variation distance from the Poisson law with mean ``alpha2``.

    family "binomial" uses eta2 = alpha2/M (mean alpha2 as M grows);
    family "neg_binomial" uses eta2 = alpha2/(M + alpha2) (mean exactly
    alpha2 for every M).  The sum truncates under the 1e-14 tail policy.
    """
    if alpha2 <= 0:
        raise ValueError("alpha2 must be positive")
    pois = PoissonParams(alpha2)
    if family == "binomial":
        if M <= alpha2:
            raise ValueError("binomial matching needs M > alpha2")
        other = BinomialParams(alpha2 / M, int(M))
        n_top = other.M
    elif family == "neg_binomial":
        other = NegBinomialParams(alpha2 / (M + alpha2), float(M))
        n_top = neg_binomial_cutoff(other)
    else:
        raise ValueError(f"unknown family {family!r}")
    n_top = max(n_top, poisson_cutoff(pois))
    tv = 0.0
    for n in range(n_top + 1):
        if family == "binomial" and n > other.M:
            q = 0.0
        else:
            q = binomial_pmf(other, n) if family == "binomial" else neg_binomial_pmf(other, n)
        tv += abs(poisson_pmf(pois, n) - q)
    return 0.5 * tv


def multiple_poisson_log_pmf(alpha, n_vec) -> float:
    """Independent Poisson modes with means alpha_j^2."""
    alpha = tuple(float(a) for a in alpha)
    n_vec = tuple(_check_count(n) for n in n_vec)
    if len(alpha) != len(n_vec):
        raise ValueError("alpha and n_vec lengths differ")
    if any(a < 0 for a in alpha):
        raise ValueError("alpha components must be non-negative")
    return float(
        sum(-a * a + xlogy(n, a * a) - gammaln(n + 1) for a, n in zip(alpha, n_vec))
    )


def multiple_poisson_pmf(alpha, n_vec) -> float:
    return math.exp(multiple_poisson_log_pmf(alpha, n_vec))


def _shell_compositions(total, modes):
    if modes == 1:
        yield (total,)
        return
    for first in range(total + 1):
        for rest in _shell_compositions(total - first, modes - 1):
            yield (first,) + rest


def slice_to_shell(alpha, M: int) -> dict:
    """Multiple-Poisson law conditioned on total count M, renormalized.

    Returns {occupation tuple: probability} over all compositions of M into
    len(alpha) parts.  Coincides with the multinomial law at
    eta_j = alpha_j/|alpha| (zeroth mode implied).
    """
    alpha = tuple(float(a) for a in alpha)
    if any(a <= 0 for a in alpha):
        raise ValueError("alpha components must be strictly positive")
    M = _check_count(M)
    logs = {}
    for occ in _shell_compositions(M, len(alpha)):
        logs[occ] = multiple_poisson_log_pmf(alpha, occ)
    peak = max(logs.values())
    weights = {occ: math.exp(v - peak) for occ, v in logs.items()}
    total = sum(weights.values())
    return {occ: w / total for occ, w in weights.items()}


@dataclass(frozen=True)
class WaitingTimeResult:
    """Empirical waiting-time pmf: failures before the M-th success."""

    n: np.ndarray        # bin labels 0..n_max
    p: np.ndarray        # exact negative-binomial pmf per bin
    p_hat: np.ndarray    # empirical frequencies
    stderr: np.ndarray   # conservative per-bin standard error (see simulate docstring)
    trials: int
    seed: int


def waiting_time_simulate(p: NegBinomialParams, trials: int, seed: int) -> WaitingTimeResult:
    """Monte Carlo of the waiting-time construction behind the negative binomial.

    Each replicate runs Bernoulli trials with failure probability eta2 until
    the M-th success and records the failure count n.  All replicates advance
    in lockstep, one trial per wave, drawn from a single PCG64 stream, so the
    output is a deterministic function of (seed, trials).
    Requires integer M.
    """
    if int(p.M) != p.M:
        raise ValueError("waiting-time sampling needs integer M")
    M = int(p.M)
    if trials < 1:
        raise ValueError("trials must be positive")
    if seed is None:
        raise ValueError("a seed is required for reproducible sampling")
    rng = np.random.default_rng(int(seed))
    remaining = np.full(trials, M, dtype=np.int64)
    failures = np.zeros(trials, dtype=np.int64)
    active = np.arange(trials)
    while active.size:
        fail = rng.random(active.size) < p.eta2
        failures[active[fail]] += 1
        remaining[active[~fail]] -= 1
        active = active[remaining[active] > 0]
    # bins cover the law's effective support even when the sample never
    # reached it, so sparse tail bins still come with a usable yardstick
    n_max = max(int(failures.max()), neg_binomial_cutoff(p, 1e-12))
    counts = np.bincount(failures, minlength=n_max + 1)
    p_hat = counts / trials
    ns = np.arange(n_max + 1)
    exact = np.array([neg_binomial_pmf(p, int(k)) for k in ns])
    # conservative standard error: sqrt(q(1-q)/trials) with q the larger of
    # the empirical and exact frequencies.  In the bulk the two agree; in
    # far-tail bins (expected counts below one) it keeps a deviation test
    # meaningful instead of flagging every single stray count
    q = np.maximum(p_hat, exact)
    stderr = np.sqrt(q * (1.0 - q) / trials)
    return WaitingTimeResult(n=ns, p=exact, p_hat=p_hat, stderr=stderr,
                             trials=int(trials), seed=int(seed))
