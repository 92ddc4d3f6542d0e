"""Coherent-state families as square roots of counting laws.

Each constructor writes amplitudes whose squared moduli reproduce the matching
pmf from :mod:`fockbench.distributions` exactly (up to floating rounding), with
phases e^{i n theta} per mode.  Constructors check that the supplied basis
carries all but at most ``tail_tol`` of the state's mass; the truncated-tail
deficit is the documented error bound on every downstream expectation value.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import gammaln

from . import distributions as dist
from .fock import Cutoff, StateVector, TruncatedBasis, enumerate_basis

FAMILIES = ("coherent", "binomial", "neg_binomial", "multinomial", "neg_multinomial")

DEFAULT_TAIL_TOL = 1e-12

_PARAM_TYPES = {
    "coherent": dist.PoissonParams,
    "binomial": dist.BinomialParams,
    "neg_binomial": dist.NegBinomialParams,
    "multinomial": dist.MultinomialParams,
    "neg_multinomial": dist.NegMultinomialParams,
}


@dataclass(frozen=True)
class StateSpec:
    """Family name, distribution parameters, and per-mode phases."""

    family: str
    params: object
    phases: tuple = field(default=())

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown family {self.family!r}; expected one of {FAMILIES}")
        expected = _PARAM_TYPES[self.family]
        if not isinstance(self.params, expected):
            raise ValueError(f"{self.family} takes {expected.__name__} parameters")
        phases = tuple(float(t) for t in self.phases)
        n_phases = self.phase_count
        if not phases:
            phases = (0.0,) * n_phases
        if len(phases) != n_phases:
            raise ValueError(f"{self.family} needs {n_phases} phase(s), got {len(phases)}")
        object.__setattr__(self, "phases", phases)

    @property
    def phase_count(self) -> int:
        if self.family in ("coherent", "binomial", "neg_binomial"):
            return 1
        return self.params.r

    @property
    def modes(self) -> int:
        """Number of Fock modes the state occupies."""
        if self.family in ("coherent", "binomial", "neg_binomial"):
            return 1
        if self.family == "multinomial":
            return self.params.r + 1
        return self.params.r


def auto_basis(spec: StateSpec, tail_tol: float = DEFAULT_TAIL_TOL, guard: int = 0) -> TruncatedBasis:
    """Smallest basis whose closed-form tail mass is below ``tail_tol``.

    ``guard`` adds headroom levels for states that will be hit by raising
    operators afterwards.
    """
    fam, p = spec.family, spec.params
    if fam == "coherent":
        n_max = dist.poisson_cutoff(p, tail_tol)
        return enumerate_basis(1, Cutoff.per_mode(n_max + guard))
    if fam == "binomial":
        return enumerate_basis(1, Cutoff.per_mode(p.M + guard))
    if fam == "neg_binomial":
        n_max = dist.neg_binomial_cutoff(p, tail_tol)
        return enumerate_basis(1, Cutoff.per_mode(n_max + guard))
    if fam == "multinomial":
        if guard == 0:
            return enumerate_basis(p.r + 1, Cutoff.shell(p.M))
        return enumerate_basis(p.r + 1, Cutoff.total(p.M + guard))
    # negative multinomial: the total-occupation marginal is negative binomial
    # with eta^2 = sum eta_j^2, which fixes the total cutoff.
    marginal = dist.NegBinomialParams(sum(e * e for e in p.eta), p.M)
    n_max = dist.neg_binomial_cutoff(marginal, tail_tol)
    return enumerate_basis(p.r, Cutoff.total(n_max + guard))


def _phase_factor(counts, phases):
    return np.exp(1j * np.dot(counts, phases))


def _require_modes(spec, basis):
    if basis.modes != spec.modes:
        raise ValueError(f"{spec.family} state needs a {spec.modes}-mode basis, got {basis.modes}")


def _check_deficit(deficit, tail_tol, family):
    # tiny multiplicative slack: the cutoff search can land the analytic tail
    # exactly on the tolerance, and the re-measured deficit then crosses it
    # by accumulation roundoff alone
    if deficit > tail_tol * (1.0 + 1e-6) + 1e-15:
        raise ValueError(
            f"basis cutoff too small for the {family} state: "
            f"tail mass {deficit:.3e} exceeds tolerance {tail_tol:.3e}"
        )


def coherent_state(spec: StateSpec, basis: TruncatedBasis, tail_tol: float = DEFAULT_TAIL_TOL) -> StateVector:
    """Poisson-weighted state, amplitude(n) = e^{-a^2/2} alpha^n e^{i n theta}/sqrt(n!)."""
    if spec.family != "coherent":
        raise ValueError("spec is not a coherent-state spec")
    _require_modes(spec, basis)
    alpha2 = spec.params.alpha2
    theta = spec.phases[0]
    n = basis.occupations[:, 0].astype(float)
    with np.errstate(divide="ignore"):
        log_mag = -0.5 * alpha2 + 0.5 * (n * np.log(alpha2) if alpha2 > 0 else np.where(n == 0, 0.0, -np.inf)) - 0.5 * gammaln(n + 1)
    radial = np.exp(log_mag)
    amps = radial * np.exp(1j * theta * n)
    psi = StateVector(basis, amps)
    _check_deficit(1.0 - psi.norm2(), tail_tol, "coherent")
    return psi


def binomial_state(spec: StateSpec, basis: TruncatedBasis, tail_tol: float = DEFAULT_TAIL_TOL) -> StateVector:
    """Finite-support state; requires the basis to hold levels 0..M."""
    if spec.family != "binomial":
        raise ValueError("spec is not a binomial-state spec")
    _require_modes(spec, basis)
    p, theta = spec.params, spec.phases[0]
    if not basis.contains((p.M,)) or not basis.contains((0,)):
        raise ValueError(f"basis cutoff below M={p.M}; the binomial state needs all levels 0..M")
    amps = np.zeros(len(basis), dtype=complex)
    for i, (n,) in enumerate(basis.states):
        if n <= p.M:
            log_mag = 0.5 * dist.binomial_log_pmf(p, n)
            amps[i] = math.exp(log_mag) * np.exp(1j * theta * n)
    return StateVector(basis, amps)


def neg_binomial_state(spec: StateSpec, basis: TruncatedBasis, tail_tol: float = DEFAULT_TAIL_TOL) -> StateVector:
    if spec.family != "neg_binomial":
        raise ValueError("spec is not a negative-binomial-state spec")
    _require_modes(spec, basis)
    p, theta = spec.params, spec.phases[0]
    n = basis.occupations[:, 0]
    log_mag = np.array([0.5 * dist.neg_binomial_log_pmf(p, int(k)) for k in n])
    amps = np.exp(log_mag) * np.exp(1j * theta * n)
    psi = StateVector(basis, amps)
    _check_deficit(1.0 - psi.norm2(), tail_tol, "neg_binomial")
    return psi


def multinomial_state(spec: StateSpec, basis: TruncatedBasis, tail_tol: float = DEFAULT_TAIL_TOL) -> StateVector:
    """State on the exact total-occupation shell sum(n) = M over r+1 modes."""
    if spec.family != "multinomial":
        raise ValueError("spec is not a multinomial-state spec")
    _require_modes(spec, basis)
    p = spec.params
    shell_size = math.comb(p.M + p.r, p.r)
    amps = np.zeros(len(basis), dtype=complex)
    found = 0
    for i, occ in enumerate(basis.states):
        if sum(occ) != p.M:
            continue
        found += 1
        log_mag = 0.5 * dist.multinomial_log_pmf(p, occ[1:])
        amps[i] = math.exp(log_mag) * _phase_factor(occ[1:], spec.phases)
    if found != shell_size:
        raise ValueError(
            f"basis holds {found} of the {shell_size} shell states with total occupation {p.M}"
        )
    return StateVector(basis, amps)


def neg_multinomial_state(spec: StateSpec, basis: TruncatedBasis, tail_tol: float = DEFAULT_TAIL_TOL) -> StateVector:
    if spec.family != "neg_multinomial":
        raise ValueError("spec is not a negative-multinomial-state spec")
    _require_modes(spec, basis)
    p = spec.params
    amps = np.zeros(len(basis), dtype=complex)
    for i, occ in enumerate(basis.states):
        log_mag = 0.5 * dist.neg_multinomial_log_pmf(p, occ)
        amps[i] = math.exp(log_mag) * _phase_factor(occ, spec.phases)
    psi = StateVector(basis, amps)
    _check_deficit(1.0 - psi.norm2(), tail_tol, "neg_multinomial")
    return psi


_CONSTRUCTORS = {
    "coherent": coherent_state,
    "binomial": binomial_state,
    "neg_binomial": neg_binomial_state,
    "multinomial": multinomial_state,
    "neg_multinomial": neg_multinomial_state,
}


def build_state(spec: StateSpec, basis: TruncatedBasis = None,
                tail_tol: float = DEFAULT_TAIL_TOL, guard: int = 0) -> StateVector:
    """Dispatch to the family constructor; builds an auto-sized basis when none is given."""
    if basis is None:
        basis = auto_basis(spec, tail_tol, guard)
    return _CONSTRUCTORS[spec.family](spec, basis, tail_tol)


@dataclass
class NumberDistribution:
    """|amplitude|^2 per basis state plus the missing-tail deficit."""

    basis: TruncatedBasis
    probabilities: np.ndarray
    deficit: float


def number_distribution(psi: StateVector) -> NumberDistribution:
    probs = np.abs(psi.amplitudes) ** 2
    return NumberDistribution(psi.basis, probs, float(1.0 - probs.sum()))


def quantum_gf(psi: StateVector, t: float) -> float:
    """<psi| t^N |psi> with N the total number operator (normalized input assumed)."""
    if t < 0:
        raise ValueError("t must be non-negative")
    probs = np.abs(psi.amplitudes) ** 2
    totals = psi.basis.totals
    with np.errstate(divide="ignore"):
        weights = np.where(totals == 0, 1.0, t ** totals.astype(float))
    return float(np.dot(weights, probs))


def mean_occupation(psi: StateVector) -> float:
    probs = np.abs(psi.amplitudes) ** 2
    return float(np.dot(psi.basis.totals, probs))


def occupation_variance(psi: StateVector) -> float:
    probs = np.abs(psi.amplitudes) ** 2
    totals = psi.basis.totals.astype(float)
    mean = float(np.dot(totals, probs))
    return float(np.dot(totals * totals, probs) - mean * mean)
