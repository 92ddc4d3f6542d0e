"""State-generation routes and their cross-checks.

Every family admits several construction paths -- amplitude series, pure
raising exponentials, unitary displacement, sequential rotation chains, and
driven time evolution.  These must all land on the same rays; the functions
here build each route so callers can compare fidelities.  All evolutions are
generated by piecewise-constant operators, so time ordering reduces to a
finite product of exponentials.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from . import distributions as dist
from . import states as st
from .algebra import AlgebraRealization, _monomial, su2_bilinear, su2_hp, su11_hp
from .fock import (
    Cutoff,
    LinearOperator,
    StateVector,
    annihilation_op,
    apply_exponential,
    basis_state,
    creation_op,
    enumerate_basis,
    fidelity,
    identity_op,
    number_op,
    op_exponential,
    vacuum_state,
)

DISPLACEMENT_GUARD = 16  # extra levels above the series cutoff for unitary routes


def exp_form_state(realization: AlgebraRealization, eta_c: complex) -> StateVector:
    """Normalized pure-raising exponential acting on the vacuum.

    su(1,1): (1-|z|^2)^{M/2} exp(z K+) |0>  with z = eta_c;
    su(2):   (1-|z|^2)^{M/2} exp(tau J+) |0> with tau = z/sqrt(1-|z|^2).
    Requires a reduced (single-mode) su11 or su2 realization.
    """
    if realization.form != "holstein_primakoff" or realization.algebra not in ("su11", "su2"):
        raise ValueError("exp_form_state needs a reduced su11 or su2 realization")
    z = complex(eta_c)
    if abs(z) >= 1.0:
        raise ValueError("|eta_c| must be below 1")
    if realization.algebra == "su11":
        coeff, label = z, "K+"
    else:
        coeff, label = z / math.sqrt(1.0 - abs(z) ** 2), "J+"
    psi = apply_exponential(coeff * realization.raising[label], vacuum_state(realization.basis))
    prefactor = (1.0 - abs(z) ** 2) ** (realization.M / 2.0)
    return StateVector(psi.basis, prefactor * psi.amplitudes)


def operator_identity_check(M: float, n_max: int, variant: str = "su11") -> list:
    """Residuals of (b^dag g(N))^n |0> = g(0) g(1) ... g(n-1) (b^dag)^n |0>.

    g(N) = sqrt(M + N) for variant "su11", sqrt(M - N) clamped at zero for
    variant "su2"; in the latter case both sides vanish identically once
    n exceeds M, and the check confirms that too.  Returns one dict per n.
    """
    if variant not in ("su11", "su2"):
        raise ValueError("variant must be 'su11' or 'su2'")
    if variant == "su2":
        if int(M) != M or M < 1:
            raise ValueError("variant 'su2' needs a positive integer M")
        basis = enumerate_basis(1, Cutoff.per_mode(int(M)))
        real = su2_hp(basis, int(M))
        g = lambda k: math.sqrt(max(M - k, 0.0))
        ladder = real.raising["J+"]
    else:
        basis = enumerate_basis(1, Cutoff.per_mode(n_max))
        real = su11_hp(basis, M)
        g = lambda k: math.sqrt(M + k)
        ladder = real.raising["K+"]
    reports = []
    lhs = vacuum_state(basis)
    for n in range(1, n_max + 1):
        lhs = ladder.apply(lhs)
        scalar = 1.0
        for k in range(n):
            scalar *= g(k)
        rhs = np.zeros(len(basis), dtype=complex)
        if scalar != 0.0:
            # bare (b^dag)^n |0> has amplitude sqrt(n!) on level n
            rhs[basis.index_of((n,))] = scalar * math.sqrt(math.factorial(n))
        reports.append({"n": n, "residual": float(np.abs(lhs.amplitudes - rhs).max())})
    return reports


def displacement_zeta(algebra: str, eta: float, theta: float) -> complex:
    """Displacement parameter landing on the series state at (eta, theta)."""
    if not 0.0 <= eta < 1.0:
        raise ValueError("eta must lie in [0, 1)")
    if algebra == "su11":
        return cmath.exp(1j * theta) * math.atanh(eta)
    if algebra == "su2":
        return cmath.exp(1j * theta) * math.atan2(eta, math.sqrt(1.0 - eta * eta))
    raise ValueError("algebra must be 'su11' or 'su2'")


def displacement_state(realization: AlgebraRealization, eta: float, theta: float = 0.0,
                       leak_tol: float = 1e-8) -> StateVector:
    """exp(zeta K+ - zeta* K-) |0> on the reduced space.

    The truncated lowering generator is the exact adjoint of the raising one,
    so the evolution is unitary even on an undersized basis and the norm
    cannot flag truncation trouble.  What can: squared amplitude sitting on
    boundary states, the ones the raising generator would push out of the
    basis.  More than ``leak_tol`` of that mass (or of series-truncation norm
    drift) raises -- enlarge the basis with a guard band instead.
    """
    if realization.form != "holstein_primakoff" or realization.algebra not in ("su11", "su2"):
        raise ValueError("displacement_state needs a reduced su11 or su2 realization")
    label = "K+" if realization.algebra == "su11" else "J+"
    zeta = displacement_zeta(realization.algebra, eta, theta)
    raising = realization.raising[label]
    generator = zeta * raising - np.conj(zeta) * raising.adjoint()
    psi = apply_exponential(generator, vacuum_state(realization.basis))
    leakage = displacement_leakage(realization, psi, label)
    if leakage > leak_tol:
        raise ValueError(
            f"displacement pressed {leakage:.3e} of squared norm against the cutoff; "
            f"increase the basis guard band"
        )
    return psi


def displacement_leakage(realization: AlgebraRealization, psi: StateVector,
                         label: str = None) -> float:
    """Truncation-pressure reading: boundary mass plus any norm drift.

    Boundary mass is |amplitude|^2 summed over states the raising generator
    maps out of the basis; an exact compact block has none, so there the
    reading reduces to the series norm drift alone.
    """
    if label is None:
        label = "K+" if realization.algebra == "su11" else "J+"
    boundary = realization.lossy[label]
    pressed = float(np.sum(np.abs(psi.amplitudes[boundary]) ** 2))
    return max(pressed, abs(1.0 - psi.norm2()))


def disentangled_product(realization: AlgebraRealization, zeta: complex,
                         tol: float = 1e-15) -> LinearOperator:
    """Raising x diagonal x lowering factorization of the displacement exponential.

    su(2):  exp(zeta J+ - zeta* J-) = exp(tau J+) exp(ln(1+|tau|^2) J0) exp(-tau* J-)
            with tau = (zeta/|zeta|) tan|zeta|;
    su(1,1): same shape with tau = (zeta/|zeta|) tanh|zeta| and middle factor
            exp(ln(1-|tau|^2) K0).
    Returns the three-factor product as a dense operator for entrywise
    comparison with the one-shot exponential; ``tol`` is passed through to the
    exponential series so the comparison floor sits well under 1e-12.
    """
    if realization.algebra == "su2":
        plus, minus, diag = "J+", "J-", "J0"
    elif realization.algebra == "su11":
        plus, minus, diag = "K+", "K-", "K0"
    else:
        raise ValueError("disentangled_product needs an su11 or su2 realization")
    z = complex(zeta)
    if z == 0:
        return identity_op(realization.basis)
    phase = z / abs(z)
    if realization.algebra == "su2":
        tau = phase * math.tan(abs(z))
        middle_log = math.log1p(abs(tau) ** 2)
    else:
        tau = phase * math.tanh(abs(z))
        middle_log = math.log1p(-abs(tau) ** 2)
    first = op_exponential(tau * realization.op(plus), tol=tol)
    middle = op_exponential(middle_log * realization.op(diag), tol=tol)
    last = op_exponential(-np.conj(tau) * realization.op(minus), tol=tol)
    return first @ middle @ last


def disentangling_identity_check(realization: AlgebraRealization, zeta: complex,
                                 tol: float = 1e-15) -> dict:
    """Entrywise residual between exp(zeta K+ - h.c.) and its three-factor product."""
    raising = realization.raising["K+" if realization.algebra == "su11" else "J+"]
    generator = complex(zeta) * raising - np.conj(complex(zeta)) * raising.adjoint()
    whole = op_exponential(generator, tol=tol)
    product = disentangled_product(realization, zeta, tol=tol)
    residual = float(np.abs(whole.matrix - product.matrix).max())
    return {"algebra": realization.algebra, "M": realization.M,
            "zeta": complex(zeta), "max_residual": residual}


def path_equivalence(family: str, eta2: float, M, theta: float = 0.0,
                     tail_tol: float = 1e-12) -> dict:
    """Fidelities between the series, exponential-form and displacement routes."""
    eta = math.sqrt(eta2)
    if family == "neg_binomial":
        spec = st.StateSpec("neg_binomial", dist.NegBinomialParams(eta2, M), (theta,))
        basis = st.auto_basis(spec, tail_tol, guard=DISPLACEMENT_GUARD)
        series = st.neg_binomial_state(spec, basis)
        real = su11_hp(basis, M)
    elif family == "binomial":
        spec = st.StateSpec("binomial", dist.BinomialParams(eta2, int(M)), (theta,))
        basis = enumerate_basis(1, Cutoff.per_mode(int(M)))
        series = st.binomial_state(spec, basis)
        real = su2_hp(basis, int(M))
    else:
        raise ValueError("family must be 'neg_binomial' or 'binomial'")
    exp_route = exp_form_state(real, eta * cmath.exp(1j * theta))
    disp_route = displacement_state(real, eta, theta)
    return {
        "family": family,
        "eta2": eta2,
        "M": M,
        "theta": theta,
        "cutoff": basis.cutoff.value,
        "fidelity_exp_vs_series": fidelity(exp_route, series),
        "fidelity_disp_vs_series": fidelity(disp_route, series),
        "fidelity_disp_vs_exp": fidelity(disp_route, exp_route),
        "norm_leakage": displacement_leakage(real, disp_route),
    }


# --- sequential rotation chains ------------------------------------------
#
# The chains need only one generator per step, so the operators are built
# directly instead of through a full realization (which would hold a dozen
# dense matrices on the largest bases used here).


def _pump_op(basis, M, compact):
    """b_1^dag sqrt(M -+ sum N): the first-step raising generator."""
    if compact:
        w = lambda occ: math.sqrt(max(M - sum(occ), 0.0))
    else:
        w = lambda occ: math.sqrt(M + sum(occ))
    mat, _, _ = _monomial(basis, create=(0,), weight=w)
    return LinearOperator(basis, mat)


def _transfer_op(basis, j, k):
    """b_j^dag b_k between components j, k (1-indexed)."""
    mat, _, _ = _monomial(basis, create=(j - 1,), destroy=(k - 1,))
    return LinearOperator(basis, mat)


def _rotation_angles(eta):
    """Splitting angles for the transfer steps.

    Step j (rotating mode j into mode j+1) keeps magnitude eta_j on mode j and
    passes the remainder on: tan(angle_j)^2 = sum_{k>j} eta_k^2 / eta_j^2.
    """
    angles = []
    for j in range(len(eta) - 1):
        rest = math.sqrt(sum(e * e for e in eta[j + 1:]))
        angles.append(math.atan2(rest, eta[j]))
    return angles


def _chain_phases(thetas):
    # successive rotations compose phases down the chain, so each internal
    # rotation carries the increment over the previous mode's phase
    return [thetas[0]] + [thetas[j] - thetas[j - 1] for j in range(1, len(thetas))]


def _apply_rotation(raising, angle, phase, psi):
    if angle == 0.0:
        return psi.copy()
    generator = (angle * cmath.exp(1j * phase)) * raising \
        - (angle * cmath.exp(-1j * phase)) * raising.adjoint()
    return apply_exponential(generator, psi)


def _check_chain_args(eta, thetas, basis):
    eta = tuple(float(e) for e in eta)
    if not eta:
        raise ValueError("eta must have at least one component")
    if eta[0] <= 0.0:
        raise ValueError("eta_1 must be positive (the pump feeds mode 1 first)")
    if any(e < 0 for e in eta):
        raise ValueError("eta components must be non-negative")
    if sum(e * e for e in eta) >= 1.0:
        raise ValueError("sum of eta_j^2 must be below 1")
    thetas = tuple(float(t) for t in thetas) if thetas else (0.0,) * len(eta)
    if len(thetas) != len(eta):
        raise ValueError("thetas must match eta in length")
    if basis.modes != len(eta):
        raise ValueError(f"basis must have {len(eta)} modes, got {basis.modes}")
    return eta, thetas


def sequential_nms(eta, thetas, M: float, basis) -> StateVector:
    """Negative-multinomial state from one pump plus transfer rotations.

    First exp[rho(e^{i.}K+1 - h.c.)] with tanh^2 rho = sum eta_j^2 feeds
    mode 1, then transfer rotations (1,2), (2,3), ... split the excitation so
    mode j ends with weight eta_j and phase thetas[j-1].  ``basis`` has one
    mode per eta component (the reduced picture); its total cutoff bounds the
    truncation leakage exactly as for the direct series constructor.
    """
    eta, thetas = _check_chain_args(eta, thetas, basis)
    if not M > 0:
        raise ValueError("M must be positive")
    phases = _chain_phases(thetas)
    pump_angle = math.atanh(math.sqrt(sum(e * e for e in eta)))
    psi = _apply_rotation(_pump_op(basis, M, compact=False), pump_angle, phases[0],
                          vacuum_state(basis))
    for j, angle in enumerate(_rotation_angles(eta), start=1):
        psi = _apply_rotation(_transfer_op(basis, j + 1, j), angle, phases[j], psi)
    return psi


def sequential_ms(eta, thetas, M: int, basis) -> StateVector:
    """Multinomial state from a chain of rotations on the reduced simplex.

    The first rotation has sin(rho) = |eta| (so tan^2 rho = sum eta^2 /
    (1 - sum eta^2)), the rest split mode j into mode j+1 exactly as in the
    negative-multinomial chain.  ``basis`` must contain the full simplex
    sum(n) <= M; the clamped square-root weight annihilates exactly at the
    shell boundary, so no mass ever leaves it.
    """
    if int(M) != M or M < 1:
        raise ValueError("M must be a positive integer")
    M = int(M)
    eta, thetas = _check_chain_args(eta, thetas, basis)
    r = basis.modes
    inside = int((basis.totals <= M).sum())
    if inside != math.comb(M + r, r):
        raise ValueError(f"basis must contain the full simplex of total occupation <= {M}")
    phases = _chain_phases(thetas)
    pump_angle = math.asin(math.sqrt(sum(e * e for e in eta)))
    psi = _apply_rotation(_pump_op(basis, M, compact=True), pump_angle, phases[0],
                          vacuum_state(basis))
    for j, angle in enumerate(_rotation_angles(eta), start=1):
        psi = _apply_rotation(_transfer_op(basis, j + 1, j), angle, phases[j], psi)
    return psi


# --- dynamical generation --------------------------------------------------


@dataclass(frozen=True)
class TwoLevelDrive:
    """Resonant collection of two-level systems: coupling rate and phase."""

    eta: float
    theta: float = 0.0

    def __post_init__(self):
        if self.eta <= 0:
            raise ValueError("eta must be positive")


def dynamical_binomial(drive: TwoLevelDrive, t: float, M: int) -> StateVector:
    """Evolve |M, 0> on the two-mode shell under the resonant coupling.

    The rotating-frame generator integrates to eta*t (e^{i theta} J+ -
    e^{-i theta} J-) with J+ = a1^dag a0, which lands on the binomial state
    with modulus parameter sin(eta t) and phase theta.
    """
    if int(M) != M or M < 1:
        raise ValueError("M must be a positive integer")
    if t < 0:
        raise ValueError("t must be non-negative")
    M = int(M)
    basis = enumerate_basis(2, Cutoff.shell(M))
    real = su2_bilinear(basis, M)
    angle = drive.eta * t
    generator = (angle * cmath.exp(1j * drive.theta)) * real.raising["J+"] \
        - (angle * cmath.exp(-1j * drive.theta)) * real.lowering["J-"]
    return apply_exponential(generator, basis_state(basis, (M, 0)))


def dynamical_binomial_target(drive: TwoLevelDrive, t: float, M: int) -> StateVector:
    """Closed-form binomial state the evolution should reach at time t."""
    eta_b = abs(math.sin(drive.eta * t))
    basis = enumerate_basis(2, Cutoff.shell(int(M)))
    if eta_b == 0.0:
        return basis_state(basis, (int(M), 0))
    spec = st.StateSpec("multinomial", dist.MultinomialParams((eta_b,), int(M)),
                        (drive.theta,))
    return st.multinomial_state(spec, basis)


@dataclass(frozen=True)
class ClassicalCurrent:
    """Piecewise-constant classical current coupled linearly to one mode.

    ``segments`` is a sequence of (t_start, t_end, j) with complex amplitude
    j, contiguous from t = 0; ``omega`` is the mode frequency.
    """

    segments: tuple
    omega: float

    def __post_init__(self):
        segs = tuple((float(a), float(b), complex(c)) for a, b, c in self.segments)
        if not segs:
            raise ValueError("at least one segment is required")
        if abs(segs[0][0]) > 1e-15:
            raise ValueError("the first segment must start at t = 0")
        for (a0, b0, _), (a1, _, _) in zip(segs, segs[1:]):
            if b0 <= a0 or abs(a1 - b0) > 1e-12:
                raise ValueError("segments must be contiguous with positive length")
        if segs[-1][1] <= segs[-1][0]:
            raise ValueError("segments must have positive length")
        object.__setattr__(self, "segments", segs)
        object.__setattr__(self, "omega", float(self.omega))

    @property
    def t_end(self):
        return self.segments[-1][1]


def coherent_amplitude(current: ClassicalCurrent, t: float) -> complex:
    """alpha(t) = -i * integral_0^t j(t') e^{i omega t'} dt', exact per segment."""
    if t < 0 or t > current.t_end + 1e-12:
        raise ValueError("t outside the driven window")
    alpha = 0.0 + 0.0j
    w = current.omega
    for (t0, t1, j) in current.segments:
        hi = min(t1, t)
        if hi <= t0:
            break
        if w == 0.0:
            alpha += -1j * j * (hi - t0)
        else:
            alpha += -j * (cmath.exp(1j * w * hi) - cmath.exp(1j * w * t0)) / w
    return alpha


def dynamical_coherent(current: ClassicalCurrent, t: float, basis) -> StateVector:
    """Drive the vacuum with the classical current and return the state at time t.

    Evolution runs in the lab frame, where H = omega N + j a^dag + j* a is
    constant on each segment, then rotates by e^{i omega N t} into the frame
    carrying the closed-form amplitude of :func:`coherent_amplitude`.  The
    remaining time-dependent global phase is irrelevant to fidelity checks.
    """
    if basis.modes != 1:
        raise ValueError("dynamical_coherent needs a 1-mode basis")
    if t < 0 or t > current.t_end + 1e-12:
        raise ValueError("t outside the driven window")
    a = annihilation_op(basis, 0)
    ad = creation_op(basis, 0)
    nop = number_op(basis, 0)
    psi = vacuum_state(basis)
    for (t0, t1, j) in current.segments:
        hi = min(t1, t)
        if hi <= t0:
            break
        h = current.omega * nop + j * ad + np.conj(j) * a
        psi = apply_exponential((-1j * (hi - t0)) * h, psi)
    frame = np.exp(1j * current.omega * basis.totals * t)
    return StateVector(basis, frame * psi.amplitudes)


def contraction_check(family: str, m_values, alpha2: float, theta: float = 0.0) -> list:
    """Fidelity of finite-M states against the fixed-mean coherent target.

    binomial: eta^2 = alpha^2/M (needs M > alpha^2);
    neg_binomial: eta^2 = alpha^2/(M + alpha^2) (mean alpha^2 exactly).
    Returns [{"M", "fidelity"}], expected monotone increasing toward 1.
    """
    if family not in ("binomial", "neg_binomial"):
        raise ValueError("family must be 'binomial' or 'neg_binomial'")
    if alpha2 <= 0:
        raise ValueError("alpha2 must be positive")
    rows = []
    coh_spec = st.StateSpec("coherent", dist.PoissonParams(alpha2), (theta,))
    for m in m_values:
        if family == "binomial":
            if m <= alpha2:
                raise ValueError(f"M={m} must exceed alpha2={alpha2}")
            spec = st.StateSpec("binomial", dist.BinomialParams(alpha2 / m, int(m)), (theta,))
            n_max = max(int(m), dist.poisson_cutoff(coh_spec.params, 1e-16))
        else:
            eta2 = alpha2 / (m + alpha2)
            spec = st.StateSpec("neg_binomial", dist.NegBinomialParams(eta2, float(m)), (theta,))
            n_max = max(dist.neg_binomial_cutoff(spec.params, 1e-16),
                        dist.poisson_cutoff(coh_spec.params, 1e-16))
        basis = enumerate_basis(1, Cutoff.per_mode(n_max))
        target = st.coherent_state(coh_spec, basis)
        psi = st.build_state(spec, basis)
        rows.append({"M": m, "fidelity": fidelity(psi, target)})
    return rows
