"""Overlap estimation: closed-form Hilbert-Schmidt products and swap-test shot noise.

The comparison primitive between probe and ansatz is Tr(rho sigma).  A swap test
on nu shot pairs reports it through k ~ Binomial(nu, (1+Tr)/2) as
T-hat = 2k/nu - 1, which is unbiased with variance 4p(1-p)/nu.  T-hat is never
clipped; negative excursions are part of the statistics.  Quasi-normalization
divides by the square root of the ansatz purity, which is always computed
exactly from the closed form, never sampled.
"""

from dataclasses import dataclass

import numpy as np

from .dynamics import (
    CHANNEL_AMPDAMP,
    CHANNEL_DEPHASING,
    FAMILY_AMPDAMP,
    FAMILY_DEPHASED,
    FAMILY_PURE,
    ClosedFormState,
)
from .errors import DimensionError, DomainError, UnsupportedModelError
from .rng import stream


class ShotSampler:
    """Single-owner seeded binomial sampler.

    Cloning with ``spawn`` derives an independent stream from the same master
    seed by extending the label key; identical (seed, key, shots) always
    reproduces identical draws.
    """

    def __init__(self, seed, shots, key=()):
        if shots < 1:
            raise DomainError(f"need shots >= 1, got {shots}")
        self.seed = int(seed)
        self.shots = int(shots)
        self.key = tuple(int(k) for k in key)
        self._gen = stream(self.seed, *self.key)

    def spawn(self, *labels):
        return ShotSampler(self.seed, self.shots, self.key + labels)

    def with_shots(self, shots):
        return ShotSampler(self.seed, shots, self.key)

    def binomial_fraction(self, p):
        """k/nu with k ~ Binomial(shots, p); p is clipped only against float dust."""
        if not np.isfinite(p) or p < -1e-9 or p > 1 + 1e-9:
            raise DomainError(f"probability {p} outside [0, 1]")
        p = min(max(float(p), 0.0), 1.0)
        return self._gen.binomial(self.shots, p) / self.shots


@dataclass(frozen=True)
class OverlapValue:
    """Exact overlap bundle: raw Tr(rho sigma), ansatz purity, and the QN value."""

    raw: float
    circuit_purity: float
    quasi_normalized: float

    def __post_init__(self):
        if not 0 < self.circuit_purity <= 1 + 1e-12:
            raise DomainError(f"circuit purity {self.circuit_purity} outside (0, 1]")


def _dephasing_family_decay(state):
    # pure states participate in both overlap families with zero decay
    return 0.0 if state.family == FAMILY_PURE else state.decay


def _ampdamp_pair_overlap(n, ga, gb, dtheta):
    ea, eb = np.exp(-ga), np.exp(-gb)
    diag = 0.25 * (1 + (1 - ea) ** n + (1 - eb) ** n + (ea * eb + (1 - ea) * (1 - eb)) ** n)
    return diag + 0.5 * np.exp(-n * (ga + gb) / 2) * np.cos(2 * n * dtheta)


def hs_overlap_closed(probe, ansatz):
    """Tr(rho_probe rho_ansatz) for compatible closed-form families.

    Pure/dephased pairs give (1/2)(1 + e^{-2n(ga+gb)} cos 2n(dtheta)); pairs
    involving amplitude damping use the binomial diagonal product.  Mixing the
    two decoherence families has no supported expression.
    """
    if not isinstance(probe, ClosedFormState) or not isinstance(ansatz, ClosedFormState):
        raise UnsupportedModelError("hs_overlap_closed needs two closed-form states")
    if probe.n != ansatz.n:
        raise DimensionError(f"qubit counts differ: {probe.n} vs {ansatz.n}")
    n = probe.n
    dtheta = probe.theta - ansatz.theta
    fams = {probe.family, ansatz.family}
    if FAMILY_DEPHASED in fams and FAMILY_AMPDAMP in fams:
        raise UnsupportedModelError("dephased and amplitude-damped families do not mix")
    if FAMILY_AMPDAMP in fams:
        ga = probe.decay if probe.family == FAMILY_AMPDAMP else 0.0
        gb = ansatz.decay if ansatz.family == FAMILY_AMPDAMP else 0.0
        raw = _ampdamp_pair_overlap(n, ga, gb, dtheta)
    else:
        ga = _dephasing_family_decay(probe)
        gb = _dephasing_family_decay(ansatz)
        raw = 0.5 * (1 + np.exp(-2 * n * (ga + gb)) * np.cos(2 * n * dtheta))
    pur = ansatz.purity()
    return OverlapValue(float(raw), float(pur), float(raw / np.sqrt(pur)))


def quasi_normalize(overlap):
    """raw / sqrt(ansatz purity); the denominator is exact by construction."""
    return overlap.raw / np.sqrt(overlap.circuit_purity)


def swap_test_sample(overlap, sampler):
    """Unbiased shot estimate of the raw overlap; exact when sampler is None."""
    if sampler is None:
        return overlap.raw
    p = (1 + overlap.raw) / 2
    return 2 * sampler.binomial_fraction(p) - 1


LOSS_PLAIN = "plain"
LOSS_QN = "quasi_normalized"


def loss(overlap, sampler, mode=LOSS_PLAIN):
    """1 - T-hat (plain) or 1 - T-hat / sqrt(purity) (quasi-normalized)."""
    t_hat = swap_test_sample(overlap, sampler)
    if mode == LOSS_PLAIN:
        return 1.0 - t_hat
    if mode == LOSS_QN:
        return 1.0 - t_hat / np.sqrt(overlap.circuit_purity)
    raise DomainError(f"unknown loss mode {mode!r}")


def parity_probability(n, theta, gamma, t):
    """P(+1) of the all-X stabilizer on a dephased GHZ probe at time t (scalar or array)."""
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise DomainError("time must be >= 0")
    return 0.5 * (1 + np.exp(-2 * n * gamma * t) * np.cos(2 * n * theta * t))


def parity_sample(p, sampler):
    """Observed +1 fraction from shots; exact probability when sampler is None."""
    if sampler is None:
        return float(p)
    return sampler.binomial_fraction(p)
