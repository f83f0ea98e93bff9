"""Displaced squeezed thermal modes and broadband photon statistics.

A spectral mode is parametrized by squeezing magnitude r, squeezing phase
theta, complex displacement alpha and thermal occupation n_th. A multimode
state is a list of statistically independent modes; the measured broadband
correlations g2(0), g3(0) follow from normally ordered per-mode moments by a
multinomial combination.

Fast path: first and second moments use the Gaussian (Wick) expansion with
central moments

    N = n_th cosh(2r) + sinh^2(r)
    M = (2 n_th + 1) sinh(r) cosh(r) e^{i phi},   phi = -theta

The phase convention phi(theta) was calibrated once against the number-basis
oracle at a complex displacement and is frozen by a regression test. The
third moment has no maintained closed form and is delegated to the oracle.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .exceptions import DegenerateStateError, InvalidParameterError

DB_PER_UNIT_R = 20.0 / math.log(10.0)  # 10*log10(e^2r) = 8.6859*r


@dataclass(frozen=True)
class ModeParams:
    """Single-mode parameters of D(alpha) S(r e^{i theta}) rho_th S^+ D^+."""

    r: float = 0.0
    theta: float = 0.0
    alpha: complex = 0.0
    n_th: float = 0.0

    def validate(self) -> None:
        vals = (self.r, self.theta, self.n_th, abs(self.alpha))
        if not all(math.isfinite(v) for v in vals):
            raise InvalidParameterError(f"non-finite mode parameter in {self}")
        if self.r < 0.0:
            raise InvalidParameterError(f"squeezing magnitude r must be >= 0, got {self.r}")
        if self.n_th < 0.0:
            raise InvalidParameterError(f"thermal occupation must be >= 0, got {self.n_th}")


@dataclass(frozen=True)
class HyperParams:
    """Squeezer-distribution hyperparameters (B, mu) plus isotropic alpha, n_th.

    Mode k of d carries r_k = B sqrt(1-mu^2) mu^k; displacement and thermal
    occupation are copied to every mode.
    """

    B: float
    mu: float
    alpha: float = 0.0
    n_th: float = 0.0
    d: int = 50

    def validate(self) -> None:
        if not (0.0 <= self.mu < 1.0):
            raise InvalidParameterError(f"mu must lie in [0, 1), got {self.mu}")
        if self.B < 0.0:
            raise InvalidParameterError(f"B must be >= 0, got {self.B}")
        if self.n_th < 0.0:
            raise InvalidParameterError(f"n_th must be >= 0, got {self.n_th}")
        if self.d < 1:
            raise InvalidParameterError(f"d must be >= 1, got {self.d}")


@dataclass(frozen=True)
class MultimodeState:
    """Ordered collection of independent spectral modes."""

    modes: tuple[ModeParams, ...]

    def __post_init__(self):
        object.__setattr__(self, "modes", tuple(self.modes))

    def validate(self) -> None:
        if len(self.modes) < 1:
            raise InvalidParameterError("state needs at least one mode")
        for m in self.modes:
            m.validate()


@dataclass(frozen=True)
class NormallyOrderedMoments:
    """<a^+a>, <a^+2 a^2>, <a^+3 a^3> of one mode."""

    m1: float
    m2: float
    m3: float


def mode_weights(mu: float, d: int) -> np.ndarray:
    """Thermal squeezer weights lambda_k = sqrt(1-mu^2) mu^k, k = 0..d-1."""
    if not (0.0 <= mu < 1.0):
        raise InvalidParameterError(f"mu must lie in [0, 1), got {mu}")
    return math.sqrt(1.0 - mu * mu) * mu ** np.arange(d)


def expand_hyperparams(h: HyperParams) -> MultimodeState:
    """Expand (B, mu, alpha, n_th, d) into d modes with r_k = B lambda_k."""
    h.validate()
    lam = mode_weights(h.mu, h.d)
    return MultimodeState(
        tuple(ModeParams(r=float(h.B * l), theta=0.0, alpha=h.alpha, n_th=h.n_th) for l in lam)
    )


def _gaussian_central(r: float, theta: float, n_th: float) -> tuple[float, complex]:
    n = n_th * math.cosh(2.0 * r) + math.sinh(r) ** 2
    m = (2.0 * n_th + 1.0) * math.sinh(r) * math.cosh(r) * np.exp(-1j * theta)
    return n, m


def wick_moments(mode: ModeParams) -> NormallyOrderedMoments:
    """Per-mode moments: m1, m2 from the Wick expansion, m3 from the oracle.

    The oracle call uses a raised truncation ceiling so ordinary parameter
    ranges (r <= 2, |alpha| <= 2, n_th <= 0.5) never hit truncation failure.
    """
    mode.validate()
    n, m = _gaussian_central(mode.r, mode.theta, mode.n_th)
    a = complex(mode.alpha)
    a2 = abs(a) ** 2
    m1 = a2 + n
    m2 = (
        a2 * a2
        + 4.0 * a2 * n
        + 2.0 * (np.conj(a) ** 2 * m).real
        + 2.0 * n * n
        + abs(m) ** 2
    )
    from .fock import oracle_moments

    m3 = oracle_moments(mode, ceiling=4096).m3
    return NormallyOrderedMoments(float(m1), float(m2), float(m3))


def combine_moments(m1, m2, m3) -> tuple[float, float, float]:
    """Broadband (S1, g2, g3) from arrays of per-mode moments.

    Statistically independent modes: expanding sum_{l,m} <a_l^+ a_m^+ a_l a_m>
    and the three-index analogue over distinct/coincident mode indices gives

        g2 = (S1^2 - P2 + S2) / S1^2
        g3 = (S1^3 - 3 S1 P2 + 2 P3 + 3 (S2 S1 - X) + S3) / S1^3

    with S_i the plain sums, P2 = sum m1^2, P3 = sum m1^3, X = sum m2 m1.
    """
    m1 = np.asarray(m1, dtype=float)
    m2 = np.asarray(m2, dtype=float)
    m3 = np.asarray(m3, dtype=float)
    s1 = float(m1.sum())
    if s1 == 0.0:
        raise DegenerateStateError("vacuum state: g2, g3 undefined")
    s2, s3 = float(m2.sum()), float(m3.sum())
    p2, p3 = float((m1**2).sum()), float((m1**3).sum())
    x = float((m2 * m1).sum())
    g2 = (s1 * s1 - p2 + s2) / (s1 * s1)
    g3 = (s1**3 - 3.0 * s1 * p2 + 2.0 * p3 + 3.0 * (s2 * s1 - x) + s3) / s1**3
    return s1, g2, g3


def per_mode_moments(state: MultimodeState) -> list[NormallyOrderedMoments]:
    state.validate()
    return [wick_moments(m) for m in state.modes]


def broadband_moments(state: MultimodeState) -> tuple[float, float, float]:
    """(S1, g2, g3) of the full multimode state."""
    mom = per_mode_moments(state)
    return combine_moments(
        [m.m1 for m in mom], [m.m2 for m in mom], [m.m3 for m in mom]
    )


def mean_photon(state: MultimodeState) -> float:
    """Mean photons per pulse, sum of |alpha_k|^2 + N_k (analytic, no oracle)."""
    state.validate()
    total = 0.0
    for m in state.modes:
        n, _ = _gaussian_central(m.r, m.theta, m.n_th)
        total += abs(complex(m.alpha)) ** 2 + n
    return total


def apply_loss(m: NormallyOrderedMoments, eta: float) -> NormallyOrderedMoments:
    """Scale moments under binomial loss: m_n -> eta^n m_n. Leaves g2, g3 unchanged."""
    if not (0.0 <= eta <= 1.0):
        raise InvalidParameterError(f"transmission must lie in [0, 1], got {eta}")
    return NormallyOrderedMoments(eta * m.m1, eta * eta * m.m2, eta**3 * m.m3)


def schmidt_number(lambdas) -> float:
    """Effective Schmidt number K = 1 / sum(lambda_k^4) of normalized weights."""
    lam = np.asarray(lambdas, dtype=float)
    norm = float((lam**2).sum())
    if not np.isfinite(norm) or norm <= 0.0:
        raise InvalidParameterError("mode weights are not normalizable")
    lam4 = float((lam**4).sum()) / (norm * norm)
    return 1.0 / lam4


def schmidt_number_mu(mu: float) -> float:
    """Closed form for the thermal weight distribution: K = (1+mu^2)/(1-mu^2)."""
    if not (0.0 <= mu < 1.0):
        raise InvalidParameterError(f"mu must lie in [0, 1), got {mu}")
    return (1.0 + mu * mu) / (1.0 - mu * mu)


def squeezing_db(r: float) -> float:
    """Squeezing level in dB under the standard convention 10 log10(e^{2r})."""
    return DB_PER_UNIT_R * r
