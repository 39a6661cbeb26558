"""Conditional maximum-likelihood estimation of AR(1) jitter and noise parameters.

The pilot pseudo-measurements ``m = xi + w / y'`` are jointly Gaussian with
covariance ``Sigma + D``: ``Sigma`` is the AR(1) covariance sampled at the
pilot instants (a Kac-Murdoch-Szego matrix whose inverse is tridiagonal) and
``D = diag(sigma_w^2 / |y'_n|^2)``. With

    T = I + D^{1/2} Sigma^{-1} D^{1/2}      (symmetric tridiagonal, SPD)

we have ``det(Sigma + D) = det(Sigma) det(T)`` and, by Woodbury,

    (Sigma + D)^{-1} = Q - Q D^{1/2} T^{-1} D^{1/2} Q,   Q = Sigma^{-1},

so one likelihood evaluation costs a banded Cholesky factorization, i.e.
O(M) time and memory.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import cho_solve_banded, cholesky_banded
from scipy.optimize import minimize

from .jitter import Ar1Params
from .pilots import PseudoMeasurements

__all__ = [
    "Tridiagonal",
    "MleProblem",
    "MleResult",
    "LikelihoodDegenerateError",
    "kms_logdet",
    "kms_inverse_tridiag",
    "kms_covariance",
    "neg_loglik_fast",
    "neg_loglik_dense",
    "estimate_parameters",
]

LOG2PI = math.log(2.0 * math.pi)


class LikelihoodDegenerateError(RuntimeError):
    """Every optimizer start produced a non-finite likelihood."""


@dataclass(frozen=True)
class Tridiagonal:
    """Symmetric tridiagonal matrix by its main and first off diagonal."""

    diag: np.ndarray
    off: np.ndarray

    def to_dense(self) -> np.ndarray:
        return np.diag(self.diag) + np.diag(self.off, 1) + np.diag(self.off, -1)

    def matvec(self, v: np.ndarray) -> np.ndarray:
        out = self.diag * v
        out[:-1] += self.off * v[1:]
        out[1:] += self.off * v[:-1]
        return out


def _one_minus_rho2(phi: float, lags) -> np.ndarray:
    """``1 - phi^(2 lag)`` without cancellation for phi near 1."""
    lags = np.asarray(lags, dtype=float)
    if phi == 0.0:
        return np.where(lags > 0, 1.0, 0.0)
    return -np.expm1(2.0 * lags * math.log(phi))


def _stationary_var(phi: float, sigma_eps: float) -> float:
    return sigma_eps**2 / ((1.0 - phi) * (1.0 + phi))


def _logdet_gaps(phi, sigma_eps, lags, M) -> float:
    return M * math.log(_stationary_var(phi, sigma_eps)) + float(np.sum(np.log(_one_minus_rho2(phi, lags))))


def _precision_gaps(phi, sigma_eps, lags, M) -> Tridiagonal:
    var = _stationary_var(phi, sigma_eps)
    lags = np.asarray(lags, dtype=float)
    rho = phi**lags
    c = 1.0 / _one_minus_rho2(phi, lags)  # 1 / (1 - rho^2) per gap
    diag = np.ones(M)
    if M > 1:
        # Markov factorization: p(xi_1) prod p(xi_{i+1} | xi_i)
        diag[:-1] += rho**2 * c
        diag[1:] += c - 1.0
    return Tridiagonal(diag / var, -rho * c / var)


def kms_logdet(phi: float, sigma_eps: float, k_gap: int, M: int) -> float:
    """``log det`` of the pilot-sampled AR(1) covariance.

    ``M log(sigma_eps^2 / (1 - phi^2)) + (M - 1) log(1 - phi^(2(K+1)))``.
    """
    if M < 1:
        raise ValueError("M must be >= 1")
    lag = k_gap + 1
    return M * math.log(_stationary_var(phi, sigma_eps)) + (M - 1) * float(np.log(_one_minus_rho2(phi, lag)))


def kms_inverse_tridiag(phi: float, sigma_eps: float, k_gap: int, M: int) -> Tridiagonal:
    """Closed-form tridiagonal inverse of the pilot-sampled AR(1) covariance.

    Scale ``(1 - phi^2) / (sigma_eps^2 (1 - phi^(2(K+1))))`` times 1 at the two
    corners, ``1 + phi^(2(K+1))`` on the interior diagonal and
    ``-phi^(K+1)`` on the off diagonals.
    """
    if M < 1:
        raise ValueError("M must be >= 1")
    lag = k_gap + 1
    r = phi**lag
    omr2 = float(_one_minus_rho2(phi, lag))
    scale = (1.0 - phi) * (1.0 + phi) / (sigma_eps**2 * omr2)
    if M == 1:
        return Tridiagonal(np.array([1.0 / _stationary_var(phi, sigma_eps)]), np.zeros(0))
    diag = np.full(M, 1.0 + r * r)
    diag[0] = diag[-1] = 1.0
    return Tridiagonal(scale * diag, np.full(M - 1, -r * scale))


def kms_covariance(phi: float, sigma_eps: float, lags) -> np.ndarray:
    """Dense covariance ``var * phi^|t_i - t_j|`` for pilot instants with given gaps."""
    t = np.concatenate([[0.0], np.cumsum(np.asarray(lags, dtype=float))])
    return _stationary_var(phi, sigma_eps) * phi ** np.abs(t[:, None] - t[None, :])


@dataclass
class MleProblem:
    """Pseudo-measurements and the box for ``(sigma_eps, phi, sigma_w)``.

    ``lags`` holds the sample distance between consecutive retained pilots;
    it defaults to the uniform spacing ``k_gap + 1``. Bounds are
    ``((lo, hi), (lo, hi), (lo, hi))`` for ``sigma_eps``, ``phi``, ``sigma_w``;
    missing bounds are derived from the data scale.
    """

    m_tilde: np.ndarray
    deriv_sq: np.ndarray
    k_gap: int
    bounds: tuple | None = None
    starts: int = 32
    lags: np.ndarray | None = None

    def __post_init__(self):
        self.m_tilde = np.asarray(self.m_tilde, dtype=float)
        self.deriv_sq = np.asarray(self.deriv_sq, dtype=float)
        if self.m_tilde.size < 3:
            raise ValueError("need at least 3 pseudo-measurements")
        if self.deriv_sq.shape != self.m_tilde.shape:
            raise ValueError("deriv_sq must match m_tilde")
        if np.any(self.deriv_sq <= 0):
            raise ValueError("deriv_sq must be positive (drop flagged pilots first)")
        if self.lags is None:
            self.lags = np.full(self.m_tilde.size - 1, self.k_gap + 1, dtype=float)
        self.lags = np.asarray(self.lags, dtype=float)
        if self.lags.size != self.m_tilde.size - 1:
            raise ValueError("lags must have M - 1 entries")
        if self.bounds is None:
            self.bounds = default_bounds(self.m_tilde, self.deriv_sq)
        (el, eh), (pl, ph), (wl, wh) = self.bounds
        if not (0 < pl <= ph < 1):
            raise ValueError("phi bounds must lie inside (0, 1)")
        if not (0 < el <= eh and 0 <= wl <= wh):
            raise ValueError("invalid sigma bounds")

    @property
    def M(self) -> int:
        return self.m_tilde.size

    @classmethod
    def from_measurements(cls, meas: PseudoMeasurements, k_gap: int, **kw) -> "MleProblem":
        """Drop unreliable pilots; the gaps around each dropped pilot merge."""
        keep = meas.reliable
        idx = meas.indices[keep]
        return cls(meas.m[keep], meas.weights_basis[keep] ** 2, k_gap,
                   lags=np.diff(idx).astype(float), **kw)


def default_bounds(m_tilde, deriv_sq):
    """Wide data-scaled box: ``phi`` in [0.9, 0.99999]."""
    s_xi = float(np.sqrt(np.sum(m_tilde**2 * deriv_sq) / np.sum(deriv_sq)))
    s_amp = float(np.sqrt(np.mean(m_tilde**2 * deriv_sq)))
    s_xi = s_xi if s_xi > 0 else 1.0
    s_amp = s_amp if s_amp > 0 else 1.0
    return ((1e-5 * s_xi, 2.0 * s_xi), (0.9, 0.99999), (1e-5 * s_amp, 3.0 * s_amp))


def _theta_tuple(theta):
    if isinstance(theta, Ar1Params):
        return theta.sigma_eps, theta.phi, theta.sigma_w
    return tuple(float(v) for v in theta)


def neg_loglik_fast(problem: MleProblem, theta) -> float:
    """Conditional negative log-likelihood in O(M).

    ``theta`` is an :class:`Ar1Params` or a ``(sigma_eps, phi, sigma_w)``
    tuple. Returns ``+inf`` if the evaluation is not finite.
    """
    sigma_eps, phi, sigma_w = _theta_tuple(theta)
    m = problem.m_tilde
    M = m.size
    try:
        if not (0.0 <= phi < 1.0 and sigma_eps > 0 and sigma_w >= 0
                and math.isfinite(sigma_eps) and math.isfinite(sigma_w)):
            return math.inf
        logdet_s = _logdet_gaps(phi, sigma_eps, problem.lags, M)
        Q = _precision_gaps(phi, sigma_eps, problem.lags, M)
        qm = Q.matvec(m)
        quad = float(m @ qm)
        if sigma_w > 0:
            d_half = sigma_w / np.sqrt(problem.deriv_sq)
            ab = np.empty((2, M))
            ab[1] = 1.0 + d_half * d_half * Q.diag
            ab[0, 0] = 0.0
            ab[0, 1:] = d_half[:-1] * Q.off * d_half[1:]
            cb = cholesky_banded(ab, lower=False, check_finite=False)
            logdet_t = 2.0 * float(np.sum(np.log(cb[1])))
            v = d_half * qm
            quad -= float(v @ cho_solve_banded((cb, False), v, check_finite=False))
        else:
            logdet_t = 0.0
        val = 0.5 * (M * LOG2PI + logdet_s + logdet_t + quad)
    except (np.linalg.LinAlgError, ValueError, FloatingPointError, ZeroDivisionError):
        return math.inf
    return val if math.isfinite(val) else math.inf


def neg_loglik_dense(problem: MleProblem, theta) -> float:
    """Reference O(M^3) evaluation with a dense covariance."""
    sigma_eps, phi, sigma_w = _theta_tuple(theta)
    cov = kms_covariance(phi, sigma_eps, problem.lags)
    cov[np.diag_indices_from(cov)] += sigma_w**2 / problem.deriv_sq
    sign, logdet = np.linalg.slogdet(cov)
    if sign <= 0:
        return math.inf
    quad = float(problem.m_tilde @ np.linalg.solve(cov, problem.m_tilde))
    return 0.5 * (problem.M * LOG2PI + logdet + quad)


@dataclass
class MleResult:
    theta_hat: Ar1Params
    neg_loglik: float
    starts_tried: int
    converged_flags: list = field(default_factory=list)
    start_values: list = field(default_factory=list)


def _to_z(theta):
    se, phi, sw = theta
    return np.array([math.log(se), math.log(phi / (1.0 - phi)), math.log(sw) if sw > 0 else -745.0])


def _from_z(z):
    return (math.exp(z[0]), 1.0 / (1.0 + math.exp(-z[1])), math.exp(z[2]))


def estimate_parameters(problem: MleProblem, seed=None, maxiter: int = 1500,
                        xatol: float = 1e-6, fatol: float = 1e-8) -> MleResult:
    """Multi-start bounded Nelder-Mead on ``(log sigma_eps, logit phi, log sigma_w)``.

    Starts are drawn log-uniformly for the two standard deviations and
    uniformly for ``phi`` inside the box. The best finite minimizer wins;
    ties go to the lowest start index. ``xatol`` and ``fatol`` are simplex
    tolerances in the transformed coordinates (relative for the standard
    deviations) and in nats; ``maxiter`` caps each start.

    Raises
    ------
    LikelihoodDegenerateError
        No start reached a finite likelihood.
    """
    rng = np.random.default_rng(seed)
    (el, eh), (pl, ph), (wl, wh) = problem.bounds
    if wl == 0 and wh == 0:
        wl = wh = 0.0
    lo = np.array([math.log(el), math.log(pl / (1 - pl)), math.log(wl) if wl > 0 else -745.0])
    hi = np.array([math.log(eh), math.log(ph / (1 - ph)), math.log(wh) if wh > 0 else -745.0])
    free = hi > lo
    best = None
    flags, starts = [], []

    def full(zf):
        z = lo.copy()
        z[free] = zf
        return z

    def objective(zf):
        return neg_loglik_fast(problem, _from_z(full(zf)))

    n_starts = max(1, int(problem.starts))
    for s in range(n_starts):
        th0 = (
            math.exp(rng.uniform(math.log(el), math.log(eh))),
            rng.uniform(pl, ph),
            math.exp(rng.uniform(math.log(wl), math.log(wh))) if wl > 0 else wh,
        )
        starts.append(th0)
        z0 = np.clip(_to_z(th0), lo, hi)
        if not free.any():
            z, f, ok = z0, objective(z0[free]), True
        else:
            res = minimize(objective, z0[free], method="Nelder-Mead",
                           bounds=list(zip(lo[free], hi[free])),
                           options={"xatol": xatol, "fatol": fatol, "maxiter": maxiter,
                                    "maxfev": 2 * maxiter, "adaptive": True})
            z, f, ok = full(res.x), float(res.fun), bool(res.success)
        flags.append(ok)
        if math.isfinite(f) and (best is None or f < best[1]):
            best = (z, f)
        if not free.any():
            break
    if best is None:
        raise LikelihoodDegenerateError("likelihood degenerate: no finite start")
    se, phi, sw = _from_z(best[0])
    if wh == 0:
        sw = 0.0
    return MleResult(Ar1Params(phi, se, sw), best[1], len(flags), flags, starts)
