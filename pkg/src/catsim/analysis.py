"""Lyapunov monitoring and input-to-state stability estimation.

The monitored function combines the relative translational error with
per-vehicle attitude terms:

    V = 1/2 m_r |e_v|^2 + 1/2 e_p^T Kp e_p + alpha e_p^T e_v
        + sum_i [ 1/2 e_Om_i^T J_i e_Om_i + (kR/2) tr(I - Rd_i^T R_i)
                  + beta_i e_R_i^T J_i e_Om_i ]

Attitude terms drop out in reduced mode. From simulated traces this
module fits the nominal decay rate lambda_hat (log-linear least squares),
certifies a disturbance gain gamma_hat such that

    Vdot <= -(lambda_hat/2) V + gamma_hat ||Delta||^2

holds within a violation tolerance on every perturbed trace, and turns
the pair into an ultimate-bound slope c_hat = sqrt(gamma_hat / (m1_hat *
lambda_hat/2)) via the quadratic-equivalence constants m1_hat, m2_hat.
"""

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import FitFailed, InsufficientSamples, NonPositiveInput, ParamOutOfRange

# Samples with V below this floor are excluded from log-linear fitting.
V_FLOOR = 1e-12
# Nominal transient excluded from the decay fit (seconds).
FIT_TRANSIENT = 1.0
# Allowed fraction of samples violating a certified dissipation inequality.
VIOLATION_TOL = 1e-3

MIN_SAMPLES = 10


@dataclass(frozen=True)
class LyapunovParams:
    """Weights of the monitored function; inertias only matter in full mode."""

    reduced_mass: float
    kp: np.ndarray
    alpha: float
    k_rot: float = 8.0
    beta1: float = 0.02
    beta2: float = 0.02
    inertia1: Optional[np.ndarray] = None
    inertia2: Optional[np.ndarray] = None


@dataclass(frozen=True)
class AttitudeErrorSample:
    """Per-vehicle attitude error data: e_R, e_Omega, tr(I - Rd^T R)."""

    e_rot: np.ndarray
    e_omega: np.ndarray
    rotation_gap: float


@dataclass(frozen=True)
class LyapunovSample:
    """One monitored sample as written to the analysis CSV."""

    t: float
    value: float
    vdot_fd: float
    norm_e: float
    norm_delta: float


@dataclass
class TraceSeries:
    """Plain-array view of a simulation trace for the estimators."""

    t: np.ndarray
    V: np.ndarray
    norm_e: Optional[np.ndarray] = None
    delta_norm: Optional[np.ndarray] = None


@dataclass(frozen=True)
class DecayFit:
    """Log-linear fit of -ln V against t."""

    rate: float
    intercept: float
    r_squared: float
    n_samples: int


@dataclass(frozen=True)
class DissipationResult:
    vdot: np.ndarray
    residuals: np.ndarray
    violation_fraction: float


@dataclass(frozen=True)
class ISSEstimate:
    lambda_hat: float
    gamma_hat: float
    m1_hat: float
    m2_hat: float
    c_hat: float
    certified_rate: float


def lyapunov_value(e_p, e_v, params, attitude=()):
    """Evaluate the monitored function at one sample."""
    e_p = np.asarray(e_p, dtype=float)
    e_v = np.asarray(e_v, dtype=float)
    value = (0.5 * params.reduced_mass * (e_v @ e_v)
             + 0.5 * (e_p @ params.kp @ e_p)
             + params.alpha * (e_p @ e_v))
    betas = (params.beta1, params.beta2)
    inertias = (params.inertia1, params.inertia2)
    for i, sample in enumerate(attitude):
        j = inertias[i]
        j_omega = j @ sample.e_omega
        value += (0.5 * (sample.e_omega @ j_omega)
                  + 0.5 * params.k_rot * sample.rotation_gap
                  + betas[i] * (sample.e_rot @ j_omega))
    return float(value)


def central_difference(t, v):
    """dV/dt via central differences; one-sided at both endpoints."""
    t = np.asarray(t, dtype=float)
    v = np.asarray(v, dtype=float)
    if t.size < 2:
        raise InsufficientSamples("need at least 2 samples to differentiate")
    out = np.empty_like(v)
    out[1:-1] = (v[2:] - v[:-2]) / (t[2:] - t[:-2])
    out[0] = (v[1] - v[0]) / (t[1] - t[0])
    out[-1] = (v[-1] - v[-2]) / (t[-1] - t[-2])
    return out


def dissipation_check(series, lam=0.0, gamma=0.0, tol=0.0):
    """Test Vdot <= -lam V + gamma ||Delta||^2 sample by sample.

    Residuals are Vdot + lam V - gamma ||Delta||^2; a sample violates the
    inequality when its residual exceeds tol. With lam = gamma = 0 this
    reduces to a plain monotone-decrease check.
    """
    t = np.asarray(series.t, dtype=float)
    v = np.asarray(series.V, dtype=float)
    if t.size < MIN_SAMPLES:
        raise InsufficientSamples(f"need at least {MIN_SAMPLES} samples")
    vdot = central_difference(t, v)
    if series.delta_norm is None:
        forcing = 0.0
    else:
        forcing = gamma * np.asarray(series.delta_norm, dtype=float) ** 2
    residuals = vdot + lam * v - forcing
    return DissipationResult(
        vdot=vdot,
        residuals=residuals,
        violation_fraction=float(np.mean(residuals > tol)),
    )


def decay_rate_fit(series, t_min=FIT_TRANSIENT, floor=V_FLOOR):
    """Least-squares slope of -ln V over t >= t_min with V above the floor."""
    t = np.asarray(series.t, dtype=float)
    v = np.asarray(series.V, dtype=float)
    mask = (t >= t_min) & (v > floor)
    if mask.sum() < 2:
        raise FitFailed("fewer than 2 usable samples above the floor")
    ts, vs = t[mask], v[mask]
    if vs[-1] >= vs[0]:
        raise FitFailed("V does not decay over the fit window")
    y = -np.log(vs)
    slope, intercept = np.polyfit(ts, y, 1)
    if slope <= 0.0:
        raise FitFailed(f"nonpositive decay rate {slope:.3e}")
    resid = y - (slope * ts + intercept)
    total = y - y.mean()
    denom = float(total @ total)
    r_squared = 1.0 if denom == 0.0 else 1.0 - float(resid @ resid) / denom
    return DecayFit(rate=float(slope), intercept=float(intercept),
                    r_squared=r_squared, n_samples=int(mask.sum()))


def _required_gamma(series, lam):
    """Per-sample smallest gamma making the inequality hold at rate lam."""
    vdot = central_difference(series.t, series.V)
    v = np.asarray(series.V, dtype=float)
    d2 = np.asarray(series.delta_norm, dtype=float) ** 2
    numerator = vdot + lam * v
    return np.where(numerator <= 0.0, 0.0,
                    numerator / np.maximum(d2, 1e-300))


def estimate_lambda_gamma(nominal, perturbed, violation_tol=VIOLATION_TOL,
                          t_min=FIT_TRANSIENT, floor=V_FLOOR):
    """Fit ISS constants from one nominal and >= 1 perturbed traces.

    lambda_hat comes from the nominal decay; gamma_hat is the smallest
    gain certifying the dissipation inequality at rate lambda_hat/2 on
    every perturbed trace, up to the violation tolerance (a quantile over
    per-sample requirements). The ultimate-bound slope pairs gamma_hat
    with the certified rate, not the full nominal rate.
    """
    if not perturbed:
        raise InsufficientSamples("need at least one perturbed trace")
    fit = decay_rate_fit(nominal, t_min=t_min, floor=floor)
    lam_half = 0.5 * fit.rate

    gamma_hat = 0.0
    for series in perturbed:
        if series.delta_norm is None:
            raise InsufficientSamples("perturbed trace lacks disturbance data")
        required = _required_gamma(series, lam_half)
        gamma_hat = max(gamma_hat, float(
            np.quantile(required, 1.0 - violation_tol, method="higher")))
    # the sample sitting exactly at the quantile must not flip sign when
    # gamma * |delta|^2 is re-rounded in a later residual evaluation
    gamma_hat *= 1.0 + 1e-12

    ratios = []
    for series in (nominal, *perturbed):
        if series.norm_e is None:
            continue
        e2 = np.asarray(series.norm_e, dtype=float) ** 2
        v = np.asarray(series.V, dtype=float)
        usable = e2 > 1e-18
        if usable.any():
            ratios.append(v[usable] / e2[usable])
    if not ratios:
        raise InsufficientSamples("no usable samples for quadratic bounds")
    pooled = np.concatenate(ratios)
    m1_hat = float(pooled.min())
    m2_hat = float(pooled.max())
    if m1_hat <= 0.0:
        raise FitFailed("monitored function not positive on the traces")

    return ISSEstimate(
        lambda_hat=fit.rate,
        gamma_hat=gamma_hat,
        m1_hat=m1_hat,
        m2_hat=m2_hat,
        c_hat=ultimate_bound(gamma_hat, m1_hat, lam_half),
        certified_rate=lam_half,
    )


def ultimate_bound(gamma, m1, lam):
    """Tail amplitude slope sqrt(gamma / (m1 lam)); zero gain gives zero."""
    if m1 <= 0.0 or lam <= 0.0 or gamma < 0.0:
        raise NonPositiveInput("require gamma >= 0, m1 > 0, lam > 0")
    return float(np.sqrt(gamma / (m1 * lam)))


def tail_metric(t, values, fraction=0.25):
    """Supremum of `values` over the trailing `fraction` of the time span."""
    t = np.asarray(t, dtype=float)
    values = np.asarray(values, dtype=float)
    if t.size == 0:
        raise InsufficientSamples("empty trace")
    if not (0.0 < fraction <= 1.0):
        raise ParamOutOfRange("fraction must lie in (0, 1]")
    start = t[-1] - fraction * (t[-1] - t[0])
    window = t >= start
    return float(values[window].max())


def report_lines(entries):
    """Render a mapping as deterministic key=value report lines."""
    lines = []
    for key, value in entries.items():
        if isinstance(value, float):
            lines.append(f"{key}={value:.11e}")
        else:
            lines.append(f"{key}={value}")
    return lines
