"""Disturbance models and constrained trace sampling.

A disturbance model assigns each channel an independent marginal process:
a per-step categorical distribution, per-step independent uniforms or
normals, or a zero-mean Gaussian process with a squared-exponential kernel
over step times.  Channels are independent of one another, so trace
log-likelihoods add across channels.

Constrained sampling respects a ConstraintSet exactly.  Categorical steps
renormalize over the allowed set; uniform steps shrink their support;
normal steps become univariate truncated normals.  GP channels split the
constrained steps into equalities (treated as exact observations, standard
posterior conditioning) and interval constraints (handled by a Gibbs chain
over the posterior restricted to those steps); the remaining steps are then
drawn from the conditional posterior.  The Gibbs chain is shared across a
batch, which is why ``sample_traces`` takes a ``size``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import ndtr, ndtri

from .constraints import ConstraintSet, InfeasibleError
from .stl import CategoricalChannel, ChannelSpec, SignalTrace

__all__ = [
    "Categorical",
    "IndependentUniform",
    "IndependentNormal",
    "GaussianProcess",
    "DisturbanceModel",
    "se_kernel",
    "truncated_normal",
    "truncated_mvn_sample",
    "sample_trace",
    "sample_traces",
    "log_likelihood",
]

_LOG_2PI = math.log(2.0 * math.pi)
GP_JITTER = 1e-8


@dataclass(frozen=True)
class Categorical:
    """Per-step distribution over a categorical channel's symbols."""

    probs: tuple[tuple[str, float], ...]

    def __init__(self, probs):
        items = tuple(sorted(dict(probs).items()))
        object.__setattr__(self, "probs", items)
        total = sum(p for _, p in items)
        if abs(total - 1.0) > 1e-9:
            raise ValueError(f"probabilities sum to {total}, not 1")
        if any(p < 0 for _, p in items):
            raise ValueError("negative probability")

    def prob(self, symbol: str) -> float:
        return dict(self.probs).get(symbol, 0.0)


@dataclass(frozen=True)
class IndependentUniform:
    lo: float
    hi: float

    def __post_init__(self):
        if not self.lo < self.hi:
            raise ValueError("need lo < hi")


@dataclass(frozen=True)
class IndependentNormal:
    mean: float
    variance: float

    def __post_init__(self):
        if self.variance <= 0:
            raise ValueError("variance must be positive")

    @property
    def std(self) -> float:
        return math.sqrt(self.variance)


@dataclass(frozen=True)
class GaussianProcess:
    """Zero-mean GP with squared-exponential kernel over step times."""

    variance: float
    lengthscale: float  # seconds

    def __post_init__(self):
        if self.variance <= 0 or self.lengthscale <= 0:
            raise ValueError("variance and lengthscale must be positive")


ChannelModel = Categorical | IndependentUniform | IndependentNormal | GaussianProcess


@dataclass(frozen=True)
class DisturbanceModel:
    """One marginal model per channel, independent across channels."""

    channels: tuple[ChannelSpec, ...]
    models: dict[str, ChannelModel] = field(repr=False)

    def __post_init__(self):
        object.__setattr__(self, "channels", tuple(self.channels))
        for ch in self.channels:
            if ch.name not in self.models:
                raise ValueError(f"no model for channel {ch.name!r}")
            m = self.models[ch.name]
            if isinstance(ch, CategoricalChannel) != isinstance(m, Categorical):
                raise ValueError(f"model kind mismatch on channel {ch.name!r}")
            if isinstance(m, Categorical):
                extra = {s for s, p in m.probs if p > 0} - set(ch.symbols)
                if extra:
                    raise ValueError(f"model symbols {extra} not on channel {ch.name!r}")


# ---------------------------------------------------------------------------
# Kernels


def se_kernel(times: np.ndarray, variance: float, lengthscale: float) -> np.ndarray:
    t = np.asarray(times, dtype=float)
    d = t[:, None] - t[None, :]
    return variance * np.exp(-(d * d) / (2.0 * lengthscale**2))


_kernel_cache: dict[tuple, tuple[np.ndarray, np.ndarray]] = {}


def _kernel_and_chol(variance, lengthscale, m, dt):
    """Cached (K, cholesky(K + jitter)) for a step grid.  Do not mutate."""
    key = (float(variance), float(lengthscale), int(m), float(dt))
    hit = _kernel_cache.get(key)
    if hit is None:
        K = se_kernel(np.arange(m) * dt, variance, lengthscale)
        L = np.linalg.cholesky(K + GP_JITTER * variance * np.eye(m))
        hit = (K, L)
        _kernel_cache[key] = hit
    return hit


# ---------------------------------------------------------------------------
# Truncated normals


def truncated_normal(mean, std, lo, hi, rng: np.random.Generator, size=None):
    """Draw from N(mean, std²) conditioned on [lo, hi], element-wise.

    Inverse-CDF construction.  Right tails are reflected into left tails so
    the CDF differences keep precision; if the interval's mass underflows
    entirely the draw collapses to the nearest bound.
    """
    mean = np.asarray(mean, dtype=float)
    std = np.asarray(std, dtype=float)
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    a = (lo - mean) / std
    b = (hi - mean) / std
    shape = np.broadcast_shapes(a.shape, b.shape, () if size is None else tuple(np.atleast_1d(size)))
    if size is not None:
        a = np.broadcast_to(a, shape).copy()
        b = np.broadcast_to(b, shape).copy()
    flip = a > 0  # entire interval right of the mean: work with the mirror image
    a_w = np.where(flip, -b, a)
    b_w = np.where(flip, -a, b)
    Fa = ndtr(a_w)
    Fb = ndtr(b_w)
    u = rng.uniform(size=a_w.shape)
    mass = Fb - Fa
    with np.errstate(invalid="ignore"):
        z = ndtri(Fa + u * mass)
    # Degenerate mass: clamp to the nearer endpoint of the working interval.
    bad = ~np.isfinite(z) | (mass <= 0)
    if np.any(bad):
        z = np.where(bad, np.where(np.isfinite(a_w), a_w, b_w), z)
    z = np.clip(z, a_w, b_w)
    z = np.where(flip, -z, z)
    # clamp in value space too: un-standardising can slip a ulp outside the
    # interval, which matters when lo == hi encodes an equality pin
    out = np.clip(mean + std * z, lo, hi)
    return float(out) if out.ndim == 0 else out


def _tn_scalar(mean: float, std: float, lo: float, hi: float, rng) -> float:
    """Scalar twin of truncated_normal for the Gibbs inner loop, where the
    array version's broadcasting overhead dominates runtime."""
    a = (lo - mean) / std
    b = (hi - mean) / std
    flip = a > 0.0
    if flip:
        a, b = -b, -a
    Fa = float(ndtr(a))
    mass = float(ndtr(b)) - Fa
    u = rng.random()
    if mass <= 0.0:
        z = a if math.isfinite(a) else b
    else:
        z = float(ndtri(Fa + u * mass))
        if not math.isfinite(z):
            z = a if math.isfinite(a) else b
    z = min(max(z, a), b)
    if flip:
        z = -z
    return min(max(mean + std * z, lo), hi)


def truncated_mvn_sample(
    mean: np.ndarray,
    cov: np.ndarray,
    lo: np.ndarray,
    hi: np.ndarray,
    rng: np.random.Generator,
    size: int = 1,
    burn_in: int = 200,
    thin: int = 5,
) -> np.ndarray:
    """Gibbs sampler for N(mean, cov) restricted to the box [lo, hi].

    Returns an array of shape (size, d).  Coordinates with lo == hi are held
    fixed.  One chain serves the whole batch: after burn-in, successive
    returned rows are ``thin`` sweeps apart.
    """
    mean = np.asarray(mean, dtype=float)
    cov = np.asarray(cov, dtype=float)
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    d = mean.shape[0]
    if cov.shape != (d, d) or lo.shape != (d,) or hi.shape != (d,):
        raise ValueError("dimension mismatch")
    if np.any(lo > hi):
        raise InfeasibleError("box has lo > hi")

    fixed = lo == hi
    free = ~fixed
    if not np.any(free):
        return np.tile(lo, (size, 1))
    if free.sum() == 1:
        (j,) = np.flatnonzero(free)
        out = np.tile(lo, (size, 1))
        if np.any(fixed):
            # condition the single free coordinate on the fixed ones
            cff = cov[np.ix_([j], np.flatnonzero(fixed))]
            cxx = cov[np.ix_(np.flatnonzero(fixed), np.flatnonzero(fixed))]
            delta = lo[fixed] - mean[fixed]
            solve = np.linalg.solve(cxx + GP_JITTER * np.eye(cxx.shape[0]), np.column_stack([delta, cff[0]]))
            mu = mean[j] + float(cff[0] @ solve[:, 0])
            var = cov[j, j] - float(cff[0] @ solve[:, 1])
        else:
            mu, var = mean[j], cov[j, j]
        out[:, j] = truncated_normal(mu, math.sqrt(max(var, 1e-300)), lo[j], hi[j], rng, size=size)
        return out

    jitter = GP_JITTER * float(np.max(np.diag(cov)))
    prec = np.linalg.inv(cov + jitter * np.eye(d))
    cond_var = 1.0 / np.diag(prec)
    cond_std = np.sqrt(cond_var)

    x = np.clip(mean.copy(), lo, hi)  # feasible start; clip is a no-op on infinite bounds
    free_idx = [int(j) for j in np.flatnonzero(free)]
    delta = x - mean  # maintained in step with x across sweeps
    mean_l = [float(v) for v in mean]
    lo_l = [float(v) for v in lo]
    hi_l = [float(v) for v in hi]
    var_l = [float(v) for v in cond_var]
    std_l = [float(v) for v in cond_std]
    diag_l = [float(prec[j, j]) for j in range(d)]

    def sweep():
        for j in free_idx:
            r = float(prec[j] @ delta) - diag_l[j] * delta[j]
            mu_j = mean_l[j] - var_l[j] * r
            v = _tn_scalar(mu_j, std_l[j], lo_l[j], hi_l[j], rng)
            x[j] = v
            delta[j] = v - mean_l[j]

    for _ in range(burn_in):
        sweep()
    out = np.empty((size, d))
    out[0] = x
    for i in range(1, size):
        for _ in range(thin):
            sweep()
        out[i] = x
    return out


# ---------------------------------------------------------------------------
# Trace sampling


def _bounds_for(cs: ConstraintSet | None, name: str, m: int):
    if cs is None or name not in cs.lower:
        return np.full(m, -np.inf), np.full(m, np.inf)
    return cs.lower[name], cs.upper[name]


def _sample_categorical(ch, model: Categorical, m, cs, rng):
    symbols = list(ch.symbols)
    base = np.array([model.prob(s) for s in symbols])
    allowed = cs.allowed[ch.name] if cs is not None else None
    out = np.empty(m, dtype=object)
    for i in range(m):
        if allowed is None or len(allowed[i]) == len(symbols):
            p = base / base.sum()
        else:
            mask = np.array([s in allowed[i] for s in symbols])
            p = base * mask
            total = p.sum()
            # all allowed symbols can carry zero model mass; fall back to uniform
            p = p / total if total > 0 else mask / mask.sum()
        out[i] = symbols[rng.choice(len(symbols), p=p)]
    return out


def _gp_posterior(K, obs_idx, obs_val):
    """Mean and covariance of the GP at all steps given exact observations."""
    m = K.shape[0]
    if obs_idx.size == 0:
        return np.zeros(m), K.copy()
    if obs_idx.size > m:
        raise ValueError("more observations than steps")
    Koo = K[np.ix_(obs_idx, obs_idx)]
    Kxo = K[:, obs_idx]
    L = np.linalg.cholesky(Koo + GP_JITTER * np.max(np.diag(Koo)) * np.eye(obs_idx.size))
    alpha = np.linalg.solve(L.T, np.linalg.solve(L, obs_val))
    mean = Kxo @ alpha
    V = np.linalg.solve(L, Kxo.T)
    cov = K - V.T @ V
    return mean, cov


def _sample_gp(ch, model: GaussianProcess, m, dt, cs, rng, size):
    K, L_full = _kernel_and_chol(model.variance, model.lengthscale, m, dt)
    lo, hi = _bounds_for(cs, ch.name, m)
    eq = np.isfinite(lo) & (lo == hi)
    box = (np.isfinite(lo) | np.isfinite(hi)) & ~eq
    obs_idx = np.flatnonzero(eq)
    mean, cov = _gp_posterior(K, obs_idx, lo[obs_idx])

    out = np.tile(mean, (size, 1))
    c_idx = np.flatnonzero(box)
    f_idx = np.flatnonzero(~eq & ~box)
    if c_idx.size:
        xc = truncated_mvn_sample(
            mean[c_idx], cov[np.ix_(c_idx, c_idx)], lo[c_idx], hi[c_idx], rng, size=size
        )
        out[:, c_idx] = xc
        if f_idx.size:
            Ccc = cov[np.ix_(c_idx, c_idx)]
            Cfc = cov[np.ix_(f_idx, c_idx)]
            Cff = cov[np.ix_(f_idx, f_idx)]
            jit = GP_JITTER * model.variance
            Lc = np.linalg.cholesky(Ccc + jit * np.eye(c_idx.size))
            W = np.linalg.solve(Lc, Cfc.T)  # (|C|, |F|)
            cond_cov = Cff - W.T @ W
            Lf = np.linalg.cholesky(cond_cov + jit * np.eye(f_idx.size))
            for i in range(size):
                u = np.linalg.solve(Lc.T, np.linalg.solve(Lc, xc[i] - mean[c_idx]))
                mu_f = mean[f_idx] + Cfc @ u
                out[i, f_idx] = mu_f + Lf @ rng.standard_normal(f_idx.size)
    elif f_idx.size:
        if obs_idx.size:
            jit = GP_JITTER * model.variance
            Lf = np.linalg.cholesky(cov[np.ix_(f_idx, f_idx)] + jit * np.eye(f_idx.size))
        else:
            Lf = L_full  # unconstrained: reuse the cached factor
        out[:, f_idx] = mean[f_idx] + rng.standard_normal((size, f_idx.size)) @ Lf.T
    if obs_idx.size:
        out[:, obs_idx] = lo[obs_idx]
    return out


def sample_traces(
    model: DisturbanceModel,
    m: int,
    dt: float,
    constraints: ConstraintSet | None = None,
    *,
    rng: np.random.Generator,
    size: int = 1,
) -> list[SignalTrace]:
    """Draw ``size`` traces, every one satisfying ``constraints`` if given."""
    columns: dict[str, list] = {}
    for ch in model.channels:
        cm = model.models[ch.name]
        if isinstance(cm, Categorical):
            columns[ch.name] = [
                _sample_categorical(ch, cm, m, constraints, rng) for _ in range(size)
            ]
        elif isinstance(cm, IndependentUniform):
            lo, hi = _bounds_for(constraints, ch.name, m)
            lo = np.maximum(lo, cm.lo)
            hi = np.minimum(hi, cm.hi)
            if np.any(lo > hi):
                raise InfeasibleError(
                    f"constraints on {ch.name!r} leave no support in the uniform model"
                )
            columns[ch.name] = [
                np.where(lo == hi, lo, rng.uniform(lo, np.nextafter(hi, np.inf)))
                for _ in range(size)
            ]
        elif isinstance(cm, IndependentNormal):
            lo, hi = _bounds_for(constraints, ch.name, m)
            vals = truncated_normal(
                cm.mean, cm.std, lo[None, :].repeat(size, 0), hi[None, :].repeat(size, 0), rng
            )
            columns[ch.name] = [vals[i] for i in range(size)]
        else:
            block = _sample_gp(ch, cm, m, dt, constraints, rng, size)
            columns[ch.name] = [block[i] for i in range(size)]
    traces = []
    for i in range(size):
        values = {name: col[i] for name, col in columns.items()}
        traces.append(SignalTrace(dt=dt, channels=model.channels, values=values))
    return traces


def sample_trace(
    model: DisturbanceModel,
    m: int,
    dt: float,
    constraints: ConstraintSet | None = None,
    *,
    rng: np.random.Generator,
) -> SignalTrace:
    return sample_traces(model, m, dt, constraints, rng=rng, size=1)[0]


# ---------------------------------------------------------------------------
# Likelihood


def log_likelihood(model: DisturbanceModel, trace: SignalTrace) -> float:
    """Log density of ``trace`` under the unconstrained model.

    Channels are independent, so contributions add.  A value outside a
    uniform channel's support gives -inf rather than an error.
    """
    total = 0.0
    m = trace.m
    for ch in model.channels:
        cm = model.models[ch.name]
        vals = trace.values[ch.name]
        if isinstance(cm, Categorical):
            for s in vals.tolist():
                p = cm.prob(ch.resolve(s))
                if p <= 0.0:
                    return -np.inf
                total += math.log(p)
        elif isinstance(cm, IndependentUniform):
            v = np.asarray(vals, dtype=float)
            if np.any((v < cm.lo) | (v > cm.hi)):
                return -np.inf
            total += -m * math.log(cm.hi - cm.lo)
        elif isinstance(cm, IndependentNormal):
            v = np.asarray(vals, dtype=float)
            z = (v - cm.mean) / cm.std
            total += float(-0.5 * np.sum(z * z) - m * (0.5 * _LOG_2PI + math.log(cm.std)))
        else:
            _, L = _kernel_and_chol(cm.variance, cm.lengthscale, m, trace.dt)
            v = np.asarray(vals, dtype=float)
            w = np.linalg.solve(L, v)
            total += float(
                -0.5 * np.dot(w, w)
                - np.sum(np.log(np.diag(L)))
                - 0.5 * m * _LOG_2PI
            )
    return total
