import math

import numpy as np
import pytest
from scipy import stats

from stlfalsify.constraints import InfeasibleError, constraints_for
from stlfalsify.samplers import (
    Categorical,
    DisturbanceModel,
    GaussianProcess,
    IndependentNormal,
    IndependentUniform,
    log_likelihood,
    sample_trace,
    sample_traces,
    se_kernel,
    truncated_mvn_sample,
    truncated_normal,
)
from stlfalsify.stl import CategoricalChannel, ContinuousChannel, parse

DIST = CategoricalChannel(
    name="disturbance",
    symbols=("none", "d_med", "d_maj", "a_med", "a_maj", "S", "L"),
)
LT_PROBS = {
    "none": 0.976, "d_med": 1e-2, "d_maj": 1e-3,
    "a_med": 1e-2, "a_maj": 1e-3, "S": 1e-3, "L": 1e-3,
}
ACC = ContinuousChannel(name="a_y", lo=-2.0, hi=2.0, units="m/s^2")
NOISE = ContinuousChannel(name="n_y", lo=-1.0, hi=1.0, units="m")


def rng(seed=0):
    return np.random.default_rng(seed)


# ---------------------------------------------------------------------------
# one-dimensional truncated normal


def test_truncated_normal_half_line_mean():
    draws = truncated_normal(0.0, 1.0, 0.0, np.inf, rng(), size=40000)
    assert draws.min() >= 0.0
    assert abs(draws.mean() - math.sqrt(2.0 / math.pi)) < 0.02


def test_truncated_normal_matches_rejection_sampler():
    lo, hi = -0.5, 1.25
    draws = truncated_normal(0.3, 0.8, lo, hi, rng(1), size=8000)
    r = rng(2)
    ref = []
    while len(ref) < 8000:
        z = r.normal(0.3, 0.8, size=8000)
        ref.extend(z[(z >= lo) & (z <= hi)].tolist())
    ref = np.array(ref[:8000])
    ks = stats.ks_2samp(draws, ref).statistic
    assert ks < 0.05
    assert draws.min() >= lo and draws.max() <= hi


def test_truncated_normal_far_right_tail_is_finite_and_in_range():
    draws = truncated_normal(0.0, 1.0, 9.0, 10.0, rng(), size=1000)
    assert np.isfinite(draws).all()
    assert (draws >= 9.0).all() and (draws <= 10.0).all()


def test_truncated_normal_degenerate_interval():
    assert truncated_normal(0.0, 1.0, 0.7, 0.7, rng()) == pytest.approx(0.7)


def test_truncated_normal_scalar_and_vector_bounds():
    lo = np.array([0.0, 1.0, -1.0])
    hi = np.array([0.5, 2.0, -0.25])
    draws = truncated_normal(0.0, 1.0, lo, hi, rng())
    assert draws.shape == (3,)
    assert ((draws >= lo) & (draws <= hi)).all()


# ---------------------------------------------------------------------------
# truncated multivariate normal (Gibbs)


def test_truncated_mvn_matches_rejection_moments():
    cov = np.array([[1.0, 0.6], [0.6, 1.0]])
    lo = np.array([0.0, -np.inf])
    hi = np.array([np.inf, 0.5])
    g = truncated_mvn_sample(np.zeros(2), cov, lo, hi, rng(0), size=6000)
    r = rng(1)
    kept = []
    while len(kept) < 6000:
        z = r.multivariate_normal(np.zeros(2), cov, size=8000)
        sel = (z[:, 0] >= 0.0) & (z[:, 1] <= 0.5)
        kept.extend(z[sel].tolist())
    ref = np.array(kept[:6000])
    assert np.allclose(g.mean(0), ref.mean(0), atol=0.05)
    assert np.allclose(np.cov(g.T), np.cov(ref.T), atol=0.06)
    assert (g[:, 0] >= 0.0).all() and (g[:, 1] <= 0.5).all()


def test_truncated_mvn_holds_pinned_coordinates():
    cov = np.array([[1.0, 0.5], [0.5, 1.0]])
    lo = np.array([0.25, -1.0])
    hi = np.array([0.25, 1.0])
    g = truncated_mvn_sample(np.zeros(2), cov, lo, hi, rng(), size=50)
    assert (g[:, 0] == 0.25).all()
    assert ((g[:, 1] >= -1.0) & (g[:, 1] <= 1.0)).all()


# ---------------------------------------------------------------------------
# per-channel sampling and likelihoods


def cat_model():
    return DisturbanceModel(channels=(DIST,), models={"disturbance": Categorical(LT_PROBS)})


def test_categorical_unconstrained_frequencies():
    model = cat_model()
    traces = sample_traces(model, 200, 0.18, rng=rng(3), size=50)
    symbols = np.concatenate([t.values["disturbance"] for t in traces])
    frac_none = (symbols == "none").mean()
    assert abs(frac_none - 0.976) < 0.01


def test_categorical_constrained_renormalizes():
    model = cat_model()
    f = parse("G_[0,5](!(none))", (DIST,))
    cs = constraints_for(f, (DIST,), 6, rng(4))
    counts = {}
    for tr in sample_traces(model, 6, 0.18, cs, rng=rng(5), size=400):
        for s in tr.values["disturbance"]:
            counts[s] = counts.get(s, 0) + 1
    assert "none" not in counts
    # d_med and a_med carry 1e-2 against 1e-3 for the rest of the allowed set
    assert counts["d_med"] > counts["d_maj"]
    ratio = counts["d_med"] / counts["S"]
    assert 5 < ratio < 20  # true ratio is 10


def test_categorical_loglik_exact():
    model = cat_model()
    tr = sample_trace(model, 3, 0.18, rng=rng())
    tr.values["disturbance"][:] = ["none", "none", "none"]
    assert log_likelihood(model, tr) == pytest.approx(3 * math.log(0.976), abs=1e-12)


def test_uniform_support_and_equality_pin():
    ch = ContinuousChannel(name="u", lo=0.0, hi=1.0, units="", hard_bounds=True)
    model = DisturbanceModel(channels=(ch,), models={"u": IndependentUniform(0.0, 1.0)})
    f = parse("G_[3,3](u = 0.5)", (ch,))
    cs = constraints_for(f, (ch,), 5, rng())
    tr = sample_trace(model, 5, 0.1, cs, rng=rng())
    assert tr.values["u"][3] == 0.5
    assert ((tr.values["u"] >= 0.0) & (tr.values["u"] <= 1.0)).all()
    # out-of-support likelihoods are -inf
    tr.values["u"][0] = 1.5
    assert log_likelihood(model, tr) == -math.inf


def test_uniform_sampling_restricted_to_intersection():
    ch = ContinuousChannel(name="u", lo=0.0, hi=1.0, units="", hard_bounds=True)
    model = DisturbanceModel(channels=(ch,), models={"u": IndependentUniform(0.0, 1.0)})
    f = parse("G_[0,0](u >= 0.9)", (ch,))
    cs = constraints_for(f, (ch,), 2, rng())
    for tr in sample_traces(model, 2, 0.1, cs, rng=rng(), size=20):
        assert 0.9 <= tr.values["u"][0] <= 1.0


def test_normal_channel_constrained_sampling_and_loglik():
    model = DisturbanceModel(channels=(NOISE,), models={"n_y": IndependentNormal(0.0, 0.04)})
    f = parse("G_[0,9](n_y >= 0.1)", (NOISE,))
    cs = constraints_for(f, (NOISE,), 10, rng(6))
    tr = sample_trace(model, 10, 0.2, cs, rng=rng(7))
    assert (tr.values["n_y"] >= 0.1).all()
    want = stats.norm(0.0, 0.2).logpdf(tr.values["n_y"]).sum()
    assert log_likelihood(model, tr) == pytest.approx(want, rel=1e-9)


# ---------------------------------------------------------------------------
# Gaussian process channel


def gp_model(m_ch=ACC, variance=1.0, lengthscale=0.4):
    return DisturbanceModel(
        channels=(m_ch,), models={m_ch.name: GaussianProcess(variance, lengthscale)}
    )


def test_se_kernel_values():
    K = se_kernel(np.array([0.0, 0.2]), 2.0, 0.4)
    assert K[0, 0] == pytest.approx(2.0)
    assert K[0, 1] == pytest.approx(2.0 * math.exp(-0.04 / (2 * 0.16)))


def test_gp_unconstrained_covariance():
    model = gp_model()
    m, dt = 5, 0.2
    draws = np.stack(
        [t.values["a_y"] for t in sample_traces(model, m, dt, rng=rng(8), size=4000)]
    )
    emp = np.cov(draws.T)
    want = se_kernel(np.arange(m) * dt, 1.0, 0.4)
    assert np.abs(emp - want).max() < 0.12


def test_gp_equality_steps_reproduced_exactly():
    model = gp_model()
    f = parse("(G_[2,2](a_y = 0.75) & G_[5,5](a_y = -0.25))", (ACC,))
    cs = constraints_for(f, (ACC,), 8, rng(9))
    for tr in sample_traces(model, 8, 0.2, cs, rng=rng(10), size=20):
        assert tr.values["a_y"][2] == 0.75
        assert tr.values["a_y"][5] == -0.25


def test_gp_conditional_moments_match_closed_form():
    # pin step 0, watch step 1: mean and variance follow the usual
    # bivariate-normal conditioning formulas
    model = gp_model()
    f = parse("G_[0,0](a_y = 1.0)", (ACC,))
    cs = constraints_for(f, (ACC,), 2, rng(11))
    vals = np.array(
        [t.values["a_y"][1] for t in sample_traces(model, 2, 0.2, cs, rng=rng(12), size=6000)]
    )
    K = se_kernel(np.array([0.0, 0.2]), 1.0, 0.4)
    mu = K[0, 1] / K[0, 0] * 1.0
    var = K[1, 1] - K[0, 1] ** 2 / K[0, 0]
    assert abs(vals.mean() - mu) < 0.05
    assert abs(vals.var() - var) < 0.05


def test_gp_box_constraints_are_respected():
    model = gp_model()
    f = parse("(G_[1,3](a_y >= 0.2) & G_[5,5](a_y = 0.0))", (ACC,))
    cs = constraints_for(f, (ACC,), 7, rng(13))
    for tr in sample_traces(model, 7, 0.2, cs, rng=rng(14), size=10):
        assert (tr.values["a_y"][1:4] >= 0.2).all()
        assert tr.values["a_y"][5] == 0.0


def test_gp_loglik_matches_scipy():
    model = gp_model()
    tr = sample_trace(model, 6, 0.2, rng=rng(15))
    K = se_kernel(np.arange(6) * 0.2, 1.0, 0.4) + 1e-8 * np.eye(6)
    want = stats.multivariate_normal(np.zeros(6), K).logpdf(tr.values["a_y"])
    assert log_likelihood(model, tr) == pytest.approx(want, rel=1e-6)


# ---------------------------------------------------------------------------
# batches, determinism, validation


def test_sample_traces_batch_size_and_determinism():
    model = cat_model()
    a = sample_traces(model, 5, 0.18, rng=rng(16), size=4)
    b = sample_traces(model, 5, 0.18, rng=rng(16), size=4)
    assert len(a) == 4
    for x, y in zip(a, b):
        assert x.values["disturbance"].tolist() == y.values["disturbance"].tolist()


def test_model_validation():
    with pytest.raises(ValueError):
        Categorical({"a": 0.5, "b": 0.4})
    with pytest.raises(ValueError):
        IndependentUniform(1.0, 1.0)
    with pytest.raises(ValueError):
        GaussianProcess(0.0, 0.4)
    with pytest.raises(ValueError):
        DisturbanceModel(channels=(DIST,), models={})
    with pytest.raises(ValueError):
        DisturbanceModel(channels=(DIST,), models={"disturbance": IndependentNormal(0, 1)})
