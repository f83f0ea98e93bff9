"""Synthetic tag generation against exact click-level analytics."""
import json
import math

import numpy as np
import pytest

from sqcorr import (
    HyperParams,
    InvalidParameterError,
    ModeParams,
    MultimodeState,
    OpticsConfig,
    PairSourceConfig,
    broadband_moments,
    click_expectations,
    expand_hyperparams,
    generate_timetags,
    load_tags,
    mean_photon,
    optics_chain,
    pair_source_click_expectations,
    sample_pulse_counts,
    state_photon_pmf,
)
from sqcorr.fock import thermal_pmf
from sqcorr.simulate import _BLOCK_PULSES, _suppress_dead_time


def test_state_pmf_single_thermal_is_geometric():
    p = state_photon_pmf(MultimodeState((ModeParams(n_th=0.4),)))
    np.testing.assert_allclose(p, thermal_pmf(0.4, p.size), rtol=1e-10, atol=1e-16)


def test_state_pmf_coherent_modes_compose_poisson():
    state = MultimodeState((ModeParams(alpha=0.6), ModeParams(alpha=0.8)))
    p = state_photon_pmf(state)
    lam = 0.6**2 + 0.8**2
    n = np.arange(p.size)
    want = np.exp(-lam) * lam**n / [math.factorial(int(k)) for k in n]
    # per-mode tails are trimmed at 1e-14 total mass, so the far tail of the
    # convolution is only accurate to that budget
    np.testing.assert_allclose(p, want, rtol=2e-4, atol=1e-12)
    np.testing.assert_allclose(p[:10], want[:10], rtol=1e-9)


def test_state_pmf_moments_match_broadband(h4):
    small = HyperParams(h4.B, h4.mu, h4.alpha, h4.n_th, d=10)
    state = expand_hyperparams(small)
    p = state_photon_pmf(state)
    n = np.arange(p.size, dtype=float)
    s1, g2, _ = broadband_moments(state)
    assert float(np.dot(p, n)) == pytest.approx(s1, rel=1e-9)
    assert float(np.dot(p, n * (n - 1))) == pytest.approx(g2 * s1 * s1, rel=1e-8)


def test_sample_pulse_counts_statistics(rng):
    state = MultimodeState((ModeParams(n_th=0.5),))
    n = sample_pulse_counts(state, 200_000, rng)
    sigma_mean = math.sqrt(0.5 * 1.5 / n.size)
    assert n.mean() == pytest.approx(0.5, abs=5 * sigma_mean)
    assert n.min() >= 0


def test_sample_rejects_unknown_source(rng):
    with pytest.raises(InvalidParameterError):
        sample_pulse_counts(object(), 10, rng)


def test_optics_chain_lossless_single_arm(rng):
    cfg = OpticsConfig(eta=1.0, n_pulses=6, splitter=(1.0,), jitter_sigma_ps=0.0)
    counts = np.array([1, 0, 2, 0, 0, 3])
    clicks, times = optics_chain(counts, cfg, rng)
    np.testing.assert_array_equal(clicks[:, 0], counts > 0)
    want = np.round(np.flatnonzero(counts) * cfg.period_ps).astype(np.int64)
    np.testing.assert_array_equal(times[0], want)


def test_optics_chain_single_photon_clicks_one_arm(rng):
    cfg = OpticsConfig(eta=1.0, n_pulses=5000, jitter_sigma_ps=0.0)
    clicks, _ = optics_chain(np.ones(5000, dtype=np.int64), cfg, rng)
    np.testing.assert_array_equal(clicks.sum(axis=1), 1)


def test_optics_chain_splitter_ratios(rng):
    cfg = OpticsConfig(eta=1.0, n_pulses=20_000, splitter=(0.5, 0.3, 0.2),
                       jitter_sigma_ps=0.0)
    counts = rng.poisson(5.0, 20_000).astype(np.int64)
    total = counts.sum()
    kept = rng.binomial(counts, cfg.eta)
    del kept
    clicks, times = optics_chain(counts, cfg, np.random.default_rng(5))
    arm_counts = np.array([t.size for t in times], dtype=float)
    # click counts only bound the split loosely; compare against binary rates
    pmf = np.bincount(counts) / counts.size
    want = [e * counts.size for e in
            click_expectations(pmf, [q for q in cfg.splitter])["singles"]]
    for got, exp in zip(arm_counts, want):
        assert got == pytest.approx(exp, abs=5 * math.sqrt(exp))
    assert total > 0


def test_optics_chain_start_pulse_offset(rng):
    cfg = OpticsConfig(eta=1.0, n_pulses=3, splitter=(1.0,), jitter_sigma_ps=0.0)
    counts = np.ones(3, dtype=np.int64)
    _, t0 = optics_chain(counts, cfg, np.random.default_rng(1))
    _, t7 = optics_chain(counts, cfg, np.random.default_rng(1), start_pulse=7)
    want = np.round((7 + np.arange(3)) * cfg.period_ps).astype(np.int64)
    np.testing.assert_array_equal(t7[0], want)
    assert t7[0][0] > t0[0][-1]


def test_dead_time_suppression():
    t = np.array([0, 50, 200, 260, 400], dtype=np.int64)
    np.testing.assert_array_equal(_suppress_dead_time(t, 100.0), [0, 200, 400])
    np.testing.assert_array_equal(_suppress_dead_time(t, 0.0), t)


def test_generate_deterministic_bytes(tmp_path):
    cfg = OpticsConfig(eta=0.8, n_pulses=50_000)
    state = MultimodeState((ModeParams(n_th=0.3),))
    a, b, c = tmp_path / "a.bin", tmp_path / "b.bin", tmp_path / "c.bin"
    generate_timetags(state, cfg, 42, a)
    generate_timetags(state, cfg, 42, b)
    generate_timetags(state, cfg, 43, c)
    assert a.read_bytes() == b.read_bytes()
    assert a.read_bytes() != c.read_bytes()


def test_generate_spans_block_boundary(tmp_path):
    n_pulses = _BLOCK_PULSES + 1234
    cfg = OpticsConfig(eta=0.5, n_pulses=n_pulses, splitter=(1.0,),
                       jitter_sigma_ps=0.0)
    state = MultimodeState((ModeParams(n_th=0.05),))
    path = tmp_path / "t.bin"
    sidecar = generate_timetags(state, cfg, 7, path, sidecar_path=tmp_path / "t.json")
    t = load_tags(path).channel(0)
    assert t[-1] > _BLOCK_PULSES * cfg.period_ps  # clicks beyond the first block
    assert t[-1] <= round((n_pulses - 1) * cfg.period_ps)
    assert np.all(np.diff(t) > 0)
    on_disk = json.loads((tmp_path / "t.json").read_text())
    assert on_disk == json.loads(json.dumps(sidecar))


def test_click_rates_match_analytics(tmp_path):
    cfg = OpticsConfig(eta=0.6, n_pulses=300_000, jitter_sigma_ps=0.0)
    state = MultimodeState((ModeParams(n_th=0.2),))
    sidecar = generate_timetags(state, cfg, 3, tmp_path / "t.bin")
    pmf = state_photon_pmf(state)
    singles = click_expectations(pmf, [0.6 * 0.5, 0.6 * 0.5])["singles"]
    for rate, p in zip(sidecar["clicks_per_pulse_per_channel"], singles):
        sigma = math.sqrt(p * (1 - p) / cfg.n_pulses)
        assert rate == pytest.approx(p, abs=5 * sigma)


def test_click_expectations_poisson_closed_form():
    """Coherent light: clicks on disjoint arms are exactly independent."""
    lam = 0.8
    n = np.arange(60)
    pmf = np.exp(-lam) * lam**n / [math.factorial(int(k)) for k in n]
    exp = click_expectations(pmf, [0.2, 0.3, 0.1])
    for s, q in zip(exp["singles"], (0.2, 0.3, 0.1)):
        assert s == pytest.approx(1.0 - math.exp(-lam * q), rel=1e-10)
    assert exp["g2_click"] == pytest.approx(1.0, rel=1e-10)
    assert exp["g3_click"] == pytest.approx(1.0, rel=1e-10)


def test_pair_source_same_n_in_both_beams(tmp_path):
    cfg = OpticsConfig(eta=1.0, n_pulses=20_000, splitter=(1.0,),
                       jitter_sigma_ps=0.0)
    src = PairSourceConfig(n_bar=0.8)
    generate_timetags(src, cfg, 5, tmp_path / "t.bin")
    tags = load_tags(tmp_path / "t.bin")
    np.testing.assert_array_equal(tags.channel(0), tags.channel(1))


def test_pair_source_click_reference():
    ref = pair_source_click_expectations(
        PairSourceConfig(n_bar=1.0),
        OpticsConfig(eta=0.05, n_pulses=1),
    )
    assert ref["g2_auto"] < 2.0 < ref["g2_cross"] < 3.0
    assert ref["csi_r"] == pytest.approx(2.2153, abs=2e-3)


def test_pair_source_mc_pair_rates(tmp_path):
    optics = OpticsConfig(eta=0.2, n_pulses=200_000, jitter_sigma_ps=0.0)
    src = PairSourceConfig(n_bar=1.0)
    generate_timetags(src, optics, 9, tmp_path / "t.bin")
    tags = load_tags(tmp_path / "t.bin")
    ref = pair_source_click_expectations(src, optics)
    n = optics.n_pulses
    auto = np.intersect1d(tags.channel(0), tags.channel(1)).size
    cross = np.intersect1d(tags.channel(0), tags.channel(2)).size
    for got, p in ((auto, ref["pair_prob_auto"]), (cross, ref["pair_prob_cross"])):
        assert got == pytest.approx(n * p, abs=5 * math.sqrt(n * p * (1 - p)))


def test_mean_photon_consistent_with_pmf(h4):
    state = expand_hyperparams(HyperParams(h4.B, h4.mu, h4.alpha, h4.n_th, d=6))
    p = state_photon_pmf(state)
    assert float(np.dot(p, np.arange(p.size))) == pytest.approx(
        mean_photon(state), rel=1e-9
    )


@pytest.mark.parametrize(
    "kwargs",
    [
        dict(eta=0.0, n_pulses=1),
        dict(eta=1.2, n_pulses=1),
        dict(eta=0.5, n_pulses=-1),
        dict(eta=0.5, n_pulses=1, splitter=(0.7, 0.7)),
        dict(eta=0.5, n_pulses=1, splitter=()),
        dict(eta=0.5, n_pulses=1, jitter_sigma_ps=-1.0),
        dict(eta=0.5, n_pulses=1, rep_rate_hz=0.0),
    ],
)
def test_optics_validation(kwargs):
    with pytest.raises(InvalidParameterError):
        OpticsConfig(**kwargs).validate()


@pytest.mark.parametrize("kwargs", [dict(n_bar=0.0), dict(n_bar=1.0, n_beams=1)])
def test_pair_source_validation(kwargs):
    with pytest.raises(InvalidParameterError):
        PairSourceConfig(**kwargs).validate()
