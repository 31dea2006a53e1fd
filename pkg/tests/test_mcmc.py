import math

import numpy as np
import pytest

from app.core.exceptions import DomainError, ProprietyRefusal, UsageError
from app.schemas.mcmc import Chain, McmcConfig
from app.schemas.params import BlockMaximaSample, ExcessSample, GpParams, NhppData
from app.schemas.prior import PriorFamily, PriorSpec
from app.services.evd_service import gp_quantile_raw, gp_sample
from app.services.mcmc_service import (
    check_propriety,
    diagnostics,
    effective_sample_size,
    initial_state,
    log_target,
    merge_chains,
    metropolis,
    propriety_status,
    return_level,
    sample,
    sample_chains,
    split_rhat,
    summarise_return_level,
)


def _prior(family, **kwargs):
    return PriorSpec(family=family, **kwargs)


def _small_cfg(**kwargs):
    values = dict(iterations=600, burn_in=200, thinning=1, adapt_window=50, target_acceptance=0.234, seed=11)
    values.update(kwargs)
    return McmcConfig(**values)


@pytest.mark.parametrize(
    "family,size,status",
    [
        (PriorFamily.JEFFREYS_GP, 1, "proper"),
        (PriorFamily.MDI_GP_TRUNC, 1, "proper"),
        (PriorFamily.MDI_GP, 50, "improper"),
        (PriorFamily.UNIFORM_GP, 1, "improper"),
        (PriorFamily.UNIFORM_GP, 2, "open"),
        (PriorFamily.UNIFORM_GP, 3, "proper"),
        (PriorFamily.MDI_GEV_TRUNC, 1, "improper"),
        (PriorFamily.MDI_GEV_TRUNC, 2, "proper"),
        (PriorFamily.MDI_GEV, 10, "improper"),
        (PriorFamily.JEFFREYS_GEV, 10, "improper"),
        (PriorFamily.UNIFORM_GEV, 3, "open"),
        (PriorFamily.UNIFORM_GEV, 4, "proper"),
    ],
)
def test_propriety_gate(family, size, status):
    assert propriety_status(_prior(family), size)[0] == status


def test_truncated_jeffreys_gev_gate():
    spec = _prior(PriorFamily.JEFFREYS_GEV_TRUNC, xi_upper=1.0)
    assert propriety_status(spec, 2)[0] == "proper"
    assert propriety_status(spec, 1)[0] == "improper"


def test_refusal_names_the_claim():
    with pytest.raises(ProprietyRefusal) as exc:
        check_propriety(_prior(PriorFamily.MDI_GEV_TRUNC), 1)
    assert "single block maximum" in exc.value.claim
    assert exc.value.exit_code == 3


def test_override_lets_open_pairs_through():
    claim = check_propriety(_prior(PriorFamily.UNIFORM_GP), 2, override=True)
    assert "m = 2" in claim


def test_sample_refuses_single_maximum():
    data = BlockMaximaSample(maxima=[3.0])
    with pytest.raises(ProprietyRefusal):
        sample(data, _prior(PriorFamily.MDI_GEV_TRUNC), _small_cfg())


def test_sample_rejects_prior_of_other_model():
    data = ExcessSample(excesses=[1.0, 2.0, 3.0])
    with pytest.raises(UsageError):
        sample(data, _prior(PriorFamily.MDI_GEV_TRUNC), _small_cfg())


def test_log_target_adds_jacobian():
    data = ExcessSample(excesses=[0.5, 1.0, 2.0])
    spec = _prior(PriorFamily.MDI_GP_TRUNC)
    target = log_target(data, spec)
    theta = np.array([math.log(1.5), 0.2])
    expected = -math.log(1.5) - 0.2 - 1.0
    expected += float(np.sum(-math.log(1.5) - (1.0 + 1.0 / 0.2) * np.log1p(0.2 * data.z / 1.5)))
    expected += math.log(1.5)
    assert target(theta) == pytest.approx(expected, rel=1e-10)
    assert target(np.array([math.log(1.5), -1.5])) == -np.inf
    assert target(np.array([np.nan, 0.1])) == -np.inf


def test_initial_state_is_on_support():
    data = BlockMaximaSample(maxima=[0.0, 1.0, 2.0, 4.0])
    spec = _prior(PriorFamily.MDI_GEV_TRUNC)
    target = log_target(data, spec)
    assert math.isfinite(target(initial_state(data, spec, target)))


def test_gev_start_uses_probability_weighted_moments():
    data = BlockMaximaSample(maxima=[0.0, 1.0, 2.0, 4.0])
    spec = _prior(PriorFamily.MDI_GEV_TRUNC)
    b0 = 7.0 / 4.0
    b1 = (1.0 / 3.0 + 2.0 * 2.0 / 3.0 + 4.0) / 4.0
    sigma = (2.0 * b1 - b0) / math.log(2.0)
    start = initial_state(data, spec)
    assert start[0] == pytest.approx(b0 - 0.5772156649015329 * sigma, rel=1e-12)
    assert start[1] == pytest.approx(math.log(sigma), rel=1e-12)
    assert start[2] == pytest.approx(0.1)


def test_metropolis_standard_normal():
    cfg = McmcConfig(iterations=105000, burn_in=5000, thinning=1, adapt_window=250, target_acceptance=0.234, seed=3)
    draws, log_values, rate, cov, scale = metropolis(
        lambda t: -0.5 * float(t @ t), np.zeros(2), cfg
    )
    assert draws.shape == (100000, 2)
    for col in draws.T:
        se_mean = col.std() / math.sqrt(effective_sample_size(col))
        assert abs(col.mean()) < 3.0 * se_mean
        sq = col ** 2
        se_var = sq.std() / math.sqrt(effective_sample_size(sq))
        assert abs(col.var() - 1.0) < 3.0 * se_var
    assert 0.1 < rate < 0.6
    assert np.all(np.linalg.eigvalsh(cov) > 0.0)
    assert log_values == pytest.approx(-0.5 * np.sum(draws ** 2, axis=1))


def test_thinning_keeps_every_kth_draw():
    cfg = McmcConfig(iterations=1000, burn_in=100, thinning=3, adapt_window=50, seed=5)
    draws, *_ = metropolis(lambda t: -0.5 * float(t @ t), np.zeros(1), cfg)
    assert len(draws) == 300


def test_metropolis_rejects_bad_start():
    with pytest.raises(DomainError):
        metropolis(lambda t: -np.inf, np.zeros(2), _small_cfg())


def test_same_seed_same_chain():
    data = ExcessSample(excesses=[0.3, 0.9, 1.4, 2.2, 5.0])
    spec = _prior(PriorFamily.JEFFREYS_GP)
    a = sample(data, spec, _small_cfg())
    b = sample(data, spec, _small_cfg())
    np.testing.assert_array_equal(a.draws, b.draws)
    assert a.names == ["sigma", "xi"]
    assert np.all(a.column("sigma") > 0.0)


def test_independent_chains_differ():
    data = ExcessSample(excesses=[0.3, 0.9, 1.4, 2.2, 5.0])
    chains = sample_chains(data, _prior(PriorFamily.JEFFREYS_GP), _small_cfg(), chains=2)
    assert len(chains) == 2
    assert not np.array_equal(chains[0].draws, chains[1].draws)
    merged = merge_chains(chains)
    assert len(merged.draws) == len(chains[0].draws) + len(chains[1].draws)
    with pytest.raises(DomainError):
        sample_chains(data, _prior(PriorFamily.JEFFREYS_GP), _small_cfg(), chains=0)


def test_parallel_chains_match_serial_streams():
    data = ExcessSample(excesses=[0.3, 0.9, 1.4, 2.2, 5.0])
    spec = _prior(PriorFamily.JEFFREYS_GP)
    parallel = sample_chains(data, spec, _small_cfg(workers=3), chains=3)
    serial = sample_chains(data, spec, _small_cfg(workers=1), chains=3)
    streams = np.random.SeedSequence(11).spawn(3)
    for a, b, stream in zip(parallel, serial, streams):
        np.testing.assert_array_equal(a.draws, b.draws)
        np.testing.assert_array_equal(a.log_posterior, b.log_posterior)
        alone = sample(data, spec, _small_cfg(), rng=np.random.default_rng(stream))
        np.testing.assert_array_equal(a.draws, alone.draws)


def test_chains_refused_before_any_worker_starts():
    data = BlockMaximaSample(maxima=[3.0])
    with pytest.raises(ProprietyRefusal):
        sample_chains(data, _prior(PriorFamily.MDI_GEV_TRUNC), _small_cfg(), chains=4)


def test_workers_must_be_positive():
    with pytest.raises(ValueError):
        _small_cfg(workers=0)


def test_gp_posterior_recovers_parameters():
    z = np.sort(gp_sample(GpParams(sigma=2.0, xi=0.2), 500, np.random.default_rng(2024)))
    data = ExcessSample(excesses=z.tolist())
    cfg = McmcConfig(iterations=6000, burn_in=2000, thinning=2, adapt_window=200, seed=7)
    chain = sample(data, _prior(PriorFamily.MDI_GP_TRUNC), cfg)
    for name, truth in (("sigma", 2.0), ("xi", 0.2)):
        values = chain.column(name)
        assert abs(values.mean() - truth) < 3.0 * values.std()


def test_nhpp_chain_has_three_parameters():
    data = NhppData(threshold=1.0, exceedances=[1.2, 1.5, 2.1, 2.8, 3.9, 6.0], n_blocks=10)
    chain = sample(data, _prior(PriorFamily.MDI_GEV_TRUNC), _small_cfg())
    assert chain.model == "nhpp"
    assert chain.draws.shape[1] == 3


def _fixed_chain(model, row, threshold=0.0, size=10):
    names = ["sigma", "xi"] if model == "gp" else ["mu", "sigma", "xi"]
    return Chain(
        model=model,
        names=names,
        draws=np.tile(np.asarray(row, dtype=float), (size, 1)),
        log_posterior=np.zeros(size),
        acceptance_rate=0.0,
        proposal_cov=np.eye(len(names)),
        proposal_scale=1.0,
        seed=0,
        threshold=threshold,
    )


def test_return_level_of_degenerate_chain():
    chain = _fixed_chain("gp", [2.0, 0.1], threshold=5.0)
    expected = 5.0 + gp_quantile_raw(0.99, 2.0, 0.1)
    np.testing.assert_allclose(return_level(chain, 100.0), expected)
    summary = summarise_return_level(chain, 100.0)
    assert summary.lower == pytest.approx(expected)
    assert summary.upper == pytest.approx(expected)
    assert summary.draws == 10


def test_gumbel_return_level():
    chain = _fixed_chain("gev", [0.0, 1.0, 0.0])
    assert return_level(chain, 100.0)[0] == pytest.approx(-math.log(-math.log(0.99)))


def test_return_period_must_exceed_one():
    chain = _fixed_chain("gp", [2.0, 0.1])
    for period in (1.0, 0.5, math.inf):
        with pytest.raises(DomainError):
            return_level(chain, period)
    with pytest.raises(DomainError):
        summarise_return_level(chain, 10.0, level=1.0)


def test_ess_of_constant_chain_is_one():
    assert effective_sample_size(np.full(500, 3.0)) == 1.0


def test_ess_of_independent_draws(rng):
    x = rng.standard_normal(10000)
    assert effective_sample_size(x) == pytest.approx(10000, rel=0.15)


def test_ess_of_autocorrelated_draws(rng):
    phi, n = 0.5, 20000
    noise = rng.standard_normal(n)
    x = np.empty(n)
    x[0] = noise[0]
    for i in range(1, n):
        x[i] = phi * x[i - 1] + noise[i]
    assert effective_sample_size(x) == pytest.approx(n * (1 - phi) / (1 + phi), rel=0.15)


def test_split_rhat(rng):
    mixed = [rng.standard_normal(2000) for _ in range(2)]
    assert split_rhat(mixed) == pytest.approx(1.0, abs=0.02)
    stuck = [rng.standard_normal(2000), rng.standard_normal(2000) + 5.0]
    assert split_rhat(stuck) > 1.5
    assert math.isnan(split_rhat([np.arange(3.0)]))


def test_diagnostics_over_chains():
    chain = _fixed_chain("gp", [2.0, 0.1])
    diag = diagnostics([chain, chain])
    assert diag.draws == 20
    assert diag.ess == {"sigma": 2.0, "xi": 2.0}
    assert diag.rhat["xi"] == 1.0


def test_gumbel_return_level_grows_like_log_period():
    chain = _fixed_chain("gev", [0.0, 1.0, 0.0])
    for period in (1e3, 1e5):
        assert return_level(chain, period)[0] == pytest.approx(math.log(period), abs=1e-3)


def test_prior_choice_matters_little_with_500_excesses():
    z = np.sort(gp_sample(GpParams(sigma=2.0, xi=0.2), 500, np.random.default_rng(99)))
    data = ExcessSample(excesses=z.tolist())
    cfg = McmcConfig(iterations=8000, burn_in=2000, thinning=2, adapt_window=200, seed=21)
    uniform = sample(data, _prior(PriorFamily.UNIFORM_GP), cfg)
    mdi = sample(data, _prior(PriorFamily.MDI_GP_TRUNC), cfg)
    for name in ("sigma", "xi"):
        sd = mdi.column(name).std()
        assert abs(uniform.column(name).mean() - mdi.column(name).mean()) < 0.5 * sd
    assert 0.1 <= diagnostics(mdi).acceptance_rate <= 0.5


def test_return_level_interval_coverage():
    truth = GpParams(sigma=1.0, xi=0.1)
    period = 20.0
    true_level = float(gp_quantile_raw(1.0 - 1.0 / period, truth.sigma, truth.xi))
    cfg = McmcConfig(iterations=4000, burn_in=1000, thinning=1, adapt_window=100, seed=1)
    seeds = np.random.SeedSequence(314).spawn(50)
    covered = 0
    for seed in seeds:
        z = np.sort(gp_sample(truth, 100, np.random.default_rng(seed)))
        chain = sample(ExcessSample(excesses=z.tolist()), _prior(PriorFamily.MDI_GP_TRUNC), cfg)
        rl = summarise_return_level(chain, period, level=0.9)
        covered += rl.lower <= true_level <= rl.upper
    assert covered >= 40
