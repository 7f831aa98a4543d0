import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from peclab.errors import ParameterError, ScenarioFormatError, SchemaError
from peclab.model import (
    Dataset,
    DistributionSpec,
    EffectEstimate,
    ErrorKind,
    ErrorModel,
    Estimand,
    Link,
    Method,
    OutcomeModel,
    Scenario,
    StructuralSpec,
    format_scenario,
    parse_scenario,
    validate_scenario,
)
from peclab.rng import StreamKey, sample
from peclab import worlds


# ---------------------------------------------------------------------------
# DistributionSpec


def test_rounded_uniform_three_point_law():
    spec = DistributionSpec.rounded_uniform(-1, 1)
    values, probs = spec.support()
    assert values.tolist() == [-1.0, 0.0, 1.0]
    assert probs.tolist() == [0.25, 0.5, 0.25]
    assert spec.mean() == 0.0
    assert spec.variance() == 0.5


def test_rounded_uniform_non_integer_endpoints():
    spec = DistributionSpec.rounded_uniform(0.25, 1.75)
    values, probs = spec.support()
    assert values.tolist() == [0.0, 1.0, 2.0]
    np.testing.assert_allclose(probs, [0.25 / 1.5, 1.0 / 1.5, 0.25 / 1.5])
    np.testing.assert_allclose(probs.sum(), 1.0)


@pytest.mark.parametrize(
    "spec",
    [
        DistributionSpec.normal(0.7, 1.3),
        DistributionSpec.gamma(1.0, 1.0),
        DistributionSpec.gamma(2.0, 1.0),
        DistributionSpec.rounded_uniform(8, 10),
        DistributionSpec.point_mass(3.25),
    ],
)
def test_moments_match_samples_within_four_se(spec):
    n = 1_000_000
    draws = sample(spec, StreamKey(20_250_809, 0, 1), n)
    mean, var = spec.mean(), spec.variance()
    se_mean = math.sqrt(var / n) if var > 0 else 0.0
    assert abs(draws.mean() - mean) <= 4 * se_mean + 1e-12
    if var > 0:
        # SE of the sample variance via the fourth moment, estimated once
        m4 = np.mean((draws - draws.mean()) ** 4)
        se_var = math.sqrt(max(m4 - var**2, 0.0) / n)
        assert abs(draws.var() - var) <= 4 * se_var


def test_invalid_parameters_reported():
    assert DistributionSpec.normal(0, -1).violations()
    assert DistributionSpec.gamma(0, 1).violations()
    assert DistributionSpec.gamma(1, 0).violations()
    assert DistributionSpec.rounded_uniform(2, 2).violations()
    assert not DistributionSpec.point_mass(0.0).violations()
    with pytest.raises(ParameterError):
        DistributionSpec.gamma(-1, 1).check()


def test_gamma_density_integrates_to_one():
    spec = DistributionSpec.gamma(2.0, 1.0)
    x = np.linspace(0, 40, 20001)
    np.testing.assert_allclose(np.trapezoid(spec.density(x), x), 1.0, atol=1e-6)


# ---------------------------------------------------------------------------
# Scenario validation


def test_canonical_scenario_is_valid():
    assert validate_scenario(worlds.table3_scenario(1)) == []


def test_zero_n_rejected():
    s = worlds.table3_scenario(1)
    bad = Scenario(**{**s.__dict__, "n": 0})
    assert any("n must be >= 1" in v for v in validate_scenario(bad))


def test_zero_gamma1_on_linear_error_rejected():
    s = worlds.table3_scenario(1)
    err = ErrorModel(
        kind=ErrorKind.NON_BERKSON_LINEAR,
        gamma1=0.0,
        noiseU=DistributionSpec.normal(0, 0.3),
    )
    bad = Scenario(**{**s.__dict__, "exposure_error": err})
    assert any("gamma1 must be nonzero" in v for v in validate_scenario(bad))


def test_nonzero_mean_outcome_noise_rejected():
    s = worlds.table3_scenario(1)
    outcome = OutcomeModel(
        link=Link.IDENTITY, beta_x=1.0, noise=DistributionSpec.normal(0.5, 1.0)
    )
    bad = Scenario(**{**s.__dict__, "outcome": outcome})
    assert any("mean 0" in v for v in validate_scenario(bad))


# ---------------------------------------------------------------------------
# Scenario file format round-trip

_dist = st.one_of(
    st.builds(
        DistributionSpec.normal,
        st.floats(-5, 5, allow_nan=False),
        st.floats(0.01, 3, allow_nan=False),
    ),
    st.builds(
        DistributionSpec.gamma,
        st.floats(0.2, 5, allow_nan=False),
        st.floats(0.1, 4, allow_nan=False),
    ),
    st.builds(DistributionSpec.point_mass, st.floats(-2, 2, allow_nan=False)),
)
_finite = st.floats(-10, 10, allow_nan=False)


@st.composite
def scenarios(draw):
    zero_mean = st.one_of(
        st.builds(DistributionSpec.normal, st.just(0.0), st.floats(0.01, 2)),
        st.just(DistributionSpec.point_mass(0.0)),
        st.just(DistributionSpec.rounded_uniform(-1, 1)),
    )
    return Scenario(
        name=draw(st.text(st.characters(categories=("Ll", "Nd")), min_size=1, max_size=12)),
        outcome=OutcomeModel(
            link=draw(st.sampled_from(list(Link))),
            beta0=draw(_finite),
            beta_x=draw(_finite),
            beta_x2=draw(_finite),
            beta_c=draw(_finite),
            beta_v=draw(_finite),
            noise=draw(zero_mean),
            noise_scale=draw(st.floats(0.1, 2, allow_nan=False)),
        ),
        exposure_error=ErrorModel(
            kind=draw(st.sampled_from(list(ErrorKind))),
            gamma0=draw(_finite),
            gamma1=draw(st.floats(0.1, 3, allow_nan=False)),
            gammaV=draw(_finite),
            noiseU=draw(zero_mean),
        ),
        x_model=StructuralSpec(
            intercept=draw(_finite),
            coef_c=draw(_finite),
            coef_v=draw(_finite),
            noise=draw(_dist),
        ),
        c_model=StructuralSpec(coef_v=draw(_finite), noise=draw(_dist)),
        v_model=draw(_dist),
        n=draw(st.integers(1, 10**6)),
        replications=draw(st.integers(1, 1000)),
        seed=draw(st.integers(0, 2**63 - 1)),
    )


@settings(max_examples=60, deadline=None)
@given(scenarios())
def test_scenario_round_trip(s):
    assert parse_scenario(format_scenario(s)) == s


def test_canonical_scenarios_round_trip():
    for s in [worlds.table3_scenario(2), worlds.table4_scenario(3), worlds.table5_scenario(0.5, -0.5)]:
        assert parse_scenario(format_scenario(s)) == s


def test_parse_rejects_garbage():
    with pytest.raises(ScenarioFormatError):
        parse_scenario("just some words\n")
    with pytest.raises(ScenarioFormatError):
        parse_scenario("outcome.nope = 3\n")
    with pytest.raises(ScenarioFormatError):
        parse_scenario("scenario.n = plenty\n")
    with pytest.raises(ScenarioFormatError):
        parse_scenario("outcome.noise = normal(1)\n")


# ---------------------------------------------------------------------------
# Dataset


def test_dataset_rejects_ragged_and_nonfinite():
    with pytest.raises(SchemaError):
        Dataset({"X": np.ones(3), "Y": np.ones(4)})
    with pytest.raises(SchemaError):
        Dataset({"X": np.array([1.0, np.nan])})
    with pytest.raises(SchemaError):
        Dataset({"X": np.array([1.0, np.inf])})


def test_dataset_csv_round_trip(tmp_path):
    rng = np.random.default_rng(5)
    ds = Dataset(
        {name: rng.normal(size=17) for name in ("X", "Xep", "C", "Cep", "V", "Vep", "Y")}
    )
    path = tmp_path / "data.csv"
    ds.to_csv(path)
    header = path.read_text().splitlines()[0]
    assert header == "X,Xep,C,Cep,V,Vep,Y"
    back = Dataset.from_csv(path)
    for name in ds.names:
        np.testing.assert_array_equal(back[name], ds[name])


def test_dataset_partial_columns_keep_canonical_order(tmp_path):
    ds = Dataset({"Y": np.zeros(2), "Xep": np.ones(2), "X": np.ones(2)})
    path = tmp_path / "partial.csv"
    ds.to_csv(path)
    assert path.read_text().splitlines()[0] == "X,Xep,Y"


def test_effect_estimate_invariants():
    with pytest.raises(ParameterError):
        EffectEstimate(Estimand.RISK_RATIO, Method.NAIVE, value=-0.2)
    with pytest.raises(ParameterError):
        EffectEstimate(Estimand.RISK_DIFFERENCE, Method.NAIVE, value=0.1, delta=0.0)
    est = EffectEstimate(Estimand.RISK_RATIO, Method.G_COMPUTATION, value=1.3)
    assert est.delta == 1.0
