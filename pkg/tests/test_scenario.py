import pytest

from config.scenario import ScenarioConfig, SweepSpec, load_scenario
from services.policy_service import PolicyKind
from services.radio_service import ChannelKind, Discipline
from utils.errors import ValidationError


def test_defaults_are_standard_parameters():
    config = ScenarioConfig()
    assert (config.fach_rate, config.dch_rate, config.switch_delay) == (33000, 384000, 0.250)
    assert (config.cbr_packet_bytes, config.cbr_interval) == (1000, pytest.approx(1 / 3))
    assert (config.pareto_shape, config.mean_file_bytes, config.t_on, config.p_off, config.t_off) == (
        1.1, 30000, 0.3, 0.33, 5.0)
    assert config.packet_size == 280
    assert config.policy.t_l == 1
    assert (config.backhaul_rate, config.backhaul_delay) == (5_000_000, 0.030)


def test_scenario_file_then_overrides(tmp_path):
    path = tmp_path / 'scenario.env'
    path.write_text("N_TCP=3\nPOLICY=fs-dch\nS=8\nCBR_INTERVAL=1/4\nSCHEDULER=las\n")
    config = load_scenario(str(path), {'s': '12', 'seed': '9'})
    assert config.n_tcp == 3
    assert config.policy.kind is PolicyKind.FSDCH
    assert config.policy.s == 12
    assert config.seed == 9
    assert config.cbr_interval == pytest.approx(0.25)
    assert config.scheduler is Discipline.LAS


def test_unknown_key_names_the_field(tmp_path):
    path = tmp_path / 'bad.env'
    path.write_text("N_TCPS=3\n")
    with pytest.raises(ValidationError) as err:
        load_scenario(str(path))
    assert err.value.field == 'N_TCPS'


def test_bad_value_names_the_field():
    with pytest.raises(ValidationError) as err:
        load_scenario(overrides={'n_dch': 'two'})
    assert err.value.field == 'n_dch'


def test_zero_dch_rejected():
    with pytest.raises(ValidationError) as err:
        load_scenario(overrides={'n_dch': '0'})
    assert err.value.field == 'n_dch'


def test_p_off_range():
    with pytest.raises(ValidationError):
        load_scenario(overrides={'p_off': '1.5'})


def test_missing_file():
    with pytest.raises(ValidationError):
        load_scenario('/nonexistent/scenario.env')


def test_w_max_unlimited_and_pin():
    config = load_scenario(overrides={'w_max': 'inf', 'pin_channel': 'dch'})
    assert config.w_max is None
    assert config.pin_channel is ChannelKind.DCH


def test_with_overrides_keeps_original():
    base = ScenarioConfig()
    changed = base.with_overrides(t_h=9, policy='QSFS', n_tcp=4)
    assert changed.policy.t_h == 9 and changed.policy.kind is PolicyKind.QSFS
    assert base.policy.t_h == 4 and base.n_tcp == 2
    with pytest.raises(ValidationError):
        base.with_overrides(bogus=1)


def test_flat_round_trip_through_loader():
    config = ScenarioConfig(n_tcp=5, seed=3).with_overrides(policy='MT', s=7)
    again = load_scenario(overrides={k: str(v) for k, v in config.to_flat().items() if v is not None})
    assert again == config


def test_sweep_spec_validation():
    SweepSpec('s', [1, 2], ['FS'], [1]).validate()
    SweepSpec(None, [1], ['QS'], [1]).validate()
    with pytest.raises(ValidationError):
        SweepSpec('s', [1, 2], ['FS'], []).validate()
    with pytest.raises(ValidationError):
        SweepSpec('t_l', [1], ['QS'], [1]).validate()
    with pytest.raises(ValidationError):
        SweepSpec('s', [0], ['QS'], [1]).validate()


@pytest.mark.parametrize('key, value', [
    ('n_tcp', 2.5), ('n_tcp', True), ('policy', 5), ('scheduler', 3), ('pin_channel', 1), ('w_max', 20.5),
])
def test_non_string_values_are_checked(key, value):
    with pytest.raises(ValidationError) as err:
        load_scenario(overrides={key: value})
    assert err.value.field == key


def test_integral_json_numbers_accepted():
    config = load_scenario(overrides={'n_tcp': 3.0, 'w_max': 10, 'duration': 50, 'traffic': False})
    assert config.n_tcp == 3 and isinstance(config.n_tcp, int)
    assert config.w_max == 10
    assert config.duration == 50.0
    assert config.traffic is False
