# Scenario config: mọi hằng số mô phỏng, đọc từ file KEY=VALUE (dotenv) + override
import dataclasses
import os
from dataclasses import dataclass, field

from dotenv import dotenv_values

from services.policy_service import PolicyConfig, PolicyKind
from services.radio_service import ChannelKind, Discipline
from utils.errors import ValidationError

DEFAULT_SWEEP_VALUES = (1, 2, 4, 6, 8, 10, 12, 15, 20, 25, 30)

POLICY_FIELDS = ('t_h', 't_l', 's', 't_out')


def _parse_bool(text):
    value = str(text).strip().lower()
    if value in ('1', 'true', 'yes', 'on'):
        return True
    if value in ('0', 'false', 'no', 'off'):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _parse_int(value):
    """Số nguyên; JSON float như 2.5 hoặc bool bị từ chối"""
    if isinstance(value, bool):
        raise ValueError("expected an integer")
    if isinstance(value, float):
        if not value.is_integer():
            raise ValueError("expected an integer")
        return int(value)
    return int(str(value).strip())


def _parse_float(value):
    if isinstance(value, bool):
        raise ValueError("expected a number")
    return float(value)


def _parse_fraction(text):
    """Chấp nhận '1/3' ngoài số thực"""
    text = str(text).strip()
    if '/' in text:
        num, den = text.split('/', 1)
        return float(num) / float(den)
    return float(text)


def _parse_optional_int(text):
    """w_max: 0, 'none' hoặc 'inf' nghĩa là không giới hạn"""
    value = str(text).strip().lower()
    if value in ('', 'none', 'inf', '0'):
        return None
    return _parse_int(text)


def _enum_parser(enum_cls):
    def parse(text):
        if isinstance(text, enum_cls):
            return text
        return enum_cls(str(text).strip().upper())
    return parse


def _parse_pin(text):
    if text is None or isinstance(text, ChannelKind):
        return text
    value = str(text).strip().upper()
    return None if value in ('', 'NONE') else ChannelKind(value)


_PARSERS = {
    'n_tcp': _parse_int, 'n_dch': _parse_int,
    'policy': PolicyKind.parse,
    'scheduler': _enum_parser(Discipline),
    't_h': _parse_int, 't_l': _parse_int, 's': _parse_int, 't_out': _parse_float,
    'fach_rate': _parse_float, 'dch_rate': _parse_float, 'switch_delay': _parse_float,
    'cbr_enabled': _parse_bool, 'cbr_packet_bytes': _parse_int, 'cbr_interval': _parse_fraction,
    'pareto_shape': _parse_float, 'mean_file_bytes': _parse_float, 't_on': _parse_float,
    'p_off': _parse_float, 't_off': _parse_float,
    'packet_size': _parse_int, 'burst_cap': _parse_int,
    'w_max': _parse_optional_int, 'initial_cwnd': _parse_int,
    'backhaul_rate': _parse_float, 'backhaul_delay': _parse_float, 'radio_delay': _parse_float,
    'duration': _parse_float, 'warmup_fraction': _parse_float, 'seed': _parse_int,
    'traffic': _parse_bool, 'pin_channel': _parse_pin,
}


@dataclass
class ScenarioConfig:
    """Tham số của một run; default là các giá trị mô phỏng chuẩn"""

    n_tcp: int = 2
    n_dch: int = 1
    policy: PolicyConfig = field(default_factory=PolicyConfig)
    scheduler: Discipline = Discipline.PS
    # rates (bit/s) và switch cost
    fach_rate: float = 33000
    dch_rate: float = 384000
    switch_delay: float = 0.250
    # CBR signaling trên FACH
    cbr_enabled: bool = True
    cbr_packet_bytes: int = 1000
    cbr_interval: float = 1 / 3
    # ON/OFF traffic
    pareto_shape: float = 1.1
    mean_file_bytes: float = 30000
    t_on: float = 0.3
    p_off: float = 0.33
    t_off: float = 5.0
    packet_size: int = 280
    burst_cap: int = 0
    # transport
    w_max: int | None = 20
    initial_cwnd: int = 2
    backhaul_rate: float = 5_000_000
    backhaul_delay: float = 0.030
    radio_delay: float = 0.0
    # run
    duration: float = 20000.0
    warmup_fraction: float = 0.05
    seed: int = 42
    traffic: bool = True
    pin_channel: ChannelKind | None = None

    @property
    def mean_burst_packets(self):
        return self.mean_file_bytes / self.packet_size

    @property
    def warmup_cutoff(self):
        return self.duration * self.warmup_fraction

    def label(self):
        p = self.policy
        return (f"{p.kind.value}/{self.scheduler.value} n_tcp={self.n_tcp} n_dch={self.n_dch} "
                f"t_h={p.t_h} s={p.s} seed={self.seed}")

    def validate(self):
        if self.n_tcp < 1:
            raise ValidationError("must be >= 1", field='n_tcp')
        if self.n_dch < 1:
            raise ValidationError("must be >= 1", field='n_dch')
        for name in ('fach_rate', 'dch_rate', 'cbr_interval', 't_on', 't_off', 'packet_size',
                     'cbr_packet_bytes', 'mean_file_bytes', 'backhaul_rate', 'duration'):
            if not getattr(self, name) > 0:
                raise ValidationError("must be positive", field=name)
        for name in ('switch_delay', 'backhaul_delay', 'radio_delay', 'burst_cap'):
            if getattr(self, name) < 0:
                raise ValidationError("must be >= 0", field=name)
        if not 0.0 <= self.p_off <= 1.0:
            raise ValidationError("must lie in [0, 1]", field='p_off')
        if not 0.0 <= self.warmup_fraction < 1.0:
            raise ValidationError("must lie in [0, 1)", field='warmup_fraction')
        if not self.pareto_shape > 1:
            raise ValidationError("must be > 1 (finite mean)", field='pareto_shape')
        if self.initial_cwnd < 1:
            raise ValidationError("must be >= 1", field='initial_cwnd')
        if self.w_max is not None and self.w_max < 1:
            raise ValidationError("must be >= 1 or unlimited", field='w_max')
        if not 0 <= self.seed < 2**64:
            raise ValidationError("must be a 64-bit unsigned integer", field='seed')
        self.policy.validate()
        return self

    def with_overrides(self, **overrides):
        """Bản copy với các field đã override (policy fields dùng tên phẳng)"""
        overrides = parse_values(overrides)
        policy_changes = {k: overrides.pop(k) for k in list(overrides) if k in POLICY_FIELDS}
        if 'policy' in overrides:
            policy_changes['kind'] = overrides.pop('policy')
        policy = dataclasses.replace(self.policy, **policy_changes)
        return dataclasses.replace(self, policy=policy, **overrides)

    def to_flat(self):
        """Dạng phẳng KEY=VALUE (dùng để ghi file / gửi qua API)"""
        flat = {}
        for f in dataclasses.fields(self):
            value = getattr(self, f.name)
            if f.name == 'policy':
                flat['policy'] = value.kind.value
                for name in POLICY_FIELDS:
                    flat[name] = getattr(value, name)
            else:
                flat[f.name] = value.value if hasattr(value, 'value') else value
        return flat


def parse_values(mapping):
    """Chuyển mapping string (file / CLI / JSON) sang giá trị có kiểu"""
    parsed = {}
    for raw_key, raw_value in mapping.items():
        key = raw_key.strip().lower()
        if key not in _PARSERS:
            raise ValidationError("unknown configuration key", field=raw_key)
        if raw_value is None:
            # None chỉ có nghĩa với các key optional
            if key in ('pin_channel', 'w_max'):
                parsed[key] = None
            continue
        try:
            parsed[key] = _PARSERS[key](raw_value)
        except (AttributeError, TypeError, ValueError) as e:
            raise ValidationError(f"invalid value {raw_value!r} ({e})", field=raw_key) from None
    return parsed


def load_scenario(path=None, overrides=None) -> ScenarioConfig:
    """defaults < file < overrides; luôn validate trước khi trả về"""
    config = ScenarioConfig()
    if path:
        if not os.path.exists(path):
            raise ValidationError(f"scenario file not found: {path}", field='config')
        config = config.with_overrides(**dotenv_values(path))
    if overrides:
        config = config.with_overrides(**overrides)
    return config.validate()


@dataclass
class SweepSpec:
    """Sweep một threshold (s hoặc t_h) qua các policy và seed.

    parameter=None sweeps each policy over its own threshold (see
    `swept_parameter`).
    """

    parameter: str | None
    values: list
    policies: list
    seeds: list

    def validate(self):
        if self.parameter not in (None, 's', 't_h'):
            raise ValidationError("must be 's' or 't_h'", field='parameter')
        for name in ('values', 'policies', 'seeds'):
            if not getattr(self, name):
                raise ValidationError("must not be empty", field=name)
        if any(int(v) != v or v < 1 for v in self.values):
            raise ValidationError("must be positive integers", field='values')
        return self
