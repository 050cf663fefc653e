# Response time, slowdown, utilization và công thức transfer time đóng
from dataclasses import asdict, dataclass, fields

import numpy as np

from utils.errors import DuplicateRecordError, EmptyRecordSetError, ValidationError

CSV_COLUMNS = (
    'policy', 'scheduler', 'n_tcp', 'n_dch', 's', 't_h', 't_l', 't_out', 'seed',
    'duration_s', 'n_bursts', 'mean_response_s', 'slowdown_aggregate',
    'slowdown_per_burst', 'util_fach', 'util_dch', 'switches_per_flow',
)


@dataclass(frozen=True, slots=True)
class BurstRecord:
    conn: int
    burst_id: int
    size: int
    generated_at: float
    completed_at: float

    @property
    def response_time(self):
        return self.completed_at - self.generated_at


@dataclass
class RunSummary:
    """Một dòng CSV: kết quả của một run"""

    policy: str
    scheduler: str
    n_tcp: int
    n_dch: int
    s: int
    t_h: int
    t_l: int
    t_out: float
    seed: int
    duration_s: float
    n_bursts: int
    mean_response_s: float
    slowdown_aggregate: float
    slowdown_per_burst: float
    util_fach: float
    util_dch: float
    switches_per_flow: float

    def to_row(self):
        return asdict(self)

    @classmethod
    def from_row(cls, row):
        names = {f.name for f in fields(cls)}
        return cls(**{k: v for k, v in row.items() if k in names})


class MetricsCollector:
    """Lưu BurstRecord; burst sinh ra trước warmup cutoff bị loại khỏi summary"""

    def __init__(self, warmup_cutoff=0.0):
        self.warmup_cutoff = warmup_cutoff
        self._records = {}

    def __len__(self):
        return len(self._records)

    def record(self, burst: BurstRecord):
        key = (burst.conn, burst.burst_id)
        if key in self._records:
            raise DuplicateRecordError(f"burst {burst.burst_id} of connection {burst.conn} already recorded")
        if burst.generated_at < 0 or burst.completed_at <= burst.generated_at:
            raise ValidationError(
                f"completion {burst.completed_at} must follow generation {burst.generated_at}",
                field='completed_at',
            )
        self._records[key] = burst

    def records(self, include_warmup=False):
        if include_warmup:
            return list(self._records.values())
        return [r for r in self._records.values() if r.generated_at >= self.warmup_cutoff]


@dataclass(frozen=True, slots=True)
class ResponseStats:
    n_bursts: int
    mean_response_s: float
    mean_size: float
    slowdown_aggregate: float
    slowdown_per_burst: float


def summarize(records) -> ResponseStats:
    """Mean response time và slowdown trên các burst sau warmup"""
    if not records:
        raise EmptyRecordSetError("no completed bursts after the warmup cutoff")
    responses = np.fromiter((r.response_time for r in records), dtype=float, count=len(records))
    sizes = np.fromiter((r.size for r in records), dtype=float, count=len(records))
    # sort để tổng không phụ thuộc thứ tự record
    mean_response = float(np.sort(responses).mean())
    mean_size = float(np.sort(sizes).mean())
    per_burst = float(np.sort(responses / sizes).mean())
    return ResponseStats(len(records), mean_response, mean_size, mean_response / mean_size, per_burst)


def estimate_transfer_time(n_packets, packet_bytes, channel, cbr_active=True, include_setup=True,
                           fach_rate=33000, dch_rate=384000, cbr_rate=24000, setup=0.250):
    """Thời gian truyền một burst theo công thức đóng (đơn vị kilo thập phân)"""
    if n_packets < 1:
        raise ValidationError(f"must be >= 1, got {n_packets}", field='n_packets')
    if not packet_bytes > 0:
        raise ValidationError(f"must be > 0, got {packet_bytes}", field='packet_bytes')
    bits = n_packets * packet_bytes * 8
    if str(getattr(channel, 'value', channel)).upper() == 'DCH':
        return (setup if include_setup else 0.0) + bits / dch_rate
    effective = fach_rate - (cbr_rate if cbr_active else 0)
    if effective <= 0:
        raise ValidationError("CBR load saturates the FACH", field='cbr_rate')
    return bits / effective


def transfer_time_table(n_packets, packet_bytes, **rates):
    """Các dòng cho lệnh calc: FACH (cbr on/off), DCH (setup on/off), speedup"""
    fach_cbr = estimate_transfer_time(n_packets, packet_bytes, 'FACH', True, **rates)
    fach_idle = estimate_transfer_time(n_packets, packet_bytes, 'FACH', False, **rates)
    dch_setup = estimate_transfer_time(n_packets, packet_bytes, 'DCH', include_setup=True, **rates)
    dch_bare = estimate_transfer_time(n_packets, packet_bytes, 'DCH', include_setup=False, **rates)
    return {
        'fach_cbr_s': fach_cbr,
        'fach_no_cbr_s': fach_idle,
        'dch_setup_s': dch_setup,
        'dch_no_setup_s': dch_bare,
        'speedup_cbr': fach_cbr / dch_setup,
        'speedup_no_cbr': fach_idle / dch_setup,
    }
