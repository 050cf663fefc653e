# ON/OFF bursty traffic source cho mỗi TCP connection
from dataclasses import dataclass
from enum import Enum

from models.Packet import Burst
from services.random_streams import StreamFactory, sample_exponential, sample_pareto_burst


class SourcePhase(str, Enum):
    ON = 'ON'
    OFF = 'OFF'


@dataclass
class TrafficParams:
    pareto_shape: float = 1.1
    mean_burst_packets: float = 30000 / 280
    t_on: float = 0.3
    p_off: float = 0.33
    t_off: float = 5.0
    burst_cap: int = 0  # 0 = không giới hạn


@dataclass
class SourceState:
    """Trạng thái source; luôn có đúng một event source đang pending"""

    conn: int
    phase: SourcePhase = SourcePhase.ON
    handle: object = None
    next_burst_id: int = 0


class SourceStreams:
    """Bốn stream độc lập của một connection"""

    def __init__(self, factory: StreamFactory, conn):
        self.sizes = factory.stream(f"burst_size:{conn}")
        self.gaps = factory.stream(f"on_gap:{conn}")
        self.off_decisions = factory.stream(f"off_decision:{conn}")
        self.off_durations = factory.stream(f"off_duration:{conn}")


def first_burst_delay(streams: SourceStreams, params: TrafficParams):
    return sample_exponential(streams.gaps, params.t_on)


def next_burst_event(src: SourceState, streams: SourceStreams, params: TrafficParams, now):
    """Sinh burst hiện tại và quyết định event kế tiếp.

    Returns (burst, next phase, delay until the next burst). An OFF period ends
    with a burst at the moment the source turns back ON.
    """
    size = sample_pareto_burst(streams.sizes, params.pareto_shape, params.mean_burst_packets)
    if params.burst_cap:
        size = min(size, params.burst_cap)
    burst = Burst(src.next_burst_id, src.conn, size, now)
    src.next_burst_id += 1

    if streams.off_decisions.uniform() < params.p_off:
        src.phase = SourcePhase.OFF
        delay = sample_exponential(streams.off_durations, params.t_off)
    else:
        src.phase = SourcePhase.ON
        delay = sample_exponential(streams.gaps, params.t_on)
    return burst, src.phase, delay
