# NodeB queues, FACH (PS/LAS + CBR priority), DCH pool, switch manager
from collections import deque
from dataclasses import dataclass, field
from enum import Enum

from models.Packet import Packet, PacketClass
from utils.errors import ChannelBusyError, SimulationError, SwitchInProgressError

CBR = 'cbr'


class ChannelKind(str, Enum):
    FACH = 'FACH'
    DCH = 'DCH'


class Discipline(str, Enum):
    PS = 'PS'
    LAS = 'LAS'


class NodeBQueue:
    """Hàng đợi FIFO của một connection tại NodeB; Q(i) = len(queue)"""

    __slots__ = ('conn', 'packets')

    def __init__(self, conn):
        self.conn = conn
        self.packets = deque()

    def __len__(self):
        return len(self.packets)

    def push(self, packet: Packet):
        self.packets.append(packet)

    def pop(self) -> Packet:
        return self.packets.popleft()


class RadioChannel:
    """Một transmitter: tối đa một packet đang phát"""

    def __init__(self, name, rate_bps, propagation_delay=0.0):
        self.name = name
        self.rate_bps = rate_bps
        self.propagation_delay = propagation_delay
        self.current = None
        self.started_at = 0.0
        self.busy_until = 0.0
        self.busy_time = 0.0

    @property
    def busy(self):
        return self.current is not None

    def transmission_time(self, size_bytes):
        return size_bytes * 8 / self.rate_bps

    def transmit(self, packet: Packet, now):
        """Bắt đầu phát; trả về thời điểm phát xong"""
        if self.current is not None:
            raise ChannelBusyError(f"{self.name} is busy until t={self.busy_until:.6f}")
        self.current = packet
        self.started_at = now
        self.busy_until = now + self.transmission_time(packet.size)
        return self.busy_until

    def finish(self, count_from=0.0) -> Packet:
        """Kết thúc packet hiện tại; busy time chỉ tính phần sau `count_from`"""
        packet = self.current
        self.current = None
        self.busy_time += max(0.0, self.busy_until - max(self.started_at, count_from))
        return packet


@dataclass
class FachState:
    """FACH dùng chung: CBR ưu tiên (non-preemptive), data theo PS hoặc LAS"""

    discipline: Discipline = Discipline.PS
    rate_bps: float = 33000
    propagation_delay: float = 0.0
    cursor: int = -1
    cbr_queue: deque = field(default_factory=deque)
    channel: RadioChannel = None

    def __post_init__(self):
        if self.channel is None:
            self.channel = RadioChannel('FACH', self.rate_bps, self.propagation_delay)


def fach_select_next(fach: FachState, candidates, flow_sizes):
    """Chọn packet kế tiếp cho FACH đang rảnh.

    `candidates` are ids of FACH-assigned, settled, backlogged connections.
    Returns CBR, a connection id, or None (idle).
    """
    if fach.cbr_queue:
        return CBR
    if not candidates:
        return None
    if fach.discipline is Discipline.LAS:
        return min(candidates, key=lambda conn: (flow_sizes[conn], conn))
    # round-robin: connection kế tiếp sau cursor
    after = [conn for conn in candidates if conn > fach.cursor]
    return min(after) if after else min(candidates)


@dataclass
class DchSlot:
    index: int
    occupant: int | None = None
    channel: RadioChannel = None


class DchPool:
    """N_dch dedicated channels; U_dch tính cả channel đã reserve"""

    def __init__(self, n_dch, rate_bps=384000, propagation_delay=0.0):
        if n_dch < 1:
            raise SimulationError(f"DCH pool needs at least one channel, got {n_dch}")
        self.slots = [
            DchSlot(i, None, RadioChannel(f'DCH{i}', rate_bps, propagation_delay))
            for i in range(n_dch)
        ]
        self._held = {}

    @property
    def capacity(self):
        return len(self.slots)

    @property
    def in_use(self):
        return len(self._held)

    @property
    def full(self):
        return self.in_use >= self.capacity

    def slot_of(self, conn):
        return self._held.get(conn)

    def reserve(self, conn) -> DchSlot:
        if self.slot_of(conn) is not None:
            raise SimulationError(f"connection {conn} already holds a DCH")
        for slot in self.slots:
            if slot.occupant is None:
                slot.occupant = conn
                self._held[conn] = slot
                return slot
        raise SimulationError(f"no free DCH for connection {conn}")

    def release(self, conn) -> DchSlot:
        slot = self._held.pop(conn, None)
        if slot is None:
            raise SimulationError(f"connection {conn} holds no DCH")
        slot.occupant = None
        return slot


@dataclass(slots=True)
class SwitchJob:
    conn: int
    source: ChannelKind
    target: ChannelKind
    started_at: float
    completes_at: float
    reset_flow: bool = False
    reason: str = ''
    handle: object = None


class SwitchManager:
    """Quản lý các switch FACH<->DCH, mỗi switch tốn D_sw"""

    def __init__(self, pool: DchPool, switch_delay=0.250):
        self.pool = pool
        self.switch_delay = switch_delay
        self.jobs = {}
        self.completed = 0
        self.history = []

    def in_progress(self, conn):
        return self.jobs.get(conn)

    def begin_switch(self, conn, source, target, now, reset_flow=False, reason='') -> SwitchJob:
        if conn in self.jobs:
            raise SwitchInProgressError(f"connection {conn} is already switching")
        if source == target:
            raise SimulationError(f"connection {conn}: switch {source.value}->{target.value} is a no-op")
        if target is ChannelKind.DCH:
            self.pool.reserve(conn)
        job = SwitchJob(conn, source, target, now, now + self.switch_delay, reset_flow, reason)
        self.jobs[conn] = job
        return job

    def complete_switch(self, job: SwitchJob):
        """Kết thúc switch; trả về channel mới của connection"""
        if self.jobs.get(job.conn) is not job:
            raise SimulationError(f"switch for connection {job.conn} is not in progress")
        del self.jobs[job.conn]
        if job.source is ChannelKind.DCH:
            self.pool.release(job.conn)
        self.completed += 1
        self.history.append((job.conn, job.started_at, job.completes_at))
        return job.target


class CbrSource:
    """Signaling CBR: một packet 1 kbyte mỗi 1/3 s, trên FACH"""

    def __init__(self, packet_bytes=1000, interval=1 / 3):
        self.packet_bytes = packet_bytes
        self.interval = interval
        self.ticks = 0
        self.emitted_bytes = 0

    def cbr_tick(self, fach: FachState, now):
        """Enqueue một packet CBR; trả về (packet, thời điểm tick kế tiếp)"""
        packet = Packet(self.ticks, self.packet_bytes, None, None, PacketClass.CBR)
        fach.cbr_queue.append((packet, now))
        self.ticks += 1
        self.emitted_bytes += self.packet_bytes
        # tick thứ k luôn ở k * interval, không cộng dồn sai số
        return packet, self.ticks * self.interval
