# Channel switching policies: QS, FS, QSFS, FS-DCH và MT (PS+FCFS baseline)
#
# Các hàm quyết định chỉ đọc state được truyền vào (không có global), nên
# test được mà không cần simulation kernel.
from dataclasses import dataclass
from enum import Enum

from services.radio_service import ChannelKind, DchPool
from utils.errors import SimulationError, ValidationError


class PolicyKind(str, Enum):
    QS = 'QS'
    FS = 'FS'
    QSFS = 'QSFS'
    FSDCH = 'FSDCH'
    MT = 'MT'

    @classmethod
    def parse(cls, text):
        if isinstance(text, cls):
            return text
        key = text.strip().upper().replace('-', '').replace('_', '')
        try:
            return cls(key)
        except ValueError:
            raise ValidationError(f"unknown policy '{text}'", field='policy') from None


class FachAction(str, Enum):
    SWITCH_NOW = 'switch-now'
    ADD_REQUEST = 'add-request'
    NONE = 'none'


class DchAction(str, Enum):
    START_TIMER = 'start-timer'
    PREEMPT_NOW = 'preempt-now'
    NONE = 'none'


class TimerAction(str, Enum):
    VACATE_AND_GRANT = 'vacate-and-grant'
    RESTART_TIMER = 'restart-timer'


@dataclass
class PolicyConfig:
    kind: PolicyKind = PolicyKind.QS
    t_h: int = 4
    t_l: int = 1
    s: int = 5
    t_out: float = 0.5

    def validate(self):
        if self.t_l < 0:
            raise ValidationError("must be >= 0", field='t_l')
        if self.t_h < self.t_l:
            raise ValidationError(f"must be >= t_l ({self.t_l})", field='t_h')
        if self.s < 0:
            raise ValidationError("must be >= 0", field='s')
        if not self.t_out > 0:
            raise ValidationError("must be > 0", field='t_out')
        return self


@dataclass
class FlowState:
    """f(i) và trạng thái switching của một connection.

    `flows_started` counts flows the same way for every policy: an arrival
    at the NodeB after the connection has been drained for at least the
    idle gap opens a new flow. `flow_size` is the policy's own f(i).
    """

    conn: int
    flow_size: int = 0
    channel: ChannelKind = ChannelKind.FACH
    timer: object = None
    flows_started: int = 0
    idle_since: float | None = float('-inf')

    def serve(self):
        self.flow_size += 1

    def note_arrival(self, now, idle_gap):
        if self.idle_since is not None and now - self.idle_since >= idle_gap:
            self.flows_started += 1
        self.idle_since = None

    def note_drained(self, now):
        """Queue rỗng và không còn packet on air"""
        self.idle_since = now


@dataclass(frozen=True, slots=True)
class RequestEntry:
    conn: int
    enqueued_at: float

    def waited(self, now):
        """W(i)"""
        return now - self.enqueued_at


class RequestSet:
    """Tập R các request switch-to-DCH, tối đa một entry mỗi connection"""

    def __init__(self):
        self._entries = {}

    def __len__(self):
        return len(self._entries)

    def __bool__(self):
        return bool(self._entries)

    def __contains__(self, conn):
        return conn in self._entries

    def __iter__(self):
        return iter(sorted(self._entries.values(), key=lambda e: e.conn))

    def add(self, conn, now):
        """Idempotent: giữ timestamp của request đầu tiên"""
        if conn not in self._entries:
            self._entries[conn] = RequestEntry(conn, now)
        return self._entries[conn]

    def remove(self, conn):
        return self._entries.pop(conn, None)

    def get(self, conn):
        return self._entries.get(conn)


class SwitchingPolicy:
    """Base policy. Subclasses define when a FACH connection wants DCH and
    whether the flow counter is reset after a vacate."""

    kind = None
    reads_flow_size = True

    def __init__(self, config: PolicyConfig):
        self.config = config.validate()

    def __repr__(self):
        c = self.config
        return f'<{type(self).__name__} T_h={c.t_h} T_l={c.t_l} s={c.s} T_out={c.t_out}>'

    def wants_dch(self, queue_len, flow_size):
        raise NotImplementedError

    # -- FACH side --------------------------------------------------------

    def on_enqueue(self, conn, queue_len, flow_size, pool: DchPool, requests: RequestSet, now=0.0):
        if not self.wants_dch(queue_len, flow_size):
            return FachAction.NONE
        if not pool.full:
            return FachAction.SWITCH_NOW
        requests.add(conn, now)
        return FachAction.ADD_REQUEST

    def reset_flow_on_fach_idle(self, flow: FlowState, now=0.0):
        if self.reads_flow_size:
            flow.flow_size = 0

    # -- DCH side ---------------------------------------------------------

    def on_served_dch(self, conn, queue_len, flow_size, pool, requests, timer_pending=False):
        if queue_len >= self.config.t_l:
            return DchAction.NONE
        return DchAction.NONE if timer_pending else DchAction.START_TIMER

    def on_timer_expired(self, conn, queue_len, pool, requests):
        if queue_len < self.config.t_l and pool.full and requests:
            return TimerAction.VACATE_AND_GRANT
        return TimerAction.RESTART_TIMER

    def resets_flow_on_vacate(self, flow_size):
        return False

    # -- waiter selection -------------------------------------------------

    def select_waiter(self, requests: RequestSet, flows, queues, now):
        entries = list(requests)
        if not entries:
            raise SimulationError("select_waiter called with an empty request set")
        return _argmax_queue(entries, queues)

    def on_dch_freed(self, pool: DchPool, requests: RequestSet, flows, queues, now):
        """Chọn connection được cấp DCH vừa trống (None nếu R rỗng)"""
        if not requests or pool.full:
            return None
        winner = self.select_waiter(requests, flows, queues, now)
        requests.remove(winner)
        return winner


def _argmax_queue(entries, queues):
    return min(entries, key=lambda e: (-len(queues[e.conn]), e.conn)).conn


def _oldest(entries):
    return min(entries, key=lambda e: (e.enqueued_at, e.conn)).conn


class QueueSizePolicy(SwitchingPolicy):
    kind = PolicyKind.QS
    reads_flow_size = False

    def wants_dch(self, queue_len, flow_size):
        return queue_len > self.config.t_h


class ModifiedThresholdPolicy(QueueSizePolicy):
    """Baseline PS+FCFS: trigger như QS, waiter theo FCFS"""

    kind = PolicyKind.MT

    def select_waiter(self, requests, flows, queues, now):
        entries = list(requests)
        if not entries:
            raise SimulationError("select_waiter called with an empty request set")
        return _oldest(entries)


class FlowSizePolicy(SwitchingPolicy):
    kind = PolicyKind.FS

    def wants_dch(self, queue_len, flow_size):
        return flow_size > self.config.s

    def resets_flow_on_vacate(self, flow_size):
        return True


class QueueFlowSizePolicy(SwitchingPolicy):
    kind = PolicyKind.QSFS

    def wants_dch(self, queue_len, flow_size):
        return queue_len > self.config.t_h and flow_size > self.config.s

    def resets_flow_on_vacate(self, flow_size):
        return True


class FsDchPolicy(SwitchingPolicy):
    """First `s` packets of every new flow go to DCH as soon as possible;
    old flows come back to DCH only above T_h. Waiters: new flows FCFS first,
    then old flows by largest queue."""

    kind = PolicyKind.FSDCH

    def is_new_flow(self, flow_size):
        return flow_size <= self.config.s

    def wants_dch(self, queue_len, flow_size):
        return self.is_new_flow(flow_size) or queue_len > self.config.t_h

    def on_served_dch(self, conn, queue_len, flow_size, pool, requests, timer_pending=False):
        if queue_len >= self.config.t_l:
            return DchAction.NONE
        if not self.is_new_flow(flow_size) and pool.full and requests:
            return DchAction.PREEMPT_NOW
        return DchAction.NONE if timer_pending else DchAction.START_TIMER

    def resets_flow_on_vacate(self, flow_size):
        return self.is_new_flow(flow_size)

    def select_waiter(self, requests, flows, queues, now):
        entries = list(requests)
        if not entries:
            raise SimulationError("select_waiter called with an empty request set")
        new_flows = [e for e in entries if self.is_new_flow(flows[e.conn].flow_size)]
        if new_flows:
            return _oldest(new_flows)
        return _argmax_queue(entries, queues)


class PinnedPolicy(SwitchingPolicy):
    """Giữ connection trên một channel cố định (dùng cho validation)"""

    reads_flow_size = False

    def __init__(self, config: PolicyConfig, channel: ChannelKind):
        super().__init__(config)
        self.channel = channel
        self.kind = config.kind

    def wants_dch(self, queue_len, flow_size):
        return self.channel is ChannelKind.DCH

    def on_served_dch(self, conn, queue_len, flow_size, pool, requests, timer_pending=False):
        return DchAction.NONE


POLICY_CLASSES = {
    PolicyKind.QS: QueueSizePolicy,
    PolicyKind.FS: FlowSizePolicy,
    PolicyKind.QSFS: QueueFlowSizePolicy,
    PolicyKind.FSDCH: FsDchPolicy,
    PolicyKind.MT: ModifiedThresholdPolicy,
}


def build_policy(config: PolicyConfig, pin_channel=None) -> SwitchingPolicy:
    if pin_channel is not None:
        return PinnedPolicy(config, ChannelKind(pin_channel))
    return POLICY_CLASSES[config.kind](config)
