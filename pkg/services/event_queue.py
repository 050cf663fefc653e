# Kernel discrete-event: event queue có thứ tự (fire_at, seq), cancel, run_until
import heapq
from dataclasses import dataclass
from enum import Enum
from typing import Any, Callable

from utils.errors import SchedulingError


class EventKind(str, Enum):
    """Các loại event của simulator"""

    BURST = 'burst'
    ARRIVAL = 'arrival'
    TX_DONE = 'tx_done'
    SWITCH_DONE = 'switch_done'
    TIMER = 'timer'
    FLOW_IDLE = 'flow_idle'
    CBR = 'cbr'
    ACK = 'ack'


PENDING, FIRED, CANCELLED = 0, 1, 2


@dataclass(slots=True, eq=False)
class Event:
    """Event; thứ tự dispatch là (fire_at, seq), seq tăng theo thứ tự insert"""

    fire_at: float
    seq: int = 0
    kind: EventKind = EventKind.BURST
    subject: Any = None
    payload: Any = None
    state: int = PENDING

    @property
    def pending(self):
        return self.state == PENDING


Handler = Callable[[Event], None]


class EventQueue:
    """Simulation clock + priority queue.

    Heap entries are `(fire_at, seq, event)` tuples. Cancelled events are
    dropped lazily when they reach the head of the heap, `len()` counts only
    pending ones.
    """

    def __init__(self, tracer=None, observer=None):
        self.clock = 0.0
        self._heap = []
        self._seq = 0
        self._pending = 0
        self._handlers = {}
        self.dispatched = 0
        self.tracer = tracer
        self.observer = observer

    def __len__(self):
        return self._pending

    def on(self, kind: EventKind, handler: Handler):
        """Đăng ký handler cho một loại event"""
        self._handlers[kind] = handler

    def schedule(self, event: Event) -> Event:
        if event.fire_at < self.clock:
            raise SchedulingError(
                f"event {event.kind.value} for {event.subject} at t={event.fire_at:.9f} "
                f"is before clock t={self.clock:.9f}"
            )
        self._seq += 1
        event.seq = self._seq
        event.state = PENDING
        heapq.heappush(self._heap, (event.fire_at, self._seq, event))
        self._pending += 1
        return event

    def schedule_at(self, fire_at, kind, subject=None, payload=None) -> Event:
        return self.schedule(Event(fire_at, 0, kind, subject, payload))

    def schedule_in(self, delay, kind, subject=None, payload=None) -> Event:
        return self.schedule(Event(self.clock + delay, 0, kind, subject, payload))

    def cancel(self, handle: Event | None) -> bool:
        if handle is None or handle.state != PENDING:
            return False
        handle.state = CANCELLED
        self._pending -= 1
        return True

    def peek_time(self):
        """fire_at của event pending sớm nhất (None nếu rỗng)"""
        heap = self._heap
        while heap and heap[0][2].state != PENDING:
            heapq.heappop(heap)
        return heap[0][0] if heap else None

    def run_until(self, t_end) -> int:
        if t_end < self.clock:
            raise SchedulingError(f"run_until({t_end}) is before clock t={self.clock}")
        heap = self._heap
        handlers = self._handlers
        tracer = self.tracer
        observer = self.observer
        count = 0
        pop = heapq.heappop
        while heap:
            fire_at, _, event = heap[0]
            if event.state != PENDING:
                pop(heap)
                continue
            if fire_at > t_end:
                break
            pop(heap)
            event.state = FIRED
            self._pending -= 1
            self.clock = fire_at
            if tracer is not None:
                tracer(event)
            handlers[event.kind](event)
            if observer is not None:
                observer(event)
            count += 1
        self.clock = t_end
        self.dispatched += count
        return count
