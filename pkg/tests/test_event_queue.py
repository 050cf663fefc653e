import pytest

from services.event_queue import EventKind, EventQueue
from utils.errors import SchedulingError


def _recorder(queue, log):
    def handler(event):
        log.append((queue.clock, event.kind, event.subject))
    for kind in EventKind:
        queue.on(kind, handler)


def test_dispatch_in_time_order():
    queue = EventQueue()
    log = []
    _recorder(queue, log)
    queue.schedule_at(2.0, EventKind.ACK, 'b')
    queue.schedule_at(1.0, EventKind.BURST, 'a')
    queue.schedule_at(3.0, EventKind.TIMER, 'c')

    assert queue.run_until(10.0) == 3
    assert [s for _, _, s in log] == ['a', 'b', 'c']
    assert queue.clock == 10.0


def test_simultaneous_events_fire_in_insertion_order():
    queue = EventQueue()
    log = []
    _recorder(queue, log)
    for name in 'xyz':
        queue.schedule_at(5.0, EventKind.ARRIVAL, name)

    queue.run_until(5.0)
    assert [s for _, _, s in log] == ['x', 'y', 'z']


def test_cancelled_event_never_fires():
    queue = EventQueue()
    log = []
    _recorder(queue, log)
    handle = queue.schedule_at(1.0, EventKind.TIMER, 'gone')
    queue.schedule_at(2.0, EventKind.TIMER, 'kept')

    assert queue.cancel(handle) is True
    assert queue.cancel(handle) is False
    assert len(queue) == 1
    queue.run_until(5.0)
    assert [s for _, _, s in log] == ['kept']


def test_schedule_in_the_past_is_rejected():
    queue = EventQueue()
    _recorder(queue, [])
    queue.schedule_at(3.0, EventKind.BURST, 0)
    queue.run_until(3.0)
    with pytest.raises(SchedulingError):
        queue.schedule_at(2.0, EventKind.BURST, 0)


def test_events_after_horizon_stay_pending():
    queue = EventQueue()
    log = []
    _recorder(queue, log)
    queue.schedule_at(1.0, EventKind.CBR, 'early')
    queue.schedule_at(7.0, EventKind.CBR, 'late')

    queue.run_until(5.0)
    assert [s for _, _, s in log] == ['early']
    assert queue.peek_time() == 7.0
    queue.run_until(8.0)
    assert [s for _, _, s in log] == ['early', 'late']


def test_handlers_can_schedule_followups():
    queue = EventQueue()
    fired = []

    def tick(event):
        fired.append(queue.clock)
        if len(fired) < 4:
            queue.schedule_in(0.5, EventKind.CBR)

    queue.on(EventKind.CBR, tick)
    queue.schedule_at(0.0, EventKind.CBR)
    queue.run_until(10.0)
    assert fired == [0.0, 0.5, 1.0, 1.5]


def test_tracer_and_observer_wrap_each_dispatch():
    calls = []
    queue = EventQueue(tracer=lambda e: calls.append(('trace', e.subject)),
                       observer=lambda e: calls.append(('after', e.subject)))
    queue.on(EventKind.BURST, lambda e: calls.append(('handle', e.subject)))
    queue.schedule_at(1.0, EventKind.BURST, 1)

    queue.run_until(2.0)
    assert calls == [('trace', 1), ('handle', 1), ('after', 1)]
    assert queue.dispatched == 1
