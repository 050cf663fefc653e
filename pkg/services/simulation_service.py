# CellSimulation: ghép kernel, traffic, TCP, NodeB queues, FACH/DCH và policy
import hashlib
import time

from config.scenario import ScenarioConfig
from models.Packet import Burst, Packet, PacketClass
from services.event_queue import EventKind, EventQueue
from services.metrics_service import BurstRecord, MetricsCollector, RunSummary, summarize
from services.policy_service import DchAction, FachAction, FlowState, RequestSet, TimerAction, build_policy
from services.radio_service import (
    CBR, CbrSource, ChannelKind, DchPool, FachState, NodeBQueue, RadioChannel, SwitchJob, SwitchManager,
    fach_select_next,
)
from services.random_streams import StreamFactory
from services.traffic_service import (
    SourceState, SourceStreams, TrafficParams, first_burst_delay, next_burst_event,
)
from services.transport_service import BackhaulLink, TcpSender, route_ack
from utils.errors import SimulationError, ValidationError
from utils.logger import sim_logger


class ConnectionState:
    """Mọi state của một TCP connection trong cell"""

    __slots__ = ('conn', 'queue', 'flow', 'switch', 'idle_timer', 'sender', 'link',
                 'source', 'streams', 'in_backhaul', 'served')

    def __init__(self, conn, config: ScenarioConfig, factory: StreamFactory):
        self.conn = conn
        self.queue = NodeBQueue(conn)
        self.flow = FlowState(conn)
        self.switch: SwitchJob | None = None
        self.idle_timer = None
        self.sender = TcpSender(conn, config.packet_size, config.initial_cwnd, config.w_max)
        self.link = BackhaulLink(config.backhaul_rate, config.backhaul_delay)
        self.source = SourceState(conn)
        self.streams = SourceStreams(factory, conn)
        self.in_backhaul = 0
        self.served = 0

    @property
    def settled(self):
        return self.switch is None

    def on(self, channel: ChannelKind):
        return self.switch is None and self.flow.channel is channel


class FlowSizeView:
    """f(i) theo connection id, đọc trực tiếp từ FlowState (không copy)"""

    __slots__ = ('flows',)

    def __init__(self, flows):
        self.flows = flows

    def __getitem__(self, conn):
        return self.flows[conn].flow_size


class TraceWriter:
    """Ghi một dòng mỗi event dispatch và giữ SHA-256 của toàn bộ trace"""

    def __init__(self, stream=None):
        self.stream = stream
        self._hash = hashlib.sha256()
        self.lines = 0

    @staticmethod
    def format(event):
        payload = event.payload
        if payload is None:
            detail = '-'
        elif isinstance(payload, SwitchJob):
            detail = f"{payload.source.value}->{payload.target.value}"
        elif isinstance(payload, RadioChannel):
            detail = str(payload.current) if payload.current is not None else '-'
        else:
            detail = str(payload)
        subject = '-' if event.subject is None else event.subject
        return f"{event.fire_at:.9f} {event.kind.value} {subject} {detail}\n"

    def __call__(self, event):
        line = self.format(event)
        self._hash.update(line.encode())
        self.lines += 1
        if self.stream is not None:
            self.stream.write(line)

    @property
    def digest(self):
        return self._hash.hexdigest()


class CellSimulation:
    """Một run mô phỏng downlink của một cell.

    Connections start on FACH. The switching policy is consulted on every
    enqueue and after every service completion; switch decisions for a
    connection that is mid-switch wait until the switch completes.
    """

    def __init__(self, config: ScenarioConfig, tracer=None, monitor=None):
        self.config = config.validate()
        self.tracer = tracer
        self.monitor = monitor
        self.kernel = EventQueue(tracer=tracer, observer=monitor.after_event if monitor else None)
        self.factory = StreamFactory(config.seed)
        self.policy = build_policy(config.policy, config.pin_channel)
        self.pool = DchPool(config.n_dch, config.dch_rate, config.radio_delay)
        self.switches = SwitchManager(self.pool, config.switch_delay)
        self.fach = FachState(config.scheduler, config.fach_rate, config.radio_delay)
        self.cbr = CbrSource(config.cbr_packet_bytes, config.cbr_interval)
        self.requests = RequestSet()
        self.metrics = MetricsCollector(config.warmup_cutoff)
        self.traffic = TrafficParams(
            pareto_shape=config.pareto_shape,
            mean_burst_packets=config.mean_burst_packets,
            t_on=config.t_on,
            p_off=config.p_off,
            t_off=config.t_off,
            burst_cap=config.burst_cap,
        )
        self.connections = [ConnectionState(i, config, self.factory) for i in range(config.n_tcp)]
        self.flows = {c.conn: c.flow for c in self.connections}
        self.queues = {c.conn: c.queue for c in self.connections}
        self.flow_sizes = FlowSizeView(self.flows)
        self.channel_rates = {ChannelKind.FACH: config.fach_rate, ChannelKind.DCH: config.dch_rate}
        self._dch_slots = {slot.channel.name: slot for slot in self.pool.slots}
        self._pending_bursts = {}
        self.generated = 0
        self.delivered = 0
        self._started = False

        k = self.kernel
        k.on(EventKind.BURST, self._on_burst)
        k.on(EventKind.ARRIVAL, self._on_arrival)
        k.on(EventKind.TX_DONE, self._on_tx_done)
        k.on(EventKind.ACK, self._on_ack)
        k.on(EventKind.SWITCH_DONE, self._on_switch_done)
        k.on(EventKind.TIMER, self._on_timer)
        k.on(EventKind.FLOW_IDLE, self._on_flow_idle)
        k.on(EventKind.CBR, self._on_cbr)
        if monitor is not None:
            monitor.attach(self)

    @property
    def now(self):
        return self.kernel.clock

    # -- lifecycle -------------------------------------------------------------

    def start(self):
        if self._started:
            return
        self._started = True
        if self.config.traffic:
            for state in self.connections:
                delay = first_burst_delay(state.streams, self.traffic)
                state.source.handle = self.kernel.schedule_in(delay, EventKind.BURST, state.conn)
        if self.config.cbr_enabled:
            self.kernel.schedule_at(0.0, EventKind.CBR, 'CBR')

    def inject_burst(self, conn, size, at=None):
        """Thêm một burst cố định (không thuộc ON/OFF process) tại thời điểm `at`"""
        if not 0 <= conn < len(self.connections):
            raise ValidationError(f"no connection {conn}", field='conn')
        if size < 1:
            raise ValidationError(f"must be >= 1, got {size}", field='size')
        at = self.now if at is None else at
        return self.kernel.schedule_at(at, EventKind.BURST, conn, int(size))

    def run_until(self, t_end):
        self.start()
        return self.kernel.run_until(t_end)

    def run(self) -> RunSummary:
        config = self.config
        label = config.label()
        sim_logger.log_run_start(label, config.seed, config.duration)
        started = time.perf_counter()
        self.run_until(config.duration)
        if self.monitor is not None:
            self.monitor.finish()
        summary = self.summary()
        wall_ms = (time.perf_counter() - started) * 1000
        digest = self.tracer.digest if isinstance(self.tracer, TraceWriter) else None
        sim_logger.log_run_complete(label, self.kernel.dispatched, summary.n_bursts, wall_ms, digest)
        return summary

    def summary(self) -> RunSummary:
        config = self.config
        stats = summarize(self.metrics.records())
        measured = max(self.now - config.warmup_cutoff, 1e-12)
        util_fach = self.fach.channel.busy_time / measured
        util_dch = sum(slot.channel.busy_time for slot in self.pool.slots) / (config.n_dch * measured)
        flows = sum(c.flow.flows_started for c in self.connections)
        p = config.policy
        return RunSummary(
            policy=p.kind.value,
            scheduler=config.scheduler.value,
            n_tcp=config.n_tcp,
            n_dch=config.n_dch,
            s=p.s,
            t_h=p.t_h,
            t_l=p.t_l,
            t_out=p.t_out,
            seed=config.seed,
            duration_s=config.duration,
            n_bursts=stats.n_bursts,
            mean_response_s=stats.mean_response_s,
            slowdown_aggregate=stats.slowdown_aggregate,
            slowdown_per_burst=stats.slowdown_per_burst,
            util_fach=util_fach,
            util_dch=util_dch,
            switches_per_flow=self.switches.completed / flows if flows else 0.0,
        )

    def packets_in_system(self):
        """generated = buffered + backhaul + NodeB queues + on air + delivered"""
        buffered = sum(c.sender.buffered for c in self.connections)
        backhaul = sum(c.in_backhaul for c in self.connections)
        queued = sum(len(c.queue) for c in self.connections)
        on_air = 0
        for channel in [self.fach.channel] + [slot.channel for slot in self.pool.slots]:
            if channel.current is not None and channel.current.cls is PacketClass.DATA:
                on_air += 1
        return buffered + backhaul + queued + on_air + self.delivered

    # -- traffic + transport ---------------------------------------------------

    def _on_burst(self, event):
        state = self.connections[event.subject]
        now = self.now
        if event.payload is not None:
            src = state.source
            burst = Burst(src.next_burst_id, state.conn, event.payload, now)
            src.next_burst_id += 1
        else:
            burst, _, delay = next_burst_event(state.source, state.streams, self.traffic, now)
            state.source.handle = self.kernel.schedule_in(delay, EventKind.BURST, state.conn)
        self.generated += burst.size
        self._pending_bursts[(state.conn, burst.id)] = burst
        self._send(state, state.sender.on_burst(burst))

    def _send(self, state: ConnectionState, packets):
        now = self.now
        for packet in packets:
            arrival = state.link.send(packet, now)
            state.in_backhaul += 1
            self.kernel.schedule_at(arrival, EventKind.ARRIVAL, state.conn, packet)

    def _on_ack(self, event):
        state = self.connections[event.subject]
        ack = event.payload
        before = state.sender.spurious_acks
        released, completed = state.sender.on_ack(ack, self.now)
        if state.sender.spurious_acks != before:
            sim_logger.log_spurious_ack(state.conn, ack.seq)
            return
        if completed is not None:
            burst = self._pending_bursts.pop((state.conn, completed))
            self.metrics.record(BurstRecord(state.conn, burst.id, burst.size, burst.generated_at, self.now))
        self._send(state, released)

    # -- NodeB -----------------------------------------------------------------

    def _on_arrival(self, event):
        state = self.connections[event.subject]
        state.in_backhaul -= 1
        state.flow.note_arrival(self.now, self.config.policy.t_out)
        state.queue.push(event.payload)
        if state.on(ChannelKind.FACH):
            self.kernel.cancel(state.idle_timer)
            state.idle_timer = None
            self._evaluate_fach(state)
            if state.on(ChannelKind.FACH):
                self._kick_fach()
        elif state.on(ChannelKind.DCH):
            flow = state.flow
            # arrival trên DCH: restart inactivity timer từ thời điểm này
            if self.kernel.cancel(flow.timer):
                flow.timer = self.kernel.schedule_in(self.config.policy.t_out, EventKind.TIMER, state.conn)
            self._kick_dch(state)

    def _evaluate_fach(self, state: ConnectionState):
        action = self.policy.on_enqueue(
            state.conn, len(state.queue), state.flow.flow_size, self.pool, self.requests, self.now
        )
        if action is FachAction.SWITCH_NOW:
            self.requests.remove(state.conn)
            self._begin_switch(state, ChannelKind.FACH, ChannelKind.DCH, reason='threshold')

    def _begin_switch(self, state: ConnectionState, source, target, reset_flow=False, reason=''):
        now = self.now
        job = self.switches.begin_switch(state.conn, source, target, now, reset_flow, reason)
        state.switch = job
        job.handle = self.kernel.schedule_at(job.completes_at, EventKind.SWITCH_DONE, state.conn, job)
        self.kernel.cancel(state.idle_timer)
        state.idle_timer = None
        self.kernel.cancel(state.flow.timer)
        state.flow.timer = None
        sim_logger.log_switch(now, state.conn, source.value, target.value, reason)
        return job

    def _on_switch_done(self, event):
        state = self.connections[event.subject]
        job = event.payload
        target = self.switches.complete_switch(job)
        state.switch = None
        state.flow.channel = target
        if target is ChannelKind.DCH:
            if state.queue:
                self._kick_dch(state)
            else:
                self._after_dch_service(state)
            return

        if job.reset_flow:
            state.flow.flow_size = 0
        self._grant_free_channels()
        if state.queue:
            self._evaluate_fach(state)
        if state.on(ChannelKind.FACH) and not state.queue:
            self._start_idle_timer(state)
        self._kick_fach()

    def _grant_free_channels(self):
        while True:
            snapshot = list(self.requests) if self.monitor is not None else None
            winner = self.policy.on_dch_freed(self.pool, self.requests, self.flows, self.queues, self.now)
            if winner is None:
                return
            state = self.connections[winner]
            if not state.on(ChannelKind.FACH):
                raise SimulationError(f"connection {winner} was granted a DCH while not settled on FACH")
            if self.monitor is not None:
                self.monitor.on_grant(winner, snapshot)
            self._begin_switch(state, ChannelKind.FACH, ChannelKind.DCH, reason='grant')

    def _start_idle_timer(self, state: ConnectionState):
        if self.policy.reads_flow_size and state.idle_timer is None:
            state.idle_timer = self.kernel.schedule_in(self.config.policy.t_out, EventKind.FLOW_IDLE, state.conn)

    def _on_flow_idle(self, event):
        state = self.connections[event.subject]
        state.idle_timer = None
        if state.on(ChannelKind.FACH) and not state.queue:
            self.policy.reset_flow_on_fach_idle(state.flow, self.now)

    # -- FACH ------------------------------------------------------------------

    def _on_cbr(self, event):
        _, next_at = self.cbr.cbr_tick(self.fach, self.now)
        self.kernel.schedule_at(next_at, EventKind.CBR, 'CBR')
        self._kick_fach()

    def _kick_fach(self):
        channel = self.fach.channel
        if channel.busy:
            return
        now = self.now
        candidates = [c.conn for c in self.connections if c.queue and c.on(ChannelKind.FACH)]
        choice = fach_select_next(self.fach, candidates, self.flow_sizes)
        if choice is None:
            return
        if choice == CBR:
            packet, queued_at = self.fach.cbr_queue.popleft()
            if self.monitor is not None:
                self.monitor.on_cbr_start(queued_at, now)
        else:
            packet = self.connections[choice].queue.pop()
            self.fach.cursor = choice
            if self.monitor is not None:
                self.monitor.on_data_start(choice, ChannelKind.FACH, candidates, now)
        done = channel.transmit(packet, now)
        self.kernel.schedule_at(done, EventKind.TX_DONE, channel.name, channel)

    # -- DCH -------------------------------------------------------------------

    def _kick_dch(self, state: ConnectionState):
        if not state.queue or not state.on(ChannelKind.DCH):
            return
        channel = self.pool.slot_of(state.conn).channel
        if channel.busy:
            return
        if self.monitor is not None:
            self.monitor.on_data_start(state.conn, ChannelKind.DCH, None, self.now)
        done = channel.transmit(state.queue.pop(), self.now)
        self.kernel.schedule_at(done, EventKind.TX_DONE, channel.name, channel)

    def _after_dch_service(self, state: ConnectionState):
        flow = state.flow
        action = self.policy.on_served_dch(
            state.conn, len(state.queue), flow.flow_size, self.pool, self.requests,
            timer_pending=flow.timer is not None and flow.timer.pending,
        )
        if action is DchAction.START_TIMER:
            flow.timer = self.kernel.schedule_in(self.config.policy.t_out, EventKind.TIMER, state.conn)
        elif action is DchAction.PREEMPT_NOW:
            self._begin_switch(state, ChannelKind.DCH, ChannelKind.FACH, reset_flow=False, reason='preempt')

    def _on_timer(self, event):
        state = self.connections[event.subject]
        flow = state.flow
        flow.timer = None
        if not state.on(ChannelKind.DCH):
            return
        action = self.policy.on_timer_expired(state.conn, len(state.queue), self.pool, self.requests)
        if action is TimerAction.VACATE_AND_GRANT:
            reset = self.policy.resets_flow_on_vacate(flow.flow_size)
            self._begin_switch(state, ChannelKind.DCH, ChannelKind.FACH, reset_flow=reset, reason='timeout')
        else:
            flow.timer = self.kernel.schedule_in(self.config.policy.t_out, EventKind.TIMER, state.conn)

    # -- service completion ----------------------------------------------------

    def _on_tx_done(self, event):
        channel = event.payload
        packet = channel.finish(count_from=self.config.warmup_cutoff)
        if packet.cls is PacketClass.CBR:
            self._kick_fach()
            return

        state = self.connections[packet.conn]
        state.flow.serve()
        state.served += 1
        self.delivered += 1
        if not state.queue:
            state.flow.note_drained(self.now)
        source = state.switch.source if state.switch is not None else None
        path = route_ack(state.flow.channel, source, self.channel_rates, self.config.backhaul_delay)
        self.kernel.schedule_in(channel.propagation_delay + path.delay, EventKind.ACK, state.conn,
                                Packet.ack_for(packet))

        if channel is self.fach.channel:
            if state.on(ChannelKind.FACH):
                if state.queue:
                    self._evaluate_fach(state)
                else:
                    self._start_idle_timer(state)
            self._kick_fach()
            return

        if state.on(ChannelKind.DCH):
            self._after_dch_service(state)
        owner = self._dch_slots[channel.name].occupant
        if owner is not None:
            self._kick_dch(self.connections[owner])


def run_simulation(config: ScenarioConfig, trace_path=None, audit=False, setup=None):
    """Chạy một scenario; trả về (RunSummary, trace digest hoặc None).

    `setup` is called with the simulation before it starts (burst injection).
    """
    from services.audit_service import InvariantMonitor

    monitor = InvariantMonitor() if audit else None
    if trace_path is None:
        sim = CellSimulation(config, monitor=monitor)
        if setup is not None:
            setup(sim)
        return sim.run(), None
    with open(trace_path, 'w', encoding='utf-8') as stream:
        tracer = TraceWriter(stream)
        sim = CellSimulation(config, tracer=tracer, monitor=monitor)
        if setup is not None:
            setup(sim)
        summary = sim.run()
    return summary, tracer.digest
