# Audit mode: kiểm tra invariant sau mỗi event, raise InvariantViolation khi sai
from services.event_queue import EventKind
from services.radio_service import ChannelKind, Discipline
from utils.errors import InvariantViolation
from utils.logger import sim_logger

EPS = 1e-9


class InvariantMonitor:
    """Observer gắn vào kernel của một CellSimulation.

    Checks run after every dispatched event (capacity, conservation, window,
    request set, request wait, flow-size accounting) and at the hooks the
    simulation calls when a transmission starts or a DCH is granted (switch
    silence, LAS order, CBR priority, new-flow dominance).
    """

    def __init__(self):
        self.sim = None
        self.checks = 0
        self.max_cbr_wait = 0.0
        self._cbr_busy_until = 0.0
        self._waits = {}
        self._flow_seen = {}

    def attach(self, sim):
        self.sim = sim

    def _fail(self, name, details):
        now = self.sim.now
        sim_logger.log_invariant_violation(name, now, details)
        raise InvariantViolation(name, now, details)

    # -- after every event -----------------------------------------------------

    def after_event(self, event):
        sim = self.sim
        self.checks += 1
        pool = sim.pool

        if pool.in_use > pool.capacity:
            self._fail('dch-capacity', f"{pool.in_use} channels held, capacity {pool.capacity}")
        occupants = [slot.occupant for slot in pool.slots if slot.occupant is not None]
        if len(occupants) != len(set(occupants)):
            self._fail('dch-capacity', f"a connection holds two channels: {occupants}")

        for state in sim.connections:
            sender = state.sender
            if sender.in_flight > sender.window():
                self._fail('window', f"conn {state.conn}: {sender.in_flight} in flight, window {sender.window()}")
            holds = pool.slot_of(state.conn) is not None
            switching_to_dch = state.switch is not None and state.switch.target is ChannelKind.DCH
            on_dch = state.switch is None and state.flow.channel is ChannelKind.DCH
            vacating = state.switch is not None and state.switch.source is ChannelKind.DCH
            if holds != (switching_to_dch or on_dch or vacating):
                self._fail('dch-accounting', f"conn {state.conn}: slot held={holds}, switch={state.switch}")
            if state.conn in sim.requests and not state.on(ChannelKind.FACH):
                self._fail('request-set', f"conn {state.conn} is in R but not settled on FACH")
            self._check_flow_accounting(state, event)

        self._check_request_waits()

        in_system = sim.packets_in_system()
        if in_system != sim.generated:
            self._fail('conservation', f"generated {sim.generated}, accounted {in_system}")

    def _check_flow_accounting(self, state, event):
        """f(i) tăng đúng một mỗi DATA packet served; chỉ reset về 0 ở switch hoặc FACH idle"""
        flow = state.flow
        seen = self._flow_seen.get(state.conn)
        self._flow_seen[state.conn] = (flow.flow_size, state.served)
        if seen is None:
            return
        grown = flow.flow_size - seen[0]
        served = state.served - seen[1]
        if grown == served:
            return
        reset = flow.flow_size == 0 and served == 0 and event.kind in (EventKind.SWITCH_DONE, EventKind.FLOW_IDLE)
        if not reset:
            self._fail('f-accounting', f"conn {state.conn}: f moved by {grown} while {served} packet(s) were served")

    def _check_request_waits(self):
        """W(k) của một entry tăng ngặt giữa hai lần quan sát"""
        now = self.sim.now
        waits = {}
        for entry in self.sim.requests:
            waited = entry.waited(now)
            seen = self._waits.get(entry.conn)
            if seen is not None and now > seen[0] and waited <= seen[1]:
                self._fail('request-wait', f"conn {entry.conn}: W went from {seen[1]:.6f} to {waited:.6f}")
            waits[entry.conn] = (now, waited)
        self._waits = waits

    # -- hooks -----------------------------------------------------------------

    def on_data_start(self, conn, channel, candidates, now):
        sim = self.sim
        state = sim.connections[conn]
        if state.switch is not None:
            self._fail('switch-silence', f"conn {conn} transmits on {channel.value} while switching")
        if channel is ChannelKind.FACH and candidates and sim.fach.discipline is Discipline.LAS:
            smallest = min(sim.flows[c].flow_size for c in candidates)
            if sim.flows[conn].flow_size != smallest:
                self._fail('las-order', f"conn {conn} has f={sim.flows[conn].flow_size}, minimum is {smallest}")
        if channel is ChannelKind.FACH and sim.fach.cbr_queue:
            self._fail('cbr-priority', f"data packet of conn {conn} started while CBR is queued")

    def on_cbr_start(self, queued_at, now):
        """Một CBR packet chỉ chờ tối đa một data packet (trừ khi xếp sau CBR khác)"""
        sim = self.sim
        channel = sim.fach.channel
        waited = now - queued_at
        behind_cbr = queued_at < self._cbr_busy_until
        self._cbr_busy_until = now + channel.transmission_time(sim.config.cbr_packet_bytes)
        if behind_cbr:
            return
        self.max_cbr_wait = max(self.max_cbr_wait, waited)
        bound = channel.transmission_time(sim.config.packet_size)
        if waited > bound + EPS:
            self._fail('cbr-priority', f"CBR packet waited {waited:.6f}s, bound {bound:.6f}s")

    def on_grant(self, winner, snapshot):
        sim = self.sim
        policy = sim.policy
        if not hasattr(policy, 'is_new_flow'):
            return
        has_new = [e.conn for e in snapshot if policy.is_new_flow(sim.flows[e.conn].flow_size)]
        if has_new and winner not in has_new:
            self._fail('new-flow-dominance', f"granted old flow {winner} while new flows {has_new} wait")

    def finish(self):
        """Kiểm tra cuối run"""
        sim = self.sim
        if sim.packets_in_system() != sim.generated:
            self._fail('conservation', "packet accounting drifted by end of run")
