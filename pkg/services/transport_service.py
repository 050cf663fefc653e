# TCP-lite sender (ACK-clocked, không loss) + backhaul link + ACK routing
import math
from collections import deque
from dataclasses import dataclass

from models.Packet import ACK_BYTES, Burst, Packet


class TcpSender:
    """Sender của một connection.

    cwnd grows by one packet per ACK up to w_max (slow start without loss).
    w_max=None means no window cap.
    """

    def __init__(self, conn, packet_size, initial_cwnd=2, w_max=20):
        self.conn = conn
        self.packet_size = packet_size
        self.cwnd = float(initial_cwnd)
        self.w_max = w_max
        self.in_flight = 0
        self.buffer = deque()
        self.next_seq = 0
        self.spurious_acks = 0
        self._unacked = {}
        self._outstanding = {}

    def window(self):
        limit = math.floor(self.cwnd)
        if self.w_max is not None:
            limit = min(limit, self.w_max)
        return limit

    def headroom(self):
        return max(0, self.window() - self.in_flight)

    def _release(self):
        released = []
        room = self.headroom()
        buffer = self.buffer
        while room > 0 and buffer:
            packet = buffer.popleft()
            self._unacked[packet.seq] = packet.burst_id
            released.append(packet)
            room -= 1
        self.in_flight += len(released)
        return released

    def on_burst(self, burst: Burst):
        """Đưa burst vào send buffer, trả về các packet được phát ngay"""
        for _ in range(burst.size):
            self.buffer.append(Packet(self.next_seq, self.packet_size, burst.id, self.conn))
            self.next_seq += 1
        self._outstanding[burst.id] = self._outstanding.get(burst.id, 0) + burst.size
        return self._release()

    def on_ack(self, ack: Packet, now):
        """Xử lý ACK; trả về (packets released, burst id vừa hoàn thành hoặc None)"""
        burst_id = self._unacked.pop(ack.seq, None)
        if burst_id is None:
            self.spurious_acks += 1
            return [], None

        self.in_flight -= 1
        grown = self.cwnd + 1
        self.cwnd = grown if self.w_max is None else min(grown, float(self.w_max))

        completed = None
        remaining = self._outstanding[burst_id] - 1
        if remaining == 0:
            del self._outstanding[burst_id]
            completed = burst_id
        else:
            self._outstanding[burst_id] = remaining
        return self._release(), completed

    @property
    def buffered(self):
        return len(self.buffer)


class BackhaulLink:
    """FIFO link TCP source -> NodeB (serialization + propagation delay)"""

    def __init__(self, rate_bps=5_000_000, delay=0.030):
        self.rate_bps = rate_bps
        self.delay = delay
        self.busy_until = 0.0

    def send(self, packet: Packet, now):
        """Thời điểm packet tới hàng đợi NodeB"""
        start = max(now, self.busy_until)
        self.busy_until = start + packet.size * 8 / self.rate_bps
        return self.busy_until + self.delay


@dataclass(frozen=True, slots=True)
class AckPath:
    channel: str
    delay: float


def route_ack(assigned_channel, switch_source, channel_rates, backhaul_delay):
    """ACK đi theo channel cũ khi connection đang switch, ngược lại theo channel hiện tại.

    `switch_source` is the channel being left by an in-progress switch (None if
    settled). ACKs use no radio capacity, only delay.
    """
    channel = switch_source if switch_source is not None else assigned_channel
    delay = ACK_BYTES * 8 / channel_rates[channel] + backhaul_delay
    return AckPath(channel, delay)
