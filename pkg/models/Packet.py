# Mô hình dữ liệu packet và burst
from dataclasses import dataclass
from enum import Enum

from utils.errors import ValidationError

ACK_BYTES = 40


class PacketClass(str, Enum):
    DATA = 'DATA'
    ACK = 'ACK'
    CBR = 'CBR'


@dataclass(slots=True)
class Packet:
    """Packet của một TCP connection (hoặc CBR signaling, conn = None)"""

    seq: int
    size: int
    burst_id: int | None
    conn: int | None
    cls: PacketClass = PacketClass.DATA

    def __str__(self):
        return f"{self.cls.value}#{self.seq} b={self.burst_id}"

    @classmethod
    def ack_for(cls, data):
        return cls(data.seq, ACK_BYTES, data.burst_id, data.conn, PacketClass.ACK)


@dataclass(slots=True)
class Burst:
    """Một burst dữ liệu do ON/OFF source sinh ra"""

    id: int
    conn: int
    size: int
    generated_at: float

    def __post_init__(self):
        if self.size < 1:
            raise ValidationError(f"burst size must be >= 1, got {self.size}", field="size")
