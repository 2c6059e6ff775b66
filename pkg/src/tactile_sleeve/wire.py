"""Host-to-sleeve wire codec and PWM driver chain emulation.

Frame layout (43 octets total):

    magic   2 octets  0xAA 0x55
    version 1 octet   0x01
    seq     1 octet   monotonically increasing modulo 256
    payload 38 octets 25 channel values, 12 bits each, big-endian bit
                      order, motor 0 first; 4 zero pad bits at the end
    crc     1 octet   CRC-8 (poly 0x07, init 0x00) over version, seq
                      and payload

The 24-channel driver shifts 288 bits (channel 23 first, MSB first) and
copies the shift register to its outputs only on latch. The 25th motor
hangs off the controller's own PWM pin, carried here as "aux".
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence, Tuple

from .mapping import GRID_CELLS, MAX_DUTY, MotorGrid

MAGIC = b"\xaa\x55"
VERSION = 0x01
PAYLOAD_LEN = 38  # 25 * 12 bits + 4 pad bits
FRAME_LEN = 2 + 1 + 1 + PAYLOAD_LEN + 1
DRIVER_CHANNELS = 24
DRIVER_BYTES = DRIVER_CHANNELS * 12 // 8  # 36


class WireError(ValueError):
    """Base class for frame decode failures."""


class BadLength(WireError):
    pass


class BadMagic(WireError):
    pass


class BadVersion(WireError):
    pass


class BadCrc(WireError):
    """Frame corrupted in transit (checksum mismatch)."""


def _crc8_table() -> list:
    table = []
    for byte in range(256):
        crc = byte
        for _ in range(8):
            crc = ((crc << 1) ^ 0x07) & 0xFF if crc & 0x80 else (crc << 1) & 0xFF
        table.append(crc)
    return table


_CRC8_TABLE = _crc8_table()


def crc8(data: bytes) -> int:
    """CRC-8, polynomial 0x07, init 0x00, no reflection or final xor."""
    crc = 0
    for byte in data:
        crc = _CRC8_TABLE[crc ^ byte]
    return crc


def pack12(values: Sequence[int], pad_bits: int = 0) -> bytes:
    """Pack values as consecutive 12-bit fields, MSB first, first value
    first, followed by `pad_bits` zero bits."""
    acc = 0
    for v in values:
        if not (0 <= v <= MAX_DUTY):
            raise ValueError(f"channel value {v} out of [0, {MAX_DUTY}]")
        acc = (acc << 12) | v
    acc <<= pad_bits
    nbits = 12 * len(values) + pad_bits
    if nbits % 8:
        raise ValueError("packed length is not a whole number of octets")
    return acc.to_bytes(nbits // 8, "big")


def unpack12(data: bytes, count: int) -> Tuple[int, ...]:
    """Inverse of pack12: first `count` 12-bit fields of `data`."""
    if len(data) * 8 < count * 12:
        raise ValueError("not enough octets to unpack")
    acc = int.from_bytes(data, "big")
    shift = len(data) * 8 - 12
    out = []
    for _ in range(count):
        out.append((acc >> shift) & 0xFFF)
        shift -= 12
    return tuple(out)


def encode_wireframe(grid: MotorGrid, seq: int) -> bytes:
    """Serialize a motor grid as one 43-octet wire frame."""
    if not (0 <= seq <= 0xFF):
        raise ValueError("seq must fit in one octet")
    payload = pack12(grid.intensities, pad_bits=4)
    body = bytes([VERSION, seq]) + payload
    return MAGIC + body + bytes([crc8(body)])


def decode_wireframe(octets: bytes) -> Tuple[MotorGrid, int]:
    """Parse a wire frame back into (grid, seq).

    CRC is verified before the version octet so that any corruption of
    the CRC-covered region reports as BadCrc rather than a protocol
    mismatch.
    """
    if len(octets) != FRAME_LEN:
        raise BadLength(f"expected {FRAME_LEN} octets, got {len(octets)}")
    if octets[:2] != MAGIC:
        raise BadMagic(f"bad magic {octets[:2].hex()}")
    body, crc = octets[2:-1], octets[-1]
    if crc8(body) != crc:
        raise BadCrc("checksum mismatch")
    if body[0] != VERSION:
        raise BadVersion(f"unsupported version {body[0]:#04x}")
    seq = body[1]
    values = unpack12(body[2:], GRID_CELLS)
    return MotorGrid(values), seq


def split_channels(grid: MotorGrid) -> Tuple[Tuple[int, ...], int]:
    """Motors 0..23 go to the driver chain; motor 24 to the aux PWM pin."""
    return grid.intensities[:DRIVER_CHANNELS], grid.intensities[DRIVER_CHANNELS]


def pack_tlc5947(channels: Sequence[int]) -> bytes:
    """Shift-order packing for the 24-channel driver: channel 23 enters
    the chain first, each channel as 12 bits MSB first."""
    if len(channels) != DRIVER_CHANNELS:
        raise ValueError(f"need exactly {DRIVER_CHANNELS} channel values")
    return pack12(list(reversed(channels)))


def unpack_tlc5947(data: bytes) -> Tuple[int, ...]:
    if len(data) != DRIVER_BYTES:
        raise ValueError(f"need exactly {DRIVER_BYTES} octets")
    return tuple(reversed(unpack12(data, DRIVER_CHANNELS)))


@dataclass(frozen=True)
class DriverState:
    """Shift register plus latched outputs of the 24-channel driver,
    with the aux PWM output alongside."""

    shift_register: bytes = b"\x00" * DRIVER_BYTES
    latched_outputs: Tuple[int, ...] = (0,) * DRIVER_CHANNELS
    aux_output: int = 0

    def __post_init__(self):
        if len(self.shift_register) != DRIVER_BYTES:
            raise ValueError("shift register must hold 288 bits")
        if len(self.latched_outputs) != DRIVER_CHANNELS:
            raise ValueError("need 24 latched outputs")


def emulate_driver(state: DriverState, shifted: bytes, latch: bool) -> DriverState:
    """Shift a full 288-bit refill into the register; outputs only
    change when latch is asserted."""
    if len(shifted) != DRIVER_BYTES:
        raise ValueError(f"shift data must be {DRIVER_BYTES} octets")
    outputs = unpack_tlc5947(shifted) if latch else state.latched_outputs
    return DriverState(bytes(shifted), outputs, state.aux_output)


def set_aux(state: DriverState, value: int) -> DriverState:
    if not (0 <= value <= MAX_DUTY):
        raise ValueError("aux value out of range")
    return DriverState(state.shift_register, state.latched_outputs, value)


__all__ = [
    "BadCrc", "BadLength", "BadMagic", "BadVersion", "DRIVER_BYTES",
    "DRIVER_CHANNELS", "DriverState", "FRAME_LEN", "MAGIC", "PAYLOAD_LEN",
    "VERSION", "WireError", "crc8", "decode_wireframe", "emulate_driver",
    "encode_wireframe", "pack12", "pack_tlc5947", "set_aux",
    "split_channels", "unpack12", "unpack_tlc5947",
]
