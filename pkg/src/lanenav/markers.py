"""Grid fiducial codec: 8x8 black/white tags standing in for printed QR codes.

Layout: outer ring all black; the interior 6x6 carries 36 bits row-major:
3 sync bits (1,0,1), 1 kind bit, 16 id bits, 8 aux bits, 8 CRC bits.
A set bit renders as a black cell.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

GRID_SIZE = 8
SYNC_BITS = (1, 0, 1)
CRC_POLY = 0x07


class MarkerKind(Enum):
    NODE = 0
    EDGE = 1


@dataclass(frozen=True)
class MarkerPayload:
    kind: MarkerKind
    id: int  # QrId for NODE markers, EdgeId for EDGE markers
    aux: int = 0  # EDGE: decimeters to the from-node, saturated at 255

    def __post_init__(self) -> None:
        if not 0 <= self.id < (1 << 16):
            raise ValueError("id out of 16-bit range")
        if not 0 <= self.aux < (1 << 8):
            raise ValueError("aux out of 8-bit range")
        if self.kind is MarkerKind.NODE and self.aux != 0:
            raise ValueError("node markers carry aux=0")


def crc8(bits: list[int], poly: int = CRC_POLY, init: int = 0x00) -> int:
    """Bit-serial CRC-8, MSB first, over an arbitrary-length bit string."""
    reg = init
    for b in bits:
        reg ^= (b & 1) << 7
        if reg & 0x80:
            reg = ((reg << 1) ^ poly) & 0xFF
        else:
            reg = (reg << 1) & 0xFF
    return reg


def _message_bits(p: MarkerPayload) -> list[int]:
    bits = [p.kind.value]
    bits += [(p.id >> (15 - i)) & 1 for i in range(16)]
    bits += [(p.aux >> (7 - i)) & 1 for i in range(8)]
    return bits


class AmbiguousPayloadError(ValueError):
    """Payload whose tag would also validate under a wrong rotation."""


def _encode_raw(p: MarkerPayload) -> np.ndarray:
    msg = _message_bits(p)
    crc = crc8(msg)
    interior = list(SYNC_BITS) + msg + [(crc >> (7 - i)) & 1 for i in range(8)]
    grid = np.ones((GRID_SIZE, GRID_SIZE), dtype=bool)
    inner = np.array(interior, dtype=bool).reshape(6, 6)
    grid[1:7, 1:7] = inner
    return grid


def is_encodable(p: MarkerPayload) -> bool:
    """True when the payload's tag validates under exactly one rotation.

    With 3 sync + 8 CRC check bits, a small fraction (~0.15%) of payloads
    produce a grid that also parses under a 90/180/270-degree rotation; such
    payloads cannot be decoded reliably and are excluded from the format,
    the same way square-tag dictionaries exclude rotation-symmetric codes.
    """
    return _valid_rotations(_encode_raw(p)) == 1


def encode_marker(p: MarkerPayload) -> np.ndarray:
    """Encode a payload into an 8x8 boolean grid (True = black).

    Raises AmbiguousPayloadError for payloads outside the usable dictionary
    (see is_encodable).
    """
    grid = _encode_raw(p)
    if _valid_rotations(grid) != 1:
        raise AmbiguousPayloadError(f"payload {p} is rotation-ambiguous")
    return grid


def _parse_oriented(g: np.ndarray) -> MarkerPayload | None:
    """Parse one fixed orientation; None when border/sync/CRC rejects it."""
    ring = np.concatenate([g[0, :], g[-1, :], g[:, 0], g[:, -1]])
    if not ring.all():
        return None
    bits = g[1:7, 1:7].astype(int).ravel().tolist()
    if tuple(bits[:3]) != SYNC_BITS:
        return None
    msg, crc_bits = bits[3:28], bits[28:36]
    crc_read = 0
    for b in crc_bits:
        crc_read = (crc_read << 1) | b
    if crc8(msg) != crc_read:
        return None
    kind = MarkerKind(msg[0])
    ident = 0
    for b in msg[1:17]:
        ident = (ident << 1) | b
    aux = 0
    for b in msg[17:25]:
        aux = (aux << 1) | b
    if kind is MarkerKind.NODE and aux != 0:
        return None
    return MarkerPayload(kind, ident, aux)


def _valid_rotations(grid: np.ndarray) -> int:
    return sum(_parse_oriented(np.rot90(grid, k)) is not None for k in range(4))


def decode_grid(grid: np.ndarray) -> MarkerPayload | None:
    """Decode an 8x8 boolean grid; all four rotations are tried.

    Returns None when the border is broken, no rotation matches the sync
    pattern, the CRC fails, or more than one rotation validates (ambiguous
    orientation is treated as a decode failure rather than a guess).
    """
    if grid.shape != (GRID_SIZE, GRID_SIZE):
        return None
    results = [
        p for k in range(4) if (p := _parse_oriented(np.rot90(grid, k))) is not None
    ]
    if len(results) != 1:
        return None
    return results[0]
