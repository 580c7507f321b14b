"""Bit-exact serialization of relay quantization states.

The payload layout is canonical: most significant bit first, antennas in
ascending index order.

  U-PQ   q bits of phase index per antenna.
  U-APQ  per antenna, qbar phase bits followed by q - qbar amplitude-bin
         bits.
  H-APQ  qbar phase bits per antenna, then the amplitude assignment encoded
         as its zero-based lexicographic rank among all valid assignments,
         occupying exactly ceil(log2(#assignments)) bits (zero bits when a
         single assignment exists).

Rank coding is what makes the H-APQ payload meet the information-theoretic
bit count instead of the naive ceil(log2(K)) bits per antenna.

A small byte container wraps a payload for debug dumps: one spec tag byte,
one antenna-count byte, the spec parameters, a 2-byte big-endian bit
length, then the payload packed MSB-first with zero padding in the final
byte.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .quantizers import (
    HAPQ,
    UAPQ,
    UPQ,
    QuantizerSpec,
    RelayState,
    assignment_rank_bits,
    oaq_codeword_count,
    quantizer_bits,
)

_SPEC_TAGS = {UPQ: 1, UAPQ: 2, HAPQ: 3}
_TAG_KINDS = {tag: kind for kind, tag in _SPEC_TAGS.items()}


# ---------------------------------------------------------------------------
# Lexicographic ranking of O-AQ assignments
# ---------------------------------------------------------------------------

def _level_multiplicities(n_antennas, group_size):
    num_levels = -(-n_antennas // group_size)
    counts = [group_size] * (num_levels - 1)
    counts.append(n_antennas - (num_levels - 1) * group_size)
    return counts


def _arrangements(counts):
    """Distinct sequences over the remaining level multiset."""
    total = math.factorial(sum(counts))
    for c in counts:
        total //= math.factorial(c)
    return total


def _check_assignment(assignment, n_antennas, group_size):
    if len(assignment) != n_antennas:
        raise ValueError(f"expected {n_antennas} level indices, got {len(assignment)}")
    counts = _level_multiplicities(n_antennas, group_size)
    seen = [0] * len(counts)
    for level in assignment:
        if not 1 <= level <= len(counts):
            raise ValueError(f"level index {level} out of range 1..{len(counts)}")
        seen[level - 1] += 1
    if seen != counts:
        raise ValueError(f"level multiplicities {seen} violate the O-AQ grouping {counts}")


def rank_assignment(assignment, n_antennas, group_size):
    """Zero-based lexicographic rank of a valid O-AQ level assignment.

    Walks the positions keeping the arrangement count of the remaining
    multiset up to date incrementally: choosing a level with multiplicity c
    out of t open positions leaves count * c / t arrangements, always an
    exact integer.
    """
    _check_assignment(assignment, n_antennas, group_size)
    remaining = _level_multiplicities(n_antennas, group_size)
    open_slots = n_antennas
    count = _arrangements(remaining)
    rank = 0
    for level in assignment:
        for smaller in range(1, level):
            rank += count * remaining[smaller - 1] // open_slots
        count = count * remaining[level - 1] // open_slots
        remaining[level - 1] -= 1
        open_slots -= 1
    return rank


def unrank_assignment(rank, n_antennas, group_size):
    """Inverse of :func:`rank_assignment`."""
    total = oaq_codeword_count(n_antennas, group_size)
    if not isinstance(rank, int) or not 0 <= rank < total:
        raise ValueError(f"rank must be in [0, {total}), got {rank!r}")
    remaining = _level_multiplicities(n_antennas, group_size)
    open_slots = n_antennas
    count = total
    assignment = []
    for _ in range(n_antennas):
        for level in range(1, len(remaining) + 1):
            if remaining[level - 1] == 0:
                continue
            block = count * remaining[level - 1] // open_slots
            if rank < block:
                assignment.append(level)
                count = block
                remaining[level - 1] -= 1
                break
            rank -= block
        open_slots -= 1
    return tuple(assignment)


# ---------------------------------------------------------------------------
# Payload encode/decode
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class EncodedRelayState:
    """A relay state serialized to exactly quantizer_bits(spec, n) bits."""

    spec: QuantizerSpec
    n_antennas: int
    payload: tuple

    def __post_init__(self):
        if any(bit not in (0, 1) for bit in self.payload):
            raise ValueError("payload must contain only 0/1 bits")
        expected = quantizer_bits(self.spec, self.n_antennas)
        if len(self.payload) != expected:
            raise ValueError(
                f"payload holds {len(self.payload)} bits, spec requires {expected}"
            )


def _push_bits(bits, value, width):
    for shift in range(width - 1, -1, -1):
        bits.append((value >> shift) & 1)


def _take_bits(payload, cursor, width):
    value = 0
    for bit in payload[cursor : cursor + width]:
        value = (value << 1) | bit
    return value, cursor + width


def encode_relay_state(state):
    """Serialize a relay state into its exact N_b-bit payload."""
    spec = state.spec
    bits = []
    if spec.kind == UPQ:
        for k in state.phase_indices:
            _push_bits(bits, k, spec.total_bits)
    elif spec.kind == UAPQ:
        for k, b in zip(state.phase_indices, state.amplitude_bins):
            _push_bits(bits, k, spec.phase_bits)
            _push_bits(bits, b, spec.amplitude_bits)
    else:
        for k in state.phase_indices:
            _push_bits(bits, k, spec.phase_bits)
        rank = rank_assignment(
            state.amplitude_assignment, state.n_antennas, spec.group_size
        )
        _push_bits(bits, rank, assignment_rank_bits(state.n_antennas, spec.group_size))
    return EncodedRelayState(spec=spec, n_antennas=state.n_antennas, payload=tuple(bits))


def decode_relay_state(encoded):
    """Exact inverse of :func:`encode_relay_state`."""
    spec = encoded.spec
    n = encoded.n_antennas
    payload = encoded.payload
    cursor = 0
    if spec.kind == UPQ:
        indices = []
        for _ in range(n):
            k, cursor = _take_bits(payload, cursor, spec.total_bits)
            indices.append(k)
        return RelayState(spec=spec, phase_indices=tuple(indices))
    if spec.kind == UAPQ:
        indices, bins = [], []
        for _ in range(n):
            k, cursor = _take_bits(payload, cursor, spec.phase_bits)
            b, cursor = _take_bits(payload, cursor, spec.amplitude_bits)
            indices.append(k)
            bins.append(b)
        return RelayState(
            spec=spec, phase_indices=tuple(indices), amplitude_bins=tuple(bins)
        )
    indices = []
    for _ in range(n):
        k, cursor = _take_bits(payload, cursor, spec.phase_bits)
        indices.append(k)
    rank, cursor = _take_bits(payload, cursor, assignment_rank_bits(n, spec.group_size))
    assignment = unrank_assignment(rank, n, spec.group_size)
    return RelayState(
        spec=spec, phase_indices=tuple(indices), amplitude_assignment=assignment
    )


# ---------------------------------------------------------------------------
# Byte container for debug dumps
# ---------------------------------------------------------------------------

def _spec_params(spec):
    if spec.kind == UPQ:
        return [spec.total_bits]
    if spec.kind == UAPQ:
        return [spec.total_bits, spec.phase_bits]
    return [spec.phase_bits, spec.group_size, spec.level_exponent]


def pack_container(encoded):
    """Byte container: tag, N_R, parameters, bit length, packed payload."""
    spec = encoded.spec
    head = bytearray([_SPEC_TAGS[spec.kind], encoded.n_antennas])
    head.extend(_spec_params(spec))
    head.extend(len(encoded.payload).to_bytes(2, "big"))
    packed = bytearray((len(encoded.payload) + 7) // 8)
    for i, bit in enumerate(encoded.payload):
        if bit:
            packed[i >> 3] |= 0x80 >> (i & 7)
    return bytes(head) + bytes(packed)


def unpack_container(data):
    """Parse a byte container back into an :class:`EncodedRelayState`."""
    if len(data) < 2:
        raise ValueError("container too short")
    kind = _TAG_KINDS.get(data[0])
    if kind is None:
        raise ValueError(f"unknown spec tag {data[0]}")
    n_antennas = data[1]
    n_params = 1 if kind == UPQ else 2 if kind == UAPQ else 3
    header_len = 2 + n_params + 2
    if len(data) < header_len:
        raise ValueError("container header truncated")
    params = list(data[2 : 2 + n_params])
    if kind == UPQ:
        spec = QuantizerSpec(UPQ, total_bits=params[0])
    elif kind == UAPQ:
        spec = QuantizerSpec(UAPQ, total_bits=params[0], phase_bits=params[1])
    else:
        spec = QuantizerSpec(
            HAPQ, phase_bits=params[0], group_size=params[1], level_exponent=params[2]
        )
    bit_len = int.from_bytes(data[2 + n_params : header_len], "big")
    body = data[header_len:]
    if len(body) != (bit_len + 7) // 8:
        raise ValueError("container payload length mismatch")
    payload = []
    for i in range(bit_len):
        payload.append((body[i >> 3] >> (7 - (i & 7))) & 1)
    for i in range(bit_len, len(body) * 8):
        if (body[i >> 3] >> (7 - (i & 7))) & 1:
            raise ValueError("nonzero padding bits in container")
    return EncodedRelayState(spec=spec, n_antennas=n_antennas, payload=tuple(payload))
