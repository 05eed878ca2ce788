"""Toy sponge used as the inner variable-input-length function of each node.

NOT a cryptographic hash. It exists so the tree modes can be run on real
bytes with an exact count of permutation calls.

Construction
------------
* State: ``(rate_bits + capacity_bits) / 64`` words of 64 bits. A rate block
  is a ``rate_bits``-bit big-endian integer; to XOR it into the state it is
  written out big-endian and read back as little-endian 64-bit words, which
  are XORed into the leading words. The digest is the first
  ``digest_bits / 8`` bytes of the state, words serialized little-endian.
* Permutation: ``rounds`` rounds (default 12). Round ``r`` walks ``i`` over
  ``0 .. n-1`` with ``j = (i + 1) mod n`` and ``s = ROTATIONS[(i + r) % 8]``,
  setting ``w[i] <- w[i] + w[j] mod 2**64`` and then
  ``w[j] <- rotl(w[j], s) XOR w[i]``; the round ends with
  ``w[0] ^= ROUND_CONSTANTS[r]``. The constants are successive outputs of
  splitmix64 seeded with ``0x243F6A8885A308D3``. Every step is invertible.
* Input formatting: the conceptual message is a ``rate_bits - 2`` bit prefix,
  zero except for its last two bits which hold the node type code
  (is-final-output, contains-message-blocks), followed by the node input and
  ``10*1`` padding up to a multiple of ``rate_bits``. The first rate block
  therefore holds the type code and the first two input bits: its 16
  possible post-permutation states are precomputed, so an input of ``s``
  whole blocks costs exactly ``s`` permutation calls (the input is shifted by
  two bits, and the two-bit minimum of the padding fills the last block).
"""

from __future__ import annotations

import threading
from dataclasses import dataclass
from typing import Mapping, NamedTuple, Sequence

from .cost import CostParams
from .intmath import ceil_div

MASK64 = (1 << 64) - 1
ROTATIONS = (7, 13, 19, 29, 37, 43, 53, 59)
DEFAULT_ROUNDS = 12
DEFAULT_CAPACITY = 256


class SpongeError(ValueError):
    pass


def _splitmix64(seed: int, count: int) -> tuple[int, ...]:
    out = []
    x = seed
    for _ in range(count):
        x = (x + 0x9E3779B97F4A7C15) & MASK64
        z = x
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
        out.append(z ^ (z >> 31))
    return tuple(out)


ROUND_CONSTANTS = _splitmix64(0x243F6A8885A308D3, 64)


def _rotl(x: int, s: int) -> int:
    return ((x << s) | (x >> (64 - s))) & MASK64


def _rotr(x: int, s: int) -> int:
    return ((x >> s) | (x << (64 - s))) & MASK64


def permute(state: Sequence[int], rounds: int = DEFAULT_ROUNDS) -> tuple[int, ...]:
    w = list(state)
    n = len(w)
    if n < 2:
        raise SpongeError("state needs at least two words")
    for r in range(rounds):
        for i in range(n):
            j = i + 1 if i + 1 < n else 0
            a = (w[i] + w[j]) & MASK64
            w[j] = _rotl(w[j], ROTATIONS[(i + r) & 7]) ^ a
            w[i] = a
        w[0] ^= ROUND_CONSTANTS[r]
    return tuple(w)


def permute_inverse(state: Sequence[int], rounds: int = DEFAULT_ROUNDS) -> tuple[int, ...]:
    """Inverse of :func:`permute`; only used to test that it is a bijection."""
    w = list(state)
    n = len(w)
    for r in reversed(range(rounds)):
        w[0] ^= ROUND_CONSTANTS[r]
        for i in reversed(range(n)):
            j = i + 1 if i + 1 < n else 0
            b = _rotr(w[j] ^ w[i], ROTATIONS[(i + r) & 7])
            w[i] = (w[i] - b) & MASK64
            w[j] = b
    return tuple(w)


class CountingPermutation:
    """The permutation with a thread-safe call counter."""

    def __init__(self, rounds: int = DEFAULT_ROUNDS):
        self.rounds = rounds
        self.calls = 0
        self._lock = threading.Lock()

    def __call__(self, state: Sequence[int]) -> tuple[int, ...]:
        with self._lock:
            self.calls += 1
        return permute(state, self.rounds)


@dataclass(frozen=True)
class SpongeParams:
    rate_bits: int
    capacity_bits: int = DEFAULT_CAPACITY
    rounds: int = DEFAULT_ROUNDS
    digest_bits: int = 128

    def __post_init__(self):
        if self.rate_bits % 64 or self.capacity_bits % 64 or self.rate_bits <= 0:
            raise SpongeError("rate and capacity must be positive multiples of 64 bits")
        if self.rate_bits % self.digest_bits:
            raise SpongeError("rate must be a multiple of the digest size")
        if self.capacity_bits < 2 * self.digest_bits:
            raise SpongeError("capacity must be at least twice the digest size")

    @classmethod
    def for_cost(cls, params: CostParams, capacity_bits: int = DEFAULT_CAPACITY,
                 rounds: int = DEFAULT_ROUNDS) -> "SpongeParams":
        return cls(params.block_bits, capacity_bits, rounds, params.digest_bits)

    @property
    def d(self) -> int:
        return self.rate_bits // self.digest_bits

    @property
    def rate_bytes(self) -> int:
        return self.rate_bits // 8

    @property
    def digest_bytes(self) -> int:
        return self.digest_bits // 8

    @property
    def words(self) -> int:
        return (self.rate_bits + self.capacity_bits) // 64

    def zero_state(self) -> tuple[int, ...]:
        return (0,) * self.words


class NodeTypeCode(NamedTuple):
    is_final_output: bool
    contains_message_blocks: bool

    @property
    def bits(self) -> int:
        return (int(self.is_final_output) << 1) | int(self.contains_message_blocks)

    @classmethod
    def from_bits(cls, bits: int) -> "NodeTypeCode":
        if not 0 <= bits < 4:
            raise SpongeError("type code is two bits")
        return cls(bool(bits & 2), bool(bits & 1))

    @classmethod
    def for_node(cls, node) -> "NodeTypeCode":
        return cls(node.is_root, node.has_message_blocks)


ALL_TYPE_CODES = tuple(NodeTypeCode.from_bits(b) for b in range(4))


def xor_block(state: Sequence[int], block: int, params: SpongeParams) -> tuple[int, ...]:
    raw = block.to_bytes(params.rate_bytes, "big")
    words = list(state)
    for k in range(params.rate_bits // 64):
        words[k] ^= int.from_bytes(raw[8 * k:8 * k + 8], "little")
    return tuple(words)


def squeeze(state: Sequence[int], params: SpongeParams) -> bytes:
    raw = b"".join(w.to_bytes(8, "little") for w in state[: ceil_div(params.digest_bytes, 8)])
    return raw[: params.digest_bytes]


def first_block(type_code: NodeTypeCode, first_two_bits: int) -> int:
    """The rate block covered by the table: zero prefix, the type code in its
    last two bits, then the first two input bits."""
    return (type_code.bits << 2) | first_two_bits


@dataclass(frozen=True)
class PrefixStateTable:
    params: SpongeParams
    states: tuple[tuple[int, ...], ...]  # index (type_bits << 2) | first_two_bits

    def lookup(self, type_code: NodeTypeCode, first_two_bits: int) -> tuple[int, ...]:
        return self.states[(type_code.bits << 2) | first_two_bits]

    def to_bytes(self) -> bytes:
        return b"".join(w.to_bytes(8, "little") for state in self.states for w in state)


def precompute_prefix_states(params: SpongeParams) -> PrefixStateTable:
    states = []
    zero = params.zero_state()
    for code in ALL_TYPE_CODES:
        for bits in range(4):
            states.append(permute(xor_block(zero, first_block(code, bits), params), params.rounds))
    return PrefixStateTable(params, tuple(states))


def block_count(total_bytes: int, params: SpongeParams) -> int:
    """Permutation calls for an input of ``total_bytes`` bytes."""
    return ceil_div(total_bytes, params.rate_bytes)


def shifted_block(data: bytes, j: int, params: SpongeParams, lookahead: int | None = None) -> int:
    """Rate block ``j`` (1-based, not the last one) of the formatted message.

    It spans input bits ``[(j-1)*rate + 2, j*rate + 2)``. The two trailing
    bits come from input byte ``j * rate_bytes``, or from ``lookahead`` when
    that byte is not supplied.
    """
    B = params.rate_bytes
    body = int.from_bytes(data[(j - 1) * B:j * B], "big")
    if lookahead is None:
        lookahead = data[j * B] >> 6
    return ((body << 2) | lookahead) & ((1 << params.rate_bits) - 1)


def last_block(data: bytes, total_bytes: int, params: SpongeParams) -> int:
    """Final rate block: the input tail after the 2-bit shift, then ``10*1``."""
    B = params.rate_bytes
    s = block_count(total_bytes, params)
    tail = data[(s - 1) * B:total_bytes]
    nbits = 8 * len(tail) - 2
    value = int.from_bytes(tail, "big") & ((1 << nbits) - 1)
    pad = params.rate_bits - nbits  # always >= 2
    return (value << pad) | (1 << (pad - 1)) | 1


class IncrementalVil:
    """Absorbs one node input as its bytes arrive.

    The total input length must be known up front, as it is in every tree
    mode. A rate block is permuted as soon as its bytes, including the two
    look-ahead bits, are all present.
    """

    def __init__(self, type_code: NodeTypeCode, total_bytes: int, params: SpongeParams,
                 table: PrefixStateTable, permutation=None):
        if total_bytes <= 0:
            raise SpongeError("empty node input")
        self.type_code = type_code
        self.total = total_bytes
        self.params = params
        self.table = table
        self.perm = permutation or CountingPermutation(params.rounds)
        self.buf = bytearray()
        self.state: tuple[int, ...] | None = None
        self.blocks_done = 0
        self.blocks = block_count(total_bytes, params)
        self.calls = 0

    def _absorb(self, block: int) -> None:
        self.state = self.perm(xor_block(self.state, block, self.params))
        self.calls += 1
        self.blocks_done += 1

    def update(self, chunk: bytes) -> None:
        if len(self.buf) + len(chunk) > self.total:
            raise SpongeError("more input than announced")
        self.buf += chunk
        if self.state is None and self.buf:
            self.state = self.table.lookup(self.type_code, self.buf[0] >> 6)
        B = self.params.rate_bytes
        while self.blocks_done + 1 < self.blocks and len(self.buf) > (self.blocks_done + 1) * B:
            self._absorb(shifted_block(self.buf, self.blocks_done + 1, self.params))

    def digest(self) -> bytes:
        if len(self.buf) != self.total:
            raise SpongeError("input incomplete")
        if self.blocks_done < self.blocks:
            self._absorb(last_block(self.buf, self.total, self.params))
        return squeeze(self.state, self.params)


def vil_hash(data: bytes, type_code: NodeTypeCode, params: SpongeParams, table: PrefixStateTable,
             permutation=None) -> tuple[bytes, int]:
    """Digest of one node input and the number of permutation calls spent."""
    if not data:
        raise SpongeError("empty node input")
    h = IncrementalVil(type_code, len(data), params, table, permutation)
    h.update(data)
    return h.digest(), h.calls


def node_input(node, child_digests: Mapping[int, bytes], message: bytes, params: SpongeParams) -> bytes:
    """Concatenate a node's blocks (sliced from ``message``) and chaining values."""
    B = params.rate_bytes
    parts = []
    for kind, value in node.input:
        if kind == "block":
            parts.append(message[(value - 1) * B:value * B])
        else:
            try:
                parts.append(child_digests[value])
            except KeyError:
                raise SpongeError(f"missing child digest for node {value}") from None
    return b"".join(parts)


def hash_node(node, child_digests: Mapping[int, bytes], message: bytes, params: SpongeParams,
              table: PrefixStateTable, permutation=None) -> tuple[bytes, int]:
    data = node_input(node, child_digests, message, params)
    return vil_hash(data, NodeTypeCode.for_node(node), params, table, permutation)


def digest_hex(digest: bytes) -> str:
    return digest.hex()
