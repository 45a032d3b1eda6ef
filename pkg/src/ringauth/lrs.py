"""Linkable ring signatures over a shared prime-order subgroup.

A signature proves the signer holds the private key behind one of the ring
member keys without revealing which, and carries a linkage tag
``tag = h^x`` where ``h`` is hashed from a *scope* byte string.  Two
signatures by the same key under the same scope carry the same tag; under
different scopes the tags are unrelated.  Services that pin a scope get
stable, blockable pseudonyms; callers that leave the scope unset get
ring-bound tags (the scope defaults to the ring descriptor).

Signing walks the ring once, closing a challenge chain:

    c[i+1] = H1(descriptor || tag || msg || g^s[i] * Y[i]^c[i]
                                         || h^s[i] * tag^c[i])

with the signer's slot patched so the chain closes, i.e.
``s[signer] = u - x * c[signer] mod q`` for the random commitment ``u``.
Verification replays the chain from ``c1`` and accepts iff it returns to
``c1``.
"""

from __future__ import annotations

import secrets
from dataclasses import dataclass
from typing import Protocol

from .group import GroupParams, exp, hash_to_group, hash_to_scalar

CHALLENGE_TAG = b"lrs-c"
TAG_BASE_TAG = b"lrs-h"
SIG_MAGIC = b"LRSSIG01"


class LrsError(Exception):
    """Base class for ring-signature errors."""


class SignerMismatch(LrsError):
    """The claimed ring slot does not match the supplied private key."""


class ScopeMismatch(LrsError):
    """Linkage tags from different scopes are incomparable."""


class DecodeError(LrsError):
    """Signature bytes are truncated or structurally inconsistent."""


class RandomSource(Protocol):
    def randrange(self, stop: int) -> int: ...


_sysrand = secrets.SystemRandom()


@dataclass(frozen=True)
class Ring:
    """Canonical anonymity set: deduplicated member keys, sorted ascending.

    Construction order never matters -- any permutation of the same key set
    yields an identical ring, descriptor, and signature validity.
    """

    members: tuple[int, ...]

    @classmethod
    def of(cls, members, params: GroupParams) -> "Ring":
        canon = sorted(set(members))
        if not canon:
            raise LrsError("a ring needs at least one member")
        for y in canon:
            if not params.is_element(y):
                raise LrsError("ring member is not a subgroup element")
        return cls(members=tuple(canon))

    def __len__(self) -> int:
        return len(self.members)

    def descriptor(self, params: GroupParams) -> bytes:
        """Canonical byte encoding: member count, then fixed-width keys."""
        out = [len(self.members).to_bytes(4, "big")]
        out.extend(params.enc_element(y) for y in self.members)
        return b"".join(out)

    def index_of(self, y: int) -> int:
        try:
            return self.members.index(y)
        except ValueError:
            raise LrsError("key is not a ring member") from None


@dataclass(frozen=True)
class RingSignature:
    c1: int
    s: tuple[int, ...]
    tag: int
    scope: bytes


def _challenge(
    params: GroupParams, descriptor: bytes, tag_bytes: bytes, msg: bytes, z1: int, z2: int
) -> int:
    data = (
        descriptor
        + tag_bytes
        + len(msg).to_bytes(4, "big")
        + msg
        + params.enc_element(z1)
        + params.enc_element(z2)
    )
    return hash_to_scalar(data, CHALLENGE_TAG, params)


def sign(
    msg: bytes,
    ring: Ring,
    signer_index: int,
    x: int,
    params: GroupParams,
    scope: bytes | None = None,
    rng: RandomSource | None = None,
) -> RingSignature:
    """Sign ``msg`` as the anonymous member at ``signer_index``.

    ``scope`` controls linkability: omit it for ring-bound tags, pin it to
    a fixed byte string for tags stable across anonymity sets.  ``rng``
    exists so tests can inject a deterministic stream; production callers
    leave it unset and get the OS CSPRNG.
    """
    n = len(ring)
    if not 0 <= signer_index < n:
        raise SignerMismatch(f"signer index {signer_index} outside ring of {n}")
    if exp(params.g, x, params) != ring.members[signer_index]:
        raise SignerMismatch("private key does not match the claimed ring slot")
    if rng is None:
        rng = _sysrand

    descriptor = ring.descriptor(params)
    if scope is None:
        scope = descriptor
    h = hash_to_group(scope, TAG_BASE_TAG, params)
    tag = exp(h, x, params)
    tag_bytes = params.enc_element(tag)

    p, q, g = params.p, params.q, params.g
    c = [0] * n
    s = [0] * n

    u = rng.randrange(q)
    c[(signer_index + 1) % n] = _challenge(
        params, descriptor, tag_bytes, msg, exp(g, u, params), exp(h, u, params)
    )

    i = (signer_index + 1) % n
    while i != signer_index:
        s[i] = rng.randrange(q)
        z1 = exp(g, s[i], params) * exp(ring.members[i], c[i], params) % p
        z2 = exp(h, s[i], params) * exp(tag, c[i], params) % p
        c[(i + 1) % n] = _challenge(params, descriptor, tag_bytes, msg, z1, z2)
        i = (i + 1) % n

    s[signer_index] = (u - x * c[signer_index]) % q
    return RingSignature(c1=c[0], s=tuple(s), tag=tag, scope=scope)


def verify(msg: bytes, ring: Ring, sig: RingSignature, params: GroupParams) -> bool:
    """Replay the challenge chain; True iff it closes back to c1.

    A signature whose s-vector length does not match the ring, or whose
    tag is not a subgroup element, is rejected (False), not an error.
    """
    n = len(ring)
    if len(sig.s) != n:
        return False
    if not params.is_element(sig.tag):
        return False
    if not params.is_scalar(sig.c1) or not all(params.is_scalar(si) for si in sig.s):
        return False

    descriptor = ring.descriptor(params)
    h = hash_to_group(sig.scope, TAG_BASE_TAG, params)
    tag_bytes = params.enc_element(sig.tag)
    p = params.p

    c = sig.c1
    for i in range(n):
        z1 = exp(params.g, sig.s[i], params) * exp(ring.members[i], c, params) % p
        z2 = exp(h, sig.s[i], params) * exp(sig.tag, c, params) % p
        c = _challenge(params, descriptor, tag_bytes, msg, z1, z2)
    return c == sig.c1


def link(a: RingSignature, b: RingSignature) -> bool:
    """True iff two (already verified) signatures came from one key.

    Both signatures must share a scope; tags across scopes are
    incomparable and comparing them is a caller bug.
    """
    if a.scope != b.scope:
        raise ScopeMismatch("signatures have different linkability scopes")
    return a.tag == b.tag


def encode(sig: RingSignature, params: GroupParams) -> bytes:
    """Fixed layout: u32 ring count, u32 scope length, scope, tag, c1, s[].

    Length is exactly 8 + len(scope) + P + Q*(n+1) bytes, P and Q being the
    element and scalar widths -- 296 + len(scope) + 32n under the shipped
    production parameters.
    """
    n = len(sig.s)
    parts = [n.to_bytes(4, "big"), len(sig.scope).to_bytes(4, "big"), sig.scope]
    parts.append(params.enc_element(sig.tag))
    parts.append(params.enc_scalar(sig.c1))
    parts.extend(params.enc_scalar(si) for si in sig.s)
    return b"".join(parts)


def decode(data: bytes, params: GroupParams) -> RingSignature:
    pe, qe = params.element_bytes, params.scalar_bytes
    if len(data) < 8:
        raise DecodeError("signature shorter than its header")
    n = int.from_bytes(data[0:4], "big")
    scope_len = int.from_bytes(data[4:8], "big")
    expected = 8 + scope_len + pe + qe * (n + 1)
    if n < 1:
        raise DecodeError("ring count must be at least 1")
    if len(data) != expected:
        raise DecodeError(f"signature is {len(data)} bytes, layout requires {expected}")
    off = 8
    scope = data[off : off + scope_len]
    off += scope_len
    tag = int.from_bytes(data[off : off + pe], "big")
    off += pe
    c1 = int.from_bytes(data[off : off + qe], "big")
    off += qe
    s = []
    for _ in range(n):
        s.append(int.from_bytes(data[off : off + qe], "big"))
        off += qe
    if not (1 <= tag < params.p):
        raise DecodeError("tag outside the group range")
    if not params.is_scalar(c1) or not all(params.is_scalar(si) for si in s):
        raise DecodeError("scalar outside [0, q-1]")
    return RingSignature(c1=c1, s=tuple(s), tag=tag, scope=scope)


def encoded_size(ring_size: int, scope_len: int, params: GroupParams) -> int:
    """The exact encode() length for a given ring size and scope length."""
    return 8 + scope_len + params.element_bytes + params.scalar_bytes * (ring_size + 1)


def write_signature_file(path: str, sig: RingSignature, params: GroupParams) -> None:
    with open(path, "wb") as fp:
        fp.write(SIG_MAGIC + encode(sig, params))


def read_signature_file(path: str, params: GroupParams) -> RingSignature:
    with open(path, "rb") as fp:
        blob = fp.read()
    if not blob.startswith(SIG_MAGIC):
        raise DecodeError("not a detached ring-signature file (bad magic)")
    return decode(blob[len(SIG_MAGIC) :], params)


def hexdump(sig: RingSignature, params: GroupParams) -> str:
    """Debug rendering of a signature's fields."""
    lines = [
        f"ring count : {len(sig.s)}",
        f"scope      : {sig.scope.hex() or '(empty)'}",
        f"tag        : {params.enc_element(sig.tag).hex()}",
        f"c1         : {params.enc_scalar(sig.c1).hex()}",
    ]
    lines.extend(f"s[{i:<4}]    : {params.enc_scalar(si).hex()}" for i, si in enumerate(sig.s))
    return "\n".join(lines)
