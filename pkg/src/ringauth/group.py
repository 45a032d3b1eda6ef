"""Prime-order subgroup arithmetic and the two hashes everything is built on.

All keys in this package live in a Schnorr-style multiplicative subgroup:
a prime modulus ``p``, a prime ``q`` dividing ``p - 1``, and a generator
``g`` of the order-``q`` subgroup.  Scalars are plain ints in [0, q-1],
group elements plain ints in [1, p-1] satisfying ``y^q = 1 (mod p)``.

Two hash functions are defined over a group:

* :func:`hash_to_scalar` -- SHA-256 reduced mod q, with a mandatory domain
  tag so distinct call sites can never collide.
* :func:`hash_to_group` -- SHA-256 mapped into the subgroup by cofactor
  exponentiation.  The discrete log of the output with respect to ``g`` is
  unknown to everyone, which the linkage-tag construction depends on: if
  the tag base were ``g^k`` with known ``k``, anyone could compute any
  member's tag from their public key and deanonymize signers.

Serialization is fixed-width big-endian, sized by the bit length of ``p``
(elements) or ``q`` (scalars), so encoded signature sizes follow an exact
linear formula.
"""

from __future__ import annotations

import hashlib
import json
import secrets
from dataclasses import dataclass
from importlib import resources
from typing import Callable

from ._backend import powmod

PRIMALITY_ROUNDS = 64
_GEN_MAX_ITERS = 200_000


class ParamError(Exception):
    """Group parameters are malformed or fail validation."""


def _sieve(limit: int) -> tuple[int, ...]:
    flags = bytearray([1]) * limit
    flags[0:2] = b"\x00\x00"
    for i in range(2, int(limit**0.5) + 1):
        if flags[i]:
            flags[i * i :: i] = b"\x00" * len(flags[i * i :: i])
    return tuple(i for i in range(limit) if flags[i])


_SMALL_PRIMES = _sieve(1000)


def is_probable_prime(
    n: int,
    rounds: int = PRIMALITY_ROUNDS,
    pick_witness: Callable[[int], int] | None = None,
) -> bool:
    """Miller-Rabin with ``rounds`` independent witnesses.

    ``pick_witness(n)`` may be supplied to draw witnesses from a
    deterministic stream (parameter generation does this so results are
    reproducible from a seed); the default uses the OS CSPRNG.
    """
    if n < 2:
        return False
    for sp in _SMALL_PRIMES:
        if n == sp:
            return True
        if n % sp == 0:
            return False
    d = n - 1
    r = 0
    while d % 2 == 0:
        d //= 2
        r += 1
    if pick_witness is None:
        pick_witness = lambda m: 2 + secrets.randbelow(m - 3)
    for _ in range(rounds):
        a = pick_witness(n)
        x = powmod(a, d, n)
        if x == 1 or x == n - 1:
            continue
        for _ in range(r - 1):
            x = powmod(x, 2, n)
            if x == n - 1:
                break
        else:
            return False
    return True


@dataclass(frozen=True)
class GroupParams:
    """A validated (p, q, g) triple.  Immutable; safe to share freely."""

    p: int
    q: int
    g: int

    @property
    def element_bytes(self) -> int:
        return (self.p.bit_length() + 7) // 8

    @property
    def scalar_bytes(self) -> int:
        return (self.q.bit_length() + 7) // 8

    def enc_element(self, y: int) -> bytes:
        return y.to_bytes(self.element_bytes, "big")

    def enc_scalar(self, s: int) -> bytes:
        return s.to_bytes(self.scalar_bytes, "big")

    def is_scalar(self, s: int) -> bool:
        return 0 <= s < self.q

    def is_element(self, y: int) -> bool:
        return 1 <= y < self.p and powmod(y, self.q, self.p) == 1

    def validate(self) -> None:
        """Check every structural invariant; raises ParamError on failure."""
        if not is_probable_prime(self.q):
            raise ParamError("q is not prime")
        if not is_probable_prime(self.p):
            raise ParamError("p is not prime")
        if (self.p - 1) % self.q != 0:
            raise ParamError("q does not divide p - 1")
        if not (2 <= self.g <= self.p - 1):
            raise ParamError("g out of range")
        if powmod(self.g, self.q, self.p) != 1 or self.g == 1:
            raise ParamError("g does not generate an order-q subgroup")

    def to_json(self) -> str:
        return json.dumps(
            {"g": format(self.g, "x"), "p": format(self.p, "x"), "q": format(self.q, "x")},
            sort_keys=True,
            separators=(",", ":"),
        )

    def fingerprint(self) -> str:
        return hashlib.sha256(self.to_json().encode("ascii")).hexdigest()

    @classmethod
    def from_json(cls, text: str) -> "GroupParams":
        try:
            obj = json.loads(text)
            params = cls(p=int(obj["p"], 16), q=int(obj["q"], 16), g=int(obj["g"], 16))
        except (KeyError, ValueError, TypeError) as exc:
            raise ParamError(f"unparseable parameter file: {exc}") from exc
        params.validate()
        return params

    def save(self, path: str) -> None:
        with open(path, "w", encoding="ascii") as fp:
            fp.write(self.to_json() + "\n")


def load_params(path: str) -> GroupParams:
    with open(path, encoding="ascii") as fp:
        return GroupParams.from_json(fp.read())


def toy_params() -> GroupParams:
    """The tiny test group p=23, q=11, g=4 shipped with the package."""
    return _packaged_params("toy.json")


def production_params() -> GroupParams:
    """The pinned 2048/256-bit production group shipped with the package."""
    return _packaged_params("production.json")


def _packaged_params(name: str) -> GroupParams:
    text = resources.files("ringauth").joinpath("params", name).read_text("ascii")
    return GroupParams.from_json(text)


def exp(base: int, e: int, params: GroupParams) -> int:
    """base^e mod p.  Closed on the subgroup for subgroup bases."""
    return powmod(base, e, params.p)


def mul(a: int, b: int, params: GroupParams) -> int:
    return (a * b) % params.p


def hash_to_scalar(data: bytes, domain_tag: bytes, params: GroupParams) -> int:
    """SHA-256(domain_tag || 0x00 || data) as a big-endian int mod q."""
    digest = hashlib.sha256(domain_tag + b"\x00" + data).digest()
    return int.from_bytes(digest, "big") % params.q


def hash_to_group(data: bytes, domain_tag: bytes, params: GroupParams) -> int:
    """Map bytes into the order-q subgroup with unknown discrete log.

    Uses cofactor exponentiation: u = SHA-256(tag || 0x00 || data || ctr)
    mod p, then h = u^((p-1)/q) mod p, bumping the one-byte counter until
    h is a non-identity subgroup element.  Nobody learns log_g(h).
    """
    cofactor = (params.p - 1) // params.q
    for ctr in range(256):
        digest = hashlib.sha256(domain_tag + b"\x00" + data + bytes([ctr])).digest()
        u = int.from_bytes(digest, "big") % params.p
        h = powmod(u, cofactor, params.p)
        if h > 1:
            return h
    raise ParamError("hash_to_group exhausted 256 counters; parameters are broken")


class _Stream:
    """SHA-256 counter-mode byte stream; the deterministic randomness for
    parameter generation."""

    def __init__(self, seed: bytes, label: bytes) -> None:
        self._key = label + b"\x00" + seed
        self._counter = 0
        self._buf = b""

    def take(self, k: int) -> bytes:
        while len(self._buf) < k:
            block = hashlib.sha256(self._key + self._counter.to_bytes(8, "big")).digest()
            self._counter += 1
            self._buf += block
        out, self._buf = self._buf[:k], self._buf[k:]
        return out

    def int_bits(self, bits: int) -> int:
        """Uniform int of exactly ``bits`` bits (top bit forced to 1)."""
        nbytes = (bits + 7) // 8
        v = int.from_bytes(self.take(nbytes), "big")
        v &= (1 << bits) - 1
        v |= 1 << (bits - 1)
        return v

    def witness(self, n: int) -> int:
        v = int.from_bytes(self.take((n.bit_length() + 7) // 8 + 8), "big")
        return 2 + v % (n - 3)


def generate_params(q_bits: int, p_bits: int, seed: bytes) -> GroupParams:
    """Deterministically derive a fresh (p, q, g) from a seed.

    q is a random prime of q_bits; p = 2*q*k + 1 is searched until prime
    with exactly p_bits; g is the cofactor power of the smallest base that
    lands outside the trivial subgroup.  The same seed always yields the
    same parameters.
    """
    if q_bits < 4:
        raise ParamError("q_bits must be at least 4")
    if p_bits < q_bits + 8:
        raise ParamError("p_bits must be at least q_bits + 8")

    stream = _Stream(seed, b"group-param-gen-v1")

    q = 0
    for _ in range(_GEN_MAX_ITERS):
        cand = stream.int_bits(q_bits) | 1
        if is_probable_prime(cand, pick_witness=stream.witness):
            q = cand
            break
    else:
        raise ParamError("prime search for q exhausted; re-seed")

    p = 0
    for _ in range(_GEN_MAX_ITERS):
        k = stream.int_bits(p_bits - q_bits - 1)
        cand = 2 * q * k + 1
        if cand.bit_length() != p_bits:
            continue
        if is_probable_prime(cand, pick_witness=stream.witness):
            p = cand
            break
    else:
        raise ParamError("prime search for p exhausted; re-seed")

    cofactor = (p - 1) // q
    a = 2
    while True:
        g = powmod(a, cofactor, p)
        if g != 1:
            break
        a += 1

    params = GroupParams(p=p, q=q, g=g)
    params.validate()
    return params
