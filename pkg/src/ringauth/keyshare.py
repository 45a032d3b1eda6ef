"""Per-server key shares, client-side combination, and epoch rotation.

Each key server holds one 32-byte master secret per epoch and derives every
identity's private-key share from it on demand (HMAC-SHA-256 keyed by the
master secret, reduced to a nonzero scalar).  Nothing per-user is stored;
compromise of a server leaks only the current epoch.  Rotation replaces the
master secret and bumps the epoch; an append-only archive keeps the public
shares served in past epochs so old signatures stay verifiable, while
private shares for past epochs become unrecoverable even to the server.

Clients sum the per-server (and per-provider) scalars into a composite
private key; the matching composite public key is the product of the
per-server public shares, so anyone can compute it without seeing a single
private share.
"""

from __future__ import annotations

import hashlib
import hmac
import json
import os
from dataclasses import dataclass, field

from .group import GroupParams, exp, hash_to_scalar

SHARE_TAG = b"share"
MASTER_SECRET_LEN = 32


class KeyShareError(Exception):
    pass


class EpochExpired(KeyShareError):
    """A private share was requested for an epoch whose secret is gone."""


@dataclass(frozen=True, order=True)
class IdentityRef:
    """A federated identity: (provider, user_id)."""

    provider: str
    user_id: str

    def __post_init__(self) -> None:
        if not self.provider or not self.user_id:
            raise ValueError("provider and user_id must be non-empty")
        if ":" in self.provider:
            raise ValueError("provider name must not contain ':'")

    def key(self) -> str:
        return f"{self.provider}:{self.user_id}"

    def to_dict(self) -> dict:
        return {"provider": self.provider, "user_id": self.user_id}

    @classmethod
    def from_dict(cls, obj: dict) -> "IdentityRef":
        return cls(provider=str(obj["provider"]), user_id=str(obj["user_id"]))


# One ring member is usually a single federated identity, but a user who
# enrolled with several providers at once owns one key bound to all of
# them; such a member is a group of refs.  On the wire a singleton member
# is a bare {provider, user_id} object, a combined member a list of them.
MemberSpec = tuple[IdentityRef, ...]


def member_spec(entry) -> MemberSpec:
    if isinstance(entry, IdentityRef):
        return (entry,)
    if isinstance(entry, dict):
        return (IdentityRef.from_dict(entry),)
    refs = tuple(
        sorted(r if isinstance(r, IdentityRef) else IdentityRef.from_dict(r) for r in entry)
    )
    if not refs:
        raise ValueError("a ring member needs at least one identity")
    if len(set(refs)) != len(refs):
        raise ValueError("duplicate identity within one ring member")
    return refs


def parse_member_specs(raw: list) -> list[MemberSpec]:
    if not isinstance(raw, list) or not raw:
        raise ValueError("anonymity set must be a non-empty list")
    return [member_spec(entry) for entry in raw]


def member_specs_to_wire(specs: list[MemberSpec]) -> list:
    """Singleton members flatten to one object; combined members stay lists."""
    out = []
    for spec in specs:
        if len(spec) == 1:
            out.append(spec[0].to_dict())
        else:
            out.append([r.to_dict() for r in spec])
    return out


@dataclass(frozen=True)
class KeyShare:
    server_id: str
    epoch: int
    identity: IdentityRef
    x: int


@dataclass(frozen=True)
class CompositeKey:
    x: int
    y: int
    identities: tuple[IdentityRef, ...]
    epoch: int


@dataclass
class EpochState:
    """One server's secret for the current epoch plus its public archive.

    The archive maps (epoch, provider, user_id) to the public share that
    was served, and only ever grows.  Only the service layer mutates this;
    rotation returns a fresh state and drops the old secret on the floor.
    """

    epoch: int
    master_secret: bytes
    archive: dict[tuple[int, str, str], int] = field(default_factory=dict)


def derive_share(
    master_secret: bytes, epoch: int, identity: IdentityRef, params: GroupParams
) -> int:
    """The (deterministic, nonzero) private-share scalar for an identity.

    Same inputs always give the same scalar -- a key server that answered
    once has committed to that answer for the whole epoch.
    """
    base = epoch.to_bytes(8, "big") + identity.key().encode("utf-8")
    for ctr in range(256):
        mac = hmac.new(master_secret, base + bytes([ctr]), hashlib.sha256).digest()
        x = hash_to_scalar(mac, SHARE_TAG, params)
        if x != 0:
            return x
    raise KeyShareError("share derivation produced 256 zero scalars; group is broken")


def public_share(x: int, params: GroupParams) -> int:
    return exp(params.g, x, params)


def combine_private(shares: list[int], params: GroupParams) -> int:
    """Sum of share scalars mod q; the anytrust combining function.

    Used identically whether the shares come from different servers or
    from different identity providers.
    """
    if not shares:
        raise KeyShareError("cannot combine an empty share list")
    return sum(shares) % params.q


def combine_public(pub_shares: list[int], params: GroupParams) -> int:
    """Product of public shares mod p; matches combine_private exactly."""
    if not pub_shares:
        raise KeyShareError("cannot combine an empty share list")
    acc = 1
    for y in pub_shares:
        acc = acc * y % params.p
    return acc


def rotate_epoch(state: EpochState, fresh_secret: bytes) -> EpochState:
    """Advance to the next epoch under a freshly random master secret.

    The caller must draw ``fresh_secret`` from a strong randomness source;
    deriving it from the old secret would let one compromised epoch unlock
    every later one.  The archive carries over untouched.
    """
    if len(fresh_secret) != MASTER_SECRET_LEN:
        raise KeyShareError(f"master secret must be {MASTER_SECRET_LEN} bytes")
    if fresh_secret == state.master_secret:
        raise KeyShareError("fresh secret must differ from the old secret")
    return EpochState(epoch=state.epoch + 1, master_secret=fresh_secret, archive=state.archive)


# -- persistence ------------------------------------------------------------


def archive_line(epoch: int, identity: IdentityRef, y: int, params: GroupParams) -> str:
    return json.dumps(
        {
            "epoch": epoch,
            "provider": identity.provider,
            "user_id": identity.user_id,
            "y_hex": params.enc_element(y).hex(),
        },
        sort_keys=True,
    )


def load_archive(path: str) -> dict[tuple[int, str, str], int]:
    archive: dict[tuple[int, str, str], int] = {}
    if not os.path.exists(path):
        return archive
    with open(path, encoding="utf-8") as fp:
        for line in fp:
            line = line.strip()
            if not line:
                continue
            obj = json.loads(line)
            key = (int(obj["epoch"]), str(obj["provider"]), str(obj["user_id"]))
            archive[key] = int(obj["y_hex"], 16)
    return archive


def append_archive(path: str, epoch: int, identity: IdentityRef, y: int, params: GroupParams) -> None:
    with open(path, "a", encoding="utf-8") as fp:
        fp.write(archive_line(epoch, identity, y, params) + "\n")


def save_master_secret(path: str, secret: bytes) -> None:
    fd = os.open(path, os.O_WRONLY | os.O_CREAT | os.O_TRUNC, 0o600)
    with os.fdopen(fd, "w", encoding="ascii") as fp:
        fp.write(secret.hex() + "\n")


def load_master_secret(path: str) -> bytes:
    with open(path, encoding="ascii") as fp:
        return bytes.fromhex(fp.read().strip())
