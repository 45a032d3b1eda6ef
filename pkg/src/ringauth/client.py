"""Client-side library: key collection, ring building, signing, login.

The composite private key never leaves the client.  Collection is strictly
all-or-nothing across the configured key servers (that is the whole trust
model: every server contributes or there is no key), and every received
share is cross-checked against the server's own public directory so a
server cannot quietly hand different answers to different askers.
"""

from __future__ import annotations

import hashlib
import json
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import requests

from . import keyshare, lrs
from .authprovider import derive_pseudonym
from .group import GroupParams, exp
from .keyshare import IdentityRef, MemberSpec, member_spec, member_specs_to_wire

DEFAULT_TIMEOUT = 15


class ClientError(Exception):
    exit_hint = 1


class ServerUnreachable(ClientError):
    exit_hint = 2


class RemoteError(ClientError):
    """A service answered with a protocol error; carries its stable code."""

    exit_hint = 3

    def __init__(self, code: str, detail: str, status: int) -> None:
        super().__init__(f"{code}: {detail}")
        self.code = code
        self.detail = detail
        self.status = status


class ServerInconsistency(ClientError):
    exit_hint = 6


def _request(method: str, url: str, **kwargs) -> dict:
    kwargs.setdefault("timeout", DEFAULT_TIMEOUT)
    try:
        resp = requests.request(method, url, **kwargs)
    except requests.RequestException as exc:
        raise ServerUnreachable(f"cannot reach {url}: {exc}") from exc
    try:
        obj = resp.json()
    except ValueError as exc:
        raise RemoteError("bad_response", f"{url} returned non-JSON", resp.status_code) from exc
    if resp.status_code != 200 or "error" in obj:
        raise RemoteError(
            obj.get("error", "http_error"), obj.get("detail", resp.text[:200]), resp.status_code
        )
    return obj


def get_json(url: str, params: dict | None = None) -> dict:
    return _request("GET", url, params=params)


def post_json(url: str, body: dict) -> dict:
    return _request("POST", url, json=body)


@dataclass(frozen=True)
class ProviderCredential:
    """How to obtain tokens from one identity provider."""

    provider: str
    idp_url: str
    user_id: str
    display_name: str = ""


@dataclass
class Keyring:
    identities: list[IdentityRef]
    epoch: int
    x: int
    y: int
    server_fingerprint: str

    def to_dict(self, params: GroupParams) -> dict:
        return {
            "identities": [i.to_dict() for i in sorted(self.identities)],
            "epoch": self.epoch,
            "x_c_hex": params.enc_scalar(self.x).hex(),
            "Y_c_hex": params.enc_element(self.y).hex(),
            "server_set_fingerprint": self.server_fingerprint,
        }

    def save(self, path: str, params: GroupParams) -> None:
        fd = os.open(path, os.O_WRONLY | os.O_CREAT | os.O_TRUNC, 0o600)
        with os.fdopen(fd, "w", encoding="utf-8") as fp:
            json.dump(self.to_dict(params), fp, indent=2)
            fp.write("\n")

    @classmethod
    def load(cls, path: str) -> "Keyring":
        with open(path, encoding="utf-8") as fp:
            obj = json.load(fp)
        return cls(
            identities=[IdentityRef.from_dict(d) for d in obj["identities"]],
            epoch=int(obj["epoch"]),
            x=int(obj["x_c_hex"], 16),
            y=int(obj["Y_c_hex"], 16),
            server_fingerprint=obj["server_set_fingerprint"],
        )


def server_set_fingerprint(server_ids: list[str]) -> str:
    canon = json.dumps(sorted(server_ids), separators=(",", ":")).encode("utf-8")
    return hashlib.sha256(canon).hexdigest()


@dataclass(frozen=True)
class ServerInfo:
    url: str
    server_id: str
    epoch: int
    params_fingerprint: str


def probe_servers(servers: list[str], params: GroupParams) -> list[ServerInfo]:
    infos = []
    for url in servers:
        obj = get_json(f"{url}/epoch")
        info = ServerInfo(
            url=url,
            server_id=obj["server_id"],
            epoch=int(obj["epoch"]),
            params_fingerprint=obj["params_fingerprint"],
        )
        if info.params_fingerprint != params.fingerprint():
            raise ServerInconsistency(
                f"server {info.server_id} runs different group parameters"
            )
        infos.append(info)
    return infos


@dataclass
class CollectPhases:
    """Wall-clock split of key collection, reported separately because the
    two phases have very different cost profiles in real deployments."""

    token_seconds: float
    share_seconds: float


def collect_key(
    credentials: list[ProviderCredential],
    servers: list[str],
    params: GroupParams,
    token_ttl: int = 300,
) -> tuple[Keyring, CollectPhases]:
    """Fetch one share per (server, provider), sum them, sanity-check.

    Raises ServerUnreachable if any server cannot answer (no partial
    composite is ever assembled) and ServerInconsistency, naming the
    server, if a private share disagrees with that server's public
    directory.
    """
    if not credentials:
        raise ClientError("at least one provider credential is required")
    infos = probe_servers(servers, params)
    epochs = {i.epoch for i in infos}
    if len(epochs) > 1:
        raise ServerInconsistency(f"servers disagree on the current epoch: {sorted(epochs)}")
    epoch = epochs.pop()

    t0 = time.monotonic()
    tokens_by_server: dict[str, list[dict]] = {}
    for info in infos:
        tokens = []
        for cred in credentials:
            obj = post_json(
                f"{cred.idp_url}/token",
                {
                    "provider": cred.provider,
                    "user_id": cred.user_id,
                    "display_name": cred.display_name,
                    "audience": info.server_id,
                    "ttl": token_ttl,
                },
            )
            tokens.append(obj["token"])
        tokens_by_server[info.url] = tokens
    token_seconds = time.monotonic() - t0

    t1 = time.monotonic()

    def fetch(info: ServerInfo) -> tuple[ServerInfo, dict]:
        return info, post_json(f"{info.url}/share", {"tokens": tokens_by_server[info.url]})

    with ThreadPoolExecutor(max_workers=max(1, len(infos))) as pool:
        responses = list(pool.map(fetch, infos))

    identities = sorted(
        IdentityRef(provider=c.provider, user_id=c.user_id) for c in credentials
    )
    scalars: list[int] = []
    pub_shares: list[int] = []
    for info, resp in responses:
        if int(resp["epoch"]) != epoch:
            raise ServerInconsistency(f"server {info.server_id} rotated mid-collection")
        got = {(s["provider"], s["user_id"]): int(s["x_hex"], 16) for s in resp["shares"]}
        for identity in identities:
            x = got.get((identity.provider, identity.user_id))
            if x is None:
                raise ServerInconsistency(
                    f"server {info.server_id} omitted a share for {identity.key()}"
                )
            served = get_json(
                f"{info.url}/pubkey",
                params={"provider": identity.provider, "user_id": identity.user_id},
            )
            y = int(served["y_hex"], 16)
            if exp(params.g, x, params) != y:
                raise ServerInconsistency(
                    f"server {info.server_id} served a private share inconsistent "
                    f"with its public directory for {identity.key()}"
                )
            scalars.append(x)
            pub_shares.append(y)
    share_seconds = time.monotonic() - t1

    x_c = keyshare.combine_private(scalars, params)
    if x_c == 0:
        raise ClientError("composite private key is zero; refuse the degenerate key")
    y_c = exp(params.g, x_c, params)
    if y_c != keyshare.combine_public(pub_shares, params):
        raise ServerInconsistency("composite public key mismatch across fetched shares")

    keyring = Keyring(
        identities=list(identities),
        epoch=epoch,
        x=x_c,
        y=y_c,
        server_fingerprint=server_set_fingerprint([i.server_id for i in infos]),
    )
    return keyring, CollectPhases(token_seconds=token_seconds, share_seconds=share_seconds)


def fetch_public_key(
    identity: IdentityRef, servers: list[str], params: GroupParams, epoch: int | None = None
) -> int:
    """The composite public key of any identity, enrolled or not."""
    shares = []
    for url in servers:
        q = {"provider": identity.provider, "user_id": identity.user_id}
        if epoch is not None:
            q["epoch"] = str(epoch)
        shares.append(int(get_json(f"{url}/pubkey", params=q)["y_hex"], 16))
    return keyshare.combine_public(shares, params)


def fetch_member_key(
    spec: MemberSpec, servers: list[str], params: GroupParams, epoch: int | None = None
) -> int:
    """The ring key of a member: product of composites over its identities."""
    composites = [fetch_public_key(ref, servers, params, epoch=epoch) for ref in spec]
    return keyshare.combine_public(composites, params)


def build_ring(
    members: list,
    servers: list[str],
    params: GroupParams,
    epoch: int | None = None,
) -> tuple[lrs.Ring, dict[MemberSpec, int]]:
    """Ring for an anonymity set, plus the member -> key map.

    Each entry is an IdentityRef, or a list of refs for a member whose key
    is bound to several providers at once.
    """
    specs = [member_spec(m) for m in members]
    keys = {spec: fetch_member_key(spec, servers, params, epoch=epoch) for spec in specs}
    ring = lrs.Ring.of(list(keys.values()), params)
    return ring, keys


def ring_to_dict(
    ring: lrs.Ring, members: dict[MemberSpec, int], params: GroupParams, epoch: int | None
) -> dict:
    return {
        "identities": member_specs_to_wire(sorted(members)),
        "members_hex": [params.enc_element(y).hex() for y in ring.members],
        "epoch": epoch,
        "params_fingerprint": params.fingerprint(),
    }


def ring_from_dict(obj: dict, params: GroupParams) -> tuple[lrs.Ring, list[MemberSpec]]:
    ring = lrs.Ring.of([int(h, 16) for h in obj["members_hex"]], params)
    specs = keyshare.parse_member_specs(obj["identities"]) if obj.get("identities") else []
    return ring, specs


def sign_document(
    path: str,
    sig_path: str,
    ring: lrs.Ring,
    keyring: Keyring,
    params: GroupParams,
    scope: bytes | None = None,
    rng=None,
) -> lrs.RingSignature:
    """Detached-sign a file: the signed message is its SHA-256 digest."""
    if keyring.y not in ring.members:
        raise ClientError("you are not in your own anonymity set")
    with open(path, "rb") as fp:
        digest = hashlib.sha256(fp.read()).digest()
    sig = lrs.sign(
        digest, ring, ring.index_of(keyring.y), keyring.x, params, scope=scope, rng=rng
    )
    lrs.write_signature_file(sig_path, sig, params)
    return sig


def verify_document(
    path: str, sig_path: str, ring: lrs.Ring, params: GroupParams
) -> tuple[bool, int, str]:
    """Returns (accepted, linkage tag, pseudonym-of-tag)."""
    with open(path, "rb") as fp:
        digest = hashlib.sha256(fp.read()).digest()
    sig = lrs.read_signature_file(sig_path, params)
    ok = lrs.verify(digest, ring, sig, params)
    return ok, sig.tag, derive_pseudonym(sig.tag, params)


def login(
    auth_url: str,
    members: list,
    keyring: Keyring,
    servers: list[str],
    params: GroupParams,
    rng=None,
) -> dict:
    """Full challenge/sign/submit flow; returns {token, pseudonym}.

    ``members`` is the anonymity set (IdentityRefs, or lists of refs for
    combined-identity members) and must contain the keyring's own member.
    """
    ch = get_json(f"{auth_url}/challenge")
    specs = [member_spec(m) for m in members]
    ring, _ = build_ring(specs, servers, params)
    if keyring.y not in ring.members:
        raise ClientError("your identity is not in the chosen anonymity set")
    sig = lrs.sign(
        bytes.fromhex(ch["nonce_hex"]),
        ring,
        ring.index_of(keyring.y),
        keyring.x,
        params,
        scope=bytes.fromhex(ch["scope_hex"]),
        rng=rng,
    )
    return post_json(
        f"{auth_url}/login",
        {
            "challenge_id": ch["challenge_id"],
            "identities": member_specs_to_wire(sorted(specs)),
            "sig_hex": lrs.encode(sig, params).hex(),
            "ring_sha256": hashlib.sha256(ring.descriptor(params)).hexdigest(),
        },
    )


def introspect(auth_url: str, token: str) -> dict:
    return get_json(f"{auth_url}/introspect", params={"token": token})


def block_pseudonym(auth_url: str, pseudonym: str) -> dict:
    return post_json(f"{auth_url}/admin/block", {"pseudonym": pseudonym})


def unblock_pseudonym(auth_url: str, pseudonym: str) -> dict:
    return post_json(f"{auth_url}/admin/unblock", {"pseudonym": pseudonym})


def request_invitations(server_url: str, identities: list[IdentityRef]) -> dict:
    return post_json(
        f"{server_url}/invitations", {"identities": [i.to_dict() for i in identities]}
    )


def rotate_server(server_url: str) -> dict:
    return post_json(f"{server_url}/rotate", {})
