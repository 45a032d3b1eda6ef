"""The anonymous identity provider third-party sites talk to.

Login protocol: the service hands out a random challenge nonce; the client
signs it with a linkable ring signature over an anonymity set of federated
identities; the service rebuilds that ring itself from the key-server
directories (never trusting client-supplied keys, or the membership claim
would be meaningless), verifies the signature, and turns the linkage tag
into a pseudonym by hashing it.  The same key always yields the same
pseudonym -- the service pins one linkability scope for all logins -- so a
pseudonym can be blocked, which revokes its tokens and rejects future
logins, without anyone ever learning which ring member it belongs to.
"""

from __future__ import annotations

import hashlib
import json
import os
import secrets
import threading
import time
from dataclasses import dataclass

import requests

from . import lrs
from .group import GroupParams, load_params
from .httpd import Handler, ServiceError, require_fields, require_local
from .keyshare import (
    IdentityRef,
    MemberSpec,
    combine_public,
    member_specs_to_wire,
    parse_member_specs,
)

DEFAULT_CHALLENGE_TTL = 300


def derive_pseudonym(tag: int, params: GroupParams) -> str:
    """SHA-256 of the canonical tag encoding: the stable anonymous username."""
    return hashlib.sha256(params.enc_element(tag)).hexdigest()


@dataclass
class AuthConfig:
    service_name: str
    params_path: str
    key_servers: list[str]
    state_dir: str
    host: str = "127.0.0.1"
    port: int = 0
    challenge_ttl: int = DEFAULT_CHALLENGE_TTL
    scope: bytes | None = None

    def effective_scope(self) -> bytes:
        if self.scope is not None:
            return self.scope
        return f"auth:{self.service_name}".encode("utf-8")

    @classmethod
    def from_file(cls, path: str) -> "AuthConfig":
        with open(path, encoding="utf-8") as fp:
            obj = json.load(fp)
        scope = obj.get("scope_hex")
        return cls(
            service_name=obj["service_name"],
            params_path=obj["params_path"],
            key_servers=list(obj["key_servers"]),
            state_dir=obj["state_dir"],
            host=obj.get("host", "127.0.0.1"),
            port=int(obj.get("port", 0)),
            challenge_ttl=int(obj.get("challenge_ttl", DEFAULT_CHALLENGE_TTL)),
            scope=bytes.fromhex(scope) if scope else None,
        )


@dataclass
class Challenge:
    challenge_id: str
    nonce: bytes
    issued_at: float
    expires_at: float
    consumed: bool = False


@dataclass(frozen=True)
class TokenRecord:
    token: str
    pseudonym: str
    ring_members: tuple[MemberSpec, ...]
    issued_at: int

    def public_view(self) -> dict:
        return {
            "pseudonym": self.pseudonym,
            "ring_identities": member_specs_to_wire(list(self.ring_members)),
            "issued_at": self.issued_at,
        }


class AuthProviderApp:
    def __init__(self, config: AuthConfig, params: GroupParams | None = None) -> None:
        self.config = config
        self.params = params if params is not None else load_params(config.params_path)
        self.scope = config.effective_scope()
        self._lock = threading.Lock()
        os.makedirs(config.state_dir, exist_ok=True)
        self._token_log = os.path.join(config.state_dir, "tokens.jsonl")
        self._block_log = os.path.join(config.state_dir, "blocklist.jsonl")
        self._challenges: dict[str, Challenge] = {}
        self._tokens: dict[str, TokenRecord] = {}
        self._blocklist: set[str] = set()
        self._replay_logs()

    # -- persistence ------------------------------------------------------

    def _replay_logs(self) -> None:
        if os.path.exists(self._token_log):
            with open(self._token_log, encoding="utf-8") as fp:
                for line in fp:
                    if not line.strip():
                        continue
                    obj = json.loads(line)
                    if obj.get("op") == "revoke":
                        self._tokens.pop(obj["token"], None)
                        continue
                    rec = TokenRecord(
                        token=obj["token"],
                        pseudonym=obj["pseudonym"],
                        ring_members=tuple(parse_member_specs(obj["ring_identities"])),
                        issued_at=int(obj["issued_at"]),
                    )
                    self._tokens[rec.token] = rec
        if os.path.exists(self._block_log):
            with open(self._block_log, encoding="utf-8") as fp:
                for line in fp:
                    if not line.strip():
                        continue
                    obj = json.loads(line)
                    if obj["op"] == "block":
                        self._blocklist.add(obj["pseudonym"])
                    elif obj["op"] == "unblock":
                        self._blocklist.discard(obj["pseudonym"])

    def _append(self, path: str, obj: dict) -> None:
        with open(path, "a", encoding="utf-8") as fp:
            fp.write(json.dumps(obj, sort_keys=True) + "\n")

    # -- ring reconstruction ----------------------------------------------

    def _fetch_public_share(self, server: str, identity: IdentityRef) -> int:
        try:
            resp = requests.get(
                f"{server}/pubkey",
                params={"provider": identity.provider, "user_id": identity.user_id},
                timeout=10,
            )
        except requests.RequestException as exc:
            raise ServiceError(
                "key_server_unreachable", f"cannot reach key server {server}: {exc}", 502
            ) from exc
        if resp.status_code != 200:
            raise ServiceError(
                "key_server_unreachable",
                f"key server {server} answered {resp.status_code}: {resp.text[:200]}",
                502,
            )
        return int(resp.json()["y_hex"], 16)

    def reconstruct_ring(self, member_specs: list[MemberSpec]) -> lrs.Ring:
        """Build the ring the way the service sees it: composite keys from
        every configured key server's directory, then canonicalize.  A
        combined-identity member multiplies the composites of all its
        identity refs, matching the client-side sum of private shares."""
        members = []
        for spec in member_specs:
            shares = [
                self._fetch_public_share(s, identity)
                for identity in spec
                for s in self.config.key_servers
            ]
            members.append(combine_public(shares, self.params))
        return lrs.Ring.of(members, self.params)

    # -- routes -------------------------------------------------------------

    def routes(self) -> dict[tuple[str, str], Handler]:
        return {
            ("GET", "/challenge"): self._challenge,
            ("POST", "/login"): self._login,
            ("GET", "/introspect"): self._introspect,
            ("POST", "/admin/block"): self._block,
            ("POST", "/admin/unblock"): self._unblock,
        }

    def _purge_expired(self, now: float) -> None:
        dead = [cid for cid, ch in self._challenges.items() if ch.expires_at <= now]
        for cid in dead:
            del self._challenges[cid]

    def _challenge(self, query, body, client_ip) -> dict:
        now = time.time()
        ch = Challenge(
            challenge_id=secrets.token_hex(16),
            nonce=secrets.token_bytes(32),
            issued_at=now,
            expires_at=now + self.config.challenge_ttl,
        )
        with self._lock:
            self._purge_expired(now)
            self._challenges[ch.challenge_id] = ch
        return {
            "challenge_id": ch.challenge_id,
            "nonce_hex": ch.nonce.hex(),
            "expires_at": int(ch.expires_at),
            "scope_hex": self.scope.hex(),
        }

    def _login(self, query, body, client_ip) -> dict:
        body = require_fields(body, "challenge_id", "identities", "sig_hex")
        challenge_id = str(body["challenge_id"])
        now = time.time()

        with self._lock:
            ch = self._challenges.get(challenge_id)
            if ch is None:
                raise ServiceError("unknown_challenge", "no such challenge", 404)
            if ch.expires_at <= now:
                del self._challenges[challenge_id]
                raise ServiceError("challenge_expired", "challenge TTL has passed", 410)
            if ch.consumed:
                raise ServiceError("challenge_consumed", "challenge already used", 409)
            nonce = ch.nonce

        try:
            member_specs = parse_member_specs(body["identities"])
        except (KeyError, TypeError, ValueError) as exc:
            raise ServiceError("bad_request", f"malformed identity list: {exc}") from exc

        try:
            sig = lrs.decode(bytes.fromhex(body["sig_hex"]), self.params)
        except (ValueError, lrs.DecodeError) as exc:
            raise ServiceError("malformed_signature", str(exc), 400) from exc

        ring = self.reconstruct_ring(member_specs)
        descriptor = ring.descriptor(self.params)

        # The signature must target the ring this service reconstructs and
        # the scope it pins; anything else is a different conversation.
        if sig.scope != self.scope or len(sig.s) != len(ring):
            raise ServiceError(
                "ring_mismatch",
                "signature does not match the reconstructed ring and pinned scope",
                409,
            )
        claimed = body.get("ring_sha256")
        if claimed is not None and claimed != hashlib.sha256(descriptor).hexdigest():
            raise ServiceError(
                "ring_mismatch",
                "client-side ring differs from the key-server directory",
                409,
            )

        if not lrs.verify(nonce, ring, sig, self.params):
            raise ServiceError("signature_invalid", "ring signature failed verification", 403)

        with self._lock:
            ch = self._challenges.get(challenge_id)
            if ch is None or ch.expires_at <= time.time():
                raise ServiceError("challenge_expired", "challenge TTL has passed", 410)
            if ch.consumed:
                raise ServiceError("challenge_consumed", "challenge already used", 409)
            ch.consumed = True

            pseudonym = derive_pseudonym(sig.tag, self.params)
            if pseudonym in self._blocklist:
                raise ServiceError("pseudonym_blocked", "this pseudonym has been blocked", 403)

            rec = TokenRecord(
                token=secrets.token_hex(32),
                pseudonym=pseudonym,
                ring_members=tuple(sorted(member_specs)),
                issued_at=int(now),
            )
            self._tokens[rec.token] = rec
            self._append(
                self._token_log,
                {
                    "token": rec.token,
                    "pseudonym": rec.pseudonym,
                    "ring_identities": member_specs_to_wire(list(rec.ring_members)),
                    "issued_at": rec.issued_at,
                },
            )
        return {"token": rec.token, "pseudonym": rec.pseudonym}

    def _introspect(self, query, body, client_ip) -> dict:
        token = query.get("token", "")
        rec = self._tokens.get(token)
        if rec is None:
            raise ServiceError("unknown_token", "no such token", 404)
        return rec.public_view()

    def _block(self, query, body, client_ip) -> dict:
        require_local(client_ip, "pseudonym blocking")
        body = require_fields(body, "pseudonym")
        pseudonym = str(body["pseudonym"])
        with self._lock:
            self._blocklist.add(pseudonym)
            self._append(self._block_log, {"op": "block", "pseudonym": pseudonym})
            revoked = [t for t, rec in self._tokens.items() if rec.pseudonym == pseudonym]
            for t in revoked:
                del self._tokens[t]
                self._append(self._token_log, {"op": "revoke", "token": t})
        return {"blocked": pseudonym, "revoked_tokens": len(revoked)}

    def _unblock(self, query, body, client_ip) -> dict:
        require_local(client_ip, "pseudonym unblocking")
        body = require_fields(body, "pseudonym")
        pseudonym = str(body["pseudonym"])
        with self._lock:
            self._blocklist.discard(pseudonym)
            self._append(self._block_log, {"op": "unblock", "pseudonym": pseudonym})
        return {"unblocked": pseudonym}
