"""The networked key server.

Serves four jobs: verify identity-provider tokens (audience-bound, one per
server), hand out private-key shares derived from the epoch master secret,
answer public-share lookups for anyone (current epoch on demand, past
epochs from the archive), and run the anonymous invitation flow.  All
mutation happens under one lock; every request either fully succeeds or
leaves no trace in the archive or outbox.
"""

from __future__ import annotations

import json
import os
import secrets
import threading
import time
from dataclasses import dataclass

from . import keyshare
from .group import GroupParams, load_params
from .httpd import Handler, ServiceError, require_fields, require_local
from .idp import IdpToken, TokenError, verify_token
from .keyshare import EpochState, IdentityRef

DEFAULT_INVITE_CAP = 100


@dataclass
class ServerConfig:
    server_id: str
    params_path: str
    state_dir: str
    provider_secrets: dict[str, bytes]
    host: str = "127.0.0.1"
    port: int = 0
    invite_cap: int = DEFAULT_INVITE_CAP
    require_same_display_name: bool = False

    @classmethod
    def from_file(cls, path: str) -> "ServerConfig":
        with open(path, encoding="utf-8") as fp:
            obj = json.load(fp)
        return cls(
            server_id=obj["server_id"],
            params_path=obj["params_path"],
            state_dir=obj["state_dir"],
            provider_secrets={k: bytes.fromhex(v) for k, v in obj["provider_secrets"].items()},
            host=obj.get("host", "127.0.0.1"),
            port=int(obj.get("port", 0)),
            invite_cap=int(obj.get("invite_cap", DEFAULT_INVITE_CAP)),
            require_same_display_name=bool(obj.get("require_same_display_name", False)),
        )

    def to_file(self, path: str) -> None:
        obj = {
            "server_id": self.server_id,
            "params_path": self.params_path,
            "state_dir": self.state_dir,
            "provider_secrets": {k: v.hex() for k, v in self.provider_secrets.items()},
            "host": self.host,
            "port": self.port,
            "invite_cap": self.invite_cap,
            "require_same_display_name": self.require_same_display_name,
        }
        with open(path, "w", encoding="utf-8") as fp:
            json.dump(obj, fp, indent=2)
            fp.write("\n")


@dataclass(frozen=True)
class Invitation:
    identity: IdentityRef
    url_token: str
    created_at: int
    batch_id: str


class KeyServerApp:
    """State and request handlers for one key server."""

    def __init__(
        self,
        config: ServerConfig,
        params: GroupParams | None = None,
        initial_master_secret: bytes | None = None,
    ) -> None:
        self.config = config
        self.params = params if params is not None else load_params(config.params_path)
        self._lock = threading.Lock()
        os.makedirs(config.state_dir, exist_ok=True)
        self._epoch_path = os.path.join(config.state_dir, "epoch.json")
        self._archive_path = os.path.join(config.state_dir, "archive.jsonl")
        self._outbox_path = os.path.join(config.state_dir, "outbox.jsonl")
        self.state = self._load_state(initial_master_secret)

    # -- state ---------------------------------------------------------

    def _load_state(self, initial_master_secret: bytes | None) -> EpochState:
        archive = keyshare.load_archive(self._archive_path)
        if os.path.exists(self._epoch_path):
            with open(self._epoch_path, encoding="utf-8") as fp:
                obj = json.load(fp)
            return EpochState(
                epoch=int(obj["epoch"]),
                master_secret=bytes.fromhex(obj["master_secret_hex"]),
                archive=archive,
            )
        secret = initial_master_secret or secrets.token_bytes(keyshare.MASTER_SECRET_LEN)
        state = EpochState(epoch=0, master_secret=secret, archive=archive)
        self._persist_epoch(state)
        return state

    def _persist_epoch(self, state: EpochState) -> None:
        fd = os.open(self._epoch_path, os.O_WRONLY | os.O_CREAT | os.O_TRUNC, 0o600)
        with os.fdopen(fd, "w", encoding="utf-8") as fp:
            json.dump({"epoch": state.epoch, "master_secret_hex": state.master_secret.hex()}, fp)
            fp.write("\n")

    def _record_public(self, identity: IdentityRef, y: int) -> None:
        """Archive the public share served now, once (idempotent)."""
        key = (self.state.epoch, identity.provider, identity.user_id)
        if key in self.state.archive:
            return
        self.state.archive[key] = y
        keyshare.append_archive(self._archive_path, self.state.epoch, identity, y, self.params)

    # -- routes ----------------------------------------------------------

    def routes(self) -> dict[tuple[str, str], Handler]:
        return {
            ("POST", "/invitations"): self._invitations,
            ("POST", "/share"): self._share,
            ("GET", "/pubkey"): self._pubkey,
            ("GET", "/epoch"): self._epoch,
            ("POST", "/rotate"): self._rotate,
        }

    def _epoch(self, query, body, client_ip) -> dict:
        return {
            "server_id": self.config.server_id,
            "epoch": self.state.epoch,
            "params_fingerprint": self.params.fingerprint(),
        }

    def _invitations(self, query, body, client_ip) -> dict:
        body = require_fields(body, "identities")
        raw = body["identities"]
        if not isinstance(raw, list) or not raw:
            raise ServiceError("empty_identities", "at least one identity is required")
        if len(raw) > self.config.invite_cap:
            raise ServiceError(
                "rate_limited",
                f"at most {self.config.invite_cap} invitations per request",
                429,
            )
        try:
            identities = [IdentityRef.from_dict(o) for o in raw]
        except (KeyError, TypeError, ValueError) as exc:
            raise ServiceError("bad_request", f"malformed identity: {exc}") from exc

        # Deliberately no record of who asked: the outbox rows carry only
        # the invited identity, an opaque token, a timestamp and batch id.
        batch_id = secrets.token_hex(8)
        now = int(time.time())
        invitations = [
            Invitation(
                identity=ident,
                url_token=secrets.token_hex(16),
                created_at=now,
                batch_id=batch_id,
            )
            for ident in identities
        ]
        lines = [
            json.dumps(
                {
                    "provider": inv.identity.provider,
                    "user_id": inv.identity.user_id,
                    "url_token": inv.url_token,
                    "created_at": inv.created_at,
                    "batch_id": inv.batch_id,
                },
                sort_keys=True,
            )
            for inv in invitations
        ]
        with self._lock:
            with open(self._outbox_path, "a", encoding="utf-8") as fp:
                fp.write("\n".join(lines) + "\n")
        return {"batch_id": batch_id, "count": len(invitations)}

    def _share(self, query, body, client_ip) -> dict:
        body = require_fields(body, "tokens")
        raw = body["tokens"]
        if not isinstance(raw, list) or not raw:
            raise ServiceError("bad_request", "at least one token is required")

        # Verify every token before deriving anything: one bad token
        # rejects the whole request so no partial composite key exists.
        identities: dict[str, IdentityRef] = {}
        display_names: dict[str, str] = {}
        for obj in raw:
            try:
                token = IdpToken.from_dict(obj if isinstance(obj, dict) else {})
                identity = verify_token(
                    self.config.provider_secrets, token, expected_audience=self.config.server_id
                )
            except TokenError as err:
                raise ServiceError(err.code, err.detail, 403) from err
            identities[identity.key()] = identity
            display_names[identity.key()] = token.display_name

        if self.config.require_same_display_name and len(set(display_names.values())) > 1:
            raise ServiceError(
                "display_name_mismatch",
                "accounts presented together must carry the same display name",
                403,
            )

        with self._lock:
            epoch = self.state.epoch
            # Private shares exist only for the current epoch: the older
            # master secrets are gone, so this can never be served.
            try:
                epoch_req = None if body.get("epoch") is None else int(body["epoch"])
            except (TypeError, ValueError) as exc:
                raise ServiceError("bad_request", f"malformed epoch: {exc}") from exc
            if epoch_req is not None and epoch_req != epoch:
                raise ServiceError(
                    "epoch_expired",
                    f"private shares are only derivable at the current epoch {epoch}",
                    410,
                )
            shares = []
            for identity in identities.values():
                x = keyshare.derive_share(self.state.master_secret, epoch, identity, self.params)
                self._record_public(identity, keyshare.public_share(x, self.params))
                shares.append(
                    {
                        "provider": identity.provider,
                        "user_id": identity.user_id,
                        "x_hex": self.params.enc_scalar(x).hex(),
                    }
                )
        return {"epoch": epoch, "shares": shares}

    def _pubkey(self, query, body, client_ip) -> dict:
        try:
            identity = IdentityRef(
                provider=query.get("provider", ""), user_id=query.get("user_id", "")
            )
            epoch_q = query.get("epoch")
            if epoch_q is not None:
                epoch_q = int(epoch_q)
        except ValueError as exc:
            raise ServiceError("bad_request", str(exc)) from exc

        with self._lock:
            current = self.state.epoch
            if epoch_q is None or epoch_q == current:
                x = keyshare.derive_share(self.state.master_secret, current, identity, self.params)
                y = keyshare.public_share(x, self.params)
                self._record_public(identity, y)
                return {"epoch": current, "y_hex": self.params.enc_element(y).hex()}
            if epoch_q > current:
                raise ServiceError("bad_request", f"epoch {epoch_q} is in the future")
            key = (epoch_q, identity.provider, identity.user_id)
            y = self.state.archive.get(key)
        if y is None:
            raise ServiceError(
                "unknown_archived_key",
                f"no archived public share for {identity.key()} at epoch {epoch_q}",
                404,
            )
        return {"epoch": epoch_q, "y_hex": self.params.enc_element(y).hex()}

    def _rotate(self, query, body, client_ip) -> dict:
        require_local(client_ip, "epoch rotation")
        with self._lock:
            self.state = keyshare.rotate_epoch(
                self.state, secrets.token_bytes(keyshare.MASTER_SECRET_LEN)
            )
            self._persist_epoch(self.state)
            return {"server_id": self.config.server_id, "epoch": self.state.epoch}

    # -- test/inspection helpers ----------------------------------------

    def outbox_entries(self) -> list[dict]:
        if not os.path.exists(self._outbox_path):
            return []
        with open(self._outbox_path, encoding="utf-8") as fp:
            return [json.loads(line) for line in fp if line.strip()]
