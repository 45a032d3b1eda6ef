"""Mock federated identity providers.

A provider here is an HMAC token mint: it issues audience-bound tokens
that a specific key server can verify against the shared provider secret.
That shared-secret check stands in for the callback a real deployment
would make to the provider's verification endpoint -- the semantics the
rest of the system depends on (identity assertion, audience binding,
expiry) are identical and bit-exact.

The audience field is the whole point: a token minted for key server A is
useless at key server B, so a malicious server cannot replay a client's
token to collect their other shares.
"""

from __future__ import annotations

import hashlib
import hmac
import json
import time
from dataclasses import dataclass

from .httpd import Handler, ServiceError, require_fields
from .keyshare import IdentityRef

class TokenError(Exception):
    """Token rejected; ``code`` is one of the stable verification codes."""

    def __init__(self, code: str, detail: str) -> None:
        super().__init__(f"{code}: {detail}")
        self.code = code
        self.detail = detail


@dataclass(frozen=True)
class IdpToken:
    provider: str
    user_id: str
    display_name: str
    audience: str
    expiry: int
    mac: str

    def to_dict(self) -> dict:
        return {
            "provider": self.provider,
            "user_id": self.user_id,
            "display_name": self.display_name,
            "audience": self.audience,
            "expiry": self.expiry,
            "mac": self.mac,
        }

    @classmethod
    def from_dict(cls, obj: dict) -> "IdpToken":
        try:
            return cls(
                provider=str(obj["provider"]),
                user_id=str(obj["user_id"]),
                display_name=str(obj.get("display_name", "")),
                audience=str(obj["audience"]),
                expiry=int(obj["expiry"]),
                mac=str(obj["mac"]),
            )
        except (KeyError, ValueError, TypeError) as exc:
            raise TokenError("bad_token", f"malformed token object: {exc}") from exc


def _canonical_payload(
    provider: str, user_id: str, display_name: str, audience: str, expiry: int
) -> bytes:
    obj = {
        "audience": audience,
        "display_name": display_name,
        "expiry": expiry,
        "provider": provider,
        "user_id": user_id,
    }
    return json.dumps(obj, sort_keys=True, separators=(",", ":")).encode("utf-8")


def issue_token(
    provider_secrets: dict[str, bytes],
    provider: str,
    user_id: str,
    audience: str,
    ttl_seconds: int,
    display_name: str = "",
    now: float | None = None,
) -> IdpToken:
    if provider not in provider_secrets:
        raise TokenError("unknown_provider", f"no such identity provider {provider!r}")
    expiry = int((time.time() if now is None else now) + ttl_seconds)
    payload = _canonical_payload(provider, user_id, display_name, audience, expiry)
    mac = hmac.new(provider_secrets[provider], payload, hashlib.sha256).hexdigest()
    return IdpToken(
        provider=provider,
        user_id=user_id,
        display_name=display_name,
        audience=audience,
        expiry=expiry,
        mac=mac,
    )


def verify_token(
    provider_secrets: dict[str, bytes],
    token: IdpToken,
    expected_audience: str,
    now: float | None = None,
) -> IdentityRef:
    """Check mac, audience, and expiry; each failure has a distinct code."""
    secret = provider_secrets.get(token.provider)
    if secret is None:
        raise TokenError("unknown_provider", f"no such identity provider {token.provider!r}")
    payload = _canonical_payload(
        token.provider, token.user_id, token.display_name, token.audience, token.expiry
    )
    want = hmac.new(secret, payload, hashlib.sha256).hexdigest()
    if not hmac.compare_digest(want, token.mac):
        raise TokenError("bad_mac", "token MAC does not verify under the provider secret")
    if token.audience != expected_audience:
        raise TokenError(
            "audience_mismatch",
            f"token bound to {token.audience!r}, presented to {expected_audience!r}",
        )
    if token.expiry <= (time.time() if now is None else now):
        raise TokenError("expired_token", "token expiry has passed")
    return IdentityRef(provider=token.provider, user_id=token.user_id)


class IdentityProviderApp:
    """HTTP face of one or more token mints.

    POST /token {provider, user_id, audience, ttl, display_name?}
    """

    DEFAULT_TTL = 300

    def __init__(self, provider_secrets: dict[str, bytes]) -> None:
        self.provider_secrets = dict(provider_secrets)

    def routes(self) -> dict[tuple[str, str], Handler]:
        return {
            ("POST", "/token"): self._token,
            ("GET", "/providers"): self._providers,
        }

    def _providers(self, query, body, client_ip) -> dict:
        return {"providers": sorted(self.provider_secrets)}

    def _token(self, query, body, client_ip) -> dict:
        body = require_fields(body, "provider", "user_id", "audience")
        ttl = int(body.get("ttl", self.DEFAULT_TTL))
        if ttl <= 0:
            raise ServiceError("bad_request", "ttl must be positive")
        try:
            token = issue_token(
                self.provider_secrets,
                provider=str(body["provider"]),
                user_id=str(body["user_id"]),
                audience=str(body["audience"]),
                ttl_seconds=ttl,
                display_name=str(body.get("display_name", "")),
            )
        except TokenError as err:
            raise ServiceError(err.code, err.detail, 404) from err
        return {"token": token.to_dict()}
