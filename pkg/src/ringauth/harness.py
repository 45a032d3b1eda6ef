"""Boot a complete local deployment in one process.

Spins up N key servers, one HTTP mint per mock identity provider, and the
auth provider, all on loopback with OS-assigned ports.  With a seed, the
provider secrets and initial master secrets are derived deterministically
so test runs are reproducible; without one they are random.  Teardown is
idempotent and tears everything down even after partial startup.
"""

from __future__ import annotations

import hashlib
import json
import os
import secrets
import shutil
import tempfile
import time
from dataclasses import dataclass, field

import requests

from .authprovider import AuthConfig, AuthProviderApp
from .group import GroupParams, toy_params, production_params
from .httpd import RunningServer, serve
from .idp import IdentityProviderApp
from .keyserver import KeyServerApp, ServerConfig

DEFAULT_PROVIDERS = ("mockbook", "mockpal")


@dataclass
class HarnessConfig:
    n_servers: int = 3
    providers: tuple[str, ...] = DEFAULT_PROVIDERS
    params: str = "toy"  # "toy", "production", or a parameter file path
    seed: bytes | None = None
    root_dir: str | None = None
    service_name: str = "demo"
    invite_cap: int = 100
    challenge_ttl: int = 300


def _load_params(spec: str) -> GroupParams:
    if spec == "toy":
        return toy_params()
    if spec == "production":
        return production_params()
    from .group import load_params

    return load_params(spec)


def _derived(seed: bytes | None, label: str) -> bytes:
    if seed is None:
        return secrets.token_bytes(32)
    return hashlib.sha256(b"harness\x00" + seed + b"\x00" + label.encode("utf-8")).digest()


@dataclass
class Harness:
    config: HarnessConfig = field(default_factory=HarnessConfig)
    params: GroupParams | None = None
    root_dir: str = ""
    idp_urls: dict[str, str] = field(default_factory=dict)
    key_server_urls: list[str] = field(default_factory=list)
    key_server_ids: list[str] = field(default_factory=list)
    auth_url: str = ""
    scope: bytes = b""
    _servers: list[RunningServer] = field(default_factory=list)
    _owns_root: bool = False
    key_server_apps: list[KeyServerApp] = field(default_factory=list)
    auth_app: AuthProviderApp | None = None

    def start(self) -> "Harness":
        cfg = self.config
        self.params = _load_params(cfg.params)
        if cfg.root_dir is None:
            self.root_dir = tempfile.mkdtemp(prefix="ringauth-harness-")
            self._owns_root = True
        else:
            self.root_dir = cfg.root_dir
            os.makedirs(self.root_dir, exist_ok=True)

        params_path = os.path.join(self.root_dir, "params.json")
        self.params.save(params_path)

        provider_secrets = {
            name: _derived(cfg.seed, f"provider:{name}") for name in cfg.providers
        }

        try:
            for name in cfg.providers:
                srv = serve(IdentityProviderApp({name: provider_secrets[name]}))
                self._servers.append(srv)
                self.idp_urls[name] = srv.url

            for i in range(cfg.n_servers):
                server_id = f"ks{i}"
                state_dir = os.path.join(self.root_dir, server_id)
                app = KeyServerApp(
                    ServerConfig(
                        server_id=server_id,
                        params_path=params_path,
                        state_dir=state_dir,
                        provider_secrets=provider_secrets,
                        invite_cap=cfg.invite_cap,
                    ),
                    params=self.params,
                    initial_master_secret=_derived(cfg.seed, f"master:{server_id}"),
                )
                srv = serve(app)
                self._servers.append(srv)
                self.key_server_apps.append(app)
                self.key_server_urls.append(srv.url)
                self.key_server_ids.append(server_id)

            self.auth_app = AuthProviderApp(
                AuthConfig(
                    service_name=cfg.service_name,
                    params_path=params_path,
                    key_servers=list(self.key_server_urls),
                    state_dir=os.path.join(self.root_dir, "authprovider"),
                    challenge_ttl=cfg.challenge_ttl,
                ),
                params=self.params,
            )
            srv = serve(self.auth_app)
            self._servers.append(srv)
            self.auth_url = srv.url
            self.scope = self.auth_app.scope

            self._wait_ready()
        except Exception:
            self.stop()
            raise
        return self

    def _wait_ready(self, timeout: float = 10.0) -> None:
        deadline = time.monotonic() + timeout
        for url in self.key_server_urls:
            while True:
                try:
                    requests.get(f"{url}/epoch", timeout=2).raise_for_status()
                    break
                except requests.RequestException:
                    if time.monotonic() > deadline:
                        raise RuntimeError(f"key server at {url} never became ready")
                    time.sleep(0.05)

    def stop(self) -> None:
        while self._servers:
            self._servers.pop().stop()
        if self._owns_root and self.root_dir and os.path.isdir(self.root_dir):
            shutil.rmtree(self.root_dir, ignore_errors=True)
            self._owns_root = False

    def __enter__(self) -> "Harness":
        return self.start()

    def __exit__(self, *exc) -> None:
        self.stop()

    def manifest(self) -> dict:
        return {
            "pid": os.getpid(),
            "root_dir": self.root_dir,
            "params_path": os.path.join(self.root_dir, "params.json"),
            "idp_urls": dict(self.idp_urls),
            "key_servers": list(self.key_server_urls),
            "key_server_ids": list(self.key_server_ids),
            "auth_url": self.auth_url,
            "scope_hex": self.scope.hex(),
        }

    def write_manifest(self, path: str) -> None:
        with open(path, "w", encoding="utf-8") as fp:
            json.dump(self.manifest(), fp, indent=2)
            fp.write("\n")
