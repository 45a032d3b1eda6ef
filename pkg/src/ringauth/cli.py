"""Command-line frontend.

Exit codes are stable per error class so scripts can branch on them:

    0  success
    1  usage error or generic client failure
    2  a server could not be reached
    3  a service rejected the request (stable error code in the message)
    4  cryptographic verification failed
    5  pseudonym is blocked
    6  key servers gave inconsistent answers
    7  malformed file or parameters
"""

from __future__ import annotations

import argparse
import json
import os
import signal
import sys
import time

from . import bench as bench_mod
from . import client, lrs
from ._backend import active_backend, available_backends
from .group import GroupParams, ParamError, generate_params, load_params, production_params, toy_params
from .harness import DEFAULT_PROVIDERS, Harness, HarnessConfig
from .keyshare import IdentityRef, member_specs_to_wire

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_UNREACHABLE = 2
EXIT_SERVICE = 3
EXIT_VERIFY_FAILED = 4
EXIT_BLOCKED = 5
EXIT_INCONSISTENT = 6
EXIT_FORMAT = 7


class CliFailure(Exception):
    def __init__(self, message: str, code: int) -> None:
        super().__init__(message)
        self.exit_code = code


def _load_params_arg(spec: str) -> GroupParams:
    try:
        if spec == "toy":
            return toy_params()
        if spec == "production":
            return production_params()
        return load_params(spec)
    except (ParamError, OSError) as exc:
        raise CliFailure(f"cannot load parameters: {exc}", EXIT_FORMAT) from exc


def _manifest(args) -> dict:
    """The deployment manifest named by --config, loaded once."""
    if getattr(args, "_manifest_cache", None) is None:
        cfg = {}
        if getattr(args, "config", None):
            try:
                with open(args.config, encoding="utf-8") as fp:
                    cfg = json.load(fp)
            except (OSError, ValueError) as exc:
                raise CliFailure(f"cannot read --config file: {exc}", EXIT_FORMAT) from exc
        args._manifest_cache = cfg
    return args._manifest_cache


def _resolve_servers(args) -> list[str]:
    if getattr(args, "servers", None):
        return _servers_arg(args.servers)
    urls = _manifest(args).get("key_servers")
    if urls:
        return [u.rstrip("/") for u in urls]
    raise CliFailure("--servers is required (or point --config at a manifest)", EXIT_USAGE)


def _resolve_params(args) -> GroupParams:
    spec = getattr(args, "params", None) or _manifest(args).get("params_path") or "production"
    return _load_params_arg(spec)


def _resolve_auth(args) -> str:
    if getattr(args, "auth", None):
        return args.auth.rstrip("/")
    url = _manifest(args).get("auth_url")
    if url:
        return url.rstrip("/")
    raise CliFailure("--auth is required (or point --config at a manifest)", EXIT_USAGE)


def _resolve_idp_map(args) -> dict[str, str]:
    idp_map = {}
    for spec in getattr(args, "idp", None) or []:
        name, sep, url = spec.partition("=")
        if not sep:
            raise CliFailure(f"--idp must look like provider=url, got {spec!r}", EXIT_USAGE)
        idp_map[name] = url.rstrip("/")
    if not idp_map:
        idp_map = {k: v.rstrip("/") for k, v in _manifest(args).get("idp_urls", {}).items()}
    return idp_map


def _parse_identity(text: str) -> IdentityRef:
    provider, sep, user_id = text.partition(":")
    if not sep or not provider or not user_id:
        raise CliFailure(f"identity must look like provider:user_id, got {text!r}", EXIT_USAGE)
    return IdentityRef(provider=provider, user_id=user_id)


def _parse_member(text: str):
    """One ring member: 'prov:user' or 'prov:user+prov2:user' for a
    combined-identity member."""
    refs = [_parse_identity(part) for part in text.split("+")]
    return refs[0] if len(refs) == 1 else refs


def _servers_arg(text: str) -> list[str]:
    urls = [u.strip().rstrip("/") for u in text.split(",") if u.strip()]
    if not urls:
        raise CliFailure("--servers needs at least one URL", EXIT_USAGE)
    return urls


def _emit(args, obj: dict, human: str | None = None) -> None:
    if getattr(args, "json", False):
        print(json.dumps(obj, indent=2, sort_keys=True))
    else:
        print(human if human is not None else json.dumps(obj, indent=2, sort_keys=True))


def _scope_arg(args) -> bytes | None:
    return args.scope.encode("utf-8") if getattr(args, "scope", None) else None


# -- subcommand bodies -------------------------------------------------------


def cmd_params_gen(args) -> int:
    params = generate_params(args.q_bits, args.p_bits, args.seed.encode("utf-8"))
    params.save(args.out)
    _emit(
        args,
        {"out": args.out, "fingerprint": params.fingerprint()},
        f"wrote {args.out} (fingerprint {params.fingerprint()[:16]}...)",
    )
    return EXIT_OK


def _wait_for_shutdown() -> None:
    stop = {"flag": False}

    def _handle(signum, frame):
        stop["flag"] = True

    signal.signal(signal.SIGTERM, _handle)
    signal.signal(signal.SIGINT, _handle)
    while not stop["flag"]:
        time.sleep(0.2)


def cmd_harness_up(args) -> int:
    cfg = HarnessConfig(
        n_servers=args.servers_n,
        providers=tuple(args.providers.split(",")),
        params=args.params,
        seed=args.seed.encode("utf-8") if args.seed else None,
        service_name=args.service_name,
    )
    harness = Harness(config=cfg).start()
    harness.write_manifest(args.state_file)
    print(f"harness up: {len(harness.key_server_urls)} key servers, "
          f"{len(harness.idp_urls)} providers, auth at {harness.auth_url}")
    print(f"manifest written to {args.state_file}; stop with: ringauth harness-down "
          f"--state-file {args.state_file}")
    try:
        _wait_for_shutdown()
    finally:
        harness.stop()
        if os.path.exists(args.state_file):
            os.unlink(args.state_file)
    return EXIT_OK


def cmd_serve_keyserver(args) -> int:
    from .httpd import serve
    from .keyserver import KeyServerApp, ServerConfig

    config = ServerConfig.from_file(args.config)
    app = KeyServerApp(config)
    srv = serve(app, host=config.host, port=config.port)
    print(f"key server {config.server_id} (epoch {app.state.epoch}) listening on {srv.url}", flush=True)
    try:
        _wait_for_shutdown()
    finally:
        srv.stop()
    return EXIT_OK


def cmd_serve_auth(args) -> int:
    from .authprovider import AuthConfig, AuthProviderApp
    from .httpd import serve

    config = AuthConfig.from_file(args.config)
    app = AuthProviderApp(config)
    srv = serve(app, host=config.host, port=config.port)
    print(f"auth provider {config.service_name!r} listening on {srv.url}", flush=True)
    try:
        _wait_for_shutdown()
    finally:
        srv.stop()
    return EXIT_OK


def cmd_serve_idp(args) -> int:
    from .httpd import serve
    from .idp import IdentityProviderApp

    with open(args.config, encoding="utf-8") as fp:
        obj = json.load(fp)
    secrets_map = {k: bytes.fromhex(v) for k, v in obj["providers"].items()}
    srv = serve(
        IdentityProviderApp(secrets_map),
        host=obj.get("host", "127.0.0.1"),
        port=int(obj.get("port", 0)),
    )
    print(f"identity providers {sorted(secrets_map)} listening on {srv.url}", flush=True)
    try:
        _wait_for_shutdown()
    finally:
        srv.stop()
    return EXIT_OK


def cmd_harness_down(args) -> int:
    try:
        with open(args.state_file, encoding="utf-8") as fp:
            manifest = json.load(fp)
    except OSError as exc:
        raise CliFailure(f"no harness state file: {exc}", EXIT_USAGE) from exc
    pid = int(manifest["pid"])
    try:
        os.kill(pid, signal.SIGTERM)
    except ProcessLookupError:
        print(f"harness pid {pid} already gone")
    else:
        print(f"sent SIGTERM to harness pid {pid}")
    return EXIT_OK


def cmd_invite(args) -> int:
    identities = [_parse_identity(t) for t in args.identity]
    server = args.server.rstrip("/") if args.server else _resolve_servers(args)[0]
    out = client.request_invitations(server, identities)
    _emit(args, out, f"requested {out['count']} invitations (batch {out['batch_id']})")
    return EXIT_OK


def cmd_collect_key(args) -> int:
    params = _resolve_params(args)
    idp_map = _resolve_idp_map(args)
    credentials = []
    for t in args.user:
        identity = _parse_identity(t)
        if identity.provider not in idp_map:
            raise CliFailure(f"no --idp URL given for provider {identity.provider!r}", EXIT_USAGE)
        credentials.append(
            client.ProviderCredential(
                provider=identity.provider,
                idp_url=idp_map[identity.provider],
                user_id=identity.user_id,
                display_name=args.display_name,
            )
        )
    keyring, phases = client.collect_key(credentials, _resolve_servers(args), params)
    keyring.save(args.out, params)
    _emit(
        args,
        {
            "out": args.out,
            "epoch": keyring.epoch,
            "Y_c_hex": params.enc_element(keyring.y).hex(),
            "token_seconds": round(phases.token_seconds, 4),
            "share_seconds": round(phases.share_seconds, 4),
        },
        f"keyring written to {args.out} (epoch {keyring.epoch}; "
        f"tokens {phases.token_seconds:.2f}s, shares {phases.share_seconds:.2f}s)",
    )
    return EXIT_OK


def cmd_pubkey(args) -> int:
    params = _resolve_params(args)
    identity = _parse_identity(args.identity)
    y = client.fetch_public_key(identity, _resolve_servers(args), params, epoch=args.epoch)
    _emit(
        args,
        {"identity": identity.to_dict(), "y_hex": params.enc_element(y).hex()},
        params.enc_element(y).hex(),
    )
    return EXIT_OK


def cmd_ring_build(args) -> int:
    params = _resolve_params(args)
    specs = [_parse_member(t) for t in args.identity]
    ring, members = client.build_ring(
        specs, _resolve_servers(args), params, epoch=args.epoch
    )
    obj = client.ring_to_dict(ring, members, params, args.epoch)
    with open(args.out, "w", encoding="utf-8") as fp:
        json.dump(obj, fp, indent=2)
        fp.write("\n")
    if len(ring) == 1:
        print("warning: a 1-member ring offers zero anonymity", file=sys.stderr)
    _emit(args, {"out": args.out, "size": len(ring)}, f"ring of {len(ring)} written to {args.out}")
    return EXIT_OK


def _load_ring(path: str, params: GroupParams):
    try:
        with open(path, encoding="utf-8") as fp:
            return client.ring_from_dict(json.load(fp), params)
    except (OSError, ValueError, KeyError, lrs.LrsError) as exc:
        raise CliFailure(f"cannot load ring file {path}: {exc}", EXIT_FORMAT) from exc


def _spec_names(specs) -> str:
    return ", ".join("+".join(r.key() for r in spec) for spec in sorted(specs))


def cmd_sign(args) -> int:
    params = _resolve_params(args)
    ring, specs = _load_ring(args.ring, params)
    keyring = client.Keyring.load(args.keyring)
    if len(ring) == 1:
        print("warning: a 1-member ring offers zero anonymity", file=sys.stderr)
    try:
        client.sign_document(args.infile, args.out, ring, keyring, params, scope=_scope_arg(args))
    except client.ClientError as exc:
        raise CliFailure(str(exc), EXIT_USAGE) from exc
    names = _spec_names(specs) or f"{len(ring)} keys"
    _emit(
        args,
        {"signature": args.out, "anonymity_set": member_specs_to_wire(sorted(specs))},
        f"signed {args.infile} as one of: {names}\nsignature written to {args.out}",
    )
    return EXIT_OK


def cmd_verify(args) -> int:
    params = _resolve_params(args)
    ring, specs = _load_ring(args.ring, params)
    try:
        ok, tag, pseudonym = client.verify_document(args.infile, args.sig, ring, params)
    except lrs.DecodeError as exc:
        raise CliFailure(f"malformed signature file: {exc}", EXIT_FORMAT) from exc
    if args.hexdump:
        sig = lrs.read_signature_file(args.sig, params)
        print(lrs.hexdump(sig, params), file=sys.stderr)
    obj = {
        "accepted": ok,
        "tag_hex": params.enc_element(tag).hex(),
        "pseudonym": pseudonym,
        "anonymity_set": member_specs_to_wire(sorted(specs)),
    }
    if not ok:
        _emit(args, obj, "verification FAILED")
        return EXIT_VERIFY_FAILED
    names = _spec_names(specs) or f"{len(ring)} keys"
    _emit(args, obj, f"signature valid; signer is one of: {names}\npseudonym {pseudonym}")
    return EXIT_OK


def cmd_login(args) -> int:
    params = _resolve_params(args)
    members = [_parse_member(t) for t in args.identity]
    keyring = client.Keyring.load(args.keyring)
    out = client.login(
        _resolve_auth(args), members, keyring, _resolve_servers(args), params
    )
    _emit(args, out, f"logged in; pseudonym {out['pseudonym']}\ntoken {out['token']}")
    return EXIT_OK


def _wire_entry_name(entry) -> str:
    if isinstance(entry, dict):
        return f"{entry['provider']}:{entry['user_id']}"
    return "+".join(f"{d['provider']}:{d['user_id']}" for d in entry)


def cmd_introspect(args) -> int:
    out = client.introspect(_resolve_auth(args), args.token)
    names = ", ".join(_wire_entry_name(e) for e in out["ring_identities"])
    _emit(args, out, f"pseudonym {out['pseudonym']}\nanonymity set: {names}")
    return EXIT_OK


def cmd_block(args) -> int:
    out = client.block_pseudonym(_resolve_auth(args), args.pseudonym)
    _emit(args, out, f"blocked {args.pseudonym} ({out['revoked_tokens']} tokens revoked)")
    return EXIT_OK


def cmd_unblock(args) -> int:
    out = client.unblock_pseudonym(_resolve_auth(args), args.pseudonym)
    _emit(args, out, f"unblocked {args.pseudonym}")
    return EXIT_OK


def cmd_rotate(args) -> int:
    server = args.server.rstrip("/") if args.server else None
    if server is None:
        raise CliFailure("--server is required", EXIT_USAGE)
    out = client.rotate_server(server)
    _emit(args, out, f"{out['server_id']} now at epoch {out['epoch']}")
    return EXIT_OK


def cmd_bench(args) -> int:
    params = _resolve_params(args)
    sizes = [int(s) for s in args.sizes.split(",")]
    report = bench_mod.run_bench(sizes, args.reps, params, backend=args.backend, seed=args.seed)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fp:
            json.dump(report, fp, indent=2)
            fp.write("\n")
    if args.csv:
        with open(args.csv, "w", encoding="utf-8") as fp:
            fp.write(bench_mod.report_csv(report))
    if args.json:
        print(json.dumps(report, indent=2))
    else:
        for run in report["runs"]:
            fits = run["fits"]
            print(f"backend {run['backend']}:")
            for s in run["series"]:
                print(
                    f"  n={s['ring_size']:>5}  sign {s['mean_sign_s'] * 1e3:9.2f} ms  "
                    f"verify {s['mean_verify_s'] * 1e3:9.2f} ms  {s['size_bytes']} bytes"
                )
            print(
                f"  fits: sign R2={fits['sign']['r2']:.4f}  verify R2={fits['verify']['r2']:.4f}"
            )
    return EXIT_OK


def cmd_e2e(args) -> int:
    """Scripted end-to-end run against a fresh local deployment."""
    with Harness(HarnessConfig(n_servers=3, params=args.params)) as h:
        params = h.params
        print(f"[1] harness up: {len(h.key_server_urls)} key servers, "
              f"providers {sorted(h.idp_urls)}, auth at {h.auth_url}")

        others = [IdentityRef("mockbook", f"user{i}") for i in range(1, 5)]
        inv = client.request_invitations(
            h.key_server_urls[0], [IdentityRef("mockbook", "user0"), *others]
        )
        print(f"[2] invited {inv['count']} identities (batch {inv['batch_id']})")

        credentials = [
            client.ProviderCredential("mockbook", h.idp_urls["mockbook"], "user0"),
            client.ProviderCredential("mockpal", h.idp_urls["mockpal"], "user0"),
        ]
        keyring, phases = client.collect_key(credentials, h.key_server_urls, params)
        print(
            f"[3] collected combined-identity key over {len(credentials)} providers "
            f"(tokens {phases.token_seconds:.2f}s, shares {phases.share_seconds:.2f}s)"
        )

        # 5-member anonymity set: our combined identity plus four others
        members = [list(keyring.identities), *others]
        out = client.login(h.auth_url, members, keyring, h.key_server_urls, params)
        pseudonym = out["pseudonym"]
        print(f"[4] logged in over a 5-member ring; pseudonym {pseudonym[:16]}...")

        info = client.introspect(h.auth_url, out["token"])
        assert len(info["ring_identities"]) == 5, "introspection must show all 5 members"
        print(f"[5] introspection shows {len(info['ring_identities'])} ring members")

        client.block_pseudonym(h.auth_url, pseudonym)
        try:
            client.login(h.auth_url, members, keyring, h.key_server_urls, params)
        except client.RemoteError as exc:
            if exc.code != "pseudonym_blocked":
                raise
            print("[6] blocked pseudonym can no longer log in")
        else:
            raise CliFailure("blocked pseudonym was allowed back in", EXIT_SERVICE)

        client.unblock_pseudonym(h.auth_url, pseudonym)
        out2 = client.login(h.auth_url, members, keyring, h.key_server_urls, params)
        assert out2["pseudonym"] == pseudonym, "pseudonym must be stable across logins"
        print("[7] unblocked; login succeeds again with the same pseudonym")
    print("end-to-end flow complete")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    top = argparse.ArgumentParser(prog="ringauth", description=__doc__,
                                  formatter_class=argparse.RawDescriptionHelpFormatter)
    top.add_argument("--json", action="store_true", help="machine-readable output")
    top.add_argument(
        "--config",
        default=None,
        help="deployment manifest supplying default --servers/--auth/--idp/--params",
    )
    sub = top.add_subparsers(dest="command", required=True)

    p = sub.add_parser("params-gen", help="deterministically generate group parameters")
    p.add_argument("--q-bits", type=int, default=256)
    p.add_argument("--p-bits", type=int, default=2048)
    p.add_argument("--seed", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=cmd_params_gen)

    p = sub.add_parser("harness-up", help="run a local deployment until stopped")
    p.add_argument("--servers-n", type=int, default=3)
    p.add_argument("--providers", default=",".join(DEFAULT_PROVIDERS))
    p.add_argument("--params", default="toy")
    p.add_argument("--seed", default=None)
    p.add_argument("--service-name", default="demo")
    p.add_argument("--state-file", default="ringauth-harness.json")
    p.set_defaults(fn=cmd_harness_up)

    p = sub.add_parser("harness-down", help="stop a running local deployment")
    p.add_argument("--state-file", default="ringauth-harness.json")
    p.set_defaults(fn=cmd_harness_down)

    p = sub.add_parser("invite", help="anonymously request invitations")
    p.add_argument("--server", default=None)
    p.add_argument("--identity", action="append", required=True, metavar="PROVIDER:USER")
    p.set_defaults(fn=cmd_invite)

    p = sub.add_parser("collect-key", help="collect and combine private key shares")
    p.add_argument("--servers", default=None, help="comma-separated key server URLs")
    p.add_argument("--idp", action="append", default=None, metavar="PROVIDER=URL")
    p.add_argument("--user", action="append", required=True, metavar="PROVIDER:USER")
    p.add_argument("--display-name", default="")
    p.add_argument("--params", default=None)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=cmd_collect_key)

    p = sub.add_parser("pubkey", help="fetch an identity's composite public key")
    p.add_argument("--servers", default=None)
    p.add_argument("--identity", required=True, metavar="PROVIDER:USER")
    p.add_argument("--epoch", type=int, default=None)
    p.add_argument("--params", default=None)
    p.set_defaults(fn=cmd_pubkey)

    p = sub.add_parser("ring-build", help="build a canonical anonymity set")
    p.add_argument("--servers", default=None)
    p.add_argument("--identity", action="append", required=True, metavar="PROVIDER:USER")
    p.add_argument("--epoch", type=int, default=None)
    p.add_argument("--params", default=None)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=cmd_ring_build)

    p = sub.add_parser("sign", help="detached-sign a document as a ring member")
    p.add_argument("--params", default=None)
    p.add_argument("--ring", required=True)
    p.add_argument("--keyring", required=True)
    p.add_argument("--scope", default=None, help="linkability scope (default: ring-bound)")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=cmd_sign)

    p = sub.add_parser("verify", help="verify a detached document signature")
    p.add_argument("--params", default=None)
    p.add_argument("--ring", required=True)
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--sig", required=True)
    p.add_argument("--hexdump", action="store_true", help="dump signature fields to stderr")
    p.set_defaults(fn=cmd_verify)

    p = sub.add_parser("login", help="anonymous challenge/response login")
    p.add_argument("--auth", default=None)
    p.add_argument("--servers", default=None)
    p.add_argument("--keyring", required=True)
    p.add_argument("--identity", action="append", required=True, metavar="PROVIDER:USER")
    p.add_argument("--params", default=None)
    p.set_defaults(fn=cmd_login)

    p = sub.add_parser("introspect", help="look up a bearer token")
    p.add_argument("--auth", default=None)
    p.add_argument("--token", required=True)
    p.set_defaults(fn=cmd_introspect)

    p = sub.add_parser("block", help="block a pseudonym (admin)")
    p.add_argument("--auth", default=None)
    p.add_argument("--pseudonym", required=True)
    p.set_defaults(fn=cmd_block)

    p = sub.add_parser("unblock", help="unblock a pseudonym (admin)")
    p.add_argument("--auth", default=None)
    p.add_argument("--pseudonym", required=True)
    p.set_defaults(fn=cmd_unblock)

    p = sub.add_parser("rotate", help="rotate a key server's epoch (admin)")
    p.add_argument("--server", required=True)
    p.set_defaults(fn=cmd_rotate)

    p = sub.add_parser("serve-keyserver", help="run one key server from a config file")
    p.add_argument("--config", required=True, help="server config JSON")
    p.set_defaults(fn=cmd_serve_keyserver)

    p = sub.add_parser("serve-auth", help="run the auth provider from a config file")
    p.add_argument("--config", required=True, help="auth provider config JSON")
    p.set_defaults(fn=cmd_serve_auth)

    p = sub.add_parser("serve-idp", help="run a mock identity provider from a config file")
    p.add_argument("--config", required=True, help="provider secrets config JSON")
    p.set_defaults(fn=cmd_serve_idp)

    p = sub.add_parser("bench", help="sign/verify/size scaling benchmark")
    p.add_argument("--params", default=None)
    p.add_argument("--sizes", default="16,32,64,128,256,512,1024")
    p.add_argument("--reps", type=int, default=5)
    p.add_argument(
        "--backend",
        default="active",
        choices=["active", "both", *available_backends()],
        help=f"modexp backend (active: {active_backend()})",
    )
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", default=None, help="write JSON report here")
    p.add_argument("--csv", default=None, help="write plot-ready CSV here")
    p.set_defaults(fn=cmd_bench)

    p = sub.add_parser("e2e", help="scripted end-to-end demo on a fresh harness")
    p.add_argument("--params", default="production")
    p.set_defaults(fn=cmd_e2e)

    return top


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except CliFailure as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except client.RemoteError as exc:
        print(f"error: {exc}", file=sys.stderr)
        if exc.code == "pseudonym_blocked":
            return EXIT_BLOCKED
        return EXIT_SERVICE
    except client.ServerUnreachable as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_UNREACHABLE
    except client.ServerInconsistency as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INCONSISTENT
    except client.ClientError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (lrs.DecodeError, ParamError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FORMAT


if __name__ == "__main__":
    sys.exit(main())
