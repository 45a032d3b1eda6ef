"""Acceptance gate: the eight delivery criteria, one test per criterion.

Each test prints one ``[acceptance N] name: PASS|FAIL`` line (visible with
``pytest tests/test_acceptance.py -s``) and enforces its stated tolerance
exactly; timing-bounded criteria also assert their runtime budget.
"""

import functools
import itertools
import random
import statistics
import time

import pytest

from ringauth import bench, cli, client, ibepkg, keyshare, lrs
from ringauth.group import exp, production_params, toy_params
from ringauth.harness import Harness, HarnessConfig
from ringauth.keyshare import IdentityRef


def criterion(num, name):
    def deco(fn):
        @functools.wraps(fn)
        def wrapper(*args, **kwargs):
            try:
                result = fn(*args, **kwargs)
            except BaseException:
                print(f"\n[acceptance {num}] {name}: FAIL", flush=True)
                raise
            print(f"\n[acceptance {num}] {name}: PASS", flush=True)
            return result

        return wrapper

    return deco


@criterion(1, "ring signature correctness and mutation rejection")
def test_01_lrs_correctness():
    params = production_params()
    rng = random.Random(101)
    started = time.monotonic()

    sigs_by_size = {}
    for n in (1, 2, 3, 4, 8, 16, 64):
        xs = [rng.randrange(1, params.q) for _ in range(n)]
        ring = lrs.Ring.of([exp(params.g, x, params) for x in xs], params)
        assert len(ring) == n
        for x in xs:
            idx = ring.index_of(exp(params.g, x, params))
            msg = rng.randbytes(32)
            sig = lrs.sign(msg, ring, idx, x, params, scope=b"accept", rng=rng)
            assert lrs.verify(msg, ring, sig, params), f"completeness broke at n={n}"
            sigs_by_size[n] = (msg, ring, sig)

    mutations = 0
    rejected = 0
    for n, (msg, ring, sig) in sigs_by_size.items():
        blob = lrs.encode(sig, params)
        for _ in range(75):
            if rng.random() < 0.5:
                mutated = bytearray(msg)
                mutated[rng.randrange(len(mutated))] ^= rng.randrange(1, 256)
                ok = lrs.verify(bytes(mutated), ring, sig, params)
            else:
                corrupted = bytearray(blob)
                corrupted[rng.randrange(len(corrupted))] ^= rng.randrange(1, 256)
                try:
                    bad = lrs.decode(bytes(corrupted), params)
                except lrs.DecodeError:
                    ok = False
                else:
                    ok = lrs.verify(msg, ring, bad, params)
            mutations += 1
            rejected += not ok
    assert mutations >= 500
    assert rejected == mutations, f"{mutations - rejected} mutations were accepted"

    elapsed = time.monotonic() - started
    assert elapsed <= 120, f"correctness suite took {elapsed:.0f}s, budget is 120s"


@criterion(2, "pseudonym stability and sybil bound over live logins")
def test_02_pseudonym_stability():
    users = [IdentityRef("mockbook", f"user{i}") for i in range(8)]
    with Harness(HarnessConfig(n_servers=3, params="production", seed=b"accept2")) as h:
        keyrings = {
            u.user_id: client.collect_key(
                [client.ProviderCredential("mockbook", h.idp_urls["mockbook"], u.user_id)],
                h.key_server_urls,
                h.params,
            )[0]
            for u in users
        }

        # 100 logins by one key across varying anonymity sets
        rng = random.Random(202)
        pseudonyms = set()
        for i in range(100):
            others = rng.sample(users[1:], rng.randrange(0, 8))
            members = [users[0], *others]
            out = client.login(
                h.auth_url, members, keyrings["user0"], h.key_server_urls, h.params
            )
            pseudonyms.add(out["pseudonym"])
        assert len(pseudonyms) == 1, f"one key produced {len(pseudonyms)} pseudonyms"

        # eight distinct members over one fixed ring: exactly eight pseudonyms
        eight = set()
        for u in users:
            out = client.login(h.auth_url, users, keyrings[u.user_id], h.key_server_urls, h.params)
            eight.add(out["pseudonym"])
        assert len(eight) == 8, f"8 members produced {len(eight)} pseudonyms"


@criterion(3, "anytrust combination identity, exhaustive on the toy group")
def test_03_anytrust_identity():
    toy = toy_params()
    for n in (1, 2, 3):
        for xs in itertools.product(range(11), repeat=n):
            lhs = exp(toy.g, keyshare.combine_private(list(xs), toy), toy)
            rhs = keyshare.combine_public([exp(toy.g, x, toy) for x in xs], toy)
            assert lhs == rhs, (xs, lhs, rhs)


@criterion(4, "threshold key generation: recombination and hiding, exhaustive")
def test_04_shamir_pkg():
    toy = toy_params()
    ident = IdentityRef("mockbook", "alice")
    q_id = ibepkg.identity_base(ident, toy)
    rng = random.Random(404)

    def poly_eval(coeffs, x):
        acc = 0
        for c in reversed(coeffs):
            acc = (acc * x + c) % toy.q
        return acc

    for n in range(1, 5):
        for t in range(1, n + 1):
            for secret in range(11):
                shares = ibepkg.shamir_share(secret, t, n, toy, rng=rng)
                responses = [ibepkg.extract_share(s, ident, toy) for s in shares]
                expected = exp(q_id, secret, toy)
                for subset in itertools.combinations(responses, t):
                    got = ibepkg.recombine(list(subset), t, toy)
                    assert got == expected, (t, n, secret, subset)

                # hiding: every (t-1)-subset of shares is consistent with
                # every candidate secret, by brute polynomial enumeration
                if t == 1:
                    continue
                for known in itertools.combinations(shares, t - 1):
                    consistent = set()
                    for coeffs in itertools.product(range(11), repeat=t):
                        if all(poly_eval(list(coeffs), s.index) == s.value for s in known):
                            consistent.add(coeffs[0])
                    assert consistent == set(range(11)), (t, n, secret, known)


@criterion(5, "epoch rotation: private shares die, archives stay verifiable")
def test_05_epoch_semantics():
    with Harness(HarnessConfig(n_servers=3, params="production", seed=b"accept5")) as h:
        me = IdentityRef("mockbook", "alice")
        other = IdentityRef("mockbook", "bob")
        keyring, _ = client.collect_key(
            [client.ProviderCredential("mockbook", h.idp_urls["mockbook"], "alice")],
            h.key_server_urls,
            h.params,
        )
        ring0, _ = client.build_ring([me, other], h.key_server_urls, h.params)
        msg = b"signed before any rotation"
        sig = lrs.sign(
            msg, ring0, ring0.index_of(keyring.y), keyring.x, h.params, scope=b"doc"
        )

        per_server_old = {
            url: client.get_json(
                f"{url}/pubkey", params={"provider": "mockbook", "user_id": "alice"}
            )["y_hex"]
            for url in h.key_server_urls
        }

        for url in h.key_server_urls:
            client.rotate_server(url)

        # private material for the old epoch fails on every server
        for url in h.key_server_urls:
            sid = client.get_json(f"{url}/epoch")["server_id"]
            tok = client.post_json(
                f"{h.idp_urls['mockbook']}/token",
                {"provider": "mockbook", "user_id": "alice", "audience": sid, "ttl": 60},
            )["token"]
            with pytest.raises(client.RemoteError) as err:
                client.post_json(f"{url}/share", {"tokens": [tok], "epoch": 0})
            assert err.value.code == "epoch_expired"

        # archived public shares are byte-identical to what was served
        for url, old_hex in per_server_old.items():
            now_hex = client.get_json(
                f"{url}/pubkey",
                params={"provider": "mockbook", "user_id": "alice", "epoch": "0"},
            )["y_hex"]
            assert now_hex == old_hex

        # the old signature still verifies against the archived ring
        archived_ring, _ = client.build_ring(
            [me, other], h.key_server_urls, h.params, epoch=0
        )
        assert archived_ring.descriptor(h.params) == ring0.descriptor(h.params)
        assert lrs.verify(msg, archived_ring, sig, h.params)

        # and the current-epoch ring is a different ring
        fresh_ring, _ = client.build_ring([me, other], h.key_server_urls, h.params)
        assert fresh_ring.descriptor(h.params) != ring0.descriptor(h.params)


@criterion(6, "scaling: linear sign/verify fits, exact size law")
def test_06_scaling():
    params = production_params()
    started = time.monotonic()
    sizes = [16, 32, 64, 128, 256, 512, 1024]
    report = bench.run_bench(sizes, reps=5, params=params, seed=606)
    (run,) = report["runs"]

    for s in run["series"]:
        assert s["size_bytes"] == 296 + 32 * s["ring_size"]

    # independent fit of the measured series through the stdlib regression
    xs = [float(s["ring_size"]) for s in run["series"]]
    for op in ("sign", "verify"):
        ys = [s[f"mean_{op}_s"] for s in run["series"]]
        r2 = statistics.correlation(xs, ys) ** 2
        assert r2 >= 0.98, f"{op} series R^2 = {r2:.4f}"
        assert run["fits"][op]["r2"] >= 0.98
        assert statistics.linear_regression(xs, ys).slope > 0

    # sanity bound: a single n=100 signing stays comfortably interactive
    rng = random.Random(607)
    xs100 = [rng.randrange(1, params.q) for _ in range(100)]
    ring = lrs.Ring.of([exp(params.g, x, params) for x in xs100], params)
    idx = ring.index_of(exp(params.g, xs100[0], params))
    t0 = time.monotonic()
    lrs.sign(b"m", ring, idx, xs100[0], params, scope=b"", rng=rng)
    assert time.monotonic() - t0 < 2.0

    elapsed = time.monotonic() - started
    assert elapsed <= 600, f"scaling run took {elapsed:.0f}s, budget is 600s"


@criterion(7, "scripted end-to-end flow exits cleanly inside its budget")
def test_07_end_to_end():
    started = time.monotonic()
    code = cli.main(["e2e", "--params", "production"])
    elapsed = time.monotonic() - started
    assert code == 0
    assert elapsed <= 60, f"end-to-end run took {elapsed:.0f}s, budget is 60s"


@criterion(8, "provider tokens are single-server: audience isolation")
def test_08_token_isolation():
    with Harness(HarnessConfig(n_servers=2, params="toy", seed=b"accept8")) as h:
        tok = client.post_json(
            f"{h.idp_urls['mockbook']}/token",
            {"provider": "mockbook", "user_id": "alice", "audience": "ks0", "ttl": 60},
        )["token"]

        accepted = client.post_json(f"{h.key_server_urls[0]}/share", {"tokens": [tok]})
        assert accepted["epoch"] == 0

        with pytest.raises(client.RemoteError) as err:
            client.post_json(f"{h.key_server_urls[1]}/share", {"tokens": [tok]})
        assert err.value.code == "audience_mismatch"
