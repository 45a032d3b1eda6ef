import json

import pytest
import requests

from ringauth import client
from ringauth.harness import Harness, HarnessConfig
from ringauth.keyshare import IdentityRef


class TestHarnessLifecycle:
    def test_boot_three_servers_all_answer(self):
        with Harness(HarnessConfig(n_servers=3, params="toy")) as h:
            assert len(h.key_server_urls) == 3
            seen = set()
            for url in h.key_server_urls:
                obj = requests.get(f"{url}/epoch", timeout=5).json()
                assert obj["epoch"] == 0
                seen.add(obj["server_id"])
            assert seen == {"ks0", "ks1", "ks2"}
            assert set(h.idp_urls) == {"mockbook", "mockpal"}

    def test_teardown_idempotent(self):
        h = Harness(HarnessConfig(n_servers=1, params="toy")).start()
        url = h.key_server_urls[0]
        h.stop()
        h.stop()
        with pytest.raises(requests.RequestException):
            requests.get(f"{url}/epoch", timeout=1)

    def test_seeded_harness_is_reproducible(self):
        def collect(h):
            keyring, _ = client.collect_key(
                [client.ProviderCredential("mockbook", h.idp_urls["mockbook"], "alice")],
                h.key_server_urls,
                h.params,
            )
            return keyring.x

        with Harness(HarnessConfig(n_servers=2, params="toy", seed=b"fixed")) as h1:
            x1 = collect(h1)
        with Harness(HarnessConfig(n_servers=2, params="toy", seed=b"fixed")) as h2:
            x2 = collect(h2)
        assert x1 == x2

    def test_manifest_contents(self, tmp_path):
        with Harness(HarnessConfig(n_servers=1, params="toy")) as h:
            path = str(tmp_path / "manifest.json")
            h.write_manifest(path)
            obj = json.load(open(path))
            assert obj["key_servers"] == h.key_server_urls
            assert obj["auth_url"] == h.auth_url
            assert bytes.fromhex(obj["scope_hex"]) == h.scope


class TestEpochFlowAcrossDeployment:
    def test_rotate_all_then_old_epoch_behavior(self):
        # production params: on the toy group a rotated key can collide
        # with its predecessor by luck (11 possible composites)
        with Harness(HarnessConfig(n_servers=3, params="production", seed=b"rot")) as h:
            me = IdentityRef("mockbook", "alice")
            keyring, _ = client.collect_key(
                [client.ProviderCredential("mockbook", h.idp_urls["mockbook"], "alice")],
                h.key_server_urls,
                h.params,
            )
            old_pub = client.fetch_public_key(me, h.key_server_urls, h.params)
            assert old_pub == keyring.y

            for url in h.key_server_urls:
                out = client.rotate_server(url)
                assert out["epoch"] == 1

            # private material for epoch 0 is gone on every server
            for url in h.key_server_urls:
                tok = client.post_json(
                    f"{h.idp_urls['mockbook']}/token",
                    {
                        "provider": "mockbook",
                        "user_id": "alice",
                        "audience": client.get_json(f"{url}/epoch")["server_id"],
                        "ttl": 60,
                    },
                )["token"]
                with pytest.raises(client.RemoteError) as err:
                    client.post_json(f"{url}/share", {"tokens": [tok], "epoch": 0})
                assert err.value.code == "epoch_expired"

            # archived public keys still served, and the key changed at epoch 1
            archived = client.fetch_public_key(me, h.key_server_urls, h.params, epoch=0)
            assert archived == old_pub
            fresh = client.fetch_public_key(me, h.key_server_urls, h.params)
            assert fresh != old_pub
