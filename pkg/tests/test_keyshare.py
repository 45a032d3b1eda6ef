import hashlib
import hmac
import itertools
import json

import pytest

from ringauth import keyshare as ks
from ringauth.group import exp
from ringauth.keyshare import EpochState, IdentityRef


class TestIdentityRef:
    def test_validation(self):
        with pytest.raises(ValueError):
            IdentityRef("", "alice")
        with pytest.raises(ValueError):
            IdentityRef("mockbook", "")
        with pytest.raises(ValueError):
            IdentityRef("mock:book", "alice")

    def test_ordering_and_key(self):
        a = IdentityRef("mockbook", "alice")
        b = IdentityRef("mockpal", "alice")
        assert a < b
        assert a.key() == "mockbook:alice"
        assert IdentityRef.from_dict(a.to_dict()) == a


class TestMemberSpec:
    def test_singleton_forms(self):
        ref = IdentityRef("mockbook", "alice")
        assert ks.member_spec(ref) == (ref,)
        assert ks.member_spec({"provider": "mockbook", "user_id": "alice"}) == (ref,)

    def test_combined_sorted_and_deduped(self):
        a = IdentityRef("mockpal", "u")
        b = IdentityRef("mockbook", "u")
        assert ks.member_spec([a, b]) == (b, a)
        with pytest.raises(ValueError):
            ks.member_spec([a, a])
        with pytest.raises(ValueError):
            ks.member_spec([])

    def test_wire_round_trip(self):
        specs = [
            (IdentityRef("mockbook", "u1"),),
            (IdentityRef("mockbook", "u0"), IdentityRef("mockpal", "u0")),
        ]
        wire = ks.member_specs_to_wire(specs)
        assert isinstance(wire[0], dict)
        assert isinstance(wire[1], list)
        assert ks.parse_member_specs(wire) == specs


class TestDeriveShare:
    IDENT = IdentityRef("mockbook", "alice")
    MASTER = bytes(range(32))

    def test_deterministic(self, toy):
        xs = {ks.derive_share(self.MASTER, 0, self.IDENT, toy) for _ in range(1000)}
        assert len(xs) == 1

    def test_matches_reference_hmac_oracle(self, toy):
        # independent recomputation: HMAC-SHA256(master, epoch||key||ctr),
        # hashed to a scalar, bumping ctr past zero scalars
        def reference(master, epoch, ident):
            base = epoch.to_bytes(8, "big") + f"{ident.provider}:{ident.user_id}".encode()
            for ctr in range(256):
                mac = hmac.new(master, base + bytes([ctr]), hashlib.sha256).digest()
                x = int.from_bytes(hashlib.sha256(b"share\x00" + mac).digest(), "big") % toy.q
                if x:
                    return x
            raise AssertionError

        for epoch in (0, 1, 7):
            assert ks.derive_share(self.MASTER, epoch, self.IDENT, toy) == reference(
                self.MASTER, epoch, self.IDENT
            )

    def test_epochs_differ(self, prod):
        a = ks.derive_share(self.MASTER, 0, self.IDENT, prod)
        b = ks.derive_share(self.MASTER, 1, self.IDENT, prod)
        assert a != b

    def test_providers_differ(self, prod):
        a = ks.derive_share(self.MASTER, 0, IdentityRef("mockbook", "alice"), prod)
        b = ks.derive_share(self.MASTER, 0, IdentityRef("mockpal", "alice"), prod)
        assert a != b

    def test_never_zero(self, toy, rng):
        # q=11 makes zero reductions actually reachable, so the counter
        # bump path gets real exercise here
        for _ in range(2000):
            ident = IdentityRef("p", rng.randbytes(4).hex())
            assert 1 <= ks.derive_share(self.MASTER, 0, ident, toy) < toy.q


class TestCombine:
    def test_toy_examples(self, toy):
        assert ks.combine_private([3, 5, 4], toy) == 1
        assert ks.combine_private([7], toy) == 7
        assert ks.combine_private([3, 8], toy) == 0  # wraparound, caller rejects
        assert ks.combine_public([18, 12, 3], toy) == 4
        assert ks.combine_public([4], toy) == 4

    def test_empty_rejected(self, toy):
        with pytest.raises(ks.KeyShareError):
            ks.combine_private([], toy)
        with pytest.raises(ks.KeyShareError):
            ks.combine_public([], toy)

    def test_public_share_example(self, toy):
        assert ks.public_share(7, toy) == 8

    def test_anytrust_identity_exhaustive(self, toy):
        # exp(g, sum x_i) == prod exp(g, x_i) for every toy tuple, n <= 3
        for n in (1, 2, 3):
            for xs in itertools.product(range(11), repeat=n):
                pubs = [exp(toy.g, x, toy) for x in xs]
                assert exp(toy.g, ks.combine_private(list(xs), toy), toy) == ks.combine_public(
                    pubs, toy
                )

    def test_anytrust_identity_production(self, prod, rng):
        for k in range(1, 6):
            xs = [rng.randrange(prod.q) for _ in range(k)]
            pubs = [exp(prod.g, x, prod) for x in xs]
            assert exp(prod.g, ks.combine_private(xs, prod), prod) == ks.combine_public(
                pubs, prod
            )

    def test_missing_share_opacity_bijection(self, toy):
        # withheld share -> composite is a bijection, so n-1 shares leave
        # every candidate composite equally possible
        fixed = [3, 5]
        composites = {ks.combine_private(fixed + [w], toy) for w in range(toy.q)}
        assert composites == set(range(toy.q))


class TestEpochs:
    def test_rotation_increments_and_keeps_archive(self):
        state = EpochState(epoch=0, master_secret=bytes(32), archive={(0, "p", "u"): 9})
        new = ks.rotate_epoch(state, bytes([1]) * 32)
        assert new.epoch == 1
        assert new.master_secret != state.master_secret
        assert new.archive == {(0, "p", "u"): 9}

    def test_rotation_rejects_reuse_and_bad_length(self):
        state = EpochState(epoch=0, master_secret=bytes(32))
        with pytest.raises(ks.KeyShareError):
            ks.rotate_epoch(state, bytes(32))
        with pytest.raises(ks.KeyShareError):
            ks.rotate_epoch(state, b"short")

    def test_archive_append_only_across_rotation(self):
        state = EpochState(epoch=0, master_secret=bytes(32), archive={})
        state.archive[(0, "p", "u")] = 4
        before = dict(state.archive)
        new = ks.rotate_epoch(state, bytes([7]) * 32)
        new.archive[(1, "p", "u")] = 8
        assert set(before).issubset(new.archive)


class TestPersistence:
    def test_archive_round_trip(self, toy, tmp_path):
        path = str(tmp_path / "archive.jsonl")
        ident = IdentityRef("mockbook", "alice")
        ks.append_archive(path, 0, ident, 18, toy)
        ks.append_archive(path, 1, ident, 12, toy)
        loaded = ks.load_archive(path)
        assert loaded == {(0, "mockbook", "alice"): 18, (1, "mockbook", "alice"): 12}
        lines = [json.loads(l) for l in open(path)]
        assert set(lines[0]) == {"epoch", "provider", "user_id", "y_hex"}

    def test_load_missing_archive_is_empty(self, tmp_path):
        assert ks.load_archive(str(tmp_path / "nope.jsonl")) == {}

    def test_master_secret_file_permissions(self, tmp_path):
        import os

        path = str(tmp_path / "master.key")
        secret = bytes(range(32))
        ks.save_master_secret(path, secret)
        assert ks.load_master_secret(path) == secret
        assert os.stat(path).st_mode & 0o777 == 0o600
