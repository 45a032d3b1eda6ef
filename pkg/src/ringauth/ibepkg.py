"""Distributed identity-based private key generator.

An alternative to additive anytrust sharing: a dealer Shamir-shares a
master scalar ``s`` across ``n`` key servers with threshold ``t``.  Each
server turns an identity string into a key part by exponentiating the
identity's group element ``Q_id = H2(provider:user)`` with its share; any
``t`` parts recombine through Lagrange coefficients (evaluated at zero)
into ``Q_id^s``, the identity's private key.  ``t - 1`` parts reveal
nothing: every candidate master scalar stays equally consistent.

The default deployment threshold is t = n, matching the anytrust stance of
the rest of the package; lower thresholds are supported for experiments.
"""

from __future__ import annotations

import json
import secrets
from dataclasses import dataclass
from typing import Iterable

from .group import GroupParams, exp, hash_to_group
from .keyshare import IdentityRef
from .lrs import RandomSource

QID_TAG = b"ibe-qid"

_sysrand = secrets.SystemRandom()


class PkgError(Exception):
    pass


@dataclass(frozen=True)
class ShamirShare:
    index: int
    value: int


@dataclass(frozen=True)
class PkgShareResponse:
    index: int
    q_priv: int


def shamir_share(
    secret: int, t: int, n: int, params: GroupParams, rng: RandomSource | None = None
) -> list[ShamirShare]:
    """Split ``secret`` into n points on a random degree-(t-1) polynomial."""
    if not 1 <= t <= n:
        raise PkgError(f"threshold {t} must satisfy 1 <= t <= n = {n}")
    if n >= params.q:
        raise PkgError("share count must be below the scalar field order")
    if not params.is_scalar(secret):
        raise PkgError("secret must be a scalar")
    if rng is None:
        rng = _sysrand
    coeffs = [secret] + [rng.randrange(params.q) for _ in range(t - 1)]
    shares = []
    for i in range(1, n + 1):
        acc = 0
        for c in reversed(coeffs):
            acc = (acc * i + c) % params.q
        shares.append(ShamirShare(index=i, value=acc))
    return shares


def lagrange_coeff(indices: Iterable[int], i: int, params: GroupParams) -> int:
    """Coefficient weighting share i when interpolating at zero."""
    idx = set(indices)
    if i not in idx:
        raise PkgError(f"index {i} not in the interpolation set")
    q = params.q
    if any(j % q == 0 for j in idx):
        raise PkgError("indices must be nonzero mod q")
    if len({j % q for j in idx}) != len(idx):
        raise PkgError("indices must be distinct mod q")
    lam = 1
    for j in idx:
        if j == i:
            continue
        lam = lam * j % q * pow((j - i) % q, -1, q) % q
    return lam


def identity_base(identity: IdentityRef, params: GroupParams) -> int:
    """Q_id: the group element an identity string hashes to."""
    return hash_to_group(identity.key().encode("utf-8"), QID_TAG, params)


def extract_share(share: ShamirShare, identity: IdentityRef, params: GroupParams) -> PkgShareResponse:
    """One server's key part for an identity: Q_id raised to its share."""
    q_id = identity_base(identity, params)
    return PkgShareResponse(index=share.index, q_priv=exp(q_id, share.value, params))


def recombine(responses: list[PkgShareResponse], t: int, params: GroupParams) -> int:
    """Combine t key parts into Q_id^s via Lagrange weights in the exponent.

    Order does not matter; extra responses beyond the first t distinct
    indices are ignored.
    """
    chosen: dict[int, int] = {}
    for r in responses:
        if r.index not in chosen:
            chosen[r.index] = r.q_priv
        if len(chosen) == t:
            break
    if len(chosen) < t:
        raise PkgError(f"need {t} distinct key parts, got {len(chosen)}")
    indices = set(chosen)
    acc = 1
    for i, q_priv in chosen.items():
        lam = lagrange_coeff(indices, i, params)
        acc = acc * exp(q_priv, lam, params) % params.p
    return acc


def save_share(path: str, share: ShamirShare, t: int, n: int, params: GroupParams) -> None:
    with open(path, "w", encoding="ascii") as fp:
        json.dump(
            {"index": share.index, "value_hex": params.enc_scalar(share.value).hex(), "t": t, "n": n},
            fp,
            sort_keys=True,
        )
        fp.write("\n")


def load_share(path: str) -> tuple[ShamirShare, int, int]:
    with open(path, encoding="ascii") as fp:
        obj = json.load(fp)
    share = ShamirShare(index=int(obj["index"]), value=int(obj["value_hex"], 16))
    return share, int(obj["t"]), int(obj["n"])
