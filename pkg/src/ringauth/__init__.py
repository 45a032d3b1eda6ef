"""Anonymous, accountable authentication over federated identities.

A set of anytrust key servers deterministically assigns every federated
identity a keypair; clients combine the per-server shares into a composite
key only they can assemble, then authenticate to services with linkable
ring signatures: anonymous within a chosen set of identities, yet carrying
a stable pseudonym that services can recognize and block.
"""

from ._backend import active_backend, available_backends
from .group import GroupParams, generate_params, load_params, production_params, toy_params
from .keyshare import IdentityRef
from .lrs import Ring, RingSignature

__version__ = "0.1.0"

__all__ = [
    "GroupParams",
    "IdentityRef",
    "Ring",
    "RingSignature",
    "active_backend",
    "available_backends",
    "generate_params",
    "load_params",
    "production_params",
    "toy_params",
    "__version__",
]
