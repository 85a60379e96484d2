"""Key-pool accrual from quantum links and key delivery to encryptor pairs.

Pools hold integer bit counts; accrual floors rate x elapsed-time per call so
delivered + remaining = accrued stays an exact integer identity.  Keys are
opaque handles in simulation mode; a real-cipher mode deriving usable
ChaCha20 key material exists behind a flag for end-to-end demonstration.
"""

import hashlib
from dataclasses import dataclass, field

from .errors import InvalidArgumentError, InvalidStateError


class SessionState:
    WAITING_FIRST_KEY = "WAITING_FIRST_KEY"
    ACTIVE = "ACTIVE"
    STARVED = "STARVED"


STARVED = "STARVED"


@dataclass
class KeyPool:
    link_id: str
    bits_available: int = 0
    accrual_rate_bps: float = 0.0
    consumed_total: int = 0
    accrued_total: int = 0
    last_update_s: float = 0.0
    flowing: bool = False

    def accrue(self, until_s: float) -> "KeyPool":
        """Add floor(rate x elapsed) bits while keys are flowing."""
        if until_s < self.last_update_s:
            raise InvalidArgumentError(
                f"time went backwards: {until_s} < {self.last_update_s}")
        if self.flowing and self.accrual_rate_bps > 0:
            gained = int(self.accrual_rate_bps * (until_s - self.last_update_s))
            self.bits_available += gained
            self.accrued_total += gained
        self.last_update_s = until_s
        return self

    def draw(self, key_size_bits: int) -> bool:
        """Take one key's worth of bits; False (and no decrement) when starved."""
        if key_size_bits <= 0:
            raise InvalidArgumentError(f"key size must be positive, got {key_size_bits}")
        if self.bits_available < key_size_bits:
            return False
        self.bits_available -= key_size_bits
        self.consumed_total += key_size_bits
        return True

    def seconds_until(self, key_size_bits: int) -> float | None:
        """Time until the pool can cover one key, at the current rate.

        Padded by half a bit so the floor in accrue() cannot land one bit
        short of the target.
        """
        if not self.flowing or self.accrual_rate_bps <= 0:
            return None
        missing = key_size_bits - self.bits_available
        if missing <= 0:
            return 0.0
        return (missing + 0.5) / self.accrual_rate_bps


@dataclass(frozen=True)
class KeyHandle:
    key_id: str
    size_bits: int

    def material(self) -> bytes:
        """Deterministic demo key material for the real-cipher mode."""
        digest = hashlib.sha256(self.key_id.encode()).digest()
        out = b""
        counter = 0
        while len(out) * 8 < self.size_bits:
            out += hashlib.sha256(digest + counter.to_bytes(4, "big")).digest()
            counter += 1
        return out[: self.size_bits // 8]


@dataclass
class EncryptorSession:
    ins_id: str
    pool: KeyPool
    cipher: str = "chacha20-poly1305"
    key_size_bits: int = 256
    rekey_interval_s: float = 60.0
    state: str = SessionState.WAITING_FIRST_KEY
    keys_delivered: int = 0
    current_key: KeyHandle | None = field(default=None, repr=False)

    def draw_key(self, now_s: float) -> KeyHandle | str:
        """Draw a key from the pool; returns STARVED without decrement if short.

        The first successful draw is the confirmation gate the orchestrator
        waits on before declaring a secured service operational.
        """
        self.pool.accrue(now_s)
        if not self.pool.draw(self.key_size_bits):
            if self.state == SessionState.ACTIVE:
                self.state = SessionState.STARVED  # keeps the last key active
            return STARVED
        self.keys_delivered += 1
        self.state = SessionState.ACTIVE
        self.current_key = KeyHandle(
            key_id=f"{self.pool.link_id}/{self.ins_id}/key-{self.keys_delivered}",
            size_bits=self.key_size_bits)
        return self.current_key

    @property
    def has_first_key(self) -> bool:
        return self.keys_delivered > 0


def encrypt_sample(handle: KeyHandle, payload: bytes) -> bytes:
    """Real-cipher demonstration path: encrypt a payload with the drawn key."""
    if handle.size_bits != 256:
        raise InvalidStateError("demo cipher needs a 256-bit key")
    from cryptography.hazmat.primitives.ciphers.aead import ChaCha20Poly1305

    nonce = hashlib.sha256(handle.key_id.encode() + b"nonce").digest()[:12]
    return ChaCha20Poly1305(handle.material()).encrypt(nonce, payload, None)


def decrypt_sample(handle: KeyHandle, ciphertext: bytes) -> bytes:
    from cryptography.hazmat.primitives.ciphers.aead import ChaCha20Poly1305

    nonce = hashlib.sha256(handle.key_id.encode() + b"nonce").digest()[:12]
    return ChaCha20Poly1305(handle.material()).decrypt(nonce, ciphertext, None)
