"""Protocol constants and the per-validator / per-proposer reward quantities.

All monetary results are GWei as :class:`~decimal.Decimal`.
"""

from __future__ import annotations

from dataclasses import dataclass
from decimal import Decimal
from fractions import Fraction

from .units import GWEI_PER_ETH, exact, to_decimal, to_fraction


class DomainError(ValueError):
    """Raised when an input lies outside the domain of a formula."""


@dataclass(frozen=True)
class NetworkParams:
    N: int
    S: int = 32
    d: Decimal = Decimal(32)
    p: Decimal = Decimal(64)
    slot_ms: int = 12_000
    attest_ms: int = 4_000
    boost_fraction: Fraction = Fraction(1, 4)

    def __post_init__(self):
        object.__setattr__(self, "d", to_decimal(self.d))
        object.__setattr__(self, "p", to_decimal(self.p))
        object.__setattr__(self, "boost_fraction", to_fraction(self.boost_fraction))
        if self.N <= 0 or self.d <= 0:
            raise DomainError("N and d must be positive")
        if self.S <= 0 or self.N < self.S:
            raise DomainError(f"need N >= S > 0, got N={self.N}, S={self.S}")
        if self.p < 0:
            raise DomainError("p must be non-negative")
        if not 0 < self.boost_fraction <= 1:
            raise DomainError("boost_fraction must lie in (0, 1]")
        if not 0 < self.attest_ms < self.slot_ms:
            raise DomainError("attest_ms must lie in (0, slot_ms)")

    @property
    def committee_size(self) -> int:
        """Validators per slot.  Only defined when S divides N."""
        if self.N % self.S:
            raise DomainError(f"N={self.N} is not a multiple of S={self.S}")
        return self.N // self.S

    @property
    def committee_fraction(self) -> Fraction:
        """N/S as an exact rational (may be non-integral)."""
        return Fraction(self.N, self.S)

    @property
    def boost_weight(self) -> Fraction:
        return self.boost_fraction * self.committee_fraction


@dataclass(frozen=True)
class RewardSchedule:
    r: Decimal
    R_A: Decimal
    R_A_total: Decimal
    R_P: Decimal

    def __post_init__(self):
        for name in ("r", "R_A", "R_A_total", "R_P"):
            value = to_decimal(getattr(self, name))
            if value < 0:
                raise DomainError(f"{name} must be non-negative")
            object.__setattr__(self, name, value)

    @classmethod
    def from_params(cls, params: NetworkParams) -> "RewardSchedule":
        r = base_reward(params)
        return cls(
            r=r,
            R_A=attestation_head_reward(params),
            R_A_total=_total_attestation_reward(params, r),
            R_P=proposer_reward(params),
        )


@exact
def base_reward(params: NetworkParams) -> Decimal:
    """Base reward per staked Ether, ``1e9 * p / sqrt(I_total)`` with I_total = N*d*1e9."""
    total_gwei = Decimal(params.N) * params.d * GWEI_PER_ETH
    if total_gwei <= 0:
        raise DomainError("total stake must be positive")
    return GWEI_PER_ETH * params.p / total_gwei.sqrt()


@exact
def attestation_head_reward(params: NetworkParams) -> Decimal:
    return Decimal(7) / Decimal(32) * params.d * base_reward(params)


@exact
def _total_attestation_reward(params: NetworkParams, r: Decimal) -> Decimal:
    return Decimal(27) / Decimal(32) * params.d * r


@exact
def proposer_reward(params: NetworkParams) -> Decimal:
    """One seventh of the attestation rewards plus the sync-committee term it includes."""
    r = base_reward(params)
    n = Decimal(params.N)
    attestations = n * _total_attestation_reward(params, r) / Decimal(params.S)
    sync = n * r / Decimal(32)
    return (attestations + sync) / Decimal(7)


@exact
def proposer_reward_eth_closed_form(N: int) -> Decimal:
    """``sqrt(2N / 1e9)`` ETH; equals :func:`proposer_reward` for d=32, p=64."""
    if N <= 0:
        raise DomainError("N must be positive")
    return (Decimal(2) * Decimal(N) / GWEI_PER_ETH).sqrt()
