from typing import List, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from app.config import settings
from app.errors import ArithmeticOverflowError, DomainError


class LucasParams(BaseModel):
    """Integer pair (P, Q) of F_m = P F_{m-1} - Q F_{m-2}."""

    model_config = ConfigDict(frozen=True)

    P: int
    Q: int

    @property
    def D(self) -> int:
        return self.P * self.P - 4 * self.Q

    @property
    def degenerate(self) -> bool:
        # exact on integers
        return self.P * self.P == 4 * self.Q

    @property
    def roots(self) -> Tuple[complex, complex]:
        root = np.sqrt(complex(self.D))
        return complex((self.P + root) / 2), complex((self.P - root) / 2)

    @property
    def a(self) -> complex:
        return self.roots[0]

    @property
    def b(self) -> complex:
        return self.roots[1]

    @model_validator(mode="after")
    def _check_roots(self) -> "LucasParams":
        a, b = self.roots
        scale = 1e-12 * max(1, abs(self.P), abs(self.Q))
        if abs(a + b - self.P) > scale or abs(a * b - self.Q) > scale:
            raise ValueError(f"characteristic roots inconsistent for P={self.P}, Q={self.Q}")
        return self


class SequencePair(BaseModel):
    model_config = ConfigDict(frozen=True)

    params: LucasParams
    u_terms: List[int] = Field(default_factory=list)
    v_terms: List[int] = Field(default_factory=list)


def _step(params: LucasParams, prev: int, prev2: int, index: int, max_bits: int) -> int:
    value = params.P * prev - params.Q * prev2
    if value.bit_length() > max_bits:
        raise ArithmeticOverflowError(
            f"term {index} exceeds the {max_bits}-bit exact-integer cap", index=index
        )
    return value


def lucas_pair(params: LucasParams, m_max: int, max_bits: int | None = None) -> SequencePair:
    """U_0..U_m_max and V_0..V_m_max by exact integer recurrence."""
    if m_max < 0:
        raise DomainError(f"m_max must be nonnegative, got {m_max}")
    cap = max_bits or settings.LUCAS_MAX_BITS
    u: List[int] = [0, 1]
    v: List[int] = [2, params.P]
    for m in range(2, m_max + 1):
        u.append(_step(params, u[-1], u[-2], m, cap))
        v.append(_step(params, v[-1], v[-2], m, cap))
    return SequencePair(params=params, u_terms=u[: m_max + 1], v_terms=v[: m_max + 1])


def closed_form_u(params: LucasParams, m: int) -> complex:
    if m < 0:
        raise DomainError(f"m must be nonnegative, got {m}")
    if m == 0:
        return 0j
    if params.degenerate:
        s = params.P / 2
        return complex(m * s ** (m - 1))
    a, b = params.roots
    n = np.arange(m)
    return complex(np.sum(np.power(a, n) * np.power(b, m - n - 1)))


def closed_form_v(params: LucasParams, m: int) -> complex:
    if m < 0:
        raise DomainError(f"m must be nonnegative, got {m}")
    if params.degenerate:
        s = params.P / 2
        return complex(2 * s ** m)
    a, b = params.roots
    return complex(a ** m + b ** m)
