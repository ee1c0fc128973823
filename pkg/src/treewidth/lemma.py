"""Exact minimum of the gap between a geometric sum and an m-term signed power sum.

For ``p >= 3`` and ``0 < m < N`` the quantity

    | (p**N - 1) / (p - 1) - sum_i s_i * p**h_i |,   s_i in {+1, -1},

is searched exhaustively over exactly ``m`` terms with exponents in
``[min_exponent, h_bound]``. Terms are enumerated with non-increasing
exponents (the sum is order independent), and a branch is pruned once the
remaining terms cannot bring the partial sum back within the best gap.
All arithmetic uses Python integers.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import DomainError


@dataclass(frozen=True)
class LemmaQuery:
    p: int
    N: int
    m: int
    h_bound: int | None = None  # default N + 1
    positive_exponents: bool = False  # restrict to exponents >= 1

    def __post_init__(self):
        for name in ("p", "N", "m"):
            if not isinstance(getattr(self, name), int):
                raise DomainError(f"{name} must be an integer")
        if self.p < 3:
            raise DomainError("p must be at least 3")
        if not 0 < self.m < self.N:
            raise DomainError("need 0 < m < N")
        if self.h_bound is not None and self.h_bound < self.min_exponent:
            raise DomainError("h_bound below the smallest admitted exponent")

    @property
    def exponent_cap(self) -> int:
        return self.N + 1 if self.h_bound is None else self.h_bound

    @property
    def min_exponent(self) -> int:
        return 1 if self.positive_exponents else 0

    @property
    def target(self) -> int:
        return (self.p**self.N - 1) // (self.p - 1)

    @property
    def bound(self) -> int:
        return (self.p ** (self.N - self.m) - 1) // (self.p - 1)


@dataclass(frozen=True)
class LemmaResult:
    query: LemmaQuery
    min_value: int
    witness: tuple[tuple[int, int], ...]  # (sign, exponent)
    bound: int
    holds: bool
    attained: bool  # min_value == bound


def witness_value(query: LemmaQuery, witness) -> int:
    return abs(query.target - sum(s * query.p**h for s, h in witness))


def power_gap_min(q: LemmaQuery) -> LemmaResult:
    p, m = q.p, q.m
    lo, hi = q.min_exponent, q.exponent_cap
    powers = [p**h for h in range(hi + 1)]
    target = q.target
    # telescoping start: exponents N-1, ..., N-m, all positive
    start = tuple((1, min(hi, max(lo, q.N - i))) for i in range(1, m + 1))
    best = [witness_value(q, start), start]
    chosen: list[tuple[int, int]] = []

    def search(rest: int, max_h: int, remaining: int):
        gap = abs(rest)
        if remaining == 0:
            if gap < best[0] or (gap == best[0] and tuple(chosen) < best[1]):
                best[0], best[1] = gap, tuple(chosen)
            return
        # every further term is at most powers[max_h] in magnitude
        if gap - remaining * powers[max_h] > best[0]:
            return
        for h in range(max_h, lo - 1, -1):
            if gap - remaining * powers[h] > best[0]:
                break  # smaller exponents only widen the shortfall
            for s in (1, -1):
                chosen.append((s, h))
                search(rest - s * powers[h], h, remaining - 1)
                chosen.pop()

    search(target, hi, m)
    value, witness = best
    return LemmaResult(q, value, witness, q.bound, value >= q.bound, value == q.bound)


@dataclass
class LemmaSweep:
    p: int
    results: list[LemmaResult] = field(default_factory=list)

    @property
    def all_hold(self) -> bool:
        return all(r.holds for r in self.results)

    @property
    def all_attained(self) -> bool:
        return all(r.attained for r in self.results)

    def rows(self) -> list[dict]:
        return [
            {
                "p": r.query.p,
                "N": r.query.N,
                "m": r.query.m,
                "min": r.min_value,
                "bound": r.bound,
                "holds": r.holds,
                "attained": r.attained,
                "witness": " ".join(f"{'+' if s > 0 else '-'}{h}" for s, h in r.witness),
            }
            for r in self.results
        ]


def verify_lemma(p: int, N_max: int, m_max: int | None = None,
                 positive_exponents: bool = False, h_extra: int = 1) -> LemmaSweep:
    """Run every cell ``0 < m < N <= N_max`` (and ``m <= m_max``)."""
    if p < 3:
        raise DomainError("p must be at least 3")
    sweep = LemmaSweep(p)
    for N in range(2, N_max + 1):
        for m in range(1, N):
            if m_max is not None and m > m_max:
                break
            q = LemmaQuery(p, N, m, h_bound=N + h_extra, positive_exponents=positive_exponents)
            sweep.results.append(power_gap_min(q))
    return sweep
