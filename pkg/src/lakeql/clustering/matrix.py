"""User-by-table access count matrix."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class AccessMatrix:
    """Dense table-by-user access counts.

    Rows are tables, columns are users, both in deterministic lexicographic
    order. Entries are execution counts from successful queries.
    """

    tables: tuple[str, ...]
    users: tuple[str, ...]
    counts: np.ndarray  # shape (len(tables), len(users)), non-negative

    def __post_init__(self):
        if self.counts.shape != (len(self.tables), len(self.users)):
            raise ValueError(
                f"counts shape {self.counts.shape} does not match "
                f"{len(self.tables)} tables x {len(self.users)} users"
            )
        if (self.counts < 0).any():
            raise ValueError("access counts must be non-negative")

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, AccessMatrix):
            return NotImplemented
        return (
            self.tables == other.tables
            and self.users == other.users
            and np.array_equal(self.counts, other.counts)
        )

    @classmethod
    def from_pairs(cls, pair_counts: dict[tuple[str, str], int]) -> "AccessMatrix":
        """Build from {(table, user): count}; zero rows/columns never appear."""
        tables = tuple(sorted({t for t, _ in pair_counts}))
        users = tuple(sorted({u for _, u in pair_counts}))
        counts = np.zeros((len(tables), len(users)), dtype=np.int64)
        t_idx = {t: i for i, t in enumerate(tables)}
        u_idx = {u: i for i, u in enumerate(users)}
        for (table, user), count in pair_counts.items():
            counts[t_idx[table], u_idx[user]] = count
        return cls(tables, users, counts)

    def row_totals(self) -> np.ndarray:
        return self.counts.sum(axis=1)

    def unique_users_per_table(self) -> np.ndarray:
        return (self.counts > 0).sum(axis=1)
