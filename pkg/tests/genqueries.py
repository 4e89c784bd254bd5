"""Random in-subset query generator with exact unknown-identifier planting.

The generator is the oracle: it records exactly which unknown tables,
columns, and functions it planted, and the validator's full-mode report
must equal that plant set with no false positives or negatives.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field

AGGS = ("count", "sum", "avg", "min", "max")
COMPARATORS = ("=", "<>", "<", "<=", ">", ">=")


@dataclass
class Generated:
    sql: str
    tables: set[str] = field(default_factory=set)  # real tables used
    planted_tables: set[str] = field(default_factory=set)
    planted_columns: set[str] = field(default_factory=set)
    planted_functions: set[str] = field(default_factory=set)

    @property
    def planted(self) -> int:
        return (
            len(self.planted_tables)
            + len(self.planted_columns)
            + len(self.planted_functions)
        )


class QueryGenerator:
    def __init__(self, schema: dict[str, list[str]], rng: random.Random):
        self.schema = {k: list(v) for k, v in schema.items()}
        self.tables = sorted(self.schema)
        self.rng = rng
        self._fake_counter = 0

    def _fake_name(self, kind: str) -> str:
        self._fake_counter += 1
        return f"zzz_{kind}_{self._fake_counter}"

    def generate(
        self,
        plant_tables: int = 0,
        plant_columns: int = 0,
        plant_functions: int = 0,
    ) -> Generated:
        rng = self.rng
        out = Generated(sql="")
        n_tables = rng.choice((1, 2, 2, 3))
        chosen = rng.sample(self.tables, min(n_tables, len(self.tables)))

        # alias, key-in-query, real schema key, is_fake. Fake-table columns
        # are never reported by the validator, so they are excluded from the
        # plant bookkeeping.
        relations: list[tuple[str, str, str, bool]] = []
        fakes = min(plant_tables, len(chosen))
        fake_indexes = set(rng.sample(range(len(chosen)), fakes)) if fakes else set()
        for i, real in enumerate(chosen):
            alias = f"t{i}"
            if i in fake_indexes:
                db = real.split(".")[0]
                key = f"{db}.{self._fake_name('table')}"
                out.planted_tables.add(key)
                relations.append((alias, key, real, True))
            else:
                out.tables.add(real)
                relations.append((alias, real, real, False))

        multi = len(relations) > 1
        real_rels = [r for r in relations if not r[3]]

        def column_ref(rel, column: str | None = None) -> str:
            column = column or rng.choice(self.schema[rel[2]])
            return f"{rel[0]}.{column}" if multi else column

        def plant_column_ref() -> str:
            rel = rng.choice(real_rels)
            name = self._fake_name("col")
            out.planted_columns.add(f"{rel[1]}.{name}")
            return f"{rel[0]}.{name}" if multi else name

        group_mode = rng.random() < 0.3
        select_items: list[str] = []
        group_ref = None
        if group_mode:
            group_ref = column_ref(rng.choice(relations))
            select_items = [group_ref, "count(*)"]
        else:
            for _ in range(rng.randint(1, 3)):
                rel = rng.choice(relations)
                if rng.random() < 0.3:
                    agg = rng.choice(AGGS)
                    if agg == "count" and rng.random() < 0.5:
                        select_items.append("count(*)")
                    else:
                        select_items.append(f"{agg}({column_ref(rel)})")
                else:
                    select_items.append(column_ref(rel))

        columns_to_plant = plant_columns if real_rels else 0
        functions_to_plant = plant_functions
        if not group_mode:
            if columns_to_plant:
                select_items.append(plant_column_ref())
                columns_to_plant -= 1
            if functions_to_plant:
                name = self._fake_name("func")
                out.planted_functions.add(name)
                select_items.append(f"{name}({column_ref(rng.choice(relations))})")
                functions_to_plant -= 1

        from_parts = [f"{relations[0][1]} AS {relations[0][0]}" if multi else relations[0][1]]
        for index, rel in enumerate(relations[1:], start=1):
            left = rng.choice(relations[:index])
            kind = rng.choice(("JOIN", "LEFT JOIN", "INNER JOIN"))
            condition = f"{column_ref(left)} = {column_ref(rel)}"
            from_parts.append(f"{kind} {rel[1]} AS {rel[0]} ON {condition}")

        where_parts: list[str] = []
        for _ in range(rng.randint(0, 2)):
            ref = column_ref(rng.choice(relations))
            flavor = rng.random()
            if flavor < 0.4:
                where_parts.append(f"{ref} {rng.choice(COMPARATORS)} {rng.randint(0, 100)}")
            elif flavor < 0.6:
                where_parts.append(f"{ref} IN ('a', 'b', 'c')")
            elif flavor < 0.8:
                where_parts.append(f"{ref} IS NOT NULL")
            else:
                where_parts.append(f"{ref} BETWEEN 1 AND 50")
        while columns_to_plant > 0:
            where_parts.append(f"{plant_column_ref()} > 5")
            columns_to_plant -= 1
        while functions_to_plant > 0:
            name = self._fake_name("func")
            out.planted_functions.add(name)
            where_parts.append(f"{name}({column_ref(rng.choice(relations))}) > 0")
            functions_to_plant -= 1

        sql = "SELECT " + ", ".join(select_items)
        sql += " FROM " + " ".join(from_parts)
        if where_parts:
            sql += " WHERE " + " AND ".join(where_parts)
        if group_mode:
            sql += f" GROUP BY {group_ref}"
        if rng.random() < 0.3:
            sql += f" LIMIT {rng.randint(1, 100)}"
        if rng.random() < 0.2:
            sql = f"WITH base AS ({sql}) SELECT * FROM base"
        out.sql = sql
        return out
