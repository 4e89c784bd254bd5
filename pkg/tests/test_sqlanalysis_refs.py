"""Reference extraction: alias resolution, CTE exclusion, star expansion,
join-condition capture."""

from __future__ import annotations

import pytest

from lakeql.sqlanalysis import (
    AmbiguousColumnError,
    EmptySchema,
    extract_refs,
    parse,
)


class DictSchema:
    def __init__(self, tables: dict[str, set[str]]):
        self.tables = {k: frozenset(v) for k, v in tables.items()}

    def has_table(self, key: str) -> bool:
        return key in self.tables

    def columns_of(self, key: str):
        return self.tables.get(key)


SCHEMA = DictSchema({
    "d.a": {"k", "u", "shared"},
    "d.b": {"k", "v", "shared"},
    "d.t": {"x", "k"},
    "d.wide": {"c1", "c2", "c3"},
})


def refs(sql: str, schema=SCHEMA, default_db: str = "d", strict: bool = True):
    return extract_refs(parse(sql), schema, default_db, strict=strict)


def test_simple_qualified():
    result = refs("SELECT x FROM d.t")
    assert result.tables == {"d.t"}
    assert result.columns == {"d.t.x"}


def test_default_database_qualification():
    result = refs("SELECT x FROM t")
    assert result.tables == {"d.t"}
    assert result.columns == {"d.t.x"}


def test_three_part_name_uses_last_two():
    result = refs("SELECT x FROM hive.d.t")
    assert result.tables == {"d.t"}


def test_alias_resolution_and_join_conditions():
    result = refs("SELECT a.u, b.v FROM d.a a JOIN d.b b ON a.k = b.k")
    assert result.tables == {"d.a", "d.b"}
    assert result.columns == {"d.a.u", "d.b.v", "d.a.k", "d.b.k"}
    assert result.join_conditions == (("d.a.k", "d.b.k"),)


def test_join_conditions_in_where():
    result = refs("SELECT a.u FROM d.a a, d.b b WHERE a.k = b.k" .replace(",", " CROSS JOIN"))
    assert ("d.a.k", "d.b.k") in result.join_conditions


def test_join_pairs_require_distinct_tables():
    result = refs("SELECT a.u FROM d.a a WHERE a.k = a.u")
    assert result.join_conditions == ()


def test_cte_names_excluded():
    result = refs("WITH c AS (SELECT k FROM d.t) SELECT k FROM c")
    assert result.tables == {"d.t"}
    assert result.columns == {"d.t.k"}


def test_chained_ctes():
    result = refs(
        "WITH c1 AS (SELECT k FROM d.t), c2 AS (SELECT k FROM c1) SELECT k FROM c2"
    )
    assert result.tables == {"d.t"}


def test_star_expansion_with_known_schema():
    result = refs("SELECT * FROM d.wide")
    assert result.columns == {"d.wide.c1", "d.wide.c2", "d.wide.c3"}


def test_qualified_star():
    result = refs("SELECT w.* FROM d.wide AS w")
    assert result.columns == {"d.wide.c1", "d.wide.c2", "d.wide.c3"}


def test_star_over_unknown_table_expands_nothing():
    result = refs("SELECT * FROM d.mystery", strict=False)
    assert result.tables == {"d.mystery"}
    assert result.columns == set()


def test_unqualified_resolved_by_unique_ownership():
    result = refs("SELECT u FROM d.a a JOIN d.b b ON a.k = b.k")
    assert "d.a.u" in result.columns


def test_ambiguous_column_raises_with_candidates():
    with pytest.raises(AmbiguousColumnError) as err:
        refs("SELECT shared FROM d.a a JOIN d.b b ON a.k = b.k")
    assert err.value.candidates == ["d.a", "d.b"]


def test_lenient_mode_skips_ambiguous():
    result = refs(
        "SELECT shared FROM d.a a JOIN d.b b ON a.k = b.k", strict=False
    )
    assert not any(c.endswith(".shared") for c in result.columns)


def test_single_unknown_schema_table_attracts_unqualified():
    schema = DictSchema({"d.known": {"x"}})
    result = extract_refs(
        parse("SELECT mystery_col FROM d.unknown"), schema, "d", strict=False
    )
    assert result.columns == {"d.unknown.mystery_col"}


def test_unqualified_falls_to_single_unknown_schema_relation():
    schema = DictSchema({"d.known": {"x"}})
    result = extract_refs(
        parse("SELECT weird FROM d.known k JOIN d.unknown u ON k.x = u.y"),
        schema, "d", strict=False,
    )
    # d.known's schema lacks 'weird'; the only unknown-schema relation owns it
    assert "d.unknown.weird" in result.columns


def test_derived_table_columns_not_catalog_columns():
    result = refs("SELECT s.n FROM (SELECT count(*) AS n FROM d.t) AS s")
    assert result.tables == {"d.t"}
    assert result.columns == set()


def test_order_by_alias_not_a_column():
    result = refs("SELECT sum(x) AS total FROM d.t GROUP BY k ORDER BY total")
    assert result.columns == {"d.t.x", "d.t.k"}


def test_subquery_refs_collected():
    result = refs("SELECT x FROM d.t WHERE k IN (SELECT k FROM d.a)")
    assert result.tables == {"d.t", "d.a"}
    assert "d.a.k" in result.columns


def test_union_collects_both_sides():
    result = refs("SELECT x FROM d.t UNION ALL SELECT u FROM d.a")
    assert result.tables == {"d.t", "d.a"}
    assert result.columns == {"d.t.x", "d.a.u"}


def test_columns_subset_of_catalog_when_tables_known():
    # property: valid queries over known tables only reference known columns
    import random
    from genqueries import QueryGenerator

    schema = {"d.a": ["k", "u", "shared"], "d.b": ["k", "v"], "d.t": ["x", "k"]}
    provider = DictSchema({k: set(v) for k, v in schema.items()})
    generator = QueryGenerator(schema, random.Random(7))
    universe = {
        f"{table}.{column}" for table, cols in schema.items() for column in cols
    }
    for _ in range(80):
        generated = generator.generate()
        result = extract_refs(parse(generated.sql), provider, "d", strict=False)
        assert result.columns <= universe, generated.sql
