"""Parser, renderer, and span tests for the SQL subset."""

from __future__ import annotations

import random
from pathlib import Path

import pytest

from lakeql.sqlanalysis import SqlSyntaxError, parse, render
from lakeql.sqlanalysis.lexer import line_col, tokenize

from genqueries import QueryGenerator

GOLDEN = Path(__file__).parent / "fixtures" / "golden"

CORPUS = [
    "SELECT 1",
    "SELECT a, b AS bee FROM d.t",
    "SELECT * FROM d.t WHERE x = 1 AND y <> 'z'",
    "SELECT t.* FROM d.t AS t",
    "SELECT count(*) AS n FROM d.t GROUP BY a HAVING count(*) > 2",
    "SELECT a FROM d.t ORDER BY a DESC, b ASC LIMIT 10",
    "SELECT DISTINCT a FROM d.t",
    "SELECT a FROM d.t WHERE x IN (1, 2, 3)",
    "SELECT a FROM d.t WHERE x IN (SELECT y FROM d.u)",
    "SELECT a FROM d.t WHERE x NOT LIKE '%abc%'",
    "SELECT a FROM d.t WHERE x BETWEEN 1 AND 5",
    "SELECT a FROM d.t WHERE x IS NOT NULL",
    "SELECT CASE WHEN x > 0 THEN 'pos' ELSE 'neg' END AS sign FROM d.t",
    "SELECT CASE x WHEN 1 THEN 'one' WHEN 2 THEN 'two' END FROM d.t",
    "SELECT CAST(x AS varchar(10)) FROM d.t",
    "SELECT cast(ts AS date) FROM d.t",
    "SELECT a FROM d.t1 JOIN d.t2 ON t1.k = t2.k",
    "SELECT a FROM d.t1 AS x LEFT JOIN d.t2 AS y ON x.k = y.k",
    "SELECT a FROM d.t1 RIGHT JOIN d.t2 ON t1.k = t2.k",
    "SELECT a FROM d.t1 FULL OUTER JOIN d.t2 ON t1.k = t2.k",
    "SELECT a FROM d.t1 CROSS JOIN d.t2",
    "SELECT a FROM (SELECT a FROM d.t) AS sub",
    "WITH c AS (SELECT a FROM d.t) SELECT a FROM c",
    "WITH c1 AS (SELECT a FROM d.t), c2 AS (SELECT a FROM c1) SELECT a FROM c2",
    "SELECT a FROM d.t UNION SELECT a FROM d.u",
    "SELECT a FROM d.t UNION ALL SELECT a FROM d.u ORDER BY a LIMIT 3",
    "SELECT a FROM hive.db.t",
    'SELECT "select" FROM d."weird table"',
    "SELECT -x + 2 * y FROM d.t",
    "SELECT a || '-' || b FROM d.t",
    "SELECT x % 2 FROM d.t",
    "SELECT date_trunc('day', ts) FROM d.t",
    "SELECT a FROM d.t WHERE ts >= DATE '2024-01-01'",
    "SELECT a FROM d.t WHERE ts >= TIMESTAMP '2024-01-01 00:00:00'",
    "SELECT a FROM d.t WHERE ts > now() - INTERVAL '7' day",
    "SELECT a FROM d.t -- trailing comment",
    "SELECT /* block */ a FROM d.t",
    "SELECT a FROM d.t WHERE NOT (x = 1 OR y = 2)",
    "SELECT count(DISTINCT a) FROM d.t",
    "SELECT (SELECT max(x) FROM d.u) AS peak FROM d.t",
    "SELECT sum(CASE WHEN channel = 'referral' THEN signups ELSE 0 END) FROM g.s",
]


@pytest.mark.parametrize("sql", CORPUS)
def test_corpus_parses_and_renders_fixpoint(sql):
    first = render(parse(sql))
    second = render(parse(first))
    assert second == first


def test_render_fixpoint_on_generated_queries():
    schema = {
        "d.alpha": ["id", "name", "size"],
        "d.beta": ["id", "alpha_id", "score"],
        "e.gamma": ["id", "label", "created"],
    }
    generator = QueryGenerator(schema, random.Random(42))
    for _ in range(150):
        sql = generator.generate().sql
        first = render(parse(sql))
        assert render(parse(first)) == first, sql


def test_golden_canonical_rendering():
    sql = (
        "WITH recent AS (\n"
        "  SELECT user_id, count(*) AS n\n"
        "  FROM core.events\n"
        "  WHERE event_ts >= DATE '2024-01-01'\n"
        "  GROUP BY user_id\n"
        ")\n"
        "SELECT u.country, sum(r.n) AS total\n"
        "FROM core.users AS u JOIN recent r ON u.user_id = r.user_id\n"
        "WHERE u.is_premium = TRUE AND u.country IN ('US', 'CA')\n"
        "GROUP BY u.country HAVING sum(r.n) > 10\n"
        "ORDER BY total DESC LIMIT 5"
    )
    expected = (GOLDEN / "canonical_query.txt").read_text(encoding="utf-8").rstrip("\n")
    assert render(parse(sql)) == expected


def test_select_one():
    query = parse("SELECT 1")
    assert query.body.from_ is None
    assert len(query.body.items) == 1


def test_incomplete_where_is_syntax_error():
    with pytest.raises(SqlSyntaxError) as err:
        parse("SELECT a FROM db.t WHERE")
    assert "end of input" in err.value.message


@pytest.mark.parametrize("sql,needle", [
    ("INSERT INTO d.t VALUES (1)", "INSERT"),
    ("SELECT a FROM d.t TABLESAMPLE", "TABLESAMPLE"),
    ("SELECT rank() OVER (ORDER BY x) FROM d.t", "OVER"),
    ("SELECT a FROM d.t EXCEPT SELECT a FROM d.u", "EXCEPT"),
    ("SELECT a FROM UNNEST(arr)", "UNNEST"),
])
def test_unsupported_constructs_named(sql, needle):
    with pytest.raises(SqlSyntaxError) as err:
        parse(sql)
    assert needle in err.value.message


@pytest.mark.parametrize("sql", [
    "", "   ", "SELECT", "SELECT a FROM", "SELECT a FROM d.t GROUP",
    "SELECT a FROM d.t WHERE x = ", "SELECT a b c FROM d.t",
    "SELECT a FROM d.t LIMIT x", "SELECT 'unterminated FROM d.t",
    "SELECT a FROM (SELECT a FROM d.t)",  # derived table needs an alias
    "SELECT a FROM d.t; SELECT b FROM d.u",
])
def test_syntax_errors(sql):
    with pytest.raises(SqlSyntaxError):
        parse(sql)


def test_identifier_spans_point_into_source():
    sql = "SELECT alpha FROM db.tbl WHERE alpha > 3"
    query = parse(sql)
    item = query.body.items[0]
    span = item.expr.name.span
    assert sql[span.start:span.end] == "alpha"
    table_span = query.body.from_.name.span
    assert sql[table_span.start:table_span.end] == "db.tbl"


def test_line_col_mapping():
    sql = "SELECT a\nFROM db.t\nWHERE b = 1"
    offset = sql.index("WHERE")
    assert line_col(sql, offset) == (3, 1)


def test_tokenizer_skips_comments_preserving_offsets():
    sql = "SELECT a /* c1 */ FROM d.t -- tail"
    tokens = tokenize(sql)
    from_token = next(t for t in tokens if t.value == "FROM")
    assert sql[from_token.span.start:from_token.span.end] == "FROM"


def test_escaped_string_quotes():
    query = parse("SELECT 'it''s' FROM d.t")
    literal = query.body.items[0].expr
    assert literal.value == "it's"
    assert render(parse(render(query))) == render(query)
