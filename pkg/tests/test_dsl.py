import pathlib

import pytest
from hypothesis import given

from gqk import to_text
from gqk.catalog import algebroid_suite
from gqk.drinfeld import rename_frame
from gqk.dsl import CHECK_KINDS, AlgebroidDecl, chart_decls, document, parse, parse_polynomial, serialize
from gqk.errors import ParseError
from gqk.runner import convert, run
from gqk.superpoly import SuperPolynomial

from strategies import CHART, polys

GOLDEN = pathlib.Path(__file__).parent / "golden"
GQK_FILES = sorted(GOLDEN.glob("*.gqk"))

HEAD = "chart E multiplicity 1\ncoord x parity even weight (0) in E\ncoord xi parity odd weight (1) in E\n"


def test_odd_square_parses_to_zero():
    doc = parse(HEAD + "poly p in E = xi*xi\n")
    assert doc["p"].is_zero()


def test_sl2_document():
    doc = parse((GOLDEN / "sl2.gqk").read_text())
    A = doc["sl2"]
    assert len(A.frame) == 3
    assert to_text(A.bracket_of("h", "e", "e")) == "2"
    assert [c.kind for c in doc.checks()] == ["algebroid"]


@pytest.mark.parametrize(
    "source, line, column, needle",
    [
        ("chart E multiplicity 1\ncoord xi parity odd weight (1) in E\npoly p in E = xi*x\n", 3, 18, "undeclared coordinate 'x'"),
        ("chart E multiplicity 1\ncheck frobnicate E\n", 2, 7, "unknown check kind"),
        ("chart E multiplicity 1\nchart E multiplicity 1\n", 2, 7, "already defined"),
        (HEAD + "poly p in E = x $ 2\n", 4, 17, "unexpected character"),
        (HEAD + "field X on E parity even {\n x = x\n", 6, 1, "unterminated block"),
        (HEAD + "field X on E parity odd {\n x = x\n}\n", 5, 2, "must be odd"),
    ],
)
def test_parse_errors_carry_position(source, line, column, needle):
    with pytest.raises(ParseError) as info:
        parse(source)
    assert (info.value.line, info.value.column) == (line, column)
    assert needle in str(info.value)


def test_every_known_check_kind_is_accepted_by_the_grammar():
    for kind in CHECK_KINDS:
        try:
            parse(f"chart E multiplicity 1\ncheck {kind} E\n")
        except ParseError as exc:
            assert "unknown check kind" not in str(exc)


@pytest.mark.parametrize("path", GQK_FILES, ids=lambda p: p.name)
def test_golden_round_trip_is_byte_identical(path):
    text = path.read_text()
    assert serialize(parse(text)) == text


@pytest.mark.parametrize("path", GQK_FILES, ids=lambda p: p.name)
def test_residues_reparse(path):
    doc = parse(path.read_text())
    seen = 0
    for report in run(doc):
        for v in report.violations:
            if isinstance(v.residue, SuperPolynomial):
                assert parse_polynomial(v.residue_text, v.residue.chart) == v.residue
                seen += 1
    if path.name in ("algebroids.gqk", "kernel.gqk"):
        assert seen > 0


def test_convert_round_trips_through_classical():
    for A, _ in algebroid_suite():
        doc = parse(serialize(document(chart_decls(A.base) + [AlgebroidDecl(A.name, A)])))
        for target, prefix in (("pi-anti", "Q_"), ("poisson-dual", "P_"), ("schouten-antidual", "S_")):
            out = parse(convert(doc, A.name, target))
            back = parse(convert(out, prefix + A.name, "classical"))[prefix + A.name + "_E"]
            assert rename_frame(back, A.frame_names, A.name) == A, (A.name, target)


@given(polys())
def test_polynomial_text_round_trip(p):
    assert parse_polynomial(to_text(p), CHART) == p
