import json
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from knnxai.core import BOOLEAN, RATIONAL, LabeledDataset, as_rational
from knnxai.dataio import (
    FileFormatError,
    format_rational,
    load_instance,
    parse_vector,
    read_dataset,
    read_edges,
    write_dataset,
    write_edges,
    write_instance,
)
from knnxai.errors import InputError
from knnxai.reductions import Graph, KnapsackInstance, gen_knapsack_cf_l1, gen_vc_minsr_discrete


@pytest.mark.parametrize("q,text", [(Fraction(3), "3"), (Fraction(-1, 4), "-0.25"), (Fraction(1, 3), "1/3"),
                                    (Fraction(7, 20), "0.35"), (Fraction(0), "0"), (Fraction(-5, 2), "-2.5")])
def test_format_rational(q, text):
    assert format_rational(q) == text


@given(st.fractions(max_denominator=1000))
def test_format_rational_round_trips(q):
    assert as_rational(format_rational(q)) == q


def test_dataset_round_trip(tmp_path, cube):
    p = tmp_path / "d.csv"
    write_dataset(cube, p)
    back = read_dataset(p, BOOLEAN)
    assert set(back.positives) == set(cube.positives) and set(back.negatives) == set(cube.negatives)


def test_rational_dataset_round_trip(tmp_path):
    ds = LabeledDataset.from_points([(Fraction(1, 3), Fraction(-2))], [(Fraction(5, 4), Fraction(0))])
    p = tmp_path / "r.csv"
    write_dataset(ds, p, header=False)
    assert read_dataset(p, RATIONAL) == ds


def test_comments_and_blank_lines(tmp_path):
    p = tmp_path / "c.csv"
    p.write_text("# note\nf1,f2,y\n\n1,0,1\n# more\n0,1,0\n")
    ds = read_dataset(p, BOOLEAN)
    assert ds.positives == ((1, 0),) and ds.negatives == ((0, 1),)


@pytest.mark.parametrize("body,line", [("1,0,1\n0,1\n", 2), ("1,0,2\n", 1), ("1,0,1\n1,x,1\n", 2)])
def test_malformed_rows_report_line(tmp_path, body, line):
    p = tmp_path / "bad.csv"
    p.write_text(body)
    with pytest.raises(FileFormatError) as err:
        read_dataset(p)
    assert err.value.line == line
    assert f":{line}:" in str(err.value)


def test_boolean_domain_enforced(tmp_path):
    p = tmp_path / "b.csv"
    p.write_text("1,2,1\n")
    with pytest.raises(FileFormatError):
        read_dataset(p, BOOLEAN)


def test_missing_file(tmp_path):
    with pytest.raises(FileFormatError):
        read_dataset(tmp_path / "none.csv")


def test_parse_vector_inline_and_file(tmp_path):
    assert parse_vector("1, 1/2, 0.25") == (1, Fraction(1, 2), Fraction(1, 4))
    p = tmp_path / "q.csv"
    p.write_text("a,b\n3,4\n")
    assert parse_vector(str(p)) == (3, 4)
    with pytest.raises(InputError):
        parse_vector("1,,2")


def test_edges_round_trip(tmp_path):
    G = Graph.cycle(5)
    p = tmp_path / "g.txt"
    write_edges(G, p)
    assert read_edges(p) == G


def test_edges_parsing(tmp_path):
    p = tmp_path / "g.txt"
    p.write_text("# triangle\n1 2\n2 3  # closing edge next\n3 1\n")
    assert read_edges(p).m == 3
    p.write_text("n 2\n1 3\n")
    with pytest.raises(FileFormatError):
        read_edges(p)
    p.write_text("1 2\n1\n")
    with pytest.raises(FileFormatError) as err:
        read_edges(p)
    assert err.value.line == 2
    p.write_text("0 1\n")
    with pytest.raises(FileFormatError):
        read_edges(p)


def test_instance_sidecar_round_trip(tmp_path):
    for inst in (gen_vc_minsr_discrete(Graph.path(3)), gen_knapsack_cf_l1(KnapsackInstance((1, 2), (2, 1), 2))):
        csv_path, json_path = write_instance(inst, tmp_path / inst.family)
        side = json.loads(open(json_path).read())
        assert side["schema"] == 1 and side["family"] == inst.family
        back = load_instance(json_path)
        assert back.x == inst.x and back.k == inst.k and back.budget == inst.budget
        assert back.dataset == read_dataset(csv_path, inst.metric.domain)


def test_tampered_sidecar_is_rejected(tmp_path):
    inst = gen_vc_minsr_discrete(Graph.path(3))
    _, json_path = write_instance(inst, tmp_path / "t")
    side = json.loads(open(json_path).read())
    side["expected_label"] = 1 - side["expected_label"]
    open(json_path, "w").write(json.dumps(side))
    with pytest.raises(FileFormatError):
        load_instance(json_path)
