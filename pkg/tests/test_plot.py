import pytest

from multisne.errors import DataError
from multisne.plot import ScatterOptions, render_scatter

HEAD = "sample_id,y1,y2,split_role,true_label,predicted_label\n"


def toy(roles=("train",) * 6):
    labels = ["a", "a", "b", "b", "c", "c"]
    rows = [f"s{i},{i * 1.5},{(-1) ** i * i},{r},{l}," for i, (r, l) in enumerate(zip(roles, labels))]
    return HEAD + "\n".join(rows) + "\n"


def test_legend_has_one_entry_per_class():
    assert render_scatter(toy()).count('class="legend-entry"') == 3


def test_all_train_has_no_squares():
    svg = render_scatter(toy())
    assert 'class="test"' not in svg and svg.count('class="train"') == 6


def test_test_rows_are_squares():
    svg = render_scatter(toy(("train", "test") * 3))
    assert svg.count('<rect class="test"') == 3 and svg.count('class="train"') == 3


def test_unlabelled_black():
    svg = render_scatter(toy(("train", "test") * 3), ScatterOptions(unlabelled_black=True))
    assert svg.count('fill="#000000"') == 4  # three squares and one legend marker
    assert ">unlabelled<" in svg


def test_deterministic_and_escaped():
    opts = ScatterOptions(title="a<b", metadata='{"x": "&"}')
    a = render_scatter(toy(), opts)
    assert a == render_scatter(toy(), opts)
    assert "a&lt;b" in a and "&amp;" in a


def test_malformed():
    with pytest.raises(DataError):
        render_scatter("x,y\n1,2\n")
    with pytest.raises(DataError):
        render_scatter(HEAD + "s,abc,1,train,a,\n")
    with pytest.raises(DataError):
        render_scatter(HEAD)


def test_single_point():
    svg = render_scatter(HEAD + "s,0,0,train,a,\n")
    assert svg.count("<circle") == 2
