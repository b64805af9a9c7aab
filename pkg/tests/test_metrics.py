from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bagforest.metrics import (
    ConfusionMatrix,
    cohen_kappa,
    confusion,
    f1,
    percent,
    precision_recall,
    report,
    roc_curve,
    write_roc_csv,
)
from oracles import kappa_by_hand, pairwise_auc


def test_confusion_examples():
    assert confusion([1, 0], [1, 0]) == ConfusionMatrix(tp=1, fp=0, fn=0, tn=1)
    assert confusion([1, 1], [0, 0]) == ConfusionMatrix(tp=0, fp=2, fn=0, tn=0)
    assert confusion([1, 0, 1, 0], [1, 1, 0, 0]) == ConfusionMatrix(1, 1, 1, 1)


def test_confusion_errors():
    with pytest.raises(ValueError, match="length"):
        confusion([1, 0], [1])
    with pytest.raises(ValueError, match="empty"):
        confusion([], [])
    with pytest.raises(ValueError):
        confusion([2], [1])


def test_precision_recall():
    cm = ConfusionMatrix(tp=8, fp=2, fn=1, tn=9)
    p, r = precision_recall(cm, 1)
    assert p == 0.8
    assert r == pytest.approx(8 / 9)
    p0, r0 = precision_recall(cm, 0)
    assert (p0, r0) == (0.9, pytest.approx(9 / 11))
    assert precision_recall(ConfusionMatrix(3, 0, 0, 4), 1) == (1.0, 1.0)


def test_zero_denominator_is_flagged():
    cm = ConfusionMatrix(tp=0, fp=0, fn=3, tn=5)
    assert precision_recall(cm, 1) == (0.0, 0.0)
    rep = report([0] * 8, [1, 1, 1, 0, 0, 0, 0, 0])
    assert rep.per_label[1].precision == 0.0
    assert any(s.startswith("precision[1]") for s in rep.degenerate)


def test_f1_against_reported_tables():
    # per-label precision/recall pairs and their reported whole-percent F1
    label0 = f1(0.93, 0.96)
    label1 = f1(0.90, 0.81)
    assert label0 == pytest.approx(0.94476, abs=1e-5)
    assert percent(label0) == "94%"
    assert percent(label1) == "85%"
    assert percent((label0 + label1) / 2) == "90%"
    assert f1(0.6, 0.6) == pytest.approx(0.6)
    assert f1(0.0, 0.7) == 0.0
    assert f1(0.0, 0.0) == 0.0


def test_percent_rounds_half_away_from_zero():
    assert percent(0.945) == "95%"
    assert percent(0.125) == "13%"
    assert percent(-0.125) == "-13%"


def test_report_hand_sheet():
    # 20 rows: tp=6, fn=2, tn=9, fp=3
    actual = [1] * 8 + [0] * 12
    pred = [1] * 6 + [0] * 2 + [0] * 9 + [1] * 3
    rep = report(pred, actual)
    F = Fraction
    sheet = {
        "p1": F(2, 3), "r1": F(3, 4), "f1_1": F(12, 17),
        "p0": F(9, 11), "r0": F(3, 4), "f1_0": F(18, 23),
        "macro_p": F(49, 66), "macro_r": F(3, 4), "macro_f1": F(291, 391),
        "w_p": F(25, 33), "w_r": F(3, 4), "w_f1": F(294, 391),
        "acc": F(3, 4), "kappa": F(24, 49),
    }
    got = {
        "p1": rep.per_label[1].precision, "r1": rep.per_label[1].recall, "f1_1": rep.per_label[1].f1,
        "p0": rep.per_label[0].precision, "r0": rep.per_label[0].recall, "f1_0": rep.per_label[0].f1,
        "macro_p": rep.macro.precision, "macro_r": rep.macro.recall, "macro_f1": rep.macro.f1,
        "w_p": rep.weighted.precision, "w_r": rep.weighted.recall, "w_f1": rep.weighted.f1,
        "acc": rep.accuracy, "kappa": rep.kappa,
    }
    for k, v in sheet.items():
        assert got[k] == pytest.approx(float(v), abs=1e-12), k
    assert rep.per_label[0].support == 12 and rep.per_label[1].support == 8
    assert rep.confusion == ConfusionMatrix(6, 3, 2, 9)
    assert rep.degenerate == ()


def test_report_macro_f1_from_table_values():
    macro = (f1(0.93, 0.96) + f1(0.90, 0.81)) / 2
    assert macro == pytest.approx(0.8987, abs=1e-4)
    assert percent(macro) == "90%"


def test_equal_support_weighted_equals_macro():
    rep = report([1, 0, 0, 1, 1, 0], [1, 1, 0, 0, 1, 0])
    assert rep.weighted.precision == pytest.approx(rep.macro.precision)
    assert rep.weighted.recall == pytest.approx(rep.macro.recall)
    assert rep.weighted.f1 == pytest.approx(rep.macro.f1)


def test_kappa_examples():
    assert cohen_kappa([1, 0, 1, 0], [1, 0, 1, 0]) == 1.0
    # P_o = 4/5, P_e = (3*2 + 2*3)/25 = 12/25
    pred, act = [1, 0, 1, 0, 1], [1, 0, 0, 0, 1]
    assert kappa_by_hand(pred, act) == Fraction(8, 13)
    assert cohen_kappa(pred, act) == pytest.approx(8 / 13, abs=1e-12)
    # chance level: P_o = P_e = 0.5
    assert cohen_kappa([1, 1, 0, 0], [1, 0, 1, 0]) == 0.0


def test_kappa_degenerate():
    assert cohen_kappa([1, 1, 1], [1, 1, 1]) == 1.0
    rep = report([0, 0], [0, 0])
    assert rep.kappa == 1.0
    assert "kappa: expected agreement is 1" in rep.degenerate


def test_report_serialises_display_block():
    d = report([1, 0, 1, 1], [1, 0, 0, 1]).to_dict()
    assert d["display"]["precision_recall_averages"]["Weighted"] == ["83%", "75%"]
    assert set(d["per_label"]) == {"0", "1"}
    assert d["confusion"] == {"tp": 2, "fp": 1, "fn": 0, "tn": 1}


@settings(max_examples=200, deadline=None)
@given(st.data())
def test_report_identities(data):
    n = data.draw(st.integers(1, 60))
    pred = data.draw(st.lists(st.integers(0, 1), min_size=n, max_size=n))
    act = data.draw(st.lists(st.integers(0, 1), min_size=n, max_size=n))
    rep = report(pred, act)
    cm = rep.confusion
    assert rep.accuracy == (cm.tp + cm.tn) / cm.total
    assert abs(rep.weighted.recall - rep.accuracy) <= 1e-12
    for s in rep.per_label.values():
        if s.precision + s.recall > 0:
            assert min(s.precision, s.recall) - 1e-12 <= s.f1 <= max(s.precision, s.recall) + 1e-12
    swapped = report([1 - p for p in pred], [1 - a for a in act])
    assert swapped.per_label[0] == rep.per_label[1]
    assert swapped.per_label[1] == rep.per_label[0]
    assert swapped.macro == rep.macro
    assert swapped.accuracy == rep.accuracy
    assert swapped.kappa == pytest.approx(rep.kappa, abs=1e-12)
    if len(set(act)) == 2 and len(set(pred)) == 2:
        assert rep.kappa == pytest.approx(float(kappa_by_hand(pred, act)), abs=1e-12)
        assert (rep.kappa == pytest.approx(1.0)) == (cm.fp == 0 and cm.fn == 0)


def test_roc_examples():
    assert roc_curve([0.9, 0.4, 0.6, 0.1], [1, 0, 1, 0]).auc == 1.0
    assert roc_curve([0.9, 0.6, 0.4, 0.1], [1, 0, 1, 0]).auc == 0.75
    assert roc_curve([0.3] * 6, [1, 0, 1, 0, 0, 1]).auc == 0.5


def test_roc_shape():
    c = roc_curve([0.9, 0.6, 0.6, 0.2, 0.1], [1, 1, 0, 0, 1])
    assert c.points[0][:2] == (0.0, 0.0)
    assert c.points[-1][:2] == (1.0, 1.0)
    assert np.all(np.diff(c.fpr) >= 0) and np.all(np.diff(c.tpr) >= 0)
    assert c.thresholds[0] == np.inf
    assert c.thresholds[1:].tolist() == [0.9, 0.6, 0.2, 0.1]


def test_roc_needs_both_classes():
    with pytest.raises(ValueError, match="both classes"):
        roc_curve([0.1, 0.2], [1, 1])
    with pytest.raises(ValueError):
        roc_curve([0.1], [1, 0])


@settings(max_examples=100, deadline=None)
@given(st.data())
def test_roc_matches_pairwise(data):
    n = data.draw(st.integers(2, 80))
    act = data.draw(st.lists(st.integers(0, 1), min_size=n, max_size=n).filter(lambda v: 0 < sum(v) < len(v)))
    scores = data.draw(st.lists(st.sampled_from([0.0, 0.1, 0.25, 0.5, 0.75, 1.0]), min_size=n, max_size=n))
    assert abs(roc_curve(scores, act).auc - pairwise_auc(scores, act)) <= 1e-9


def test_roc_csv(tmp_path):
    c = roc_curve([0.9, 0.4, 0.6, 0.1], [1, 0, 1, 0])
    write_roc_csv(c, tmp_path / "roc.csv")
    lines = (tmp_path / "roc.csv").read_text().splitlines()
    assert lines[0] == "# auc=1.0"
    assert lines[1] == "threshold,fpr,tpr"
    assert lines[2] == "inf,0.0,0.0"
    assert len(lines) == 2 + len(c.points)
