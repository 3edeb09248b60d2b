import math
import random

import pytest

from oracles import brute_chrf, brute_coverage, brute_numeric
from text2table.errors import EmptySourceSide, NotLivesumShaped, QaParseFailure
from text2table.llm import Gateway, ScriptedBackend
from text2table.metrics import (Direction, SimilarityKind, autoqa, chrf, coverage_report, f1, header_coverage,
                                numeric_eval, numeric_eval_values, parse_qa_pairs, tabeval, tuple_coverage,
                                unroll_table)
from text2table.metrics.similarity import Similarity
from text2table.tables import ContentTuple, Table, TableSet
from text2table.templates import Templates

EM = SimilarityKind.exact()
CHRF = SimilarityKind.chrf()
TEMPLATES = Templates()


def ct(r, c, v):
    return ContentTuple(r, c, v)


# --- chrF --------------------------------------------------------------------

def test_chrf_examples():
    assert chrf("abc", "abc", 6, 2.0) == 1.0
    assert chrf("", "abc", 6, 2.0) == 0.0
    # unigram P = R = 1/2, bigram P = R = 0, higher orders have no reference grams:
    # P = R = 1/4, so F = 5 * (1/16) / (4/4 + 1/4) = 0.25
    assert chrf("16", "17", 6, 2.0) == pytest.approx(0.25, abs=1e-12)
    assert brute_chrf("16", "17", 6, 2.0) == pytest.approx(0.25, abs=1e-12)
    assert chrf("a b c", "abc") == 1.0


def test_chrf_preconditions():
    with pytest.raises(ValueError):
        chrf("a", "a", 0)
    with pytest.raises(ValueError):
        chrf("a", "a", 6, 0.0)


def test_chrf_matches_oracle_random():
    rng = random.Random(7)
    for _ in range(300):
        a = "".join(rng.choice("ab c1") for _ in range(rng.randint(0, 15)))
        b = "".join(rng.choice("ab c1") for _ in range(rng.randint(0, 15)))
        n = rng.randint(1, 6)
        beta = rng.choice([0.5, 1.0, 2.0, 3.0])
        assert abs(chrf(a, b, n, beta) - brute_chrf(a, b, n, beta)) <= 1e-9


def test_chrf_invariants():
    rng = random.Random(3)
    for _ in range(50):
        a = "".join(rng.choice("xyz") for _ in range(rng.randint(1, 10)))
        assert chrf(a, a) == 1.0
        assert chrf(a, "".join(rng.choice("pqr") for _ in range(rng.randint(1, 10)))) == 0.0


# --- coverage ----------------------------------------------------------------

def test_tuple_coverage_examples():
    g = [ct("Thunder", "Wins", "16")]
    assert tuple_coverage(g, g, EM, Direction.GOLD_TO_PRED) == 1.0
    assert tuple_coverage(g, g, CHRF, "pred_to_gold") == 1.0
    assert tuple_coverage(g, [], EM, Direction.GOLD_TO_PRED) == 0.0
    with pytest.raises(EmptySourceSide):
        tuple_coverage([], g, EM, Direction.GOLD_TO_PRED)


def test_tuple_coverage_four_vs_three_against_oracle():
    gold = [ct("Thunder", "Wins", "16"), ct("Thunder", "Losses", "17"), ct("Suns", "Wins", "18"),
            ct("Suns", "Total Points", "134")]
    pred = [ct("Thunder", "Wins", "16"), ct("Suns", "Wins", "18"), ct("Suns", "Total Points", "143")]
    g = [t.as_string() for t in gold]
    p = [t.as_string() for t in pred]
    em = lambda a, b: 1.0 if a == b else 0.0
    assert tuple_coverage(gold, pred, EM, Direction.GOLD_TO_PRED) == brute_coverage(g, p, em) == 0.5
    assert tuple_coverage(gold, pred, EM, Direction.PRED_TO_GOLD) == brute_coverage(p, g, em)
    sim = Similarity(CHRF)
    assert tuple_coverage(gold, pred, CHRF, "gold_to_pred") == brute_coverage(g, p, sim)


def test_superset_prediction_has_full_recall():
    gold = [ct("a", "b", "1")]
    pred = gold + [ct("x", "y", "2")]
    assert tuple_coverage(gold, pred, EM, "gold_to_pred") == 1.0
    assert tuple_coverage(gold, pred, EM, "pred_to_gold") == 0.5


def test_header_coverage_examples():
    assert header_coverage(["Wins"], ["Wins"], EM, "gold_to_pred") == 1.0
    assert header_coverage(["Wins"], ["Losses"], EM, "gold_to_pred") == 0.0
    assert header_coverage(["Wins", "Losses"], ["Wins"], EM, Direction.GOLD_TO_PRED) == 0.5


def test_f1():
    assert f1(0.0, 0.0) == 0.0
    assert f1(1.0, 0.5) == pytest.approx(2 / 3)


def test_coverage_report_levels():
    gold = TableSet((Table.from_grid("T", ["a", "b"], [("r1", ["1", None]), ("r2", ["2", "3"])]),))
    rep = coverage_report(gold, gold, [EM, CHRF])
    for label in (EM.label, CHRF.label):
        for level in ("cell", "row", "col"):
            assert rep.scores[label][level].f1 == 1.0
    empty_pred = coverage_report(gold, TableSet(), [EM])
    assert empty_pred.scores[EM.label]["cell"].precision == 0.0
    empty_gold = TableSet((Table.from_grid("T", ["a"], [("r", [None])]),))
    assert coverage_report(empty_gold, gold, [EM]).scores[EM.label]["cell"] is None


def test_normalize_case_flag():
    gold = [ct("Thunder", "Wins", "16")]
    pred = [ct("thunder", "wins", "16")]
    assert tuple_coverage(gold, pred, EM, "gold_to_pred") == 0.0
    assert tuple_coverage(gold, pred, SimilarityKind.exact(normalize_case=True), "gold_to_pred") == 1.0


def test_embedding_similarity_clamped():
    vecs = {"a | b | 1": [1.0, 0.0], "a | b | 2": [-1.0, 0.0], "a | b | 3": [0.6, 0.8]}
    gw = Gateway(ScriptedBackend(embedder=vecs))
    kind = SimilarityKind.embedding()
    gold = [ct("a", "b", "1")]
    assert tuple_coverage(gold, [ct("a", "b", "2")], kind, "gold_to_pred", gw) == 0.0
    assert tuple_coverage(gold, [ct("a", "b", "3")], kind, "gold_to_pred", gw) == pytest.approx(0.6)
    assert kind.label == "embedding-cosine"
    with pytest.raises(ValueError):
        Similarity(kind)


# --- numeric -----------------------------------------------------------------

def livesum(cols, rows):
    return Table.from_grid("Football Match", cols, [(h, [None if v is None else str(v) for v in vals])
                                                    for h, vals in rows])


def test_numeric_identity():
    g = livesum(["Goals", "Shots"], [("Home Team", [1, 5]), ("Away Team", [0, 3])])
    rep = numeric_eval(g, g)
    assert (rep.rmse, rep.error_rate_pct, rep.over_rmse, rep.under_rmse, rep.over_n, rep.under_n) == (0, 0, 0, 0, 0, 0)


def test_numeric_hand_check():
    g = livesum(["Goals", "Red Cards", "Shots"], [("Home Team", [2, 0, 1])])
    p = livesum(["Goals", "Red Cards", "Shots"], [("Home Team", [3, 0, 1])])
    rep = numeric_eval(g, p)
    assert abs(rep.rmse - math.sqrt(1 / 3)) <= 1e-12
    assert abs(rep.error_rate_pct - 33.33) <= 0.01
    assert rep.over_n == 1 and rep.over_rmse == 1.0 and rep.under_n == 0


def test_numeric_difficulty_restriction():
    cols = ["Goals", "Shots", "Corner Kicks"]
    g = livesum(cols, [("Home Team", [2, 10, 4]), ("Away Team", [1, 8, 3])])
    p = livesum(cols, [("Home Team", [0, 10, 4]), ("Away Team", [1, 8, 3])])
    rep = numeric_eval(g, p)
    assert rep.per_difficulty["Easy"].rmse > 0
    assert rep.per_difficulty["Medium"].rmse == 0 and rep.per_difficulty["Hard"].rmse == 0
    assert rep.under_n == 1 and rep.under_rmse == 2.0


def test_numeric_alignment_missing_and_non_numeric():
    g = livesum(["Goals", "Corner Kicks", "Fouls"], [("Home Team", [1, 2, 3]), ("Away Team", [0, 0, 0])])
    p = livesum(["corners", "Goals", "Injuries"], [("Away Team", [0, "n/a", 9]), ("Home Team", [2, 1, 9])])
    rep = numeric_eval(g, p)
    # Fouls missing -> 0 for Home (error 3) and Away (correct); Away Goals non-numeric -> 0 (correct)
    assert rep.n_cells == 6
    assert rep.rmse == pytest.approx(math.sqrt(9 / 6))
    assert any(f.startswith("missing") for f in rep.flags)
    assert any(f.startswith("non-numeric") for f in rep.flags)


def test_numeric_not_livesum_shaped():
    with pytest.raises(NotLivesumShaped):
        numeric_eval(livesum(["Points"], [("Home Team", [1])]), livesum(["Points"], [("Home Team", [1])]))
    with pytest.raises(NotLivesumShaped):
        numeric_eval(livesum(["Goals"], [("Home Team", ["x"])]), livesum(["Goals"], [("Home Team", [1])]))


def test_numeric_conservation_and_shift_invariance():
    rng = random.Random(11)
    for _ in range(200):
        n = rng.randint(1, 16)
        gold = [rng.randint(0, 20) for _ in range(n)]
        pred = [max(0, g + rng.randint(-3, 3)) for g in gold]
        rep = numeric_eval_values(gold, pred)
        rmse, er, over, under = brute_numeric(gold, pred)
        assert abs(rep.rmse - rmse) <= 1e-12 and abs(rep.error_rate_pct - er) <= 1e-12
        lhs = rep.n_cells * rep.rmse ** 2
        rhs = rep.over_n * rep.over_rmse ** 2 + rep.under_n * rep.under_rmse ** 2
        assert abs(lhs - rhs) <= 1e-9 and abs(rhs - (over + under)) <= 1e-9
        k = rng.randint(1, 50)
        shifted = numeric_eval_values([g + k for g in gold], [p + k for p in pred])
        assert shifted.rmse == rep.rmse and shifted.error_rate_pct == rep.error_rate_pct


# --- AutoQA --------------------------------------------------------------------

def qa_generator(n):
    return "\n".join(f"Q{i}: question {i}?\nA{i}: answer {i}" for i in range(1, n + 1))


def autoqa_backend(n, verdicts):
    answers = [f"answer {i}" for i in range(1, n + 1)]
    return ScriptedBackend([qa_generator(n)] + answers + verdicts)


def test_autoqa_three_of_four():
    gw = Gateway(autoqa_backend(4, ["YES", "YES", "YES", "NO"]))
    rep = autoqa("source", TableSet(), gw, TEMPLATES, 4)
    assert (rep.n_questions, rep.n_correct, rep.accuracy_pct) == (4, 3, 75.0)


def test_autoqa_preconditions_and_parse_failure():
    with pytest.raises(ValueError):
        autoqa("s", TableSet(), Gateway(ScriptedBackend()), TEMPLATES, 0)
    with pytest.raises(QaParseFailure):
        autoqa("s", TableSet(), Gateway(ScriptedBackend(["I cannot do that"])), TEMPLATES, 3)


def test_autoqa_answerer_sees_only_tables():
    t = TableSet((Table.from_grid("Team", ["Wins"], [("Thunder", ["16"])]),))
    backend = autoqa_backend(1, ["YES"])
    autoqa("SECRET SOURCE", t, Gateway(backend), TEMPLATES, 1)
    answer_prompt = backend.requests[1].messages[0].content
    assert "| Thunder | 16 |" in answer_prompt and "SECRET SOURCE" not in answer_prompt


def test_autoqa_order_invariant():
    def judge(req):
        return "YES" if "question 2?" in req.messages[0].content or "question 5?" in req.messages[0].content \
            else "NO"

    def run(order):
        gen = "\n".join(f"Q{k}: question {i}?\nA{k}: answer {i}" for k, i in enumerate(order, 1))
        backend = ScriptedBackend([gen] + ["x"] * len(order), responder=judge)
        return autoqa("s", TableSet(), Gateway(backend), TEMPLATES, len(order)).accuracy_pct

    assert run([1, 2, 3, 4, 5]) == run([5, 3, 1, 4, 2]) == 40.0


def test_parse_qa_pairs_tolerates_markup():
    assert [p.question for p in parse_qa_pairs("**Q1:** a?\n**A1:** b\nQ: c?\nA: d\nQ3: orphan")] == ["a?", "c?"]


# --- TabEval -------------------------------------------------------------------

TEAM = Table.from_grid("Team", ["Wins", "Losses"], [("Thunder", ["16", "17"]), ("Suns", ["18", None])])


def test_unroll_table():
    stmts = unroll_table(TEAM)
    assert stmts[0] == "The Wins of Thunder in table Team is 16."
    assert len(stmts) == 3
    assert unroll_table(Table.from_grid("E", ["a"], [("r", [None])])) == []
    assert len(unroll_table(Table.from_grid("O", ["a"], [("r", ["1"])]))) == 1


def test_tabeval_always_yes():
    ts = TableSet((TEAM,))
    rep = tabeval(ts, ts, Gateway(ScriptedBackend(responder=lambda r: "YES")), TEMPLATES)
    assert (rep.correctness, rep.completeness, rep.overall.overall) == (1.0, 1.0, 1.0)


def test_tabeval_half_each_way():
    t = Table.from_grid("T", ["a", "b"], [("r", ["1", "2"])])
    judge = lambda req: "YES" if "The a of r" in req.messages[0].content.split("Hypothesis:")[1] else "NO"
    rep = tabeval(TableSet((t,)), TableSet((t,)), Gateway(ScriptedBackend(responder=judge)), TEMPLATES)
    assert (rep.correctness, rep.completeness, rep.overall.overall) == (0.5, 0.5, 0.5)


def test_tabeval_extra_pred_columns():
    gold = Table.from_grid("T", ["a"], [("r", ["1"])])
    pred = Table.from_grid("T", ["a", "extra"], [("r", ["1", "9"])])

    def judge(req):
        prompt = req.messages[0].content
        premise, hyp = prompt.split("Hypothesis:")
        return "YES" if "The a of r" in hyp else "NO"

    rep = tabeval(TableSet((pred,)), TableSet((gold,)), Gateway(ScriptedBackend(responder=judge)), TEMPLATES)
    assert rep.correctness == 0.5 and rep.completeness == 1.0
    assert rep.correctness < rep.completeness


def test_tabeval_unpaired_tables():
    gold = TableSet((TEAM,))
    pred = TableSet((Table.from_grid("Other", ["x"], [("y", ["1"])]),))
    rep = tabeval(pred, gold, Gateway(ScriptedBackend(responder=lambda r: "YES")), TEMPLATES)
    assert rep.per_table["Team"].completeness == 0.0 and rep.per_table["Other"].correctness == 0.0
    assert rep.overall.overall == 0.0
