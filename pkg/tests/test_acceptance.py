"""Acceptance suite: one PASS/FAIL line per criterion, tolerances pinned below.

Run with ``pytest tests/test_acceptance.py -v`` or ``python3 tests/test_acceptance.py``.
"""

import math
import random
import sys
import time
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

import fixture_builder  # noqa: E402
from oracles import brute_chrf, brute_coverage, table_tuples  # noqa: E402
from text2table.analysis import diff_table_sets  # noqa: E402
from text2table.cli import main  # noqa: E402
from text2table.datasets import LivesumEvent  # noqa: E402
from text2table.llm import Gateway, ScriptedBackend  # noqa: E402
from text2table.metrics import (Direction, SimilarityKind, autoqa, chrf, numeric_eval,  # noqa: E402
                                tuple_coverage)
from text2table.metrics.similarity import Similarity  # noqa: E402
from text2table.tables import (ContentTuple, Table, TableSet, parse_table_blocks,  # noqa: E402
                               serialize_table_set)
from text2table.templates import Templates  # noqa: E402

REPLAY_MAX_SECONDS = 2.0
CHRF_TOL = 1e-9
CHRF_MAX_SECONDS = 1.0
CONSERVATION_TOL = 1e-9
HAND_RMSE_TOL = 1e-12
HAND_ER_TOL = 0.01

_results = []


def report(name, ok, detail):
    line = f"{'PASS' if ok else 'FAIL'}  {name}: {detail}"
    _results.append(line)
    print(line)
    assert ok, line


def _jsonl(path):
    import json
    return [json.loads(x) for x in Path(path).read_text().splitlines() if x.strip()]


# --- random generators ----------------------------------------------------------

WORDS = ["Thunder", "Suns", "Wins", "Losses", "Points", "Kemba Walker", "Home Team", "Away Team", "Goals",
         "Fouls", "Rebounds", "Next game", "Shots", "Assists", "Hornets", "Knicks"]


def rand_word(rng):
    return rng.choice(WORDS) + ("" if rng.random() < 0.5 else f" {rng.randint(0, 9)}")


def rand_cell(rng):
    r = rng.random()
    if r < 0.25:
        return None
    if r < 0.6:
        return str(rng.randint(0, 30))
    return rand_word(rng)


def rand_grid(rng, max_rows=5, max_cols=5):
    cols = list(dict.fromkeys(rand_word(rng) for _ in range(rng.randint(1, max_cols))))
    rows = list(dict.fromkeys(rand_word(rng) for _ in range(rng.randint(0, max_rows))))
    return cols, [(h, [rand_cell(rng) for _ in cols]) for h in rows]


def rand_table_set(rng, max_tables=3):
    names = list(dict.fromkeys(rand_word(rng) for _ in range(rng.randint(1, max_tables))))
    return TableSet(tuple(Table.from_grid(n, *rand_grid(rng), row_label=rng.choice([None, "Team", "Player"]))
                          for n in names))


# --- criteria --------------------------------------------------------------------

@pytest.fixture(scope="module")
def fx(tmp_path_factory):
    return fixture_builder.build(tmp_path_factory.mktemp("acceptance"))


def test_replay_end_to_end(fx, tmp_path):
    out = tmp_path / "pred.jsonl"
    t0 = time.perf_counter()
    rc = main(["generate", "--dataset", str(fx.dataset), "--strategy", "mm-3s", "--limit", "2",
               "--backend", f"replay:{fx.replay_dir}", "--out", str(out)])
    elapsed = time.perf_counter() - t0
    recs = {r["id"]: r for r in _jsonl(out)}
    live = TableSet()
    roto = TableSet()
    if rc == 0:
        from text2table.tables import table_set_from_json
        live = table_set_from_json(recs["livesum-reference"]["tables"])
        roto = table_set_from_json(recs["rotowire-reference"]["tables"])
    home = live.tables[0].rows[0].cells if len(live) else None
    away = live.tables[0].rows[1].cells if len(live) else None
    player = roto.get("Player")
    ok = (rc == 0 and len(recs) == 2
          and home == ("5", "3", "11", "20", "6", "11", "1", "2")
          and away == ("11", "3", "6", "6", "1", "2", "3", "0")
          and player is not None
          and player.cell("Kemba Walker", "Points") == "11"
          and player.cell("Carmelo Anthony", "Points") == "32"
          and elapsed < REPLAY_MAX_SECONDS)
    report("replay end-to-end", ok, f"home={home} away={away} runtime={elapsed:.3f}s (< {REPLAY_MAX_SECONDS}s)")


def test_chrf_oracle():
    rng = random.Random(20240601)
    pairs = []
    for _ in range(200):
        a = "".join(rng.choice("abcde 12") for _ in range(rng.randint(0, 30)))
        b = "".join(rng.choice("abcde 12") for _ in range(rng.randint(0, 30)))
        pairs.append((a, b))
    expected = [brute_chrf(a, b, 6, 2.0) for a, b in pairs]
    t0 = time.perf_counter()
    got = [chrf(a, b, 6, 2.0) for a, b in pairs]
    elapsed = time.perf_counter() - t0
    worst = max(abs(x - y) for x, y in zip(got, expected))
    report("chrF oracle", worst <= CHRF_TOL and elapsed < CHRF_MAX_SECONDS,
           f"200 pairs, max |diff|={worst:.2e} (<= {CHRF_TOL}), runtime={elapsed:.3f}s (< {CHRF_MAX_SECONDS}s)")


def test_coverage_oracle():
    rng = random.Random(7)
    mismatches = 0
    em = lambda p, g: 1.0 if p == g else 0.0
    chrf_sim = Similarity(SimilarityKind.chrf())
    checked = 0
    for _ in range(200):
        g_grid, p_grid = rand_grid(rng), rand_grid(rng)
        g_str, p_str = table_tuples(g_grid), table_tuples(p_grid)
        if not g_str:
            continue
        to_ct = lambda ss: [ContentTuple(*s.split(" | ", 2)) for s in ss]
        gold, pred = to_ct(g_str), to_ct(p_str)
        for kind, sim in ((SimilarityKind.exact(), em), (SimilarityKind.chrf(), chrf_sim)):
            checked += 1
            if tuple_coverage(gold, pred, kind, Direction.GOLD_TO_PRED) != brute_coverage(g_str, p_str, sim):
                mismatches += 1
            if p_str:
                checked += 1
                flipped = lambda t, s, f=sim: f(s, t)
                if tuple_coverage(gold, pred, kind, Direction.PRED_TO_GOLD) != brute_coverage(p_str, g_str, flipped):
                    mismatches += 1
    report("coverage oracle", mismatches == 0, f"{checked} comparisons (EM and chrF, both directions), "
                                               f"{mismatches} not exactly equal")


def test_numeric_conservation():
    rng = random.Random(99)
    events = [e.value for e in LivesumEvent]
    worst = 0.0
    count_errors = 0
    for _ in range(500):
        gold = [[rng.randint(0, 25) for _ in events] for _ in range(2)]
        pred = [[max(0, v + rng.randint(-4, 4)) for v in row] for row in gold]
        mk = lambda grid: Table.from_grid("Match", events, [(h, [str(v) for v in vals])
                                                            for h, vals in zip(("Home Team", "Away Team"), grid)])
        rep = numeric_eval(mk(gold), mk(pred))
        diffs = [p - g for gr, pr in zip(gold, pred) for g, p in zip(gr, pr)]
        over = sum(d * d for d in diffs if d > 0)
        under = sum(d * d for d in diffs if d < 0)
        lhs = rep.n_cells * rep.rmse ** 2
        worst = max(worst, abs(lhs - (over + under)),
                    abs(lhs - (rep.over_n * rep.over_rmse ** 2 + rep.under_n * rep.under_rmse ** 2)))
        if sum(s.n for s in rep.per_difficulty.values() if s) != rep.n_cells:
            count_errors += 1
    report("numeric conservation", worst <= CONSERVATION_TOL and count_errors == 0,
           f"500 pairs, max |n*rmse^2 - (over+under)|={worst:.2e} (<= {CONSERVATION_TOL}), "
           f"difficulty count mismatches={count_errors}")


def test_numeric_hand_check():
    cols = ["Goals", "Red Cards", "Shots"]
    rep = numeric_eval(Table.from_grid("M", cols, [("Home Team", ["2", "0", "1"])]),
                       Table.from_grid("M", cols, [("Home Team", ["3", "0", "1"])]))
    ok = abs(rep.rmse - math.sqrt(1 / 3)) <= HAND_RMSE_TOL and abs(rep.error_rate_pct - 33.33) <= HAND_ER_TOL
    report("numeric hand-check", ok, f"rmse={rep.rmse!r} (sqrt(1/3) +/- {HAND_RMSE_TOL}), "
                                     f"er={rep.error_rate_pct:.4f} (33.33 +/- {HAND_ER_TOL})")


def test_round_trip():
    rng = random.Random(5)
    failures = 0
    for _ in range(100):
        ts = rand_table_set(rng)
        if parse_table_blocks(serialize_table_set(ts), "strict") != ts:
            failures += 1
    report("round-trip", failures == 0, f"100 generated TableSets, {failures} changed by serialize->parse(strict)")


def test_diff_antisymmetry():
    rng = random.Random(13)
    bad = 0
    for _ in range(100):
        a, b = rand_table_set(rng), rand_table_set(rng)
        ab, ba = diff_table_sets(a, b), diff_table_sets(b, a)
        for name, c in ab.tables.items():
            other = next(v for k, v in ba.tables.items() if k.lower() == name.lower())
            if c.hallucinated_cells != other.missing_cells:
                bad += 1
        if not diff_table_sets(a, a).is_zero():
            bad += 1
    report("diff antisymmetry", bad == 0, f"100 random pairs, {bad} violations")


def test_ablation_wiring(fx, tmp_path):
    out = tmp_path / "abl.jsonl"
    rc = main(["generate", "--dataset", str(fx.ablation), "--strategy", "mm-3s", "--ablate", "atomization",
               "--backend", f"replay:{fx.replay_dir}", "--out", str(out)])
    rec = _jsonl(out)[0]
    stages = [s for s, _ in rec.get("transcript", [])]
    want = ["The Hornets beat the Knicks 103 - 102 on Friday.", "Kemba Walker scored 11 points.",
            "Carmelo Anthony led New York with 32 points."]
    ok = rc == 0 and "atomize" not in stages and stages == ["schema", "table"] and rec["statements"] == want
    report("ablation wiring", ok, f"stages={stages}, statements={len(rec.get('statements', []))} == sentence split")


def test_evaluate_determinism(fx, tmp_path):
    pred = tmp_path / "pred.jsonl"
    main(["generate", "--dataset", str(fx.dataset), "--strategy", "mm-3s", "--backend", f"replay:{fx.replay_dir}",
          "--out", str(pred)])
    outs = []
    for k in range(2):
        d = tmp_path / f"run{k}"
        main(["evaluate", "--gold", str(fx.livesum), "--kind", "livesum", "--pred", str(pred),
              "--metrics", "em,chrf,numeric", "--out-dir", str(d), "--allow-partial"])
        outs.append({p.name: p.read_bytes() for p in sorted(d.iterdir())})
    ok = outs[0] == outs[1] and set(outs[0]) == {"report.json", "coverage.csv", "numeric.csv"}
    report("evaluate determinism", ok, f"files={sorted(outs[0])}, byte-identical={outs[0] == outs[1]}")


def test_autoqa_arithmetic():
    gen = "\n".join(f"Q{i}: How many points did player {i} score?\nA{i}: {10 + i}" for i in range(1, 11))
    answers = [str(10 + i) if i <= 7 else "Unknown" for i in range(1, 11)]
    verdicts = ["YES"] * 7 + ["NO"] * 3
    backend = ScriptedBackend([gen] + answers + verdicts)
    rep = autoqa("source text", TableSet(), Gateway(backend), Templates(), 10)
    ok = rep.n_questions == 10 and rep.n_correct == 7 and rep.accuracy_pct == 70.0
    report("AutoQA arithmetic", ok, f"{rep.n_correct}/{rep.n_questions} -> {rep.accuracy_pct}%")


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q"]))
