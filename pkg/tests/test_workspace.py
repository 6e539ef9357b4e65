# Copyright (c) 2025, Williams.Wang. All rights reserved. Use restricted under LICENSE terms.

import copy
import random
from types import MappingProxyType

import pytest

from src.core.aggregate import Ballot
from src.core.power import PowerAssignment
from src.core.workspace import (
    DecisionMethod,
    LoopBallots,
    ModelEntry,
    ModelKind,
    Phase,
    ProblemSolvingLoop,
    open_pool,
    read_pool_snapshot,
    run_problem_solving_loop,
)
from src.utils.errors import (
    ConflictError,
    FormatError,
    HoloVoteError,
    InvalidArgumentError,
    NoCandidatesError,
    NoDecisionError,
    PhaseViolationError,
)

PROBLEM = ModelKind.PROBLEM
SOLUTION = ModelKind.SOLUTION


def _entry(entry_id, author=0, kind=PROBLEM, value=None):
    return ModelEntry(id=entry_id, author=author, kind=kind, content=f"model {entry_id}", numeric_value=value)


def _vote(voter, *ranking, value=None):
    return Ballot(voter=voter, ranking=tuple(ranking), value=value)


def _powers(**by_voter):
    return PowerAssignment(
        absorbed=MappingProxyType({int(k[1:]): v for k, v in by_voter.items()}),
        stranded=0.0,
        steps_run=1,
        population=len(by_voter),
    )


def test_open_pool():
    problems = open_pool(PROBLEM)
    solutions = open_pool(SOLUTION)
    assert problems.phase is Phase.MODELING
    assert problems.size == 0
    assert problems.size_history == [(0, 0)]
    assert solutions.kind is SOLUTION

    problems.submit(_entry("p1"))
    assert solutions.size == 0


def test_submissions_grow_the_pool():
    pool = open_pool(PROBLEM)
    for author, entry_id in enumerate(["p1", "p2", "p3"]):
        pool.submit(_entry(entry_id, author))
    assert pool.size == 3
    assert [size for _, size in pool.size_history] == [0, 1, 2, 3]


def test_submit_errors():
    pool = open_pool(PROBLEM).submit(_entry("p1"))
    with pytest.raises(ConflictError):
        pool.submit(_entry("p1", author=2))
    with pytest.raises(InvalidArgumentError):
        pool.submit(_entry("s1", kind=SOLUTION))
    assert pool.size == 1

    pool.begin_decision()
    with pytest.raises(PhaseViolationError):
        pool.submit(_entry("p2"))
    pool.decide([_vote(0, "p1")], DecisionMethod.PLURALITY)
    with pytest.raises(PhaseViolationError):
        pool.submit(_entry("p2"))


def test_begin_decision():
    pool = open_pool(PROBLEM)
    with pytest.raises(NoCandidatesError):
        pool.begin_decision()

    for entry_id in ["p1", "p2", "p3"]:
        pool.submit(_entry(entry_id))
    pool.begin_decision()
    assert pool.phase is Phase.DECIDING
    assert pool.size == 3
    with pytest.raises(PhaseViolationError):
        pool.begin_decision()


def test_plurality_decision_prunes_to_one():
    pool = open_pool(PROBLEM)
    for entry_id in ["e1", "e2", "e3"]:
        pool.submit(_entry(entry_id))
    pool.begin_decision()
    same, winner = pool.decide([_vote(0, "e1"), _vote(1, "e1"), _vote(2, "e2")], DecisionMethod.PLURALITY)

    assert same is pool
    assert winner == "e1"
    assert pool.winner == "e1"
    assert pool.phase is Phase.CLOSED
    sizes = [size for _, size in pool.size_history]
    assert sizes == [0, 1, 2, 3, 1]
    assert sizes.index(max(sizes)) < len(sizes) - 1


def test_mean_decision_picks_nearest_entry():
    def deciding_pool():
        pool = open_pool(SOLUTION)
        for entry_id, value in [("low", 0.2), ("mid", 0.5), ("high", 0.9)]:
            pool.submit(_entry(entry_id, kind=SOLUTION, value=value))
        return pool.begin_decision()

    ballots = [_vote(0, value=0.4), _vote(1, value=0.6)]
    assert deciding_pool().decide(ballots, DecisionMethod.MEAN)[1] == "mid"
    assert deciding_pool().decide(ballots, DecisionMethod.MEAN, _powers(m0=3.0, m1=1.0))[1] == "mid"


def test_mean_decision_needs_numeric_entries():
    pool = open_pool(SOLUTION)
    pool.submit(_entry("a", kind=SOLUTION, value=0.3))
    pool.submit(_entry("b", kind=SOLUTION))
    pool.begin_decision()
    with pytest.raises(InvalidArgumentError):
        pool.decide([_vote(0, value=0.4)], DecisionMethod.MEAN)
    assert pool.phase is Phase.DECIDING
    assert pool.winner is None


def test_decide_errors():
    pool = open_pool(PROBLEM).submit(_entry("p1"))
    with pytest.raises(PhaseViolationError):
        pool.decide([_vote(0, "p1")], DecisionMethod.PLURALITY)

    pool.begin_decision()
    with pytest.raises(NoDecisionError):
        pool.decide([], DecisionMethod.PLURALITY)
    assert pool.phase is Phase.DECIDING


def test_power_weighted_borda():
    pool = open_pool(PROBLEM)
    for entry_id in ["a", "b", "c"]:
        pool.submit(_entry(entry_id))
    pool.begin_decision()
    ballots = [_vote(0, "a", "b", "c"), _vote(1, "a", "c", "b"), _vote(2, "b", "c", "a")]
    _, winner = pool.decide(ballots, DecisionMethod.BORDA, _powers(m0=1.0, m1=1.0, m2=4.0))
    assert winner == "b"


def test_visibility_follows_author_power():
    pool = open_pool(PROBLEM)
    pool.submit(_entry("x", author=0))
    pool.submit(_entry("y", author=2))
    pool.submit(_entry("z", author=5))
    ranking = pool.visibility_ranking(_powers(m0=1.0, m2=3.0))
    assert [(e.id, power) for e, power in ranking] == [("y", 3.0), ("x", 1.0), ("z", 0.0)]


def test_snapshot_round_trip():
    pool = open_pool(SOLUTION)
    pool.submit(_entry("s1", author=0, kind=SOLUTION, value=0.25))
    pool.submit(ModelEntry(id="s2", author=1, kind=SOLUTION, content='bike lanes, "protected"'))
    pool.begin_decision()
    pool.decide([_vote(0, "s2")], DecisionMethod.PLURALITY)

    restored = read_pool_snapshot(pool.snapshot())
    assert restored == pool

    open_copy = open_pool(PROBLEM).submit(_entry("p1"))
    assert read_pool_snapshot(open_copy.snapshot()) == open_copy


@pytest.mark.parametrize(
    "content",
    ["line\u2028separator", "form\x0cfeed", "windows\r\nbreak", "bare\rreturn", "two\n\nlines"],
)
def test_snapshot_keeps_unusual_line_breaks_in_content(content):
    pool = open_pool(PROBLEM)
    pool.submit(ModelEntry(id="p1", author=0, kind=PROBLEM, content=content))
    pool.submit(ModelEntry(id="p2", author=1, kind=PROBLEM, content="plain"))

    restored = read_pool_snapshot(pool.snapshot())
    assert restored == pool
    assert [e.content for e in restored.entries] == [content, "plain"]


@pytest.mark.parametrize(
    "text, line",
    [
        ("kind=problem-model\nphase=modeling\n", 3),
        ("kind=problem-model\nstage=modeling\nwinner=\n", 2),
        ("kind=nonsense\nphase=modeling\nwinner=\n", 1),
        ("kind=problem-model\nphase=closed\nwinner=\np1,0,,x\n", 3),
        ("kind=problem-model\nphase=modeling\nwinner=\np1,0,x\n", 4),
        ("kind=problem-model\nphase=modeling\nwinner=\np1,zero,,x\n", 4),
    ],
)
def test_bad_snapshots(text, line):
    with pytest.raises(FormatError) as info:
        read_pool_snapshot(text)
    assert info.value.line == line


def test_loop_with_single_candidates():
    ballots = LoopBallots(problem=[_vote(0, "p")], solution=[_vote(0, "s")])
    chosen = run_problem_solving_loop(
        [_entry("p")], {"p": [_entry("s", kind=SOLUTION)]}, ballots, DecisionMethod.PLURALITY
    )
    assert chosen == "s"


def test_loop_matches_manual_composition():
    problems = [_entry("p1", 0), _entry("p2", 1), _entry("p3", 2)]
    solutions = {
        "p1": [_entry("s1", 0, SOLUTION), _entry("s2", 1, SOLUTION)],
        "p2": [_entry("s3", 2, SOLUTION)],
    }
    problem_votes = [_vote(0, "p1"), _vote(1, "p1"), _vote(2, "p2")]
    solution_votes = [_vote(0, "s2"), _vote(1, "s1"), _vote(2, "s2")]

    loop = ProblemSolvingLoop(
        problems, solutions, LoopBallots(problem_votes, solution_votes), DecisionMethod.PLURALITY
    )
    chosen = loop.run()

    manual = open_pool(PROBLEM)
    for entry in problems:
        manual.submit(entry)
    _, problem_id = manual.begin_decision().decide(problem_votes, DecisionMethod.PLURALITY)
    second = open_pool(SOLUTION)
    for entry in solutions[problem_id]:
        second.submit(entry)
    _, solution_id = second.begin_decision().decide(solution_votes, DecisionMethod.PLURALITY)

    assert (loop.problem_id, chosen) == (problem_id, solution_id) == ("p1", "s2")
    for pool in (loop.problem_pool, loop.solution_pool):
        assert pool.phase is Phase.CLOSED
        assert pool.winner is not None
        assert pool.size_history[-1][1] == 1


def test_loop_uses_ballots_of_the_winning_problem():
    problems = [_entry("p1", 0), _entry("p2", 1)]
    solutions = {"p1": [_entry("s1", 0, SOLUTION)], "p2": [_entry("s2", 0, SOLUTION), _entry("s3", 1, SOLUTION)]}
    ballots = LoopBallots(
        problem=[_vote(0, "p2"), _vote(1, "p2")],
        solution={"p1": [_vote(0, "s1")], "p2": [_vote(0, "s3"), _vote(1, "s3")]},
    )
    assert run_problem_solving_loop(problems, solutions, ballots, DecisionMethod.PLURALITY) == "s3"


def test_loop_without_solutions_for_winner():
    ballots = LoopBallots(problem=[_vote(0, "p")], solution=[_vote(0, "s")])
    with pytest.raises(NoCandidatesError):
        run_problem_solving_loop([_entry("p")], {}, ballots, DecisionMethod.PLURALITY)


_PHASE_ORDER = {Phase.MODELING: 0, Phase.DECIDING: 1, Phase.CLOSED: 2}


def test_random_operation_sequences_keep_phases_monotone():
    rng = random.Random(1234)
    ids = ["a", "b", "c", "d"]
    methods = list(DecisionMethod)

    for _ in range(10_000):
        kind = rng.choice([PROBLEM, SOLUTION])
        pool = open_pool(kind)
        for _ in range(rng.randint(1, 8)):
            before = copy.deepcopy(pool)
            op = rng.choice(["submit", "submit", "begin", "decide"])
            try:
                if op == "submit":
                    entry_kind = kind if rng.random() < 0.9 else (SOLUTION if kind is PROBLEM else PROBLEM)
                    value = rng.random() if rng.random() < 0.8 else None
                    pool.submit(_entry(rng.choice(ids), rng.randint(0, 3), entry_kind, value))
                elif op == "begin":
                    pool.begin_decision()
                else:
                    method = rng.choice(methods)
                    ballots = _random_ballots(rng, pool.entry_ids or ids, method)
                    pool.decide(ballots, method)
            except HoloVoteError:
                assert pool == before
                continue

            assert _PHASE_ORDER[pool.phase] >= _PHASE_ORDER[before.phase]
            assert (pool.winner is not None) == (pool.phase is Phase.CLOSED)
            if pool.phase is Phase.CLOSED:
                assert pool.size_history[-1][1] == 1
                assert pool.winner in pool.entry_ids


def _random_ballots(rng, candidates, method):
    ballots = []
    for voter in range(rng.randint(0, 3)):
        if method is DecisionMethod.MEAN:
            ballots.append(Ballot(voter=voter, value=rng.random()))
        elif method is DecisionMethod.BORDA:
            ranking = list(candidates)
            rng.shuffle(ranking)
            ballots.append(Ballot(voter=voter, ranking=tuple(ranking)))
        else:
            ballots.append(Ballot(voter=voter, ranking=(rng.choice(candidates),)))
    return ballots
