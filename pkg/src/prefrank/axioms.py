"""Executable checks of axiomatic properties of scoring methods.

Violations are exact and come with a replayable witness.  Satisfaction can
only be sampled: :func:`run_trials` draws random instances that meet an
axiom's hypotheses and looks for a counterexample.
"""

from __future__ import annotations

import enum
from collections.abc import Mapping, Sequence
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import permutations
from typing import Any, Union

import numpy as np

from ._validation import exact_zeros, to_fraction
from .datasets import load_five_object_example
from .exceptions import ValidationError
from .graph import RankingProblem, components, derive
from .scoring import LEAST_SQUARES, METHODS, NORMALIZED_ROW_SUM, ROW_SUM, ScoreVector, score

FLOAT_TOL = 1e-9
WITNESS_INLINE_LIMIT = 10


class Axiom(str, enum.Enum):
    SIZE_INVARIANCE = "size_invariance"
    BRIDGE_SET_INDEPENDENCE = "bridge_set_independence"
    BRIDGE_SET_AUTONOMY = "bridge_set_autonomy"
    BRIDGE_PLAYER_INDEPENDENCE = "bridge_player_independence"


@dataclass(frozen=True)
class BridgeWitness:
    """Bridge set ``bridge`` separating ``first`` from ``second``."""

    bridge: tuple[str, ...]
    first: tuple[str, ...]
    second: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        for name in ("bridge", "first", "second"):
            object.__setattr__(self, name, tuple(getattr(self, name)))

    @property
    def macrovertex(self) -> bool:
        return not self.second


@dataclass(frozen=True)
class ClonePair:
    """Two objects claimed to be scaled copies of each other."""

    first: str
    second: str


@dataclass(frozen=True)
class Perturbation:
    """Entry edits applied to a base problem with a bridge witness."""

    witness: BridgeWitness
    edits: Mapping[tuple[str, str], Any] = field(default_factory=dict)


PerturbationSpec = Union[ClonePair, Perturbation]


@dataclass(frozen=True)
class AxiomVerdict:
    axiom: Axiom
    method: str
    satisfied: bool
    trials: int = 1
    witness: dict | None = None

    @property
    def outcome(self) -> str:
        return "satisfied-on-sample" if self.satisfied else "violated-with-witness"

    def to_dict(self) -> dict:
        return {
            "axiom": self.axiom.value,
            "method": self.method,
            "outcome": self.outcome,
            "trials": self.trials,
            "witness": self.witness,
        }


def make_scaled_clone(
    problem: RankingProblem, obj: str | int, alpha: Any, key: str | None = None
) -> RankingProblem:
    """Append an object whose preferences are ``alpha`` times those of ``obj``.

    The new object is not compared with ``obj`` itself.
    """
    i = problem.index(obj)
    if problem.exact:
        alpha = to_fraction(alpha)
    else:
        alpha = float(alpha)
    if not alpha > 0:
        raise ValidationError(f"scale factor must be positive, got {alpha}", module="axiomlab")
    key = key if key is not None else problem.objects[i] + "'"
    n = problem.n
    dense = problem.to_dense()
    if problem.exact:
        out = exact_zeros((n + 1, n + 1))
    else:
        out = np.zeros((n + 1, n + 1))
    out[:n, :n] = dense
    for k in range(n):
        if k != i:
            out[n, k] = alpha * dense[i, k]
            out[k, n] = alpha * dense[k, i]
    return RankingProblem(list(problem.objects) + [key], out, exact=problem.exact)


def scaling_factor(problem: RankingProblem, i: str | int, j: str | int) -> Any:
    """``alpha > 0`` with ``a_ik = alpha a_jk`` and ``a_ki = alpha a_kj`` off the pair, else None.

    The pair must also be uncompared (``a_ij = a_ji = 0``).
    """
    ii, jj = problem.index(i), problem.index(j)
    if ii == jj:
        return None
    dense = problem.to_dense()
    if dense[ii, jj] != 0 or dense[jj, ii] != 0:
        return None
    rest = [k for k in range(problem.n) if k not in (ii, jj)]
    u = [dense[ii, k] for k in rest] + [dense[k, ii] for k in rest]
    v = [dense[jj, k] for k in rest] + [dense[k, jj] for k in rest]
    base = next((t for t, x in enumerate(v) if x != 0), None)
    if base is None:
        return (Fraction(1) if problem.exact else 1.0) if all(x == 0 for x in u) else None
    alpha = u[base] / v[base]
    if not alpha > 0:
        return None
    if problem.exact:
        ok = all(a == alpha * b for a, b in zip(u, v))
    else:
        ok = all(abs(a - alpha * b) <= FLOAT_TOL * max(1.0, abs(a)) for a, b in zip(u, v))
    return alpha if ok else None


def _check_partition(problem: RankingProblem, witness: BridgeWitness) -> tuple[list[int], list[int], list[int]]:
    b = [problem.index(o) for o in witness.bridge]
    n1 = [problem.index(o) for o in witness.first]
    n2 = [problem.index(o) for o in witness.second]
    if not b:
        raise ValidationError("bridge set must be nonempty", module="axiomlab")
    everything = b + n1 + n2
    if len(set(everything)) != len(everything):
        raise ValidationError("bridge witness subsets overlap", module="axiomlab")
    if len(everything) != problem.n:
        raise ValidationError("bridge witness does not cover every object", module="axiomlab")
    return b, n1, n2


def verify_bridge_witness(problem: RankingProblem, witness: BridgeWitness) -> bool:
    """True iff ``bridge`` is a bridge set with the given sides.

    Requires no comparisons between ``first`` and ``second`` and, for each
    object of ``first``, the same number of comparisons with every bridge object.
    """
    b, n1, n2 = _check_partition(problem, witness)
    M = derive(problem).matches
    dense = M if problem.exact else M.toarray()
    for i in n1:
        if any(dense[i, j] != 0 for j in n2):
            return False
        if len({dense[i, k] for k in b}) > 1:
            return False
    return True


def _ge(a: Any, b: Any) -> bool:
    if isinstance(a, Fraction) and isinstance(b, Fraction):
        return a >= b
    a, b = float(a), float(b)
    return a >= b - FLOAT_TOL * max(1.0, abs(a), abs(b))


def _eq(a: Any, b: Any) -> bool:
    return _ge(a, b) and _ge(b, a)


def _fmt(v: Any) -> str | float:
    return str(v) if isinstance(v, Fraction) else float(v)


def _problem_dict(problem: RankingProblem) -> dict:
    out: dict[str, Any] = {"objects": list(problem.objects)}
    if problem.n <= WITNESS_INLINE_LIMIT:
        out["matrix"] = [[_fmt(v) for v in row] for row in problem.to_dense()]
    return out


def _protected(axiom: Axiom, witness: BridgeWitness) -> tuple[str, ...]:
    if axiom is Axiom.BRIDGE_SET_INDEPENDENCE:
        return witness.first
    if axiom is Axiom.BRIDGE_SET_AUTONOMY:
        return witness.bridge + witness.second
    return witness.first + witness.bridge


def _edit_allowed(axiom: Axiom, witness: BridgeWitness, k: str, l: str) -> bool:
    if axiom is Axiom.BRIDGE_SET_AUTONOMY:
        return k in witness.first and l in witness.first
    return k not in witness.first and l not in witness.first


def _scores(problem: RankingProblem, method: str) -> ScoreVector:
    return score(derive(problem), method)


def check_axiom(
    axiom: Axiom | str,
    method: str,
    base_problem: RankingProblem,
    perturbation: PerturbationSpec,
) -> AxiomVerdict:
    """Check one axiom for one method on one instance.

    Size invariance takes a :class:`ClonePair` and requires equal scores.  The
    bridge axioms take a :class:`Perturbation`; the pairwise order of the
    protected objects must be the same before and after the edits.
    """
    axiom = Axiom(axiom)
    if method not in METHODS:
        raise ValidationError(f"unknown method {method!r}", module="axiomlab")

    if axiom is Axiom.SIZE_INVARIANCE:
        if not isinstance(perturbation, ClonePair):
            raise ValidationError("size invariance needs a ClonePair", module="axiomlab")
        i, j = perturbation.first, perturbation.second
        alpha = scaling_factor(base_problem, i, j)
        if alpha is None:
            raise ValidationError(f"{i} and {j} are not scaled copies", module="axiomlab")
        sv = _scores(base_problem, method)
        fi, fj = sv[i], sv[j]
        if _eq(fi, fj):
            return AxiomVerdict(axiom, method, True)
        witness = {
            "problem": _problem_dict(base_problem),
            "pair": [i, j],
            "alpha": _fmt(alpha),
            "scores": [_fmt(fi), _fmt(fj)],
        }
        return AxiomVerdict(axiom, method, False, witness=witness)

    if not isinstance(perturbation, Perturbation):
        raise ValidationError(f"{axiom.value} needs a Perturbation", module="axiomlab")
    witness = perturbation.witness
    if axiom is Axiom.BRIDGE_PLAYER_INDEPENDENCE and len(witness.bridge) != 1:
        raise ValidationError("bridge player independence needs a single bridge object", module="axiomlab")
    if not verify_bridge_witness(base_problem, witness):
        raise ValidationError("witness is not a bridge set of the base problem", module="axiomlab")
    for k, l in perturbation.edits:
        if not _edit_allowed(axiom, witness, k, l):
            raise ValidationError(f"edit of protected entry ({k}, {l}) under {axiom.value}", module="axiomlab")
    after = base_problem.with_entries(perturbation.edits)

    before_scores = _scores(base_problem, method)
    after_scores = _scores(after, method)
    for x, y in permutations(_protected(axiom, witness), 2):
        b = _ge(before_scores[x], before_scores[y])
        a = _ge(after_scores[x], after_scores[y])
        if a != b:
            report = {
                "before": _problem_dict(base_problem),
                "after": _problem_dict(after),
                "bridge": list(witness.bridge),
                "first": list(witness.first),
                "second": list(witness.second),
                "macrovertex": witness.macrovertex,
                "pair": [x, y],
                "scores_before": [_fmt(before_scores[x]), _fmt(before_scores[y])],
                "scores_after": [_fmt(after_scores[x]), _fmt(after_scores[y])],
            }
            return AxiomVerdict(axiom, method, False, witness=report)
    return AxiomVerdict(axiom, method, True)


# --- random instances -------------------------------------------------------


def _rand_int(rng: np.random.Generator, high: int, density: float = 0.7) -> int:
    return int(rng.integers(1, high + 1)) if rng.random() < density else 0


def _connected(dense: np.ndarray) -> bool:
    """Comparison graph is connected (scores of separate components are not comparable)."""
    return components(derive(RankingProblem(None, dense, exact=True))).count == 1


def random_clone_case(rng: np.random.Generator) -> tuple[RankingProblem, ClonePair]:
    """Random integer problem with a rational-scaled clone appended."""
    while True:
        n = int(rng.integers(2, 7))
        dense = exact_zeros((n, n))
        for i in range(n):
            for j in range(n):
                if i != j:
                    dense[i, j] = Fraction(_rand_int(rng, 9, 0.6))
        if not _connected(dense):
            continue
        keys = [f"X{i + 1}" for i in range(n)]
        base = RankingProblem(keys, dense, exact=True)
        target = keys[int(rng.integers(n))]
        alpha = Fraction(int(rng.integers(1, 6)), int(rng.integers(1, 6)))
        cloned = make_scaled_clone(base, target, alpha, key=f"X{n + 1}")
        return cloned, ClonePair(f"X{n + 1}", target)


def random_bridge_case(rng: np.random.Generator, axiom: Axiom | str) -> tuple[RankingProblem, Perturbation]:
    """Random integer problem with a valid bridge witness and allowed edits."""
    axiom = Axiom(axiom)
    while True:
        n1 = int(rng.integers(2, 4)) if axiom is not Axiom.BRIDGE_SET_AUTONOMY else int(rng.integers(1, 4))
        nb = 1 if axiom is Axiom.BRIDGE_PLAYER_INDEPENDENCE else int(rng.integers(1, 4))
        n2 = int(rng.integers(0, 4))
        if axiom is Axiom.BRIDGE_SET_AUTONOMY and nb + n2 < 2:
            n2 = 1
        n = n1 + nb + n2
        perm = rng.permutation(n)
        keys = [f"X{int(p) + 1}" for p in perm]
        first, bridge, second = keys[:n1], keys[n1:n1 + nb], keys[n1 + nb:]
        pos = {k: t for t, k in enumerate(keys)}
        dense = exact_zeros((n, n))

        def put(a: str, b: str, v: int) -> None:
            dense[pos[a], pos[b]] = Fraction(v)

        for a in first:
            for b in first:
                if a != b:
                    put(a, b, _rand_int(rng, 9, 0.6))
            total = int(rng.integers(0, 13))
            for k in bridge:
                win = int(rng.integers(0, total + 1))
                put(a, k, win)
                put(k, a, total - win)
        rest = bridge + second
        for a in rest:
            for b in rest:
                if a != b:
                    put(a, b, _rand_int(rng, 9, 0.6))
        if not _connected(dense):
            continue

        if axiom is Axiom.BRIDGE_SET_AUTONOMY:
            editable = [(a, b) for a in first for b in first if a != b]
        else:
            editable = [(a, b) for a in rest for b in rest if a != b]
        edits = {pair: Fraction(_rand_int(rng, 9, 0.6)) for pair in editable if rng.random() < 0.5}
        after = dense.copy()
        for (a, b), v in edits.items():
            after[pos[a], pos[b]] = v
        if not _connected(after):
            continue
        # problem order is X1..Xn so witnesses read naturally
        order = sorted(keys, key=lambda k: int(k[1:]))
        problem = RankingProblem(keys, dense, exact=True).reorder(order)
        witness = BridgeWitness(tuple(bridge), tuple(first), tuple(second))
        return problem, Perturbation(witness, edits)


def run_trials(
    axiom: Axiom | str, method: str, trials: int = 200, seed: int = 0
) -> AxiomVerdict:
    """Sample ``trials`` random instances and stop at the first violation."""
    axiom = Axiom(axiom)
    streams = np.random.SeedSequence(seed).spawn(trials)
    for t, ss in enumerate(streams, start=1):
        rng = np.random.default_rng(ss)
        if axiom is Axiom.SIZE_INVARIANCE:
            problem, case = random_clone_case(rng)
        else:
            problem, case = random_bridge_case(rng, axiom)
        verdict = check_axiom(axiom, method, problem, case)
        if not verdict.satisfied:
            witness = dict(verdict.witness or {}, trial=t, seed=seed)
            return AxiomVerdict(axiom, method, False, trials=t, witness=witness)
    return AxiomVerdict(axiom, method, True, trials=trials)


def published_witnesses() -> list[tuple[Axiom, RankingProblem, PerturbationSpec]]:
    """Counterexamples built on the five-object example.

    X2 is a 5/3-scaled copy of X1, and X3 is a bridge player between
    {X1, X2, X4} and {X5}; lowering a_35 to 3 or raising it to 10 flips the
    order of X3 and X4 under row sum and normalised row sum respectively.
    """
    base = load_five_object_example()
    player = BridgeWitness(("X3",), ("X1", "X2", "X4"), ("X5",))
    return [
        (Axiom.SIZE_INVARIANCE, base, ClonePair("X2", "X1")),
        (Axiom.BRIDGE_PLAYER_INDEPENDENCE, base, Perturbation(player, {("X3", "X5"): 3})),
        (Axiom.BRIDGE_PLAYER_INDEPENDENCE, base, Perturbation(player, {("X3", "X5"): 10})),
    ]


def verdict_grid(
    trials: int = 200, seed: int = 0, methods: Sequence[str] = METHODS
) -> dict[tuple[Axiom, str], AxiomVerdict]:
    """Axiom-by-method verdicts: published witnesses first, then random trials."""
    grid: dict[tuple[Axiom, str], AxiomVerdict] = {}
    known = published_witnesses()
    for axiom in Axiom:
        for method in methods:
            verdict = None
            for ax, problem, case in known:
                if ax is axiom:
                    v = check_axiom(ax, method, problem, case)
                    if not v.satisfied:
                        verdict = v
                        break
            if verdict is None:
                verdict = run_trials(axiom, method, trials=trials, seed=seed)
            grid[axiom, method] = verdict
    return grid


# satisfied (True) / violated (False) pattern of the published comparison
EXPECTED_GRID = {
    (Axiom.SIZE_INVARIANCE, ROW_SUM): False,
    (Axiom.SIZE_INVARIANCE, NORMALIZED_ROW_SUM): True,
    (Axiom.SIZE_INVARIANCE, LEAST_SQUARES): True,
    (Axiom.BRIDGE_SET_INDEPENDENCE, ROW_SUM): True,
    (Axiom.BRIDGE_SET_INDEPENDENCE, NORMALIZED_ROW_SUM): True,
    (Axiom.BRIDGE_SET_INDEPENDENCE, LEAST_SQUARES): True,
    (Axiom.BRIDGE_SET_AUTONOMY, ROW_SUM): True,
    (Axiom.BRIDGE_SET_AUTONOMY, NORMALIZED_ROW_SUM): True,
    (Axiom.BRIDGE_SET_AUTONOMY, LEAST_SQUARES): True,
    (Axiom.BRIDGE_PLAYER_INDEPENDENCE, ROW_SUM): False,
    (Axiom.BRIDGE_PLAYER_INDEPENDENCE, NORMALIZED_ROW_SUM): False,
    (Axiom.BRIDGE_PLAYER_INDEPENDENCE, LEAST_SQUARES): True,
}
