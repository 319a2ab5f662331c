"""Joint prediction and update of labeled multi-Bernoulli densities.

One filter step maps the current density and a new scalar measurement set to
the next density over the enlarged label space (survivors plus births).  A
child hypothesis is one association map applied to one parent; its weight is
the parent weight times per-label survival/death, birth/not-born, and
detection factors, where an assigned measurement contributes its predicted
likelihood against the clutter intensity.  The exponentially many children
are truncated by Gibbs sampling or exact ranked assignment, pruned, capped,
and renormalized.

Trajectories are read out by maximum a posteriori: pick the most probable
cardinality, the best hypothesis of that cardinality, and follow its
association history backward.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .assignment import gibbs_solutions, ranked_solutions
from .errors import InfeasibleAssociationError, WeightCollapseError
from .gaussian import (
    GaussianMixture,
    MotionModel,
    SensorModel,
    mixture_log_likelihood,
    mixture_reduce,
    predict_mixture,
    transition_matrices,
    update_mixture,
)
from .lrfs import (
    DEAD,
    UNDETECTED,
    GlmbDensity,
    GlmbHypothesis,
    Label,
    best_hypothesis_with_cardinality,
    cardinality_distribution,
    empty_density,
    log_sum_weights,
)

__all__ = [
    "BirthEntry",
    "BirthModel",
    "AssociationMap",
    "TruncationConfig",
    "MixtureHygiene",
    "LogCostMatrix",
    "build_log_cost",
    "gibbs_assignments",
    "ranked_assignments",
    "joint_predict_update",
    "run_sequence",
    "extract_map_trajectories",
    "EstimateSeries",
    "TrackEstimate",
]

# Clutter intensity is floored at the smallest positive double so that
# zero-clutter configurations stay numerically defined: maps leaving a
# measurement unexplained then carry a ~ -708 log penalty and vanish.
_LOG_KAPPA_FLOOR = math.log(np.finfo(float).tiny)


@dataclass(frozen=True)
class BirthEntry:
    label: Label
    r_birth: float
    density: GaussianMixture

    def __post_init__(self):
        if not 0.0 <= self.r_birth <= 1.0:
            raise ValueError("r_birth must lie in [0, 1]")


@dataclass(frozen=True)
class BirthModel:
    """Bernoulli birth components injected at one step."""

    entries: tuple[BirthEntry, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "entries", tuple(self.entries))
        labels = [e.label for e in self.entries]
        if len(set(labels)) != len(labels):
            raise ValueError("birth labels must be distinct")

    def labels(self) -> tuple[Label, ...]:
        return tuple(e.label for e in self.entries)


EMPTY_BIRTH = BirthModel()


@dataclass(frozen=True)
class AssociationMap:
    """Outcome per label: DEAD (-1), UNDETECTED (0), or measurement index >= 1.

    Measurement indices are 1-based and used by at most one label.
    """

    assignment: tuple[tuple[Label, int], ...]

    def __post_init__(self):
        pairs = tuple(sorted(self.assignment))
        object.__setattr__(self, "assignment", pairs)
        labels = [lbl for lbl, _ in pairs]
        if len(set(labels)) != len(labels):
            raise ValueError("association map assigns a label twice")
        meas = [o for _, o in pairs if o >= 1]
        if len(set(meas)) != len(meas):
            raise ValueError("association map reuses a measurement index")

    @classmethod
    def from_dict(cls, assignment: Mapping[Label, int]) -> "AssociationMap":
        return cls(tuple(assignment.items()))

    def outcome(self, label: Label) -> int:
        for lbl, o in self.assignment:
            if lbl == label:
                return o
        raise KeyError(label)

    def assigned_measurements(self) -> set[int]:
        return {o for _, o in self.assignment if o >= 1}

    def key(self) -> tuple[tuple[Label, int], ...]:
        return self.assignment


@dataclass(frozen=True)
class TruncationConfig:
    """How the per-parent child space is truncated."""

    method: str = "gibbs"
    requested_hypotheses: int = 1000
    gibbs_iterations: int = 1000
    seed: int = 0
    min_weight: float = 1e-6
    max_hypotheses: int = 1000

    def __post_init__(self):
        if self.method not in ("gibbs", "ranked"):
            raise ValueError(f"unknown truncation method {self.method!r}")
        if self.requested_hypotheses < 1 or self.gibbs_iterations < 1:
            raise ValueError("requested_hypotheses and gibbs_iterations must be >= 1")
        if self.min_weight < 0:
            raise ValueError("min_weight must be >= 0")
        if self.max_hypotheses < 1:
            raise ValueError("max_hypotheses must be >= 1")


@dataclass(frozen=True)
class MixtureHygiene:
    """Per-label mixture reduction applied after each step."""

    prune_threshold: float = 1e-5
    merge_distance: float = 4.0
    max_components: int = 10

    def apply(self, mix: GaussianMixture) -> GaussianMixture:
        if len(mix) <= 1:
            return mix
        return mixture_reduce(
            mix, self.prune_threshold, self.merge_distance, self.max_components
        )


@dataclass(frozen=True)
class LogCostMatrix:
    """Per-label log factors for one parent hypothesis.

    Row order is sorted surviving labels then sorted birth labels; columns
    are [death/not-born, undetected, one per measurement].  The score of an
    association map is the sum of its selected entries.
    """

    values: np.ndarray
    labels: tuple[Label, ...]
    n_measurements: int

    def solution_to_map(self, solution: tuple[int, ...]) -> AssociationMap:
        pairs = []
        for lbl, col in zip(self.labels, solution):
            outcome = DEAD if col == 0 else UNDETECTED if col == 1 else col - 1
            pairs.append((lbl, outcome))
        return AssociationMap(tuple(pairs))


def _log(p: float) -> float:
    return math.log(p) if p > 0.0 else -math.inf


def _cost_rows(
    labels: Sequence[Label],
    mixtures: Sequence[GaussianMixture],
    alive_logp: Sequence[float],
    measurements: np.ndarray,
    sensor: SensorModel,
) -> np.ndarray:
    """Rows of the cost matrix for labels with 'alive' log-probabilities
    (log survival for existing labels, log birth probability for births)."""
    m = len(measurements)
    log_pd = _log(sensor.p_detect)
    log_qd = _log(1.0 - sensor.p_detect)
    log_kappa = max(sensor.log_clutter_intensity(), _LOG_KAPPA_FLOOR)
    rows = np.empty((len(labels), 2 + m))
    for i, (mix, la) in enumerate(zip(mixtures, alive_logp)):
        rows[i, 0] = _log1m_exp(la)
        rows[i, 1] = la + log_qd
        for j in range(m):
            rows[i, 2 + j] = (
                la + log_pd + mixture_log_likelihood(mix, float(measurements[j]), sensor)
                - log_kappa
            )
    return rows


def _log1m_exp(log_p: float) -> float:
    """log(1 - exp(log_p)) for log_p <= 0, stable near log_p = 0."""
    if log_p == -math.inf:
        return 0.0
    return _log(-math.expm1(log_p))


def build_log_cost(
    hypothesis: GlmbHypothesis,
    birth: BirthModel,
    measurements: Sequence[float],
    motion: MotionModel,
    sensor: SensorModel,
    delta: float,
) -> LogCostMatrix:
    """Association cost matrix for one parent hypothesis.

    Surviving labels' mixtures are predicted over the interval before the
    measurement likelihoods are evaluated; birth densities enter as given.
    """
    z = np.asarray(measurements, dtype=float)
    f, q = transition_matrices(motion, delta)
    surv_labels = list(hypothesis.label_set)
    surv_mix = [predict_mixture(hypothesis.densities[l], f, q) for l in surv_labels]
    birth_labels = sorted(birth.labels())
    by_label = {e.label: e for e in birth.entries}
    birth_mix = [by_label[l].density for l in birth_labels]

    labels = tuple(surv_labels + birth_labels)
    log_alive = [_log(motion.p_survival)] * len(surv_labels) + [
        _log(by_label[l].r_birth) for l in birth_labels
    ]
    values = _cost_rows(labels, surv_mix + birth_mix, log_alive, z, sensor)
    return LogCostMatrix(values=values, labels=labels, n_measurements=len(z))


def ranked_assignments(cost: LogCostMatrix, k: int) -> list[AssociationMap]:
    """The k highest-score association maps, exact and sorted."""
    sols = ranked_solutions(cost.values, k)
    return [cost.solution_to_map(sol) for sol, _ in sols]


def gibbs_assignments(cost: LogCostMatrix, trunc: TruncationConfig) -> list[AssociationMap]:
    """Distinct association maps visited by a seeded Gibbs sweep."""
    rng = np.random.default_rng(trunc.seed)
    sols = gibbs_solutions(cost.values, trunc.gibbs_iterations, rng)
    return [cost.solution_to_map(sol) for sol, _ in sols]


def _merge_equal_parents(
    hypotheses: tuple[GlmbHypothesis, ...]
) -> list[GlmbHypothesis]:
    """Merge hypotheses sharing an identity by weight addition (a no-op for
    densities produced by this module)."""
    seen: dict[tuple, int] = {}
    out: list[GlmbHypothesis] = []
    clean = True
    for h in hypotheses:
        idx = seen.get(h.identity())
        if idx is None:
            seen[h.identity()] = len(out)
            out.append(h)
        else:
            clean = False
            prev = out[idx]
            out[idx] = GlmbHypothesis(
                prev.label_set,
                prev.history,
                float(np.logaddexp(prev.log_weight, h.log_weight)),
                prev.densities,
            )
    return list(hypotheses) if clean and len(out) == len(hypotheses) else out


def _truncate(values: np.ndarray, trunc: TruncationConfig, rng_key) -> list[tuple[tuple[int, ...], float]]:
    if trunc.method == "ranked":
        try:
            return ranked_solutions(values, trunc.requested_hypotheses)
        except InfeasibleAssociationError:
            return []
    rng = np.random.default_rng(rng_key)
    try:
        sols = gibbs_solutions(values, trunc.gibbs_iterations, rng)
    except InfeasibleAssociationError:
        return []
    sols.sort(key=lambda item: (-item[1], item[0]))
    return sols[: trunc.requested_hypotheses]


def joint_predict_update(
    glmb: GlmbDensity,
    birth: BirthModel,
    measurements: Sequence[float],
    motion: MotionModel,
    sensor: SensorModel,
    delta: float,
    trunc: TruncationConfig,
    hygiene: MixtureHygiene = MixtureHygiene(),
) -> GlmbDensity:
    """One filter step: predict over the interval and absorb the measurements.

    Returns a normalized density at step + 1 whose hypotheses carry the
    extended association histories.  Parent hypotheses are processed in
    stored order and children with equal (label set, history) identities are
    merged by weight addition, so the result does not depend on scheduling.
    """
    if not glmb.hypotheses:
        raise WeightCollapseError("cannot step a density with no hypotheses")
    z = np.asarray(measurements, dtype=float)
    next_step = glmb.step + 1
    for entry in birth.entries:
        if entry.label.birth_step != next_step:
            raise ValueError(
                f"birth label {entry.label} does not carry birth step {next_step}"
            )

    f, q = transition_matrices(motion, delta)
    log_pd = _log(sensor.p_detect)
    log_qd = _log(1.0 - sensor.p_detect)
    log_ps = _log(motion.p_survival)
    log_kappa = max(sensor.log_clutter_intensity(), _LOG_KAPPA_FLOOR)

    birth_labels = sorted(birth.labels())
    birth_by_label = {e.label: e for e in birth.entries}

    # Single-object work shared across parents: mixtures reappear in many
    # hypotheses (same object identity), so prediction, per-measurement
    # likelihoods, and posteriors are computed once per distinct mixture.
    pred_cache: dict[int, tuple[GaussianMixture, np.ndarray]] = {}
    upd_cache: dict[tuple[int, int], GaussianMixture] = {}

    def predicted(mix: GaussianMixture, is_birth: bool) -> tuple[GaussianMixture, np.ndarray]:
        key = id(mix)
        hit = pred_cache.get(key)
        if hit is None:
            pm = mix if is_birth else hygiene.apply(predict_mixture(mix, f, q))
            liks = np.array(
                [mixture_log_likelihood(pm, float(zj), sensor) for zj in z]
            )
            hit = (pm, liks)
            pred_cache[key] = hit
        return hit

    def posterior(pm: GaussianMixture, j: int) -> GaussianMixture:
        key = (id(pm), j)
        mix = upd_cache.get(key)
        if mix is None:
            mix, _ = update_mixture(pm, float(z[j]), sensor)
            mix = hygiene.apply(mix)
            upd_cache[key] = mix
        return mix

    # Hypotheses with equal (label set, history) identity can only appear as
    # duplicate solutions under one parent (distinct parents always carry
    # distinct histories), so merging needs no history hashing.  Parents are
    # still pre-merged defensively for hand-built densities.
    parents = _merge_equal_parents(glmb.hypotheses)

    parent_rows: list[tuple[list[Label], list[GaussianMixture], bool]] = []
    children: list[list] = []  # [parent index, solution, log weight]
    guard: dict[tuple[int, tuple[int, ...]], int] = {}
    for p_idx, parent in enumerate(parents):
        surv = list(parent.label_set)
        rows = surv + birth_labels
        n = len(rows)
        values = np.empty((n, 2 + len(z)))
        row_pred: list[GaussianMixture] = []
        for i, lbl in enumerate(rows):
            if i < len(surv):
                pm, liks = predicted(parent.densities[lbl], is_birth=False)
                la = log_ps
            else:
                pm, liks = predicted(birth_by_label[lbl].density, is_birth=True)
                la = _log(birth_by_label[lbl].r_birth)
            row_pred.append(pm)
            values[i, 0] = _log1m_exp(la)
            values[i, 1] = la + log_qd
            values[i, 2:] = la + log_pd + liks - log_kappa
        presorted = all(rows[i] <= rows[i + 1] for i in range(n - 1))
        parent_rows.append((rows, row_pred, presorted))

        for solution, score in _truncate(values, trunc, (trunc.seed, glmb.step, p_idx)):
            key = (p_idx, solution)
            slot = guard.get(key)
            if slot is None:
                guard[key] = len(children)
                children.append([p_idx, solution, parent.log_weight + score])
            else:
                children[slot][2] = np.logaddexp(
                    children[slot][2], parent.log_weight + score
                )

    if not children:
        raise InfeasibleAssociationError(
            "truncation produced no valid association map; "
            "check clutter rate, detection and survival probabilities"
        )

    logw = np.array([c[2] for c in children])
    norm = logw - log_sum_weights(logw)
    keep = np.nonzero(np.exp(norm) >= trunc.min_weight)[0]
    if keep.size == 0:
        keep = np.array([int(np.argmax(norm))])
    order = keep[np.argsort(-norm[keep], kind="stable")][: trunc.max_hypotheses]
    final_logw = norm[order] - log_sum_weights(norm[order])

    hyps = []
    for child_idx, child_logw in zip(order, final_logw):
        p_idx, solution, _ = children[child_idx]
        parent = parents[p_idx]
        rows, row_pred, presorted = parent_rows[p_idx]
        alive: list[Label] = []
        densities: dict[Label, GaussianMixture] = {}
        step_entry = []
        for i, lbl in enumerate(rows):
            col = solution[i]
            if col == 0:
                step_entry.append((lbl, DEAD))
                continue
            alive.append(lbl)
            if col == 1:
                step_entry.append((lbl, UNDETECTED))
                densities[lbl] = row_pred[i]
            else:
                step_entry.append((lbl, col - 1))
                densities[lbl] = posterior(row_pred[i], col - 2)
        if not presorted:
            step_entry.sort()
        hyps.append(
            GlmbHypothesis(
                label_set=tuple(alive),
                history=parent.history + (tuple(step_entry),),
                log_weight=float(child_logw),
                densities=densities,
            )
        )
    return GlmbDensity(tuple(hyps), step=next_step)


def run_sequence(
    deltas: Sequence[float],
    measurement_sets: Sequence[Sequence[float]],
    birth: BirthModel,
    motion: MotionModel,
    sensor: SensorModel,
    trunc: TruncationConfig,
    hygiene: MixtureHygiene = MixtureHygiene(),
    extra_births: Mapping[int, BirthModel] | None = None,
) -> list[GlmbDensity]:
    """Filter a whole depth schedule; births enter at step 1 by default.

    Returns one normalized density per step (steps are 1-based; the initial
    'nothing exists' density is not included).
    """
    if len(deltas) != len(measurement_sets):
        raise ValueError("need one interval per measurement set")
    density = empty_density(step=0)
    out = []
    for k, (delta, zs) in enumerate(zip(deltas, measurement_sets), start=1):
        if k == 1:
            step_birth = birth
        elif extra_births and k in extra_births:
            step_birth = extra_births[k]
        else:
            step_birth = EMPTY_BIRTH
        density = joint_predict_update(
            density, step_birth, zs, motion, sensor, delta, trunc, hygiene
        )
        out.append(density)
    return out


@dataclass(frozen=True)
class TrackEstimate:
    """Per-depth state readout for one label along the MAP hypothesis."""

    label: Label
    steps: np.ndarray
    depths: np.ndarray
    values: np.ndarray
    rates: np.ndarray
    variances: np.ndarray


@dataclass(frozen=True)
class EstimateSeries:
    """MAP trajectory readout plus run metrics."""

    depths: np.ndarray
    tracks: tuple[TrackEstimate, ...]
    map_cardinality: int
    map_log_weight: float
    hypothesis_counts: tuple[int, ...]

    def track(self, label: Label) -> TrackEstimate:
        for t in self.tracks:
            if t.label == label:
                return t
        raise KeyError(label)


def extract_map_trajectories(
    history: Sequence[GlmbDensity], schedule: Sequence[float]
) -> EstimateSeries:
    """Maximum a posteriori trajectory readout over a filtered run.

    Picks the most probable cardinality at the final step (smallest count on
    ties), the best hypothesis of that cardinality, and follows its history
    prefix backward to the per-label mixtures at every earlier step.  Each
    label reports the mean and variance of the value coordinate of its
    highest-weight component at every depth where it is alive, so gaps left
    by missed detections are filled by the predicted density.
    """
    history = list(history)
    if not history:
        raise ValueError("empty filter history")
    if len(history) != len(schedule):
        raise ValueError("need exactly one density per scheduled depth")

    final = history[-1]
    rho = cardinality_distribution(final)
    n_star = int(np.argmax(rho))
    chosen = best_hypothesis_with_cardinality(final, n_star)

    per_label: dict[Label, list[tuple[int, float, float, float, float]]] = {}
    for t, density in enumerate(history):
        prefix = chosen.history[: t + 1]
        ancestor = None
        for h in density.hypotheses:
            if h.history == prefix:
                ancestor = h
                break
        if ancestor is None:
            raise ValueError(
                f"history prefix of the MAP hypothesis missing at step {t + 1}; "
                "densities were not produced by one filter run"
            )
        for lbl in ancestor.label_set:
            comp = ancestor.densities[lbl].dominant()
            per_label.setdefault(lbl, []).append(
                (
                    t + 1,
                    float(schedule[t]),
                    float(comp.mean[0]),
                    float(comp.mean[1]),
                    float(comp.covariance[0, 0]),
                )
            )

    tracks = []
    for lbl in sorted(per_label):
        rows = per_label[lbl]
        steps, depths, values, rates, variances = (np.array(col) for col in zip(*rows))
        tracks.append(
            TrackEstimate(
                label=lbl,
                steps=steps.astype(int),
                depths=depths,
                values=values,
                rates=rates,
                variances=variances,
            )
        )
    return EstimateSeries(
        depths=np.asarray(schedule, dtype=float),
        tracks=tuple(tracks),
        map_cardinality=n_star,
        map_log_weight=chosen.log_weight,
        hypothesis_counts=tuple(len(d.hypotheses) for d in history),
    )
