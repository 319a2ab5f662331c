"""Estimation quality metrics and run reports.

Per-property accuracy is root-mean-square error on the value coordinate;
set-level accuracy per depth is the optimal-subpattern-assignment distance.
A run report aggregates both over Monte Carlo trials.
"""
from __future__ import annotations

import csv
import itertools
import json
import math
from dataclasses import dataclass, asdict
from pathlib import Path
from typing import Sequence

import numpy as np
from scipy.optimize import linear_sum_assignment

from .filter import EstimateSeries
from .scenario import PROPERTIES, Scenario

__all__ = [
    "rmse",
    "ospa",
    "PropertyMetrics",
    "RunReport",
    "build_report",
    "compare_reports",
    "label_property_matching",
    "track_values_on_schedule",
    "report_to_dict",
    "write_report_json",
    "write_metrics_csv",
]

OSPA_CUTOFF = 20.0
OSPA_ORDER = 1.0


def rmse(truth: Sequence[float], estimate: Sequence[float]) -> float:
    """Root of the mean squared difference of two equally long sequences."""
    t = np.asarray(truth, dtype=float)
    e = np.asarray(estimate, dtype=float)
    if t.shape != e.shape or t.ndim != 1:
        raise ValueError(f"length mismatch: {t.shape} vs {e.shape}")
    if t.size == 0:
        raise ValueError("rmse needs at least one point")
    return float(np.sqrt(np.mean((t - e) ** 2)))


def ospa(
    x: Sequence[float],
    y: Sequence[float],
    cutoff: float = OSPA_CUTOFF,
    order: float = OSPA_ORDER,
) -> float:
    """Optimal-subpattern-assignment distance between two scalar sets.

    Pairs min(|X|,|Y|) elements optimally with per-pair distance capped at
    the cutoff, charges the cutoff for each unmatched element, and averages
    in the order-p norm over the larger set size.
    """
    if cutoff <= 0:
        raise ValueError("cutoff must be > 0")
    if order < 1:
        raise ValueError("order must be >= 1")
    xs = np.asarray(list(x), dtype=float)
    ys = np.asarray(list(y), dtype=float)
    n, m = xs.size, ys.size
    if n == 0 and m == 0:
        return 0.0
    if n == 0 or m == 0:
        return float(cutoff)
    d = np.minimum(np.abs(xs[:, None] - ys[None, :]), cutoff) ** order
    rows, cols = linear_sum_assignment(d)
    cost = float(d[rows, cols].sum())
    big = max(n, m)
    return float(((cutoff**order) * abs(n - m) + cost) ** (1.0 / order) / big ** (1.0 / order))


@dataclass(frozen=True)
class PropertyMetrics:
    rmse_estimate: float
    rmse_observation: float
    recovery_rate: float
    n_detections: int


@dataclass(frozen=True)
class RunReport:
    """Metrics of one primary trial plus a Monte Carlo summary."""

    site_name: str
    mode: str
    per_property: dict[str, PropertyMetrics]
    ospa_per_depth: tuple[float, ...]
    ospa_cutoff: float
    ospa_order: float
    mc_summary: dict[str, dict[str, float]]
    n_trials: int


def track_values_on_schedule(series: EstimateSeries, n_depths: int) -> dict:
    """Per-label value arrays aligned to the schedule (NaN where not alive)."""
    out = {}
    for track in series.tracks:
        vals = np.full(n_depths, np.nan)
        vals[track.steps - 1] = track.values
        out[track.label] = vals
    return out


def _match_labels(
    truth: np.ndarray, aligned: dict
) -> dict[str, object]:
    """Assign labels to property columns by minimal total value-RMSE.

    Considers every injection between the smaller and larger side, so the
    result is invariant to how labels are numbered.
    """
    labels = sorted(aligned)
    n_props = truth.shape[1]
    if not labels:
        return {}
    prop_idx = range(n_props)

    def pair_cost(lbl, p):
        vals = aligned[lbl]
        mask = ~np.isnan(vals)
        if not mask.any():
            return 0.0
        return rmse(truth[mask, p], vals[mask])

    best, best_cost = None, math.inf
    if len(labels) <= n_props:
        for props in itertools.permutations(prop_idx, len(labels)):
            cost = sum(pair_cost(l, p) for l, p in zip(labels, props))
            if cost < best_cost:
                best_cost, best = cost, dict(zip(props, labels))
    else:
        for subset in itertools.permutations(labels, n_props):
            cost = sum(pair_cost(l, p) for p, l in enumerate(subset))
            if cost < best_cost:
                best_cost, best = cost, dict(enumerate(subset))
    return {PROPERTIES[p]: lbl for p, lbl in best.items()}


def label_property_matching(scenario: Scenario, series: EstimateSeries) -> dict:
    """Which estimated label carries which property column.

    Independent-mode runs birth label (1, i) for property i by construction;
    joint-mode labels are matched by minimal total RMSE.
    """
    aligned = track_values_on_schedule(series, len(scenario.records))
    if scenario.mode == "independent":
        matching = {}
        for prop_i, prop in enumerate(PROPERTIES):
            for lbl in aligned:
                if lbl.index == prop_i:
                    matching[prop] = lbl
        return matching
    return _match_labels(scenario.truth_matrix(), aligned)


def _trial_metrics(scenario: Scenario, series: EstimateSeries) -> dict:
    truth = scenario.truth_matrix()
    n_depths = truth.shape[0]
    aligned = track_values_on_schedule(series, n_depths)
    matching = label_property_matching(scenario, series)

    per_property = {}
    for p_idx, prop in enumerate(PROPERTIES):
        det = scenario.detection_flags[:, p_idx]
        if det.any():
            rmse_obs = rmse(
                truth[det, p_idx], scenario.property_observations[det, p_idx]
            )
        else:
            rmse_obs = math.nan
        lbl = matching.get(prop)
        if lbl is None:
            rmse_est, recovery = math.nan, 0.0
        else:
            vals = aligned[lbl]
            mask = ~np.isnan(vals)
            rmse_est = rmse(truth[mask, p_idx], vals[mask]) if mask.any() else math.nan
            recovery = float(mask.mean())
        per_property[prop] = PropertyMetrics(
            rmse_estimate=rmse_est,
            rmse_observation=rmse_obs,
            recovery_rate=recovery,
            n_detections=int(det.sum()),
        )

    ospa_per_depth = []
    all_vals = list(aligned.values())
    for d in range(n_depths):
        est_set = [v[d] for v in all_vals if not np.isnan(v[d])]
        ospa_per_depth.append(ospa(truth[d, :], est_set, OSPA_CUTOFF, OSPA_ORDER))
    return {"per_property": per_property, "ospa_per_depth": tuple(ospa_per_depth)}


def build_report(
    scenario: Scenario,
    estimates: EstimateSeries,
    mc_runs: Sequence[tuple[Scenario, EstimateSeries]] = (),
) -> RunReport:
    """Report for one primary trial, with mc_summary over it plus mc_runs.

    In joint mode estimated labels are matched to property columns by the
    minimal-total-RMSE bijection before per-property metrics are computed.
    """
    if estimates is None or not estimates.tracks:
        raise ValueError("no estimates to report on")
    trials = [(scenario, estimates), *mc_runs]
    metrics = [_trial_metrics(s, e) for s, e in trials]

    samples: dict[str, list[float]] = {}
    for m in metrics:
        for prop, pm in m["per_property"].items():
            samples.setdefault(f"rmse_estimate_{prop}", []).append(pm.rmse_estimate)
            samples.setdefault(f"rmse_observation_{prop}", []).append(pm.rmse_observation)
            samples.setdefault(f"recovery_rate_{prop}", []).append(pm.recovery_rate)
        samples.setdefault("ospa_mean", []).append(
            float(np.mean(m["ospa_per_depth"])) if m["ospa_per_depth"] else math.nan
        )
    mc_summary = {}
    for key, vals in samples.items():
        finite = [v for v in vals if not math.isnan(v)]
        mc_summary[key] = {
            "mean": float(np.mean(finite)) if finite else math.nan,
            "std": float(np.std(finite)) if finite else math.nan,
        }

    primary = metrics[0]
    return RunReport(
        site_name=scenario.site_name,
        mode=scenario.mode,
        per_property=primary["per_property"],
        ospa_per_depth=primary["ospa_per_depth"],
        ospa_cutoff=OSPA_CUTOFF,
        ospa_order=OSPA_ORDER,
        mc_summary=mc_summary,
        n_trials=len(trials),
    )


def compare_reports(baseline: RunReport, other: RunReport) -> dict:
    """Cross-site accuracy comparison on mean estimate RMSE per property."""
    out = {
        "baseline_site": baseline.site_name,
        "other_site": other.site_name,
        "per_property": {},
    }
    for prop in PROPERTIES:
        base = baseline.mc_summary[f"rmse_estimate_{prop}"]["mean"]
        oth = other.mc_summary[f"rmse_estimate_{prop}"]["mean"]
        out["per_property"][prop] = {
            "baseline_mean_rmse": base,
            "other_mean_rmse": oth,
            "other_less_accurate": bool(oth >= base),
        }
    return out


def report_to_dict(report: RunReport) -> dict:
    doc = asdict(report)
    doc["per_property"] = {
        prop: asdict(pm) for prop, pm in report.per_property.items()
    }
    return doc


def write_report_json(report: RunReport, target, extra: dict | None = None) -> None:
    doc = report_to_dict(report)
    if extra:
        doc.update(extra)
    text = json.dumps(doc, indent=2, allow_nan=True, sort_keys=True)
    if isinstance(target, (str, Path)):
        Path(target).write_text(text + "\n", encoding="utf-8")
    else:
        target.write(text + "\n")


def write_metrics_csv(report: RunReport, target) -> None:
    """Flat metric table: one row per (property, metric)."""

    def rows():
        yield ("site", "property", "metric", "value", "mc_mean", "mc_std")
        for prop, pm in report.per_property.items():
            for metric in ("rmse_estimate", "rmse_observation", "recovery_rate"):
                summary = report.mc_summary[f"{metric}_{prop}"]
                yield (
                    report.site_name,
                    prop,
                    metric,
                    f"{getattr(pm, metric):.6g}",
                    f"{summary['mean']:.6g}",
                    f"{summary['std']:.6g}",
                )
        summary = report.mc_summary["ospa_mean"]
        mean_ospa = float(np.mean(report.ospa_per_depth)) if report.ospa_per_depth else math.nan
        yield (
            report.site_name,
            "all",
            "ospa_mean",
            f"{mean_ospa:.6g}",
            f"{summary['mean']:.6g}",
            f"{summary['std']:.6g}",
        )

    if isinstance(target, (str, Path)):
        with open(target, "w", newline="", encoding="utf-8") as fh:
            csv.writer(fh).writerows(rows())
    else:
        csv.writer(target).writerows(rows())
