"""Shared builders and independent oracles for the test suite.

The oracles here deliberately avoid the library's own code paths: the
single-object filter uses raw matrix formulas, and the multi-object
enumeration oracle computes hypothesis weights as plain float products over
explicitly enumerated association maps.
"""
import itertools
import math

import numpy as np

from geoglmb.filter import BirthEntry, BirthModel
from geoglmb.gaussian import GaussianComponent, GaussianMixture, single_gaussian
from geoglmb.lrfs import DEAD, UNDETECTED, GlmbDensity, GlmbHypothesis, Label


def make_mixture(rng, n_components=1, dim_scale=1.0):
    comps = []
    weights = rng.dirichlet(np.ones(n_components))
    for w in weights:
        mean = rng.normal(0.0, 10.0 * dim_scale, size=2)
        a = rng.normal(0.0, dim_scale, size=(2, 2))
        cov = a @ a.T + 0.5 * np.eye(2)
        comps.append(GaussianComponent(float(w), mean, cov))
    return GaussianMixture(tuple(comps))


def make_density(rng, n_hypotheses=5, max_labels=3, step=1):
    """Random normalized density with distinct (label_set, history) pairs."""
    hyps = []
    for h in range(n_hypotheses):
        n_labels = int(rng.integers(0, max_labels + 1))
        labels = tuple(Label(1, i) for i in range(n_labels))
        densities = {lbl: make_mixture(rng) for lbl in labels}
        history = ((Label(0, h), UNDETECTED),)  # distinct identities per h
        hyps.append(
            GlmbHypothesis(
                label_set=labels,
                history=(history,),
                log_weight=float(rng.normal(0.0, 2.0)),
                densities=densities,
            )
        )
    logw = np.array([h.log_weight for h in hyps])
    shift = logw.max()
    total = shift + np.log(np.exp(logw - shift).sum())
    hyps = [
        GlmbHypothesis(h.label_set, h.history, h.log_weight - total, h.densities)
        for h in hyps
    ]
    return GlmbDensity(tuple(hyps), step=step)


# ---------------------------------------------------------------------------
# Independent single-object Kalman filter oracle (plain matrix formulas).


def kf_oracle(prior_mean, prior_cov, deltas, measurements, sigma_p, sigma_m):
    """Means/covariances of a standalone Kalman filter over a depth schedule.

    Births carry the prior at the first depth, so step 1 is update-only;
    later steps predict over the interval and update.  A measurement of None
    skips the update (prediction only).
    """
    h = np.array([[1.0, 0.0]])
    r = sigma_m**2
    means, covs = [], []
    mean = np.asarray(prior_mean, dtype=float).copy()
    cov = np.asarray(prior_cov, dtype=float).copy()
    for k, (delta, z) in enumerate(zip(deltas, measurements), start=1):
        if k > 1:
            f = np.array([[1.0, delta], [0.0, 1.0]])
            q = sigma_p**2 * np.array(
                [
                    [delta**4 / 4.0, delta**3 / 2.0],
                    [delta**3 / 2.0, delta**2],
                ]
            )
            mean = f @ mean
            cov = f @ cov @ f.T + q
        if z is not None:
            s = float((h @ cov @ h.T).item()) + r
            k_gain = cov @ h.T / s
            mean = mean + (k_gain * (z - float((h @ mean).item()))).ravel()
            joseph = np.eye(2) - k_gain @ h
            cov = joseph @ cov @ joseph.T + k_gain @ k_gain.T * r
        means.append(mean.copy())
        covs.append(cov.copy())
    return means, covs


# ---------------------------------------------------------------------------
# Independent multi-object enumeration oracle.


def _norm_pdf(x, mean, var):
    return math.exp(-0.5 * (x - mean) ** 2 / var) / math.sqrt(2.0 * math.pi * var)


def _oracle_predict(track, delta, sigma_p):
    mean, cov = track
    f = np.array([[1.0, delta], [0.0, 1.0]])
    q = sigma_p**2 * np.array(
        [[delta**4 / 4.0, delta**3 / 2.0], [delta**3 / 2.0, delta**2]]
    )
    return f @ mean, f @ cov @ f.T + q


def _oracle_update(track, z, sigma_m):
    mean, cov = track
    s = cov[0, 0] + sigma_m**2
    lik = _norm_pdf(z, mean[0], s)
    k = cov[:, 0] / s
    new_mean = mean + k * (z - mean[0])
    joseph = np.eye(2) - np.outer(k, [1.0, 0.0])
    new_cov = joseph @ cov @ joseph.T + np.outer(k, k) * sigma_m**2
    return (new_mean, new_cov), lik


def enumeration_oracle(
    birth_entries,
    measurement_sets,
    deltas,
    p_survival,
    p_detect,
    clutter_rate,
    clutter_region,
    sigma_p,
    sigma_m,
):
    """Exhaustive multi-step posterior: weights as raw per-map products.

    Hypotheses are dicts keyed like the library's identities: the label set
    and the per-step sorted (label, outcome) tuples.  An assigned measurement
    contributes p_detect times its likelihood, an unassigned one contributes
    the clutter intensity, so no ratio form is involved anywhere.
    """
    kappa = clutter_rate / (clutter_region[1] - clutter_region[0])
    birth_by_label = {e.label: e for e in birth_entries}
    birth_labels = sorted(birth_by_label)

    # hypothesis: (weight, history, {label: (mean, cov)})
    hypotheses = [(1.0, (), {})]
    for step_idx, (delta, zs) in enumerate(zip(deltas, measurement_sets)):
        step = step_idx + 1
        births = birth_labels if step == 1 else []
        new_hypotheses = []
        for weight, history, tracks in hypotheses:
            survivors = sorted(tracks)
            rows = survivors + list(births)
            predicted = {}
            for lbl in survivors:
                predicted[lbl] = _oracle_predict(tracks[lbl], delta, sigma_p)
            for lbl in births:
                entry = birth_by_label[lbl]
                comp = entry.density.components[0]
                predicted[lbl] = (comp.mean.copy(), comp.covariance.copy())

            outcome_space = [DEAD, UNDETECTED] + list(range(1, len(zs) + 1))
            for combo in itertools.product(outcome_space, repeat=len(rows)):
                meas = [o for o in combo if o >= 1]
                if len(set(meas)) != len(meas):
                    continue
                w = weight
                new_tracks = {}
                for lbl, outcome in zip(rows, combo):
                    alive_p = (
                        p_survival if lbl in tracks else birth_by_label[lbl].r_birth
                    )
                    if outcome == DEAD:
                        w *= 1.0 - alive_p
                        continue
                    if outcome == UNDETECTED:
                        w *= alive_p * (1.0 - p_detect)
                        new_tracks[lbl] = predicted[lbl]
                    else:
                        post, lik = _oracle_update(
                            predicted[lbl], zs[outcome - 1], sigma_m
                        )
                        w *= alive_p * p_detect * lik
                        new_tracks[lbl] = post
                for j in range(1, len(zs) + 1):
                    if j not in combo:
                        w *= kappa
                entry = tuple(sorted(zip(rows, combo)))
                new_hypotheses.append((w, history + (entry,), new_tracks))
        hypotheses = new_hypotheses

    total = math.fsum(w for w, _, _ in hypotheses)
    out = {}
    for w, history, tracks in hypotheses:
        if w == 0.0:
            continue  # impossible associations are not children
        key = (tuple(sorted(tracks)), history)
        out[key] = out.get(key, 0.0) + w / total
    return out


def simple_birth(labels_means, r_birth=0.9, cov=None):
    cov = np.diag([25.0, 1.0]) if cov is None else cov
    entries = tuple(
        BirthEntry(label=lbl, r_birth=r_birth, density=single_gaussian(mean, cov))
        for lbl, mean in labels_means
    )
    return BirthModel(entries)
