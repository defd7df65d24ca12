"""Supply-potential clustering and typical-period aggregation.

Raw renewable availability series are grouped by full-load hours into a
small number of supply clusters per technology. All scenario series are
then jointly compressed to a set of representative days (with weights and
a day-to-period assignment map) so the capacity-expansion problems stay
tractable while the original 365-day sequence remains available for
inter-period storage linkage.

Every stochastic step takes an explicit 64-bit seed; identical seeds give
bit-identical output.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

HOURS_PER_YEAR = 8760

GENERATOR_TECHNOLOGIES = ("onshore_wind", "offshore_wind", "solar_pv")
WIND_TECHNOLOGIES = ("onshore_wind", "offshore_wind")

DEFAULT_K_WIND = 10
DEFAULT_K_PV = 3

_KMEANS_MAX_ITER = 300


class AggregationError(ValueError):
    """Inputs cannot be clustered or aggregated as requested."""


def derive_seed(root: int, *tags: object) -> int:
    """Stable 64-bit sub-seed for a tagged work item under one root seed."""
    h = hashlib.sha256()
    h.update(str(int(root)).encode())
    for tag in tags:
        h.update(b"\x1f")
        h.update(str(tag).encode())
    return int.from_bytes(h.digest()[:8], "big")


@dataclass(frozen=True)
class RawPotential:
    """One un-clustered availability series with its capacity ceiling."""

    technology: str
    profile: np.ndarray
    ceiling_mw: float

    def __post_init__(self):
        if self.technology not in GENERATOR_TECHNOLOGIES:
            raise AggregationError(
                f"unknown generation technology {self.technology!r} "
                f"(known: {', '.join(GENERATOR_TECHNOLOGIES)})"
            )
        profile = np.asarray(self.profile, dtype=float)
        object.__setattr__(self, "profile", profile)
        if self.ceiling_mw < 0:
            raise AggregationError(f"capacity ceiling must be >= 0, got {self.ceiling_mw}")

    @property
    def full_load_hours(self) -> float:
        return float(self.profile.sum())


@dataclass(frozen=True)
class CapacityFactorCluster:
    """Ceiling-weighted mean availability of one group of potential sites."""

    technology: str
    cluster_index: int
    profile: np.ndarray
    capacity_ceiling_mw: float
    mean_flh: float

    def __post_init__(self):
        profile = np.asarray(self.profile, dtype=float)
        profile.setflags(write=False)
        object.__setattr__(self, "profile", profile)
        if profile.min(initial=0.0) < -1e-9 or profile.max(initial=0.0) > 1.0 + 1e-9:
            raise AggregationError(
                f"cluster profile for {self.technology} must stay within [0, 1]"
            )
        if self.capacity_ceiling_mw < 0:
            raise AggregationError("cluster ceiling must be >= 0")
        total = float(profile.sum())
        scale = max(abs(total), 1.0)
        if abs(total - self.mean_flh) > 1e-6 * scale:
            raise AggregationError(
                f"mean_flh {self.mean_flh} inconsistent with profile sum {total}"
            )

    @property
    def key(self) -> str:
        """Series key used in typical-period sets and LP variable names."""
        return f"cf.{self.technology}.{self.cluster_index}"


def _segment_costs(values: np.ndarray, counts: np.ndarray) -> np.ndarray:
    """Weighted within-segment SSE for every [i, j] range of sorted uniques."""
    m = len(values)
    w = np.concatenate(([0.0], np.cumsum(counts)))
    s = np.concatenate(([0.0], np.cumsum(counts * values)))
    q = np.concatenate(([0.0], np.cumsum(counts * values * values)))
    cost = np.full((m, m), np.inf)
    for i in range(m):
        ww = w[i + 1 :] - w[i]
        ss = s[i + 1 :] - s[i]
        qq = q[i + 1 :] - q[i]
        cost[i, i:] = qq - ss * ss / ww
    return cost


def _cluster_1d(values: np.ndarray, k: int) -> np.ndarray:
    """Optimal 1-D k-means labels via dynamic programming on sorted values.

    One-dimensional k-means clusters are contiguous in sorted order, so the
    optimum is found exactly by splitting the sorted unique values into at
    most k runs minimizing weighted SSE. Labels are 0-based in ascending
    value order.
    """
    values = np.asarray(values, dtype=float)
    uniques, inverse, counts = np.unique(values, return_inverse=True, return_counts=True)
    m = len(uniques)
    k_eff = min(k, m)
    if k_eff == m:
        return inverse
    cost = _segment_costs(uniques, counts.astype(float))
    # dp[t][j]: best cost of first j uniques in t clusters; split[t][j]: start of last run
    dp = np.full((k_eff + 1, m + 1), np.inf)
    split = np.zeros((k_eff + 1, m + 1), dtype=int)
    dp[0, 0] = 0.0
    for t in range(1, k_eff + 1):
        for j in range(t, m + 1):
            starts = np.arange(t - 1, j)
            cand = dp[t - 1, starts] + cost[starts, j - 1]
            best = int(np.argmin(cand))
            dp[t, j] = cand[best]
            split[t, j] = starts[best]
    bounds = []
    j = m
    for t in range(k_eff, 0, -1):
        i = split[t, j]
        bounds.append((i, j))
        j = i
    bounds.reverse()
    labels_unique = np.empty(m, dtype=int)
    for label, (i, j) in enumerate(bounds):
        labels_unique[i:j] = label
    return labels_unique[inverse]


def cluster_potentials(
    potentials: Sequence[RawPotential],
    k_wind: int = DEFAULT_K_WIND,
    k_pv: int = DEFAULT_K_PV,
) -> list[CapacityFactorCluster]:
    """Group availability series into per-technology supply clusters.

    Series are clustered by annual full-load hours, each wind technology
    into at most ``k_wind`` groups and open-field PV into at most ``k_pv``.
    A cluster's profile is the ceiling-weighted mean of its members and its
    ceiling the sum of member ceilings, so total potential is conserved
    exactly. Technologies without series simply yield no clusters.
    """
    if k_wind < 1 or k_pv < 1:
        raise AggregationError("cluster counts must be >= 1")
    lengths = {len(p.profile) for p in potentials}
    if len(lengths) > 1:
        raise AggregationError(f"potential series lengths differ: {sorted(lengths)}")
    for p in potentials:
        if not np.all(np.isfinite(p.profile)):
            raise AggregationError(f"{p.technology}: non-finite capacity factor")
        if p.profile.min(initial=0.0) < 0 or p.profile.max(initial=0.0) > 1.0:
            raise AggregationError(f"{p.technology}: capacity factors must lie in [0, 1]")

    clusters: list[CapacityFactorCluster] = []
    for tech in GENERATOR_TECHNOLOGIES:
        members = [p for p in potentials if p.technology == tech]
        if not members:
            continue
        k = k_pv if tech == "solar_pv" else k_wind
        flh = np.array([p.full_load_hours for p in members])
        labels = _cluster_1d(flh, k)
        for label in range(int(labels.max()) + 1):
            group = [m for m, lab in zip(members, labels) if lab == label]
            ceiling = float(sum(g.ceiling_mw for g in group))
            stack = np.vstack([g.profile for g in group])
            if ceiling > 0:
                weights = np.array([g.ceiling_mw for g in group]) / ceiling
                profile = weights @ stack
            else:
                profile = stack.mean(axis=0)
            profile = np.clip(profile, 0.0, 1.0)
            clusters.append(
                CapacityFactorCluster(
                    technology=tech,
                    cluster_index=label,
                    profile=profile,
                    capacity_ceiling_mw=ceiling,
                    mean_flh=float(profile.sum()),
                )
            )
    return clusters


@dataclass(frozen=True)
class TypicalPeriodSet:
    """A reduced year: typical periods, day weights, and the assignment map."""

    n_periods: int
    steps_per_period: int
    profiles: Mapping[str, np.ndarray]  # name -> (n_periods, steps)
    assignment: np.ndarray  # original day -> period index
    weights: np.ndarray  # days represented per period
    seed: int = 0
    representation: str = "centroid"

    def __post_init__(self):
        assignment = np.asarray(self.assignment, dtype=int)
        weights = np.asarray(self.weights, dtype=float)
        assignment.setflags(write=False)
        weights.setflags(write=False)
        object.__setattr__(self, "assignment", assignment)
        object.__setattr__(self, "weights", weights)
        frozen = {}
        for name, prof in self.profiles.items():
            arr = np.asarray(prof, dtype=float)
            if arr.shape != (self.n_periods, self.steps_per_period):
                raise AggregationError(
                    f"profile {name!r} has shape {arr.shape}, expected "
                    f"({self.n_periods}, {self.steps_per_period})"
                )
            arr.setflags(write=False)
            frozen[name] = arr
        object.__setattr__(self, "profiles", frozen)
        if weights.sum() != len(assignment):
            raise AggregationError("period weights must sum to the original day count")
        if assignment.min(initial=0) < 0 or assignment.max(initial=0) >= self.n_periods:
            raise AggregationError("assignment references an unknown period")

    @property
    def n_days(self) -> int:
        return len(self.assignment)

    def profile(self, name: str) -> np.ndarray:
        try:
            return self.profiles[name]
        except KeyError:
            raise KeyError(
                f"no reduced profile {name!r}; available: {sorted(self.profiles)}"
            ) from None

    def reconstruct(self, name: str) -> np.ndarray:
        """Re-expand one reduced series to the full original length."""
        return self.profile(name)[self.assignment].reshape(-1)

    def with_scaled_profile(self, name: str, factor: float) -> "TypicalPeriodSet":
        """Copy of this set with one series uniformly rescaled.

        Day clustering is invariant under uniform scaling of a series
        (features are z-normalized), so rescaling the reduced profile is
        exactly equivalent to re-aggregating the rescaled original.
        """
        profiles = dict(self.profiles)
        profiles[name] = profiles[name] * factor
        return TypicalPeriodSet(
            n_periods=self.n_periods,
            steps_per_period=self.steps_per_period,
            profiles=profiles,
            assignment=self.assignment,
            weights=self.weights,
            seed=self.seed,
            representation=self.representation,
        )


def _farthest_point_init(features: np.ndarray, k: int) -> np.ndarray:
    norms = np.einsum("ij,ij->i", features, features)
    first = int(np.argmax(norms))
    centers = [first]
    dist = np.sum((features - features[first]) ** 2, axis=1)
    for _ in range(1, k):
        nxt = int(np.argmax(dist))
        centers.append(nxt)
        dist = np.minimum(dist, np.sum((features - features[nxt]) ** 2, axis=1))
    return features[centers].copy()


def _kmeans_pp_init(features: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    n = len(features)
    first = int(rng.integers(n))
    centers = [first]
    dist = np.sum((features - features[first]) ** 2, axis=1)
    for _ in range(1, k):
        total = dist.sum()
        if total <= 0:
            nxt = int(rng.integers(n))
        else:
            nxt = int(rng.choice(n, p=dist / total))
        centers.append(nxt)
        dist = np.minimum(dist, np.sum((features - features[nxt]) ** 2, axis=1))
    return features[centers].copy()


def _lloyd(features: np.ndarray, centers: np.ndarray) -> tuple[np.ndarray, float]:
    """Plain Lloyd iterations; returns (labels, inertia).

    Empty clusters are re-seeded with the point farthest from its current
    center, keeping every run deterministic.
    """
    k = len(centers)
    labels = None
    for _ in range(_KMEANS_MAX_ITER):
        d2 = (
            np.einsum("ij,ij->i", features, features)[:, None]
            - 2.0 * features @ centers.T
            + np.einsum("ij,ij->i", centers, centers)[None, :]
        )
        new_labels = np.argmin(d2, axis=1)
        closest = d2[np.arange(len(features)), new_labels]
        counts = np.bincount(new_labels, minlength=k)
        if (counts == 0).any():
            order = np.argsort(-closest, kind="stable")
            cursor = 0
            for c in range(k):
                if counts[c] > 0:
                    continue
                while cursor < len(order):
                    donor = int(order[cursor])
                    cursor += 1
                    if counts[new_labels[donor]] > 1:
                        counts[new_labels[donor]] -= 1
                        new_labels[donor] = c
                        counts[c] = 1
                        closest[donor] = 0.0
                        break
        if labels is not None and np.array_equal(new_labels, labels):
            break
        labels = new_labels
        for c in range(k):
            centers[c] = features[labels == c].mean(axis=0)
    d2 = np.sum((features - centers[labels]) ** 2, axis=1)
    return labels, float(d2.sum())


def aggregate(
    series: Mapping[str, np.ndarray],
    n_periods: int,
    steps_per_period: int = 24,
    seed: int = 0,
    representation: str = "centroid",
    restarts: int = 10,
    keep_extremes: bool = False,
) -> TypicalPeriodSet:
    """Jointly compress all series to ``n_periods`` typical periods.

    Days are clustered by k-means on the z-normalized, concatenated day
    vectors of every series (best of ``restarts`` deterministic seeded
    initializations). Reduced profiles are per-cluster means of the
    original values ("centroid"), or a representative member day
    ("medoid"), then rescaled so each series keeps its annual mean.

    With ``keep_extremes`` the day with the highest and the day with the
    lowest daily total of each series are forced into singleton periods,
    which counts toward ``n_periods``.
    """
    if not series:
        raise AggregationError("no series to aggregate")
    if representation not in ("centroid", "medoid"):
        raise AggregationError(f"unknown representation {representation!r}")
    names = sorted(series)
    arrays = {}
    lengths = set()
    for name in names:
        arr = np.asarray(series[name], dtype=float)
        if arr.ndim != 1:
            raise AggregationError(f"series {name!r} must be one-dimensional")
        arrays[name] = arr
        lengths.add(len(arr))
    if len(lengths) != 1:
        raise AggregationError(f"series lengths differ: {sorted(lengths)}")
    (length,) = lengths
    if length % steps_per_period != 0:
        raise AggregationError(
            f"series length {length} is not divisible into periods of {steps_per_period} steps"
        )
    n_days = length // steps_per_period
    if not 1 <= n_periods <= n_days:
        raise AggregationError(
            f"n_periods must lie in [1, {n_days}] for this input, got {n_periods}"
        )

    day_blocks = {n: arrays[n].reshape(n_days, steps_per_period) for n in names}

    normalized = []
    for name in names:
        arr = arrays[name]
        std = arr.std()
        z = (arr - arr.mean()) / std if std > 1e-12 else np.zeros_like(arr)
        normalized.append(z.reshape(n_days, steps_per_period))
    features = np.hstack(normalized)

    forced: list[int] = []
    if keep_extremes:
        for name in names:
            sums = day_blocks[name].sum(axis=1)
            for idx in (int(np.argmax(sums)), int(np.argmin(sums))):
                if idx not in forced:
                    forced.append(idx)
        forced.sort()
        if n_periods <= len(forced):
            raise AggregationError(
                f"n_periods={n_periods} leaves no room for {len(forced)} extreme periods"
            )

    pool = np.array([d for d in range(n_days) if d not in forced], dtype=int)
    k_free = n_periods - len(forced)
    pool_features = features[pool]

    best: tuple[float, int, np.ndarray] | None = None
    if k_free >= len(pool):
        pool_labels = np.arange(len(pool))
        k_free = len(pool)
        best = (0.0, 0, pool_labels)
    else:
        for r in range(max(1, restarts)):
            if r == 0:
                centers = _farthest_point_init(pool_features, k_free)
            else:
                rng = np.random.default_rng(derive_seed(seed, "kmeans", r))
                centers = _kmeans_pp_init(pool_features, k_free, rng)
            labels, inertia = _lloyd(pool_features, centers.astype(float))
            if best is None or inertia < best[0] - 1e-12:
                best = (inertia, r, labels)
    pool_labels = best[2]

    # Canonical period order: first-occurrence day of each cluster, with
    # forced extreme days appended as singletons.
    assignment = np.empty(n_days, dtype=int)
    relabel: dict[int, int] = {}
    next_id = 0
    for pos, day in enumerate(pool):
        lab = int(pool_labels[pos])
        if lab not in relabel:
            relabel[lab] = next_id
            next_id += 1
        assignment[day] = relabel[lab]
    for day in forced:
        assignment[day] = next_id
        next_id += 1
    n_periods_actual = next_id

    weights = np.bincount(assignment, minlength=n_periods_actual).astype(float)

    profiles: dict[str, np.ndarray] = {}
    member_lists = [np.flatnonzero(assignment == p) for p in range(n_periods_actual)]
    medoid_days: list[int] = []
    if representation == "medoid":
        for members in member_lists:
            centroid = features[members].mean(axis=0)
            d2 = np.sum((features[members] - centroid) ** 2, axis=1)
            medoid_days.append(int(members[int(np.argmin(d2))]))
    for name in names:
        block = day_blocks[name]
        reduced = np.empty((n_periods_actual, steps_per_period))
        for p, members in enumerate(member_lists):
            if representation == "centroid":
                reduced[p] = block[members].mean(axis=0)
            else:
                reduced[p] = block[medoid_days[p]]
        # Preserve the annual mean; a near-unity factor is skipped so that
        # re-aggregating identical inputs stays bit-identical.
        original_mean = arrays[name].mean()
        reduced_mean = float((weights @ reduced.mean(axis=1)) / weights.sum())
        if abs(reduced_mean) > 1e-15 and abs(original_mean - reduced_mean) > 1e-12 * max(
            abs(original_mean), 1e-15
        ):
            reduced = reduced * (original_mean / reduced_mean)
        profiles[name] = reduced

    return TypicalPeriodSet(
        n_periods=n_periods_actual,
        steps_per_period=steps_per_period,
        profiles=profiles,
        assignment=assignment,
        weights=weights,
        seed=seed,
        representation=representation,
    )


def reconstruction_rms(periods: TypicalPeriodSet, name: str, original: np.ndarray) -> float:
    """RMS error over hours between the re-expanded and original series."""
    rebuilt = periods.reconstruct(name)
    original = np.asarray(original, dtype=float)
    return float(np.sqrt(np.mean((rebuilt - original) ** 2)))
