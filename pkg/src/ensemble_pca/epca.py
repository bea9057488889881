"""Ensemble PCA: bootstrapped PCA aggregated by k-means on reflected components.

The pipeline is

1. center the data globally,
2. draw ``B`` bootstrap bags of ``n`` rows,
3. fit PCA on every bag (each bag re-centered on its own mean),
4. stack every bag component together with its negation,
5. run k-means with ``2d`` clusters on the stack, pair antipodal clusters and
   keep one cluster per pair.

The kept clusters give the components (normalized centers), eigenvalue
samples and percentile confidence bands.
"""
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .evaluation import boxplot_stats
from .exceptions import InvalidBagSize, InvalidInput, InvalidRank
from .kmeans import kmeans
from .linalg import as_data_matrix, mean_center, orient
from .pca import _fit


def default_bag_size(N, d, noise_kind=None):
    """Bag size heuristic: all rows for dense or sparse noise, ~10% for outliers.

    Large bags average dense noise out; small bags make it likely that a bag
    contains no outlier row at all.
    """
    if noise_kind == "outliers":
        return min(N, max(2 * d + 1, math.ceil(0.1 * N)))
    return N


@dataclass(frozen=True)
class EpcaConfig:
    """Parameters for :func:`fit_epca`.

    ``bag_size=None`` means one bag row per data row (``n = N``).
    """

    n_bags: int = 100
    bag_size: int | None = None
    rank: int = 2
    seed: int = 0
    confidence: float = 0.95
    kmeans_n_init: int = 10
    kmeans_max_iter: int = 300
    kmeans_tol: float = 1e-6
    n_jobs: int = 1

    def validate(self, N=None):
        if self.n_bags < 2:
            raise InvalidInput(f"n_bags must be >= 2, got {self.n_bags}")
        if self.rank < 1:
            raise InvalidRank(f"rank must be >= 1, got {self.rank}")
        if not 0 < self.confidence < 1:
            raise InvalidInput(f"confidence must be in (0, 1), got {self.confidence}")
        if self.bag_size is not None:
            if self.bag_size < 2:
                raise InvalidBagSize(f"bag size must be >= 2, got {self.bag_size}")
            if N is not None and self.bag_size > N:
                raise InvalidBagSize(f"bag size {self.bag_size} exceeds N={N}")


@dataclass(frozen=True)
class StackedComponents:
    """Bag components followed by their reflections.

    Row ``i + B*d`` is ``-row i``; ``eigenvalues`` is aligned row for row.
    ``bag_index`` and ``component_index`` record where each row came from.
    """

    components: np.ndarray
    eigenvalues: np.ndarray
    bag_index: np.ndarray
    component_index: np.ndarray

    @property
    def n_bags(self):
        return int(self.bag_index.max()) + 1

    @property
    def half(self):
        return self.components.shape[0] // 2


@dataclass(frozen=True)
class EpcaDiagnostics:
    cluster_sizes: np.ndarray
    pairs: tuple
    pair_dots: np.ndarray
    selected_clusters: tuple
    inertia: float
    degenerate: bool
    warnings: tuple = ()


@dataclass(frozen=True)
class EpcaModel:
    """Aggregated ensemble.

    Arrays indexed by component are ordered by descending mean eigenvalue.
    ``ci_lower``/``ci_upper`` are coordinate-wise percentile bands over the
    member components of each kept cluster at level ``confidence``.
    """

    components: np.ndarray
    eigenvalue_samples: tuple
    eigenvalue_mean: np.ndarray
    eigenvalue_variance: np.ndarray
    ci_lower: np.ndarray
    ci_upper: np.ndarray
    component_variance: np.ndarray
    confidence: float
    diagnostics: EpcaDiagnostics
    mean: np.ndarray = field(default=None)

    @property
    def d(self):
        return self.components.shape[0]

    @property
    def ci_width(self):
        return self.ci_upper - self.ci_lower

    def eigenvalue_boxplots(self):
        """Boxplot statistics of each component's eigenvalue samples.

        Whiskers use the 1.5 IQR rule; samples beyond them are the gross
        outliers one would drop from a plot. The raw samples stay in
        ``eigenvalue_samples``.
        """
        return [boxplot_stats(s) for s in self.eigenvalue_samples]


def _bag_stream(seed, j):
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(j,)))


def draw_bags(N, n_bags, bag_size, seed=0):
    """Bootstrap row indices, shape ``(n_bags, bag_size)``.

    Bag ``j`` depends only on ``(seed, j)``. ``N`` may also be a data matrix,
    in which case its row count is used.
    """
    if not np.isscalar(N):
        N = np.asarray(N).shape[0]
    N = int(N)
    if N < 1:
        raise InvalidInput(f"need at least one row, got N={N}")
    if bag_size < 2:
        raise InvalidBagSize(f"bag size must be >= 2, got {bag_size}")
    if n_bags < 1:
        raise InvalidInput(f"n_bags must be >= 1, got {n_bags}")
    bags = np.empty((n_bags, bag_size), dtype=np.intp)
    for j in range(n_bags):
        bags[j] = _bag_stream(seed, j).integers(0, N, size=bag_size)
    return bags


def fit_bags(X, bags, d, n_jobs=1):
    """PCA on each bag of rows of ``X``.

    Returns a list of ``(components, eigenvalues)`` with shapes ``(d, m)``
    and ``(d,)``. Every bag is centered on its own mean.
    """
    X = as_data_matrix(X)
    bags = np.asarray(bags)
    n = bags.shape[1]
    if not 1 <= d <= min(n - 1, X.shape[1]):
        raise InvalidRank(f"rank d={d} infeasible for bag size {n} and m={X.shape[1]}")

    def one(idx):
        model = _fit(X[idx], d)
        return model.components, model.eigenvalues

    if n_jobs is None or n_jobs <= 1:
        return [one(idx) for idx in bags]
    with ThreadPoolExecutor(max_workers=n_jobs) as pool:
        return list(pool.map(one, bags))


def stack_with_reflections(bag_results):
    """Stack all bag components, then all their negations."""
    if len(bag_results) < 1:
        raise InvalidInput("need at least one bag result")
    P = np.vstack([np.atleast_2d(c) for c, _ in bag_results])
    lam = np.concatenate([np.atleast_1d(e) for _, e in bag_results])
    d = np.atleast_2d(bag_results[0][0]).shape[0]
    bag_index = np.repeat(np.arange(len(bag_results)), d)
    component_index = np.tile(np.arange(d), len(bag_results))
    return StackedComponents(
        components=np.vstack([P, -P]),
        eigenvalues=np.concatenate([lam, lam]),
        bag_index=np.concatenate([bag_index, bag_index]),
        component_index=np.concatenate([component_index, component_index]),
    )


def _pair_antipodal(centers, sizes):
    """Greedily pair each center with the most anti-aligned unused center.

    Centers are visited largest cluster first. Returns the pairs, their dot
    products and warnings for pairs that are not clearly antipodal.
    """
    k = centers.shape[0]
    norms = np.linalg.norm(centers, axis=1)
    unit = centers / np.where(norms > 0, norms, 1.0)[:, None]
    dots = unit @ unit.T
    order = sorted(range(k), key=lambda i: (-sizes[i], i))
    used = set()
    pairs, pair_dots, notes = [], [], []
    for i in order:
        if i in used:
            continue
        free = [j for j in range(k) if j != i and j not in used]
        if not free:
            notes.append(f"cluster {i} left without a partner")
            used.add(i)
            continue
        j = min(free, key=lambda j: (dots[i, j], j))
        best_any = min((jj for jj in range(k) if jj != i), key=lambda jj: (dots[i, jj], jj))
        if dots[i, j] > -0.5:
            notes.append(f"clusters {i} and {j} are weakly antipodal (dot {dots[i, j]:.3f})")
        elif best_any != j:
            notes.append(f"cluster {i}: best partner {best_any} already paired, used {j}")
        used.update((i, j))
        pairs.append((i, j))
        pair_dots.append(dots[i, j])
    return pairs, np.array(pair_dots), notes


def _percentile_band(members, confidence):
    tail = 100 * (1 - confidence) / 2
    # conservative order statistics: at least `confidence` of members lie inside
    lower = np.percentile(members, tail, axis=0, method="lower")
    upper = np.percentile(members, 100 - tail, axis=0, method="higher")
    return lower, upper


def aggregate(
    stacked,
    d,
    confidence=0.95,
    seed=0,
    n_init=10,
    max_iter=300,
    tol=1e-6,
    mean=None,
):
    """Cluster the stacked components into ``2d`` groups and summarize.

    From each antipodal pair of clusters the one whose normalized center has
    a positive largest-magnitude coordinate is kept; its members supply the
    eigenvalue samples and the confidence band.
    """
    P = stacked.components
    if 2 * d > P.shape[0]:
        raise InvalidRank(f"2d={2 * d} clusters requested from {P.shape[0]} stacked rows")
    clustering = kmeans(P, 2 * d, seed=seed, max_iter=max_iter, tol=tol, n_init=n_init)
    sizes = clustering.sizes
    pairs, pair_dots, notes = _pair_antipodal(clustering.centers, sizes)
    if len(pairs) < d:
        notes.append(f"only {len(pairs)} pairs formed for d={d}")

    kept = []
    for a, b in pairs:
        candidates = []
        for c in (a, b):
            center = clustering.centers[c]
            sign = 1.0 if np.array_equal(orient(center), center) else -1.0
            candidates.append((sign < 0, -sizes[c], c, sign))
        _, _, cluster, sign = min(candidates)
        kept.append((cluster, sign))

    summaries = []
    for cluster, sign in kept:
        members = sign * P[clustering.assignments == cluster]
        lam = stacked.eigenvalues[clustering.assignments == cluster]
        center = sign * clustering.centers[cluster]
        component = center / np.linalg.norm(center)
        lower, upper = _percentile_band(members, confidence)
        ddof = 1 if lam.size > 1 else 0
        summaries.append(
            dict(
                cluster=cluster,
                component=component,
                samples=lam.copy(),
                lam_mean=float(lam.mean()),
                lam_var=float(lam.var(ddof=ddof)),
                lower=lower,
                upper=upper,
                coord_var=members.var(axis=0, ddof=ddof),
            )
        )
    summaries.sort(key=lambda s: (-s["lam_mean"], s["cluster"]))
    summaries = summaries[:d]

    diagnostics = EpcaDiagnostics(
        cluster_sizes=sizes,
        pairs=tuple(pairs),
        pair_dots=pair_dots,
        selected_clusters=tuple(s["cluster"] for s in summaries),
        inertia=clustering.inertia,
        degenerate=clustering.degenerate,
        warnings=tuple(notes),
    )
    return EpcaModel(
        components=np.array([s["component"] for s in summaries]),
        eigenvalue_samples=tuple(s["samples"] for s in summaries),
        eigenvalue_mean=np.array([s["lam_mean"] for s in summaries]),
        eigenvalue_variance=np.array([s["lam_var"] for s in summaries]),
        ci_lower=np.array([s["lower"] for s in summaries]),
        ci_upper=np.array([s["upper"] for s in summaries]),
        component_variance=np.array([s["coord_var"] for s in summaries]),
        confidence=confidence,
        diagnostics=diagnostics,
        mean=mean,
    )


def fit_epca(X, config=None, **overrides):
    """Fit Ensemble PCA.

    Parameters
    ----------
    X : array-like (N, m)
    config : EpcaConfig, optional
        Keyword ``overrides`` replace individual fields, e.g.
        ``fit_epca(X, rank=3, seed=1)``.

    Returns
    -------
    EpcaModel
    """
    config = config or EpcaConfig()
    if overrides:
        config = EpcaConfig(**{**config.__dict__, **overrides})
    X = as_data_matrix(X)
    N = X.shape[0]
    config.validate(N)
    n = config.bag_size or N
    if n < 2:
        raise InvalidBagSize(f"bag size must be >= 2, got {n}")
    Xbar, mu = mean_center(X)
    bags = draw_bags(N, config.n_bags, n, seed=config.seed)
    results = fit_bags(Xbar, bags, config.rank, n_jobs=config.n_jobs)
    stacked = stack_with_reflections(results)
    kmeans_seed = np.random.SeedSequence([config.seed, 1]).generate_state(1)[0]
    return aggregate(
        stacked,
        config.rank,
        confidence=config.confidence,
        seed=int(kmeans_seed),
        n_init=config.kmeans_n_init,
        max_iter=config.kmeans_max_iter,
        tol=config.kmeans_tol,
        mean=mu,
    )
