"""Reference-point-based many-objective evolutionary optimizer (NSGA-III).

Real-coded, box-bounded genomes with simulated binary crossover and
polynomial mutation. Constraints are handled feasibility-first: any feasible
individual dominates any infeasible one, and among infeasible ones the
smaller violation wins. Everything random flows through one seeded generator
so equal seeds give bitwise-equal results.
"""

from dataclasses import dataclass, field
from concurrent.futures import ThreadPoolExecutor
from itertools import combinations
from math import comb

import numpy as np

from .errors import ConfigError, EvaluationError


@dataclass(frozen=True)
class EvolutionConfig:
    population_size: int = 91
    generations: int = 10
    crossover_probability: float = 1.0
    crossover_eta: float = 30.0
    mutation_probability: float = None  # default 1/n
    mutation_eta: float = 20.0
    rng_seed: int = 0

    def __post_init__(self):
        if self.population_size <= 0 or self.generations <= 0:
            raise ConfigError("population size and generations must be positive")


def generate_reference_points(n_objectives, divisions):
    """Das-Dennis simplex lattice: all points with coordinates j/p summing to 1."""
    if n_objectives < 2 or divisions < 1:
        raise ConfigError("need n_objectives >= 2 and divisions >= 1")
    m, p = n_objectives, divisions
    pts = np.empty((comb(p + m - 1, m - 1), m))
    for row, bars in enumerate(combinations(range(p + m - 1), m - 1)):
        prev = -1
        for j, bar in enumerate(bars):
            pts[row, j] = bar - prev - 1
            prev = bar
        pts[row, m - 1] = p + m - 2 - prev
    return pts / p


def divisions_for_population(pop_size, n_objectives):
    """Smallest p whose lattice has at least pop_size points."""
    p = 1
    while comb(p + n_objectives - 1, n_objectives - 1) < pop_size:
        p += 1
    return p


def _dominates(fa, ca, fb, cb):
    """Feasibility-first Pareto dominance for minimization."""
    if ca == 0.0 and cb > 0.0:
        return True
    if ca > 0.0 and cb == 0.0:
        return False
    if ca > 0.0 and cb > 0.0:
        return ca < cb
    return bool(np.all(fa <= fb) and np.any(fa < fb))


def fast_nondominated_sort(objectives, violations=None):
    """Partition indices into fronts; front 0 is the non-dominated set."""
    F = np.asarray(objectives, dtype=float)
    n = F.shape[0]
    if F.ndim != 2:
        raise ValueError("objectives must be a 2-D array")
    cv = np.zeros(n) if violations is None else np.asarray(violations, dtype=float)
    dominated_by = [[] for _ in range(n)]
    dom_count = np.zeros(n, dtype=int)
    for i in range(n):
        for j in range(i + 1, n):
            if _dominates(F[i], cv[i], F[j], cv[j]):
                dominated_by[i].append(j)
                dom_count[j] += 1
            elif _dominates(F[j], cv[j], F[i], cv[i]):
                dominated_by[j].append(i)
                dom_count[i] += 1
    fronts = []
    current = [i for i in range(n) if dom_count[i] == 0]
    while current:
        fronts.append(current)
        nxt = []
        for i in current:
            for j in dominated_by[i]:
                dom_count[j] -= 1
                if dom_count[j] == 0:
                    nxt.append(j)
        current = nxt
    return fronts


def sbx_crossover(parent_a, parent_b, eta, prob, bounds, rng):
    """Bounded simulated binary crossover; offspring stay inside the bounds."""
    lo, hi = bounds
    a = np.array(parent_a, dtype=float)
    b = np.array(parent_b, dtype=float)
    if rng.random() > prob:
        return a, b
    for i in range(a.size):
        if rng.random() > 0.5 or abs(a[i] - b[i]) < 1e-14:
            continue
        y1, y2 = (a[i], b[i]) if a[i] < b[i] else (b[i], a[i])
        span = y2 - y1
        u = rng.random()

        def child(beta):
            alpha = 2.0 - beta ** -(eta + 1.0)
            if u <= 1.0 / alpha:
                return (u * alpha) ** (1.0 / (eta + 1.0))
            return (1.0 / (2.0 - u * alpha)) ** (1.0 / (eta + 1.0))

        bq1 = child(1.0 + 2.0 * (y1 - lo[i]) / span)
        c1 = 0.5 * ((y1 + y2) - bq1 * span)
        bq2 = child(1.0 + 2.0 * (hi[i] - y2) / span)
        c2 = 0.5 * ((y1 + y2) + bq2 * span)
        c1 = min(max(c1, lo[i]), hi[i])
        c2 = min(max(c2, lo[i]), hi[i])
        if rng.random() <= 0.5:
            c1, c2 = c2, c1
        a[i], b[i] = c1, c2
    return a, b


def polynomial_mutation(genome, eta, prob, bounds, rng):
    """Bounded polynomial mutation; a gene at a bound can only move inward."""
    lo, hi = bounds
    g = np.array(genome, dtype=float)
    for i in range(g.size):
        if rng.random() > prob:
            continue
        y = g[i]
        span = hi[i] - lo[i]
        if span <= 0.0:
            continue
        d1 = (y - lo[i]) / span
        d2 = (hi[i] - y) / span
        u = rng.random()
        mpow = 1.0 / (eta + 1.0)
        if u <= 0.5:
            val = 2.0 * u + (1.0 - 2.0 * u) * (1.0 - d1) ** (eta + 1.0)
            dq = val**mpow - 1.0
        else:
            val = 2.0 * (1.0 - u) + 2.0 * (u - 0.5) * (1.0 - d2) ** (eta + 1.0)
            dq = 1.0 - val**mpow
        g[i] = min(max(y + dq * span, lo[i]), hi[i])
    return g


def _normalize(objectives, refs_dim):
    """NSGA-III normalization: ideal-point shift and ASF extreme intercepts.

    Falls back to per-objective maxima when the extreme-point hyperplane is
    degenerate.
    """
    F = objectives
    ideal = F.min(axis=0)
    Fp = F - ideal
    M = refs_dim
    weights = np.full((M, M), 1e-6) + np.eye(M)
    asf = np.max(Fp[:, None, :] / weights[None, :, :], axis=2)  # (n, M)
    extreme = Fp[np.argmin(asf, axis=0)]  # (M, M)
    intercepts = None
    try:
        plane = np.linalg.solve(extreme, np.ones(M))
        with np.errstate(divide="ignore", over="ignore"):
            cand = 1.0 / plane
        if np.all(np.isfinite(cand)) and np.all(cand > 1e-12):
            intercepts = cand
    except np.linalg.LinAlgError:
        pass
    if intercepts is None:
        intercepts = Fp.max(axis=0)
    intercepts = np.where(intercepts > 1e-12, intercepts, 1.0)
    return Fp / intercepts


def _associate(normalized, refs):
    """Nearest reference line per individual: (indices, perpendicular distances)."""
    dirs = refs / np.linalg.norm(refs, axis=1, keepdims=True)
    proj = normalized @ dirs.T  # (n, R)
    d2 = np.einsum("ij,ij->i", normalized, normalized)[:, None] - proj**2
    dist = np.sqrt(np.maximum(d2, 0.0))
    return dist.argmin(axis=1), dist.min(axis=1)


def environmental_selection(objectives, violations, refs, n_select, rng):
    """Deb-Jain survival: fill by fronts, niche the partial last front.

    Returns selected indices into the merged population.
    """
    F = np.asarray(objectives, dtype=float)
    cv = np.asarray(violations, dtype=float)
    if n_select > F.shape[0]:
        raise ConfigError("cannot select more individuals than provided")
    fronts = fast_nondominated_sort(F, cv)
    chosen = []
    last = []
    for front in fronts:
        if len(chosen) + len(front) <= n_select:
            chosen.extend(front)
            if len(chosen) == n_select:
                return chosen
        else:
            last = front
            break
    slots = n_select - len(chosen)

    pool = chosen + last
    normalized = _normalize(F[pool], F.shape[1])
    niche_of, dist = _associate(normalized, refs)
    niche_counts = np.zeros(len(refs), dtype=int)
    for local in range(len(chosen)):
        niche_counts[niche_of[local]] += 1
    # Candidates from the cut front, grouped by associated niche.
    by_niche = {}
    for local in range(len(chosen), len(pool)):
        by_niche.setdefault(niche_of[local], []).append(local)
    available = set(by_niche)
    selected = list(chosen)
    while slots > 0 and available:
        avail = sorted(available)
        counts = niche_counts[avail]
        minimal = [r for r, c in zip(avail, counts) if c == counts.min()]
        niche = minimal[rng.integers(len(minimal))] if len(minimal) > 1 else minimal[0]
        members = by_niche[niche]
        if niche_counts[niche] == 0:
            pick = min(members, key=lambda l: (dist[l], l))
        else:
            pick = members[rng.integers(len(members))]
        members.remove(pick)
        if not members:
            available.discard(niche)
        selected.append(pool[pick])
        niche_counts[niche] += 1
        slots -= 1
    return selected


def _tournament(pop_cv, pop_rank, rng):
    i, j = rng.integers(len(pop_rank)), rng.integers(len(pop_rank))
    key_i = (pop_cv[i] > 0, pop_cv[i], pop_rank[i])
    key_j = (pop_cv[j] > 0, pop_cv[j], pop_rank[j])
    if key_i < key_j:
        return i
    if key_j < key_i:
        return j
    return i if rng.random() < 0.5 else j


@dataclass
class OptimizationResult:
    genomes: np.ndarray  # final population (N, n)
    objectives: np.ndarray  # (N, M)
    violations: np.ndarray  # (N,)
    archive_genomes: np.ndarray  # feasible rank-0 front, canonical order
    archive_objectives: np.ndarray
    reference_points: np.ndarray
    history: list = field(default_factory=list)  # per-generation stats dicts


def _evaluate_all(evaluate, genomes, generation, jobs):
    def run(idx):
        try:
            return evaluate(genomes[idx])
        except Exception as exc:  # noqa: BLE001 - re-raised with context
            raise EvaluationError(
                f"evaluation failed at generation {generation}, individual {idx}: {exc}"
            ) from exc

    if jobs and jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(run, range(len(genomes))))
    else:
        results = [run(i) for i in range(len(genomes))]
    objs = np.array([r[0] for r in results], dtype=float)
    cvs = np.array([float(r[1]) for r in results])
    return objs, cvs


def optimize(evaluate, bounds, config, n_objectives=3, jobs=1, on_generation=None):
    """Run NSGA-III against an evaluation callback genome -> (objectives, violation).

    The callback must be deterministic per genome and safe to call
    concurrently on distinct genomes when jobs > 1.
    """
    lo, hi = (np.asarray(b, dtype=float) for b in bounds)
    n = lo.size
    N = config.population_size
    pm = config.mutation_probability if config.mutation_probability is not None else 1.0 / n
    rng = np.random.default_rng(config.rng_seed)
    refs = generate_reference_points(
        n_objectives, divisions_for_population(N, n_objectives)
    )

    genomes = lo + rng.random((N, n)) * (hi - lo)
    objs, cvs = _evaluate_all(evaluate, genomes, 0, jobs)
    history = []
    for gen in range(config.generations):
        fronts = fast_nondominated_sort(objs, cvs)
        rank = np.empty(N, dtype=int)
        for r, front in enumerate(fronts):
            rank[front] = r
        children = np.empty_like(genomes)
        i = 0
        while i < N:
            pa = genomes[_tournament(cvs, rank, rng)]
            pb = genomes[_tournament(cvs, rank, rng)]
            ca, cb = sbx_crossover(
                pa, pb, config.crossover_eta, config.crossover_probability, (lo, hi), rng
            )
            children[i] = polynomial_mutation(ca, config.mutation_eta, pm, (lo, hi), rng)
            if i + 1 < N:
                children[i + 1] = polynomial_mutation(cb, config.mutation_eta, pm, (lo, hi), rng)
            i += 2
        c_objs, c_cvs = _evaluate_all(evaluate, children, gen + 1, jobs)
        merged_g = np.vstack([genomes, children])
        merged_f = np.vstack([objs, c_objs])
        merged_cv = np.concatenate([cvs, c_cvs])
        keep = environmental_selection(merged_f, merged_cv, refs, N, rng)
        genomes, objs, cvs = merged_g[keep], merged_f[keep], merged_cv[keep]
        stats = _generation_stats(gen, objs, cvs)
        history.append(stats)
        if on_generation is not None:
            on_generation(stats)

    arch_g, arch_f = _final_archive(genomes, objs, cvs)
    return OptimizationResult(
        genomes=genomes,
        objectives=objs,
        violations=cvs,
        archive_genomes=arch_g,
        archive_objectives=arch_f,
        reference_points=refs,
        history=history,
    )


def _generation_stats(gen, objs, cvs):
    feasible = cvs == 0.0
    stats = {"generation": gen, "feasible": int(feasible.sum())}
    src = objs[feasible] if feasible.any() else objs
    for m in range(objs.shape[1]):
        stats[f"best_f{m}"] = float(src[:, m].min())
        stats[f"median_f{m}"] = float(np.median(src[:, m]))
    return stats


def _final_archive(genomes, objs, cvs):
    """Feasible rank-0 front in a canonical (objective-lexicographic) order."""
    feasible = np.where(cvs == 0.0)[0]
    if feasible.size == 0:
        return genomes[:0], objs[:0]
    fronts = fast_nondominated_sort(objs[feasible], cvs[feasible])
    idx = feasible[fronts[0]]
    order = np.lexsort(tuple(objs[idx][:, m] for m in reversed(range(objs.shape[1]))))
    idx = idx[order]
    return genomes[idx].copy(), objs[idx].copy()
