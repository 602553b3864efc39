"""Pareto-archive post-processing: OLS regression of joint load on gait
parameters with per-variable significance tests, dominance filtering, and
protocol comparison.

The t-distribution CDF is computed internally via the regularized incomplete
beta function so the package has no statistics dependency.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, InsufficientDataError
from .nsga3 import fast_nondominated_sort

SIGNIFICANCE_LEVEL = 0.05
CONDITION_LIMIT = 1e10


# --- minimal special functions -------------------------------------------------

def _betacf(a, b, x):
    # Continued-fraction expansion (modified Lentz); converges fast for
    # x < (a+1)/(a+b+2), the only regime we call it in.
    max_iter, eps, fpmin = 300, 3e-16, 1e-300
    qab, qap, qam = a + b, a + 1.0, a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < fpmin:
        d = fpmin
    d = 1.0 / d
    h = d
    for m in range(1, max_iter + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < fpmin:
            d = fpmin
        c = 1.0 + aa / c
        if abs(c) < fpmin:
            c = fpmin
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < fpmin:
            d = fpmin
        c = 1.0 + aa / c
        if abs(c) < fpmin:
            c = fpmin
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < eps:
            return h
    return h


def regularized_incomplete_beta(a, b, x):
    """I_x(a, b) for a, b > 0 and x in [0, 1]."""
    if x <= 0.0:
        return 0.0
    if x >= 1.0:
        return 1.0
    ln_bt = (
        math.lgamma(a + b)
        - math.lgamma(a)
        - math.lgamma(b)
        + a * math.log(x)
        + b * math.log1p(-x)
    )
    bt = math.exp(ln_bt)
    if x < (a + 1.0) / (a + b + 2.0):
        return bt * _betacf(a, b, x) / a
    return 1.0 - bt * _betacf(b, a, 1.0 - x) / b


def t_test_p_value(t_stat, dof):
    """Two-sided p-value of a t statistic."""
    if dof <= 0:
        return float("nan")
    t2 = float(t_stat) * float(t_stat)
    return regularized_incomplete_beta(dof / 2.0, 0.5, dof / (dof + t2))


# --- ordinary least squares ----------------------------------------------------

@dataclass
class VariableResult:
    name: str
    group: str
    coef: float
    stderr: float
    t_stat: float
    p_value: float
    significant: bool
    standardized_coef: float
    aliased: bool = False


@dataclass
class RegressionReport:
    variables: list
    intercept: float
    r_squared: float
    n_observations: int
    dof: int
    degenerate: bool = False
    notes: list = field(default_factory=list)

    def to_dict(self):
        return {
            "intercept": self.intercept,
            "r_squared": self.r_squared,
            "n_observations": self.n_observations,
            "dof": self.dof,
            "degenerate": self.degenerate,
            "notes": list(self.notes),
            "significance_level": SIGNIFICANCE_LEVEL,
            "variables": [vars(v) for v in self.variables],
        }

    def to_text(self):
        lines = [
            f"OLS of joint load on gait parameters "
            f"(n={self.n_observations}, dof={self.dof}, R^2={self.r_squared:.4f})",
            f"{'variable':<16}{'group':<14}{'B':>12}{'std B':>12}{'SE':>12}"
            f"{'t':>10}{'p':>12}  sig",
        ]
        for v in self.variables:
            if v.aliased:
                lines.append(f"{v.name:<16}{v.group:<14}{'(aliased)':>12}")
                continue
            mark = "*" if v.significant else ""
            lines.append(
                f"{v.name:<16}{v.group:<14}{v.coef:>12.4f}{v.standardized_coef:>12.4f}"
                f"{v.stderr:>12.4f}{v.t_stat:>10.3f}{v.p_value:>12.4g}  {mark}"
            )
        lines.append(f"intercept       {'':<14}{self.intercept:>12.4f}")
        for note in self.notes:
            lines.append(f"note: {note}")
        return "\n".join(lines)


def ols_regression(X, y, names=None, groups=None):
    """OLS with intercept, standard errors, t statistics and p-values.

    Exactly collinear columns (condition number past 1e10) are flagged as
    aliased and excluded from the solve; their coefficients are NaN.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    n, p = X.shape
    if names is None:
        names = [f"x{j}" for j in range(p)]
    if groups is None:
        groups = ["" for _ in range(p)]
    if n <= p + 1:
        raise InsufficientDataError(
            f"need more than {p + 1} observations for {p} variables, got {n}"
        )

    # Greedy independent-column selection against the intercept.
    kept = []
    aliased = []
    base = np.ones((n, 1))
    for j in range(p):
        trial = np.hstack([base, X[:, kept + [j]]])
        sv = np.linalg.svd(trial, compute_uv=False)
        if sv[-1] <= 0 or sv[0] / sv[-1] > CONDITION_LIMIT:
            aliased.append(j)
        else:
            kept.append(j)
    degenerate = len(kept) == 0

    Xd = np.hstack([np.ones((n, 1)), X[:, kept]])
    beta, *_ = np.linalg.lstsq(Xd, y, rcond=None)
    resid = y - Xd @ beta
    dof = n - len(kept) - 1
    rss = float(resid @ resid)
    tss = float(((y - y.mean()) ** 2).sum())
    r2 = 1.0 - rss / tss if tss > 0 else 0.0
    sigma2 = rss / dof if dof > 0 else float("nan")
    xtx_inv = np.linalg.inv(Xd.T @ Xd)
    se = np.sqrt(np.maximum(np.diag(xtx_inv) * sigma2, 0.0))

    y_std = y.std(ddof=1)
    variables = []
    for j in range(p):
        if j in aliased:
            variables.append(
                VariableResult(names[j], groups[j], float("nan"), float("nan"),
                               float("nan"), float("nan"), False, float("nan"),
                               aliased=True)
            )
            continue
        pos = kept.index(j) + 1
        b = float(beta[pos])
        s = float(se[pos])
        t = b / s if s > 0 else float("inf") if b != 0 else 0.0
        pv = t_test_p_value(t, dof)
        x_std = X[:, j].std(ddof=1)
        b_std = b * x_std / y_std if y_std > 0 else float("nan")
        variables.append(
            VariableResult(names[j], groups[j], b, s, t, pv,
                           bool(pv < SIGNIFICANCE_LEVEL), b_std)
        )
    notes = []
    if aliased:
        notes.append(f"{len(aliased)} collinear variable(s) aliased")
    if degenerate:
        notes.append("design matrix degenerate: all explanatory variables constant")
    return RegressionReport(
        variables=variables,
        intercept=float(beta[0]),
        r_squared=r2,
        n_observations=n,
        dof=dof,
        degenerate=degenerate,
        notes=notes,
    )


# --- Pareto archives -----------------------------------------------------------

@dataclass
class ArchiveEntry:
    genome: np.ndarray
    objectives: np.ndarray  # minimization convention (-speed, -stability, load)
    violation: float = 0.0
    summary: dict = field(default_factory=dict)


@dataclass
class ParetoArchive:
    entries: list
    metadata: dict = field(default_factory=dict)

    def objective_matrix(self):
        return np.array([e.objectives for e in self.entries], dtype=float)

    def genome_matrix(self):
        return np.array([e.genome for e in self.entries], dtype=float)


def pareto_filter(entries):
    """Mutually non-dominated feasible subset of evaluated entries."""
    feasible = [e for e in entries if e.violation == 0.0]
    if not feasible:
        return []
    F = np.array([e.objectives for e in feasible], dtype=float)
    fronts = fast_nondominated_sort(F)
    return [feasible[i] for i in fronts[0]]


def regress_load(archive, leg_count=None):
    """Multiple regression of f_load on [beta, H, L_1..L_k, V_1..V_k]."""
    if not archive.entries:
        raise InsufficientDataError("empty archive")
    G = archive.genome_matrix()
    k = leg_count if leg_count is not None else (G.shape[1] - 2) // 2
    if G.shape[1] != 2 * k + 2:
        raise ConfigError(f"genome length {G.shape[1]} inconsistent with {k} legs")
    y = archive.objective_matrix()[:, -1]
    X = np.column_stack([G[:, 2 * k + 1], G[:, 2 * k], G[:, :k], G[:, k : 2 * k]])
    names = ["duty_factor", "height_m"]
    names += [f"stride_m[{i + 1}]" for i in range(k)]
    names += [f"speed_mps[{i + 1}]" for i in range(k)]
    groups = ["duty/height"] * 2 + ["strides"] * k + ["speeds"] * k
    return ols_regression(X, y, names, groups)


def _archive_stats(archive):
    F = archive.objective_matrix()
    if F.size == 0:
        raise InsufficientDataError("archive has no entries to compare")
    load = F[:, 2]
    return {
        "entries": len(archive.entries),
        "min_load": float(load.min()),
        "median_load": float(np.median(load)),
        "max_speed": float((-F[:, 0]).max()),
        "max_stability": float((-F[:, 1]).max()),
    }


def compare_archives(with_load, without_load):
    """Compare a 3-objective archive against a load-blind (2-objective) one.

    The 2-objective archive must carry post-hoc re-scored load values in its
    objective triples. Both archives must come from the same protocol.
    """
    for key in ("morphology", "gait", "terrain", "seed"):
        a, b = with_load.metadata.get(key), without_load.metadata.get(key)
        if a != b:
            raise ConfigError(f"archive metadata mismatch on {key!r}: {a!r} != {b!r}")
    sa = _archive_stats(with_load)
    sb = _archive_stats(without_load)

    def rel(x, ref):
        return (x - ref) / abs(ref) if ref != 0 else float("inf") if x else 0.0

    return {
        "with_load": sa,
        "without_load": sb,
        "delta": {
            "min_load": rel(sa["min_load"], sb["min_load"]),
            "median_load": rel(sa["median_load"], sb["median_load"]),
            "max_speed": rel(sa["max_speed"], sb["max_speed"]),
            "max_stability": rel(sa["max_stability"], sb["max_stability"]),
        },
    }
