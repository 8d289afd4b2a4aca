"""Global feature importance for hybrid models: drop-column + permutation.

Every perturbation is applied to the original (scaled) feature columns and
then pushed through :func:`~hqml_explain.hqml.predict_adapted`, so the
quantum encoding is re-evaluated on the perturbed rows.

Random streams are keyed by ``(seed, stream tag, feature[, partner], repeat)``
so the result does not depend on evaluation order or thread count.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from .hqml import score_accuracy

_PI_STREAM = 1
_JOINT_STREAM = 2


@dataclass(frozen=True)
class ExplainerConfig:
    repeats_K: int = 5
    seed: int = 0
    adaptive_weighting: bool = False
    interaction_pi: bool = False
    interaction_partners_m: int = 2
    neutral_value: float = 0.0
    threads: int = 1

    def __post_init__(self):
        if self.repeats_K < 1:
            raise ValueError("repeats_K must be >= 1")
        if self.interaction_partners_m < 1:
            raise ValueError("interaction_partners_m must be >= 1")
        if self.threads < 1:
            raise ValueError("threads must be >= 1")

    def to_dict(self) -> dict:
        d = asdict(self)
        # thread count never changes results, keep it out of the serialised report
        d.pop("threads")
        return d


@dataclass
class ImportanceReport:
    feature_labels: list[str]
    baseline_accuracy: float
    dci: np.ndarray
    pi: np.ndarray
    weights: tuple[float, float]
    final: np.ndarray
    config: ExplainerConfig
    model_descriptor: str = ""
    interaction_pi: np.ndarray | None = None
    extra: dict = field(default_factory=dict)

    def recompute_final(self) -> np.ndarray:
        second = self.interaction_pi if self.interaction_pi is not None else self.pi
        return self.weights[0] * self.dci + self.weights[1] * second

    def to_dict(self) -> dict:
        d = {
            "feature_labels": list(self.feature_labels),
            "baseline_accuracy": self.baseline_accuracy,
            "dci": self.dci.tolist(),
            "pi": self.pi.tolist(),
            "interaction_pi": None if self.interaction_pi is None else self.interaction_pi.tolist(),
            "weights": {"dci": self.weights[0], "pi": self.weights[1]},
            "final": self.final.tolist(),
            "config": self.config.to_dict(),
            "model_descriptor": self.model_descriptor,
        }
        d.update(self.extra)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "ImportanceReport":
        ipi = d.get("interaction_pi")
        known = {"feature_labels", "baseline_accuracy", "dci", "pi", "interaction_pi",
                 "weights", "final", "config", "model_descriptor"}
        return cls(
            feature_labels=list(d["feature_labels"]),
            baseline_accuracy=float(d["baseline_accuracy"]),
            dci=np.asarray(d["dci"], dtype=float),
            pi=np.asarray(d["pi"], dtype=float),
            weights=(float(d["weights"]["dci"]), float(d["weights"]["pi"])),
            final=np.asarray(d["final"], dtype=float),
            config=ExplainerConfig(**d.get("config", {})),
            model_descriptor=d.get("model_descriptor", ""),
            interaction_pi=None if ipi is None else np.asarray(ipi, dtype=float),
            extra={k: v for k, v in d.items() if k not in known},
        )


def _stream(*key) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([int(k) & 0xFFFFFFFF for k in key]))


def _check_reference(model, X_ref, Y_ref):
    X_ref = np.asarray(X_ref, dtype=float)
    Y_ref = np.asarray(Y_ref)
    if X_ref.ndim != 2 or X_ref.shape[0] == 0:
        raise ValueError("reference data must be a non-empty 2-D matrix")
    if X_ref.shape[1] != model.n_features:
        raise ValueError(f"reference data has {X_ref.shape[1]} columns, model expects {model.n_features}")
    if Y_ref.shape[0] != X_ref.shape[0]:
        raise ValueError("X_ref and Y_ref row counts differ")
    return X_ref, Y_ref


def _map(fn, items, threads):
    items = list(items)
    if threads <= 1 or len(items) <= 1:
        return [fn(i) for i in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def _baseline(model, X_ref, Y_ref, base):
    return score_accuracy(model, X_ref, Y_ref) if base is None else base


def dci_scores(model, X_ref, Y_ref, cfg: ExplainerConfig = ExplainerConfig(),
               baseline: float | None = None) -> np.ndarray:
    X_ref, Y_ref = _check_reference(model, X_ref, Y_ref)
    base = _baseline(model, X_ref, Y_ref, baseline)

    def one(j):
        Xd = X_ref.copy()
        Xd[:, j] = cfg.neutral_value
        return base - score_accuracy(model, Xd, Y_ref)

    return np.array(_map(one, range(X_ref.shape[1]), cfg.threads))


def permuted_accuracies(model, X_ref, Y_ref, j: int, permutations) -> np.ndarray:
    """Accuracy after applying each row permutation to column ``j``."""
    out = []
    for perm in permutations:
        Xp = X_ref.copy()
        Xp[:, j] = X_ref[np.asarray(perm), j]
        out.append(score_accuracy(model, Xp, Y_ref))
    return np.array(out)


def pi_scores(model, X_ref, Y_ref, cfg: ExplainerConfig = ExplainerConfig(),
              baseline: float | None = None, permutations=None) -> np.ndarray:
    """Mean accuracy drop over ``cfg.repeats_K`` seeded shuffles of each column.

    ``permutations`` overrides the random shuffles with an explicit list of row
    permutations applied to every feature (e.g. all ``n!`` orderings).
    """
    X_ref, Y_ref = _check_reference(model, X_ref, Y_ref)
    base = _baseline(model, X_ref, Y_ref, baseline)
    n = X_ref.shape[0]

    def one(j):
        if permutations is None:
            perms = [_stream(cfg.seed, _PI_STREAM, j, k).permutation(n) for k in range(cfg.repeats_K)]
        else:
            perms = permutations
        return base - permuted_accuracies(model, X_ref, Y_ref, j, perms).mean()

    return np.array(_map(one, range(X_ref.shape[1]), cfg.threads))


def interaction_partners(X_ref, m: int) -> list[list[int]]:
    """Top-``m`` partners of each column by absolute Pearson correlation."""
    X_ref = np.asarray(X_ref, dtype=float)
    D = X_ref.shape[1]
    Xc = X_ref - X_ref.mean(axis=0)
    norms = np.sqrt((Xc ** 2).sum(axis=0))
    with np.errstate(divide="ignore", invalid="ignore"):
        corr = (Xc.T @ Xc) / np.outer(norms, norms)
    corr = np.nan_to_num(np.abs(corr), nan=0.0, posinf=0.0, neginf=0.0)
    partners = []
    for j in range(D):
        others = [l for l in range(D) if l != j]
        # Stable sort keeps the lower index first among equal correlations.
        others.sort(key=lambda l: -corr[j, l])
        partners.append(others[:m])
    return partners


def interaction_pi_scores(model, X_ref, Y_ref, cfg: ExplainerConfig = ExplainerConfig(),
                          baseline: float | None = None, pi=None) -> np.ndarray:
    """Permutation importance plus a non-negative pairwise synergy bonus.

    For each feature ``j`` the partners are the ``m`` columns most correlated
    with it. For each partner ``l`` both columns are shuffled independently at
    once; whatever accuracy drop exceeds ``pi_j + pi_l`` counts as synergy,
    half of it credited to ``j``. The bonus is averaged over partners.
    """
    X_ref, Y_ref = _check_reference(model, X_ref, Y_ref)
    D, n = X_ref.shape[1], X_ref.shape[0]
    if D < 2:
        raise ValueError("interaction PI needs at least 2 features")
    m = cfg.interaction_partners_m
    if m > D - 1:
        raise ValueError(f"interaction_partners_m={m} exceeds D-1={D - 1}")
    base = _baseline(model, X_ref, Y_ref, baseline)
    if pi is None:
        pi = pi_scores(model, X_ref, Y_ref, cfg, baseline=base)
    partners = interaction_partners(X_ref, m)
    pairs = sorted({(min(j, l), max(j, l)) for j in range(D) for l in partners[j]})

    def joint(pair):
        a, b = pair
        accs = []
        for k in range(cfg.repeats_K):
            Xp = X_ref.copy()
            Xp[:, a] = X_ref[_stream(cfg.seed, _JOINT_STREAM, a, b, 2 * k).permutation(n), a]
            Xp[:, b] = X_ref[_stream(cfg.seed, _JOINT_STREAM, a, b, 2 * k + 1).permutation(n), b]
            accs.append(score_accuracy(model, Xp, Y_ref))
        return base - float(np.mean(accs))

    joint_imp = dict(zip(pairs, _map(joint, pairs, cfg.threads)))
    out = np.array(pi, dtype=float).copy()
    for j in range(D):
        bonus = [max(0.0, joint_imp[(min(j, l), max(j, l))] - pi[j] - pi[l]) / 2.0
                 for l in partners[j]]
        out[j] = pi[j] + float(np.mean(bonus))
    return out


def _spread(v: np.ndarray) -> float:
    # np.std of a constant vector can leave a round-off residue; make it exactly 0
    return 0.0 if np.all(v == v[0]) else float(np.std(v))


def aggregate_scores(dci, pi, cfg: ExplainerConfig = ExplainerConfig()):
    """Combine drop-column and permutation scores into the final importance.

    Returns ``(final, (w_dci, w_pi))``. With adaptive weighting each component
    is weighted by its share of the summed population standard deviations.
    """
    dci = np.asarray(dci, dtype=float)
    pi = np.asarray(pi, dtype=float)
    if dci.shape != pi.shape:
        raise ValueError(f"length mismatch: {dci.shape} vs {pi.shape}")
    if not cfg.adaptive_weighting:
        return (dci + pi) / 2.0, (0.5, 0.5)
    s_d = _spread(dci)
    s_p = _spread(pi)
    if s_d + s_p < 1e-12:
        w = 0.5
    else:
        w = s_d / (s_d + s_p)
    return w * dci + (1.0 - w) * pi, (w, 1.0 - w)


def explain(model, X_ref, Y_ref, cfg: ExplainerConfig = ExplainerConfig()) -> ImportanceReport:
    X_ref, Y_ref = _check_reference(model, X_ref, Y_ref)
    base = score_accuracy(model, X_ref, Y_ref)
    dci = dci_scores(model, X_ref, Y_ref, cfg, baseline=base)
    pi = pi_scores(model, X_ref, Y_ref, cfg, baseline=base)
    ipi = None
    if cfg.interaction_pi:
        ipi = interaction_pi_scores(model, X_ref, Y_ref, cfg, baseline=base, pi=pi)
    final, weights = aggregate_scores(dci, pi if ipi is None else ipi, cfg)
    return ImportanceReport(
        feature_labels=list(getattr(model, "feature_labels", [f"x{j}" for j in range(len(dci))])),
        baseline_accuracy=base,
        dci=dci,
        pi=pi,
        weights=weights,
        final=final,
        config=cfg,
        model_descriptor=getattr(model, "descriptor", ""),
        interaction_pi=ipi,
    )
