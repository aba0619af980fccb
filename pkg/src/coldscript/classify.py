"""Gaussian-kernel SVM classification with one-vs-one multiclass voting.

The binary solver is sequential minimal optimization with max-violating-pair
working set selection: the dual gradient is kept incrementally, each step
solves the two-variable subproblem in closed form, and training stops when
the most violating pair satisfies the KKT gap tolerance. Pairwise decision
values are turned into posteriors with Platt sigmoid fitting so multiclass
votes can be tie-broken (and reported) probabilistically.
"""

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import image_io
from .errors import (
    ConfigError,
    DegenerateDataError,
    InvalidInputError,
    ModelFormatError,
)

MODEL_FORMAT_VERSION = 1
MAX_SMO_PASSES = 200_000
ALPHA_STEP_EPS = 1e-12
PLATT_MAX_ITER = 100
PLATT_MIN_STEP = 1e-10
PLATT_SIGMA = 1e-12


@dataclass
class LabeledDataset:
    """Feature matrix with string labels; classes fixes the label order."""

    x: np.ndarray
    labels: list[str]
    classes: list[str]

    def __post_init__(self):
        self.x = np.asarray(self.x, dtype=float)
        if self.x.ndim != 2:
            raise InvalidInputError(f"feature matrix must be 2-D, got {self.x.ndim}-D")
        if len(self.labels) != len(self.x):
            raise InvalidInputError(
                f"{len(self.x)} rows but {len(self.labels)} labels"
            )
        missing = set(self.labels) - set(self.classes)
        if missing:
            raise InvalidInputError(f"labels outside class list: {sorted(missing)}")

    @classmethod
    def build(cls, x, labels) -> "LabeledDataset":
        return cls(x=np.asarray(x, dtype=float), labels=list(labels),
                   classes=sorted(set(labels)))

    def class_indices(self) -> np.ndarray:
        lookup = {c: i for i, c in enumerate(self.classes)}
        return np.array([lookup[l] for l in self.labels])

    def subset(self, idx) -> "LabeledDataset":
        idx = np.asarray(idx)
        return LabeledDataset(
            x=self.x[idx],
            labels=[self.labels[i] for i in idx],
            classes=list(self.classes),
        )


@dataclass
class BinarySvm:
    support_vectors: np.ndarray
    dual_coef: np.ndarray  # alpha_i * y_i over the support vectors
    bias: float
    c: float
    gamma: float
    n_iter: int = 0
    converged: bool = True
    # Full training-set state, kept for inspection; not persisted.
    alpha: np.ndarray = field(default_factory=lambda: np.empty(0))
    train_labels: np.ndarray = field(default_factory=lambda: np.empty(0))
    objective_history: list[float] = field(default_factory=list)


@dataclass
class PairModel:
    first: str   # the +1 class
    second: str  # the -1 class
    svm: BinarySvm
    platt_a: float
    platt_b: float


@dataclass
class TrainedModel:
    classes: list[str]
    pairs: list[PairModel]
    c: float
    gamma: float
    feature_config: dict = field(default_factory=dict)
    format_version: int = MODEL_FORMAT_VERSION


@dataclass
class ConfusionMatrix:
    """Counts[i, j] = samples of true class i predicted as class j."""

    classes: list[str]
    counts: np.ndarray

    def percentages(self) -> np.ndarray:
        totals = self.counts.sum(axis=1, keepdims=True).astype(float)
        out = np.zeros_like(self.counts, dtype=float)
        np.divide(self.counts * 100.0, totals, out=out, where=totals > 0)
        return out

    @property
    def classification_rate(self) -> float:
        return classification_rate(self)


def classification_rate(cm: ConfusionMatrix) -> float:
    """Percent of samples on the diagonal."""
    total = cm.counts.sum()
    if total == 0:
        raise InvalidInputError("empty confusion matrix has no classification rate")
    return 100.0 * float(np.trace(cm.counts)) / float(total)


def gaussian_kernel(x: np.ndarray, z: np.ndarray, gamma: float) -> float:
    x = np.asarray(x, dtype=float)
    z = np.asarray(z, dtype=float)
    if x.shape != z.shape:
        raise InvalidInputError(f"shape mismatch: {x.shape} vs {z.shape}")
    d = x - z
    return float(np.exp(-gamma * np.dot(d, d)))


def _gram(a: np.ndarray, b: np.ndarray, gamma: float) -> np.ndarray:
    sq = (
        (a * a).sum(axis=1)[:, None]
        + (b * b).sum(axis=1)[None, :]
        - 2.0 * (a @ b.T)
    )
    return np.exp(-gamma * np.maximum(sq, 0.0))


def _check_svm_params(c: float, gamma: float, tol: float) -> None:
    if c <= 0:
        raise ConfigError(f"C must be > 0, got {c}")
    if gamma <= 0:
        raise ConfigError(f"gamma must be > 0, got {gamma}")
    if tol <= 0:
        raise ConfigError(f"tol must be > 0, got {tol}")


def train_binary(
    x: np.ndarray,
    y: np.ndarray,
    c: float = 10.0,
    gamma: float = 2.0,
    tol: float = 1e-3,
) -> BinarySvm:
    """Solve the soft-margin dual for labels in {-1, +1} by SMO.

    Working pairs are chosen by maximal KKT violation; the stopping rule is
    m(alpha) - M(alpha) < tol. The dual objective after every update is kept
    in objective_history (it is nondecreasing up to roundoff).
    """
    _check_svm_params(c, gamma, tol)
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if set(np.unique(y)) != {-1.0, 1.0}:
        raise DegenerateDataError("binary training needs both +1 and -1 labels")

    n = len(y)
    kernel = _gram(x, x, gamma)
    alpha = np.zeros(n)
    ftilde = np.zeros(n)  # sum_s alpha_s y_s K[s, i]
    history = []
    n_iter = 0
    converged = False

    for n_iter in range(1, MAX_SMO_PASSES + 1):
        grad = y - ftilde  # equals b for free vectors at the optimum
        up = ((y > 0) & (alpha < c)) | ((y < 0) & (alpha > 0))
        low = ((y > 0) & (alpha > 0)) | ((y < 0) & (alpha < c))
        if not up.any() or not low.any():
            converged = True
            break
        i = np.flatnonzero(up)[np.argmax(grad[up])]
        j = np.flatnonzero(low)[np.argmin(grad[low])]
        m_up, m_low = grad[i], grad[j]
        if m_up - m_low < tol:
            converged = True
            break

        yi, yj = y[i], y[j]
        ai_old, aj_old = alpha[i], alpha[j]
        if yi != yj:
            lo = max(0.0, aj_old - ai_old)
            hi = min(c, c + aj_old - ai_old)
        else:
            lo = max(0.0, ai_old + aj_old - c)
            hi = min(c, ai_old + aj_old)
        if hi - lo < ALPHA_STEP_EPS:
            break

        eta = kernel[i, i] + kernel[j, j] - 2.0 * kernel[i, j]
        if eta > 0:
            # E_i - E_j = grad[j] - grad[i]
            aj_new = aj_old + yj * (m_low - m_up) / eta
            aj_new = min(max(aj_new, lo), hi)
        else:
            aj_new = _endpoint_update(
                kernel, y, ftilde, i, j, ai_old, aj_old, lo, hi
            )
            if aj_new is None:
                break
        ai_new = ai_old + yi * yj * (aj_old - aj_new)
        # Snap bound dust to exactly 0 or c: a not-quite-pinned alpha keeps
        # its index in the up/low sets and strands the max-violating pair on
        # a sub-eps feasible interval.
        snap = ALPHA_STEP_EPS * max(1.0, c)
        ai_new = 0.0 if ai_new < snap else c if ai_new > c - snap else ai_new
        aj_new = 0.0 if aj_new < snap else c if aj_new > c - snap else aj_new
        if ai_new == ai_old and aj_new == aj_old:
            break

        alpha[i], alpha[j] = ai_new, aj_new
        ftilde += (ai_new - ai_old) * yi * kernel[i] + (aj_new - aj_old) * yj * kernel[j]
        history.append(float(alpha.sum() - 0.5 * np.dot(alpha * y, ftilde)))

    grad = y - ftilde
    up = ((y > 0) & (alpha < c)) | ((y < 0) & (alpha > 0))
    low = ((y > 0) & (alpha > 0)) | ((y < 0) & (alpha < c))
    if up.any() and low.any():
        bias = 0.5 * (grad[up].max() + grad[low].min())
    else:
        bias = float(grad.mean())

    sv = alpha > ALPHA_STEP_EPS
    return BinarySvm(
        support_vectors=x[sv].copy(),
        dual_coef=(alpha * y)[sv],
        bias=float(bias),
        c=c,
        gamma=gamma,
        n_iter=n_iter,
        converged=converged,
        alpha=alpha,
        train_labels=y,
        objective_history=history,
    )


def _endpoint_update(kernel, y, ftilde, i, j, ai_old, aj_old, lo, hi):
    """Pick the better interval endpoint when the subproblem is not strictly
    concave (eta <= 0 from duplicate points)."""
    yi, yj = y[i], y[j]
    best, best_gain = None, ALPHA_STEP_EPS

    for aj_new in (lo, hi):
        dj = aj_new - aj_old
        di = yi * yj * -dj
        gain = (
            di + dj
            - di * yi * ftilde[i]
            - dj * yj * ftilde[j]
            - 0.5 * (
                di * di * kernel[i, i]
                + dj * dj * kernel[j, j]
                + 2.0 * di * dj * yi * yj * kernel[i, j]
            )
        )
        if gain > best_gain:
            best, best_gain = aj_new, gain
    return best


def decision_function(svm: BinarySvm, x: np.ndarray) -> np.ndarray:
    """Signed margin(s) for one sample or a batch of samples."""
    x = np.atleast_2d(np.asarray(x, dtype=float))
    if x.shape[1] != svm.support_vectors.shape[1]:
        raise InvalidInputError(
            f"expected {svm.support_vectors.shape[1]} features, got {x.shape[1]}"
        )
    if len(svm.support_vectors) == 0:
        return np.full(len(x), svm.bias)
    return _gram(x, svm.support_vectors, svm.gamma) @ svm.dual_coef + svm.bias


def platt_fit(decision_values: np.ndarray, y: np.ndarray) -> tuple[float, float]:
    """Fit P(y=+1 | f) = 1 / (1 + exp(A f + B)) by regularized ML.

    Newton iterations with backtracking line search on the cross-entropy of
    the smoothed targets; robust to one-sided or separable inputs.
    """
    f = np.asarray(decision_values, dtype=float)
    y = np.asarray(y, dtype=float)
    prior1 = float((y > 0).sum())
    prior0 = float(len(y) - prior1)
    hi_t = (prior1 + 1.0) / (prior1 + 2.0)
    lo_t = 1.0 / (prior0 + 2.0)
    t = np.where(y > 0, hi_t, lo_t)

    def objective(a, b):
        fab = a * f + b
        pos = fab >= 0
        out = np.empty_like(fab)
        out[pos] = t[pos] * fab[pos] + np.log1p(np.exp(-fab[pos]))
        out[~pos] = (t[~pos] - 1.0) * fab[~pos] + np.log1p(np.exp(fab[~pos]))
        return float(out.sum())

    a, b = 0.0, np.log((prior0 + 1.0) / (prior1 + 1.0))
    fval = objective(a, b)
    for _ in range(PLATT_MAX_ITER):
        fab = a * f + b
        pos = fab >= 0
        p = np.empty_like(fab)
        q = np.empty_like(fab)
        e_neg = np.exp(-np.abs(fab))
        p[pos] = e_neg[pos] / (1.0 + e_neg[pos])
        q[pos] = 1.0 / (1.0 + e_neg[pos])
        p[~pos] = 1.0 / (1.0 + e_neg[~pos])
        q[~pos] = e_neg[~pos] / (1.0 + e_neg[~pos])
        d2 = p * q
        h11 = PLATT_SIGMA + float((f * f * d2).sum())
        h22 = PLATT_SIGMA + float(d2.sum())
        h21 = float((f * d2).sum())
        d1 = t - p
        g1 = float((f * d1).sum())
        g2 = float(d1.sum())
        if abs(g1) < 1e-5 and abs(g2) < 1e-5:
            break
        det = h11 * h22 - h21 * h21
        da = -(h22 * g1 - h21 * g2) / det
        db = -(-h21 * g1 + h11 * g2) / det
        gd = g1 * da + g2 * db
        step = 1.0
        while step >= PLATT_MIN_STEP:
            new_a, new_b = a + step * da, b + step * db
            new_f = objective(new_a, new_b)
            if new_f < fval + 1e-4 * step * gd:
                a, b, fval = new_a, new_b, new_f
                break
            step /= 2.0
        else:
            break
    return a, b


def _sigmoid_posterior(f: np.ndarray, a: float, b: float) -> np.ndarray:
    fab = a * f + b
    out = np.empty_like(fab)
    pos = fab >= 0
    out[pos] = np.exp(-fab[pos]) / (1.0 + np.exp(-fab[pos]))
    out[~pos] = 1.0 / (1.0 + np.exp(fab[~pos]))
    return out


def train_multiclass(
    data: LabeledDataset,
    c: float = 10.0,
    gamma: float = 2.0,
    tol: float = 1e-3,
    feature_config: dict | None = None,
) -> TrainedModel:
    """One binary machine per unordered class pair, plus a Platt sigmoid
    fitted on that pair's training decision values."""
    _check_svm_params(c, gamma, tol)
    if len(data.classes) < 2:
        raise DegenerateDataError(
            f"need at least 2 classes, got {len(data.classes)}"
        )
    idx = data.class_indices()
    for ci, name in enumerate(data.classes):
        count = int((idx == ci).sum())
        if count < 2:
            raise DegenerateDataError(
                f"class {name!r} has {count} samples, need at least 2"
            )

    pairs = []
    for ai in range(len(data.classes)):
        for bi in range(ai + 1, len(data.classes)):
            mask = (idx == ai) | (idx == bi)
            x_pair = data.x[mask]
            y_pair = np.where(idx[mask] == ai, 1.0, -1.0)
            svm = train_binary(x_pair, y_pair, c=c, gamma=gamma, tol=tol)
            f = decision_function(svm, x_pair)
            platt_a, platt_b = platt_fit(f, y_pair)
            pairs.append(PairModel(
                first=data.classes[ai],
                second=data.classes[bi],
                svm=svm,
                platt_a=platt_a,
                platt_b=platt_b,
            ))
    return TrainedModel(
        classes=list(data.classes),
        pairs=pairs,
        c=c,
        gamma=gamma,
        feature_config=dict(feature_config or {}),
    )


def predict_batch(
    model: TrainedModel, x: np.ndarray
) -> tuple[list[str], np.ndarray]:
    """Majority vote over the pairwise machines for each row of x.

    Vote ties go to the larger summed posterior, then to class order.
    Returned scores are the per-class posterior sums normalized to sum to 1.
    """
    x = np.atleast_2d(np.asarray(x, dtype=float))
    n = len(x)
    k = len(model.classes)
    order = {name: i for i, name in enumerate(model.classes)}
    votes = np.zeros((n, k))
    posterior = np.zeros((n, k))
    for pair in model.pairs:
        f = decision_function(pair.svm, x)
        p_first = _sigmoid_posterior(f, pair.platt_a, pair.platt_b)
        ai, bi = order[pair.first], order[pair.second]
        votes[:, ai] += f >= 0
        votes[:, bi] += f < 0
        posterior[:, ai] += p_first
        posterior[:, bi] += 1.0 - p_first
    # Lexicographic winner: votes, then posterior, then class order (first
    # index wins argmax ties).
    rank = votes * (k + 1) + posterior / (posterior.max() + 1.0)
    winners = rank.argmax(axis=1)
    scores = posterior / posterior.sum(axis=1, keepdims=True)
    return [model.classes[w] for w in winners], scores


def predict(model: TrainedModel, x: np.ndarray) -> tuple[str, np.ndarray]:
    labels, scores = predict_batch(model, np.atleast_2d(x))
    return labels[0], scores[0]


def _stratified_folds(idx: np.ndarray, folds: int, seed: int) -> np.ndarray:
    """Fold id per sample: shuffle within each class, deal round-robin."""
    rng = np.random.default_rng(seed)
    assignment = np.full(len(idx), -1, dtype=int)
    for ci in np.unique(idx):
        members = np.flatnonzero(idx == ci)
        rng.shuffle(members)
        assignment[members] = np.arange(len(members)) % folds
    return assignment


def cross_validate(
    data: LabeledDataset,
    folds: int | str = 10,
    c: float = 10.0,
    gamma: float = 2.0,
    tol: float = 1e-3,
    seed: int = 0,
) -> ConfusionMatrix:
    """Stratified k-fold CV (or a single stratified 90/10 holdout split when
    folds="holdout"), aggregating one confusion matrix over all test rows."""
    idx = data.class_indices()
    k = len(data.classes)
    counts = np.zeros((k, k), dtype=int)

    if folds == "holdout":
        splits = [_holdout_split(idx, seed)]
    else:
        if not isinstance(folds, int) or folds < 2:
            raise ConfigError(f"folds must be an int >= 2 or 'holdout', got {folds!r}")
        class_sizes = np.bincount(idx, minlength=k)
        starved = [data.classes[ci] for ci in range(k) if class_sizes[ci] < folds]
        if starved:
            raise DegenerateDataError(
                f"stratification impossible: classes {starved} have fewer than "
                f"{folds} samples"
            )
        assignment = _stratified_folds(idx, folds, seed)
        splits = [(assignment != f, assignment == f) for f in range(folds)]

    for train_mask, test_mask in splits:
        model = train_multiclass(
            data.subset(np.flatnonzero(train_mask)), c=c, gamma=gamma, tol=tol
        )
        test_idx = np.flatnonzero(test_mask)
        labels, _ = predict_batch(model, data.x[test_idx])
        for row, predicted in zip(test_idx, labels):
            counts[idx[row], data.classes.index(predicted)] += 1
    return ConfusionMatrix(classes=list(data.classes), counts=counts)


def _holdout_split(idx: np.ndarray, seed: int) -> tuple[np.ndarray, np.ndarray]:
    """Stratified 90/10 split; every class keeps at least one test sample."""
    rng = np.random.default_rng(seed)
    test = np.zeros(len(idx), dtype=bool)
    for ci in np.unique(idx):
        members = np.flatnonzero(idx == ci)
        if len(members) < 2:
            raise DegenerateDataError(
                "stratification impossible: holdout needs >= 2 samples per class"
            )
        rng.shuffle(members)
        n_test = max(1, int(round(0.1 * len(members))))
        test[members[:n_test]] = True
    return ~test, test


def hyperparameter_search(
    data: LabeledDataset,
    budget: int = 25,
    folds: int = 3,
    tol: float = 1e-3,
    seed: int = 0,
    candidates: list[tuple[float, float]] | None = None,
) -> tuple[float, float, float]:
    """Best (C, gamma, rate) over a candidate list by small-fold CV.

    The default grid walks C in 0.1..1000 against gamma in 0.001..10,
    C-major; only the first `budget` candidates are evaluated and the first
    best rate wins ties.
    """
    if budget < 1:
        raise ConfigError(f"budget must be >= 1, got {budget}")
    if candidates is None:
        candidates = [
            (float(c), float(g))
            for c in np.logspace(-1, 3, 5)
            for g in np.logspace(-3, 1, 5)
        ]
    best = None
    for c, gamma in candidates[:budget]:
        cm = cross_validate(data, folds=folds, c=c, gamma=gamma, tol=tol, seed=seed)
        rate = classification_rate(cm)
        if best is None or rate > best[2]:
            best = (c, gamma, rate)
    return best


def save_model(model: TrainedModel, path: str | Path) -> None:
    payload = {
        "format_version": MODEL_FORMAT_VERSION,
        "classes": model.classes,
        "c": model.c,
        "gamma": model.gamma,
        "feature_config": model.feature_config,
        "pairs": [
            {
                "first": p.first,
                "second": p.second,
                "support_vectors": p.svm.support_vectors.tolist(),
                "dual_coef": p.svm.dual_coef.tolist(),
                "bias": p.svm.bias,
                "platt_a": p.platt_a,
                "platt_b": p.platt_b,
            }
            for p in model.pairs
        ],
    }
    image_io.atomic_write_text(json.dumps(payload, indent=1), path)


def load_model(path: str | Path) -> TrainedModel:
    try:
        payload = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ModelFormatError(f"{path}: not valid JSON ({exc})") from exc
    if not isinstance(payload, dict):
        raise ModelFormatError(f"{path}: expected a JSON object")
    version = payload.get("format_version")
    if version != MODEL_FORMAT_VERSION:
        raise ModelFormatError(
            f"{path}: format_version {version!r} is not supported "
            f"(expected {MODEL_FORMAT_VERSION})"
        )
    required = {"classes", "c", "gamma", "pairs"}
    missing = required - payload.keys()
    if missing:
        raise ModelFormatError(f"{path}: missing fields {sorted(missing)}")

    pairs = []
    for entry in payload["pairs"]:
        try:
            sv = np.asarray(entry["support_vectors"], dtype=float)
            if sv.size == 0:
                sv = sv.reshape(0, 0)
            svm = BinarySvm(
                support_vectors=sv,
                dual_coef=np.asarray(entry["dual_coef"], dtype=float),
                bias=float(entry["bias"]),
                c=float(payload["c"]),
                gamma=float(payload["gamma"]),
            )
            pairs.append(PairModel(
                first=entry["first"],
                second=entry["second"],
                svm=svm,
                platt_a=float(entry["platt_a"]),
                platt_b=float(entry["platt_b"]),
            ))
        except (KeyError, TypeError, ValueError) as exc:
            raise ModelFormatError(f"{path}: malformed pair entry ({exc})") from exc
    return TrainedModel(
        classes=list(payload["classes"]),
        pairs=pairs,
        c=float(payload["c"]),
        gamma=float(payload["gamma"]),
        feature_config=dict(payload.get("feature_config", {})),
    )
