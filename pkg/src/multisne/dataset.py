"""Multi-view dataset model, delimited-file ingestion, label view and
stratified splitting."""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .errors import DataError

__all__ = [
    "IngestionConfig",
    "MultiViewDataset",
    "LabelView",
    "SplitSpec",
    "load_multiview",
    "build_label_view",
    "stratified_split",
]


def _frozen(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class MultiViewDataset:
    """M row-aligned views over the same N samples.

    Row ``i`` of every view describes the same sample. ``observed[m][i]`` is
    False when sample ``i`` is missing from view ``m``; such rows are stored
    as zeros and never read by the affinity code.
    """

    views: tuple
    sample_ids: tuple
    labels: Optional[np.ndarray] = None
    class_names: Optional[tuple] = None
    observed: tuple = field(default=())

    def __post_init__(self):
        views = []
        if len(self.views) == 0:
            raise DataError("dataset needs at least one view")
        n = None
        for m, v in enumerate(self.views):
            v = np.array(v, dtype=float)
            if v.ndim == 1:
                v = v[:, None]
            if v.ndim != 2 or v.shape[1] < 1:
                raise DataError(f"view {m}: expected a 2-D matrix with >= 1 column, got shape {v.shape}")
            if n is None:
                n = v.shape[0]
            elif v.shape[0] != n:
                raise DataError(f"row-count mismatch: view 0 has {n} rows, view {m} has {v.shape[0]}")
            views.append(v)
        if n == 0:
            raise DataError("dataset has no samples")

        if self.observed:
            if len(self.observed) != len(views):
                raise DataError("observed must hold one mask per view")
            observed = []
            for m, mask in enumerate(self.observed):
                mask = np.array(mask, dtype=bool)
                if mask.shape != (n,):
                    raise DataError(f"observed[{m}] must have {n} entries")
                observed.append(mask)
        else:
            observed = [np.ones(n, dtype=bool) for _ in views]

        for m, (v, mask) in enumerate(zip(views, observed)):
            v[~mask] = 0.0
            if not np.all(np.isfinite(v)):
                raise DataError(f"view {m} contains non-finite values")

        ids = tuple(self.sample_ids) if self.sample_ids else tuple(str(i) for i in range(n))
        if len(ids) != n:
            raise DataError(f"expected {n} sample ids, got {len(ids)}")

        labels = self.labels
        names = self.class_names
        if labels is not None:
            labels = np.asarray(labels)
            if labels.shape != (n,) or not np.issubdtype(labels.dtype, np.integer):
                raise DataError("labels must be N integer class indices")
            labels = labels.astype(np.int64)
            n_classes = len(names) if names is not None else int(labels.max()) + 1
            if labels.min() < 0 or labels.max() >= n_classes:
                raise DataError("label index out of range")
            counts = np.bincount(labels, minlength=n_classes)
            if np.any(counts == 0):
                raise DataError(f"class(es) {np.flatnonzero(counts == 0).tolist()} have no members")
            if names is None:
                names = tuple(str(c) for c in range(n_classes))
            names = tuple(names)
            labels = _frozen(labels)

        object.__setattr__(self, "views", tuple(_frozen(v) for v in views))
        object.__setattr__(self, "observed", tuple(_frozen(o) for o in observed))
        object.__setattr__(self, "sample_ids", ids)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "class_names", names)

    @property
    def n_samples(self) -> int:
        return self.views[0].shape[0]

    @property
    def n_views(self) -> int:
        return len(self.views)

    @property
    def n_classes(self) -> int:
        return 0 if self.class_names is None else len(self.class_names)

    @property
    def dims(self) -> tuple:
        return tuple(v.shape[1] for v in self.views)

    def class_counts(self) -> np.ndarray:
        if self.labels is None:
            raise DataError("dataset has no labels")
        return np.bincount(self.labels, minlength=self.n_classes)

    def subset(self, indices) -> "MultiViewDataset":
        """Rows ``indices`` of every view, in the given order."""
        idx = np.asarray(indices, dtype=np.int64)
        labels = None if self.labels is None else self.labels[idx]
        names = self.class_names
        if labels is not None:
            # drop classes that vanish so the invariant "every class has a member" holds
            present = np.unique(labels)
            if len(present) != len(names):
                remap = {int(c): i for i, c in enumerate(present)}
                labels = np.array([remap[int(c)] for c in labels], dtype=np.int64)
                names = tuple(names[int(c)] for c in present)
        return MultiViewDataset(
            views=tuple(v[idx] for v in self.views),
            sample_ids=tuple(self.sample_ids[i] for i in idx),
            labels=labels,
            class_names=names,
            observed=tuple(o[idx] for o in self.observed),
        )


@dataclass(frozen=True)
class LabelView:
    """Binary N x C class-membership matrix for the labelled samples."""

    matrix: np.ndarray
    labelled_mask: np.ndarray
    class_names: tuple = ()

    @property
    def n_classes(self) -> int:
        return self.matrix.shape[1]


@dataclass(frozen=True, eq=False)
class SplitSpec:
    train_indices: np.ndarray
    test_indices: np.ndarray
    rate: float
    seed: int

    def __eq__(self, other):
        if not isinstance(other, SplitSpec):
            return NotImplemented
        return (self.rate == other.rate and self.seed == other.seed
                and np.array_equal(self.train_indices, other.train_indices)
                and np.array_equal(self.test_indices, other.test_indices))

    __hash__ = None

    def to_dict(self) -> dict:
        return {
            "rate": self.rate,
            "seed": self.seed,
            "train": [int(i) for i in self.train_indices],
            "test": [int(i) for i in self.test_indices],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    @classmethod
    def from_dict(cls, d: dict) -> "SplitSpec":
        return cls(
            train_indices=_frozen(np.asarray(d["train"], dtype=np.int64)),
            test_indices=_frozen(np.asarray(d["test"], dtype=np.int64)),
            rate=float(d["rate"]),
            seed=int(d["seed"]),
        )

    @classmethod
    def from_json(cls, text: str) -> "SplitSpec":
        return cls.from_dict(json.loads(text))

    def validate(self, n_samples: int) -> None:
        tr = np.asarray(self.train_indices)
        te = np.asarray(self.test_indices)
        both = np.concatenate([tr, te])
        if len(both) != n_samples or not np.array_equal(np.sort(both), np.arange(n_samples)):
            raise DataError("split does not partition the sample indices")


# ---------------------------------------------------------------------------
# ingestion


@dataclass
class IngestionConfig:
    """How to read the delimited view and label files.

    ``delimiter`` is ``","``, ``"\\t"`` or ``"whitespace"`` (runs of blanks, as
    in the UCI multiple-features files). ``id_column`` (column name when
    ``header`` is set, otherwise a 0-based index) switches sample alignment
    from row position to join-by-ID.
    """

    delimiter: str = ","
    header: bool = False
    id_column: Optional[object] = None
    encoding: str = "utf-8"


def _read_rows(path: Path, schema: IngestionConfig) -> tuple[Optional[list], list]:
    try:
        text = Path(path).read_text(encoding=schema.encoding)
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from exc
    if schema.delimiter == "whitespace":
        rows = [line.split() for line in text.splitlines()]
    else:
        rows = list(csv.reader(text.splitlines(), delimiter=schema.delimiter))
    rows = [r for r in rows if any(cell.strip() for cell in r)]
    header = None
    if schema.header and rows:
        header, rows = [c.strip() for c in rows[0]], rows[1:]
    if not rows:
        raise DataError(f"{path}: empty file")
    return header, rows


def _id_index(header: Optional[list], schema: IngestionConfig, path) -> Optional[int]:
    if schema.id_column is None:
        return None
    if isinstance(schema.id_column, int):
        return schema.id_column
    if header is None:
        raise DataError("a named id_column requires header=True")
    try:
        return header.index(str(schema.id_column))
    except ValueError:
        raise DataError(f"{path}: id column {schema.id_column!r} not in header") from None


def _parse_view(path, schema):
    header, rows = _read_rows(path, schema)
    id_idx = _id_index(header, schema, path)
    width = len(rows[0])
    ids = []
    values = np.empty((len(rows), width - (id_idx is not None)), dtype=float)
    for r, row in enumerate(rows):
        if len(row) != width:
            raise DataError(f"{path}: row {r + 1} has {len(row)} cells, expected {width}")
        cells = list(row)
        if id_idx is not None:
            ids.append(cells.pop(id_idx).strip())
        for c, cell in enumerate(cells):
            try:
                values[r, c] = float(cell)
            except ValueError:
                raise DataError(f"{path}: non-numeric cell {cell!r} at row {r + 1}, column {c + 1}") from None
    if values.shape[1] == 0:
        raise DataError(f"{path}: no feature columns")
    if not np.all(np.isfinite(values)):
        raise DataError(f"{path}: missing or non-finite values are not supported")
    return (ids if id_idx is not None else None), values


def load_multiview(view_paths: Sequence, label_path=None,
                   schema: Optional[IngestionConfig] = None,
                   class_names: Optional[Sequence[str]] = None) -> MultiViewDataset:
    """Read one delimited file per view (plus an optional label file).

    Positional alignment requires equal row counts. With ``schema.id_column``
    set, rows are joined by ID; a sample absent from a view is marked
    unobserved there. Label strings map to class indices in order of first
    appearance unless ``class_names`` fixes the order.
    """
    schema = schema or IngestionConfig()
    if not view_paths:
        raise DataError("no view files given")
    parsed = [_parse_view(p, schema) for p in view_paths]

    if schema.id_column is None:
        n = parsed[0][1].shape[0]
        for p, (_, v) in zip(view_paths, parsed):
            if v.shape[0] != n:
                raise DataError(f"row-count mismatch: {view_paths[0]} has {n} rows, {p} has {v.shape[0]}")
        sample_ids = tuple(str(i) for i in range(n))
        views = [v for _, v in parsed]
        observed = [np.ones(n, dtype=bool) for _ in parsed]
    else:
        order: dict = {}
        for ids, _ in parsed:
            for sid in ids:
                order.setdefault(sid, len(order))
        n = len(order)
        sample_ids = tuple(order)
        views, observed = [], []
        for p, (ids, v) in zip(view_paths, parsed):
            if len(set(ids)) != len(ids):
                raise DataError(f"{p}: duplicate sample ids")
            full = np.zeros((n, v.shape[1]))
            mask = np.zeros(n, dtype=bool)
            rows = [order[s] for s in ids]
            full[rows] = v
            mask[rows] = True
            views.append(full)
            observed.append(mask)

    labels = None
    names = None
    if label_path is not None:
        header, rows = _read_rows(label_path, schema)
        id_idx = _id_index(header, schema, label_path)
        raw = {}
        for r, row in enumerate(rows):
            cells = [c.strip() for c in row]
            if id_idx is not None:
                sid = cells.pop(id_idx)
                if sid not in order:
                    raise DataError(f"{label_path}: label for unknown sample {sid!r}")
                key = order[sid]
            else:
                key = r
            if len(cells) != 1 or cells[0] == "":
                raise DataError(f"{label_path}: row {r + 1} must hold exactly one label")
            raw[key] = cells[0]
        if len(raw) != n or set(raw) != set(range(n)):
            raise DataError(f"{label_path}: expected one label per sample ({n}), got {len(raw)}")
        seq = [raw[i] for i in range(n)]
        if class_names is None:
            names = list(dict.fromkeys(seq))
        else:
            names = list(class_names)
            unknown = sorted(set(seq) - set(names))
            if unknown:
                raise DataError(f"{label_path}: unknown class label(s) {unknown}")
        index = {name: i for i, name in enumerate(names)}
        labels = np.array([index[s] for s in seq], dtype=np.int64)

    return MultiViewDataset(
        views=tuple(views),
        sample_ids=sample_ids,
        labels=labels,
        class_names=None if names is None else tuple(names),
        observed=tuple(observed),
    )


# ---------------------------------------------------------------------------
# label view and splitting


def build_label_view(dataset: MultiViewDataset, split: SplitSpec) -> LabelView:
    """One-hot rows for the training samples, zero rows for the rest."""
    if dataset.labels is None:
        raise DataError("dataset lacks labels; cannot build a label view")
    split.validate(dataset.n_samples)
    n, c = dataset.n_samples, dataset.n_classes
    train = np.asarray(split.train_indices, dtype=np.int64)
    matrix = np.zeros((n, c))
    matrix[train, dataset.labels[train]] = 1.0
    mask = np.zeros(n, dtype=bool)
    mask[train] = True
    return LabelView(_frozen(matrix), _frozen(mask), tuple(dataset.class_names))


def _train_counts(counts: np.ndarray, rate: float) -> np.ndarray:
    # largest-remainder apportionment: each class gets floor or ceil of
    # rate*n_c and the total is round(rate*N); remainder ties go to the
    # earlier class
    exact = rate * counts.astype(float)
    base = np.floor(exact).astype(np.int64)
    frac = exact - base
    extra = int(round(float(exact.sum()))) - int(base.sum())
    order = sorted(range(len(counts)), key=lambda c: (-frac[c], c))
    for c in order[:max(extra, 0)]:
        if frac[c] > 0:
            base[c] += 1
    # both sides keep at least one sample of every class
    return np.clip(base, 1, counts - 1)


def stratified_split(dataset: MultiViewDataset, rate: float, seed: int) -> SplitSpec:
    """Seeded train/test partition preserving class proportions.

    Each class is shuffled with a generator seeded by ``seed`` and its first
    ``k_c`` members go to training, with ``k_c`` in ``{floor, ceil}`` of
    ``rate * n_c`` (never 0 or ``n_c``).
    """
    if dataset.labels is None:
        raise DataError("stratified split needs labels")
    if not 0.0 < rate < 1.0:
        raise DataError(f"rate must lie in (0, 1), got {rate}")
    counts = dataset.class_counts()
    small = np.flatnonzero(counts < 2)
    if len(small):
        raise DataError(f"class(es) {small.tolist()} have fewer than 2 samples; "
                        "cannot populate both train and test")
    k = _train_counts(counts, rate)
    rng = np.random.default_rng(seed)
    train, test = [], []
    for c in range(len(counts)):
        members = np.flatnonzero(dataset.labels == c)
        members = members[rng.permutation(len(members))]
        train.append(members[:k[c]])
        test.append(members[k[c]:])
    return SplitSpec(
        train_indices=_frozen(np.sort(np.concatenate(train))),
        test_indices=_frozen(np.sort(np.concatenate(test))),
        rate=float(rate),
        seed=int(seed),
    )
