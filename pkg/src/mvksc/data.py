"""Multi-view datasets: manifest/CSV I/O, preprocessing and synthetic fixtures.

Views are stored features x samples, one sample per CSV column. A manifest
is a plain ``key = value`` file::

    name = rings
    view.0.path = view0.csv
    view.0.transpose = false
    view.1.path = view1.csv
    labels.path = labels.csv

Paths are relative to the manifest. ``transpose = true`` declares a
samples x features file.
"""
import csv
import hashlib
import re
from dataclasses import dataclass
from pathlib import Path
from typing import List, Optional

import numpy as np


class DataError(ValueError):
    """Malformed or inconsistent dataset input."""


@dataclass
class MultiViewDataset:
    views: List[np.ndarray]
    labels: Optional[np.ndarray] = None
    names: Optional[List[str]] = None
    name: str = "dataset"

    def __post_init__(self):
        self.views = [np.asarray(X, dtype=np.float64) for X in self.views]
        if not self.views:
            raise DataError("dataset has no views")
        n = self.views[0].shape[1] if self.views[0].ndim == 2 else -1
        for i, X in enumerate(self.views):
            if X.ndim != 2 or X.shape[0] < 1:
                raise DataError(f"view {i} must be a non-empty features x samples matrix")
            if X.shape[1] != n:
                raise DataError(f"view {i} has {X.shape[1]} samples, view 0 has {n}")
            if not np.all(np.isfinite(X)):
                raise DataError(f"view {i} contains non-finite entries")
        if n < 2:
            raise DataError("need at least two samples")
        if self.labels is not None:
            self.labels = np.asarray(self.labels, dtype=np.int64).ravel()
            if self.labels.size != n:
                raise DataError(f"{self.labels.size} labels for {n} samples")
        if self.names is not None and len(self.names) != len(self.views):
            raise DataError("one name per view required")

    @property
    def n_samples(self):
        return self.views[0].shape[1]

    @property
    def n_views(self):
        return len(self.views)

    def fingerprint(self):
        """SHA-256 over view shapes, raw float64 bytes and labels."""
        h = hashlib.sha256()
        for X in self.views:
            h.update(np.asarray(X.shape, dtype=np.int64).tobytes())
            h.update(np.ascontiguousarray(X, dtype="<f8").tobytes())
        if self.labels is not None:
            h.update(b"labels")
            h.update(np.ascontiguousarray(self.labels, dtype="<i8").tobytes())
        return h.hexdigest()


# --- key-value files ------------------------------------------------------

def read_keyvalue(path):
    """Parse ``key = value`` lines; ``#`` starts a comment."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise DataError(f"{path}: cannot read ({exc.strerror})") from None
    out = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise DataError(f"{path}:{lineno}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        if not key:
            raise DataError(f"{path}:{lineno}: empty key")
        out[key] = value
    return out


def write_keyvalue(path, items):
    with open(path, "w") as fh:
        for key, value in items.items():
            fh.write(f"{key} = {value}\n")


def _parse_bool(text, where):
    t = text.strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise DataError(f"{where}: expected a boolean, got {text!r}")


# --- CSV ------------------------------------------------------------------

def read_matrix_csv(path):
    """Read a headerless CSV of decimal numbers into a 2-D float array."""
    path = Path(path)
    rows = []
    try:
        with open(path, newline="") as fh:
            for lineno, row in enumerate(csv.reader(fh), 1):
                if not row or all(not cell.strip() for cell in row):
                    continue
                vals = []
                for col, cell in enumerate(row, 1):
                    try:
                        vals.append(float(cell))
                    except ValueError:
                        raise DataError(
                            f"{path}:{lineno}:{col}: non-numeric cell {cell!r}"
                        ) from None
                if rows and len(vals) != len(rows[0]):
                    raise DataError(
                        f"{path}:{lineno}: ragged row ({len(vals)} cells, expected {len(rows[0])})"
                    )
                rows.append(vals)
    except OSError as exc:
        raise DataError(f"{path}: cannot read ({exc.strerror})") from None
    if not rows:
        raise DataError(f"{path}: empty matrix")
    M = np.array(rows, dtype=np.float64)
    if not np.all(np.isfinite(M)):
        raise DataError(f"{path}: non-finite value")
    return M


def write_matrix_csv(path, M):
    """Write with 17 significant digits so doubles round-trip exactly."""
    M = np.atleast_2d(np.asarray(M, dtype=np.float64))
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        for row in M:
            w.writerow([format(x, ".17g") for x in row])


def read_labels(path):
    path = Path(path)
    labels = []
    try:
        with open(path) as fh:
            for lineno, line in enumerate(fh, 1):
                s = line.strip()
                if not s:
                    continue
                try:
                    labels.append(int(s))
                except ValueError:
                    raise DataError(f"{path}:{lineno}: expected an integer label, got {s!r}") from None
    except OSError as exc:
        raise DataError(f"{path}: cannot read ({exc.strerror})") from None
    if not labels:
        raise DataError(f"{path}: no labels")
    return np.array(labels, dtype=np.int64)


def write_labels(path, labels):
    with open(path, "w") as fh:
        for lab in np.asarray(labels).ravel():
            fh.write(f"{int(lab)}\n")


# --- manifest -------------------------------------------------------------

_VIEW_KEY = re.compile(r"^view\.(\d+)\.(path|transpose|name)$")


def load_dataset(manifest_path):
    """Load every view listed in a manifest, plus labels when present."""
    manifest_path = Path(manifest_path)
    kv = read_keyvalue(manifest_path)
    base = manifest_path.parent
    views = {}
    for key, value in kv.items():
        m = _VIEW_KEY.match(key)
        if m:
            views.setdefault(int(m.group(1)), {})[m.group(2)] = value
        elif key not in ("name", "labels.path"):
            raise DataError(f"{manifest_path}: unknown key {key!r}")
    if not views:
        raise DataError(f"{manifest_path}: no view.<i>.path entries")

    mats, names, files = [], [], []
    for idx in sorted(views):
        entry = views[idx]
        if "path" not in entry:
            raise DataError(f"{manifest_path}: view.{idx} has no path")
        vpath = base / entry["path"]
        M = read_matrix_csv(vpath)
        if _parse_bool(entry.get("transpose", "false"), f"{manifest_path}: view.{idx}.transpose"):
            M = M.T
        if mats and M.shape[1] != mats[0].shape[1]:
            raise DataError(
                f"sample count mismatch: {files[0]} has {mats[0].shape[1]} columns, "
                f"{vpath} has {M.shape[1]}"
            )
        mats.append(M)
        files.append(vpath)
        names.append(entry.get("name", f"view{idx}"))

    labels = None
    if "labels.path" in kv:
        lpath = base / kv["labels.path"]
        labels = read_labels(lpath)
        if labels.size != mats[0].shape[1]:
            raise DataError(f"{lpath}: {labels.size} labels for {mats[0].shape[1]} samples")
    return MultiViewDataset(mats, labels, names, kv.get("name", manifest_path.stem))


def save_dataset(dataset, out_dir):
    """Write view CSVs, labels and a manifest; returns the manifest path."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    kv = {"name": dataset.name}
    for i, X in enumerate(dataset.views):
        fname = f"view{i}.csv"
        write_matrix_csv(out_dir / fname, X)
        kv[f"view.{i}.path"] = fname
        kv[f"view.{i}.transpose"] = "false"
        if dataset.names is not None:
            kv[f"view.{i}.name"] = dataset.names[i]
    if dataset.labels is not None:
        write_labels(out_dir / "labels.csv", dataset.labels)
        kv["labels.path"] = "labels.csv"
    manifest = out_dir / "manifest.txt"
    write_keyvalue(manifest, kv)
    return manifest


# --- preprocessing --------------------------------------------------------

NORMALIZE_MODES = ("none", "unit", "zscore")


def normalize(dataset, mode="unit"):
    """Per-view preprocessing.

    ``unit`` scales each sample column to unit Euclidean norm (zero columns
    untouched), ``zscore`` standardizes each feature row (constant rows
    become zero), ``none`` returns the dataset unchanged.
    """
    mode = mode.lower()
    if mode == "none":
        return dataset
    if mode not in NORMALIZE_MODES:
        raise ValueError(f"unknown normalization {mode!r}")
    out = []
    for X in dataset.views:
        if mode == "unit":
            norms = np.linalg.norm(X, axis=0)
            out.append(np.divide(X, norms, out=X.copy(), where=norms > 0))
        else:
            mu = X.mean(axis=1, keepdims=True)
            sd = X.std(axis=1, keepdims=True)
            out.append(np.where(sd > 1e-12, (X - mu) / np.where(sd > 1e-12, sd, 1.0), 0.0))
    return MultiViewDataset(out, dataset.labels, dataset.names, dataset.name)


# --- synthetic fixtures ---------------------------------------------------

def synth_linear_subspaces(n_per_cluster, k, dims_per_view, ambient_noise=0.01, seed=0,
                           subspace_dim=3):
    """Union-of-subspaces data observed through several views.

    Each sample gets latent coordinates in its cluster's ``subspace_dim``-dim
    space; every view embeds those shared coordinates through its own random
    orthonormal basis per cluster and adds Gaussian noise. The views thus
    describe the same samples, as real multi-view features do.
    """
    if k < 2:
        raise ValueError("need k >= 2 clusters")
    if n_per_cluster < 1 or subspace_dim < 1:
        raise ValueError("n_per_cluster and subspace_dim must be positive")
    if any(d < subspace_dim for d in dims_per_view) or not dims_per_view:
        raise ValueError("every view dimension must be >= subspace_dim")
    rng = np.random.default_rng(seed)
    labels = np.repeat(np.arange(k), n_per_cluster)
    latent = [rng.standard_normal((subspace_dim, n_per_cluster)) for _ in range(k)]
    views = []
    for D in dims_per_view:
        blocks = []
        for c in range(k):
            basis, _ = np.linalg.qr(rng.standard_normal((D, subspace_dim)))
            blocks.append(basis @ latent[c])
        X = np.hstack(blocks)
        if ambient_noise > 0:
            X = X + ambient_noise * rng.standard_normal(X.shape)
        views.append(X)
    names = [f"subspace{i}" for i in range(len(views))]
    return MultiViewDataset(views, labels, names, "subspaces")


def synth_rings(n_per_ring=50, rings=2, radii=(1.0, 3.0), noise=0.05, seed=0, n_views=2):
    """Concentric rings in the plane, one ring per class.

    Every view sees the same angles and ring memberships under its own random
    rotation and independent Gaussian noise.
    """
    radii = np.asarray(radii, dtype=np.float64)
    if rings < 2 or radii.size != rings:
        raise ValueError("need rings >= 2 and one radius per ring")
    if np.any(np.diff(radii) <= 0) or radii[0] <= 0:
        raise ValueError("radii must be positive and strictly increasing")
    rng = np.random.default_rng(seed)
    labels = np.repeat(np.arange(rings), n_per_ring)
    theta = rng.uniform(0.0, 2 * np.pi, labels.size)
    r = radii[labels]
    base = np.stack([r * np.cos(theta), r * np.sin(theta)])
    views = []
    for _ in range(n_views):
        phi = rng.uniform(0.0, 2 * np.pi)
        R = np.array([[np.cos(phi), -np.sin(phi)], [np.sin(phi), np.cos(phi)]])
        X = R @ base
        if noise > 0:
            X = X + noise * rng.standard_normal(X.shape)
        views.append(X)
    names = [f"ring{i}" for i in range(n_views)]
    return MultiViewDataset(views, labels, names, "rings")
