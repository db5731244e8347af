"""Dataset readers for NSL-KDD / UNSW-NB15, model bundles and text exports."""
import csv
import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import pandas as pd

from .classify import AeModel, LdaModel, MdrmModel, MlpModel
from .features import CATEGORICAL, NUMERIC, FittedPreprocessor, ReshapeSpec, ShrinkageConfig

NSLKDD = "nslkdd"
UNSW = "unsw"
DATASETS = (NSLKDD, UNSW)

NSLKDD_FEATURES = [
    "duration", "protocol_type", "service", "flag", "src_bytes", "dst_bytes",
    "land", "wrong_fragment", "urgent", "hot", "num_failed_logins", "logged_in",
    "num_compromised", "root_shell", "su_attempted", "num_root", "num_file_creations",
    "num_shells", "num_access_files", "num_outbound_cmds", "is_host_login",
    "is_guest_login", "count", "srv_count", "serror_rate", "srv_serror_rate",
    "rerror_rate", "srv_rerror_rate", "same_srv_rate", "diff_srv_rate",
    "srv_diff_host_rate", "dst_host_count", "dst_host_srv_count",
    "dst_host_same_srv_rate", "dst_host_diff_srv_rate", "dst_host_same_src_port_rate",
    "dst_host_srv_diff_host_rate", "dst_host_serror_rate", "dst_host_srv_serror_rate",
    "dst_host_rerror_rate", "dst_host_srv_rerror_rate",
]
NSLKDD_CATEGORICAL = ("protocol_type", "service", "flag")
NSLKDD_ARITY = len(NSLKDD_FEATURES) + 2  # + label, difficulty

UNSW_FEATURES = [
    "dur", "proto", "service", "state", "spkts", "dpkts", "sbytes", "dbytes",
    "rate", "sttl", "dttl", "sload", "dload", "sloss", "dloss", "sinpkt",
    "dinpkt", "sjit", "djit", "swin", "stcpb", "dtcpb", "dwin", "tcprtt",
    "synack", "ackdat", "smean", "dmean", "trans_depth", "response_body_len",
    "ct_srv_src", "ct_state_ttl", "ct_dst_ltm", "ct_src_dport_ltm",
    "ct_dst_sport_ltm", "ct_dst_src_ltm", "is_ftp_login", "ct_ftp_cmd",
    "ct_flw_http_mthd", "ct_src_ltm", "ct_srv_dst", "is_sm_ips_ports",
]
UNSW_CATEGORICAL = ("proto", "service", "state")
UNSW_NUMERIC = [c for c in UNSW_FEATURES if c not in UNSW_CATEGORICAL]

NORMAL, ATTACK = "normal", "attack"
BINARY_LABELS = (NORMAL, ATTACK)


class DataFormatError(ValueError):
    pass


@dataclass
class RecordTable:
    """Raw records: feature columns as loaded, plus labels and provenance."""

    features: pd.DataFrame
    column_kinds: dict
    labels: np.ndarray
    dataset: str
    path: str = ""
    label_column: str = "label"
    attack_cat: np.ndarray = None

    @property
    def column_names(self):
        return list(self.features.columns)

    def __len__(self):
        return len(self.features)

    def default_columns(self):
        """Retained feature columns in dataset order (symbolic UNSW columns
        excluded)."""
        if self.dataset == UNSW:
            return [c for c in self.column_names if self.column_kinds[c] == NUMERIC]
        return self.column_names

    def subset(self, mask):
        mask = np.asarray(mask)
        return RecordTable(
            self.features[mask].reset_index(drop=True),
            self.column_kinds,
            self.labels[mask],
            self.dataset,
            self.path,
            self.label_column,
            None if self.attack_cat is None else self.attack_cat[mask],
        )


def _to_numeric(df, columns, path):
    for c in columns:
        try:
            df[c] = pd.to_numeric(df[c], errors="raise").astype(np.float64)
        except (ValueError, TypeError) as exc:
            raise DataFormatError(f"{path}: column {c!r} is not numeric ({exc})") from None
    return df


def load_nslkdd(path):
    """Read a headerless NSL-KDD file (41 features, label, difficulty)."""
    path = Path(path)
    rows = []
    with open(path, newline="") as fh:
        for i, row in enumerate(csv.reader(fh)):
            if not row:
                continue
            if len(row) != NSLKDD_ARITY:
                raise DataFormatError(
                    f"{path}: row {i} has {len(row)} fields, expected {NSLKDD_ARITY}"
                )
            rows.append(row)
    df = pd.DataFrame(rows, columns=NSLKDD_FEATURES + ["label", "difficulty"])
    labels = df["label"].str.strip().to_numpy(dtype=object)
    feats = df[NSLKDD_FEATURES].copy()
    kinds = {c: CATEGORICAL if c in NSLKDD_CATEGORICAL else NUMERIC for c in NSLKDD_FEATURES}
    feats = _to_numeric(feats, [c for c in NSLKDD_FEATURES if kinds[c] == NUMERIC], path)
    return RecordTable(feats, kinds, labels, NSLKDD, str(path))


def load_unsw(path):
    """Read a headered UNSW-NB15 training/testing split file."""
    path = Path(path)
    df = pd.read_csv(path, dtype=str, keep_default_na=False)
    df.columns = [c.strip() for c in df.columns]
    missing = [c for c in UNSW_FEATURES + ["attack_cat", "label"] if c not in df.columns]
    if missing:
        raise DataFormatError(f"{path}: missing expected columns {missing}")
    kinds = {c: CATEGORICAL if c in UNSW_CATEGORICAL else NUMERIC for c in UNSW_FEATURES}
    feats = _to_numeric(df[UNSW_FEATURES].copy(), UNSW_NUMERIC, path)
    return RecordTable(
        feats,
        kinds,
        df["label"].str.strip().to_numpy(dtype=object),
        UNSW,
        str(path),
        attack_cat=df["attack_cat"].str.strip().to_numpy(dtype=object),
    )


def load_dataset(dataset, path):
    if dataset == NSLKDD:
        return load_nslkdd(path)
    if dataset == UNSW:
        return load_unsw(path)
    raise ValueError(f"unknown dataset {dataset!r}; expected one of {DATASETS}")


def binarize_labels(table, dataset=None):
    """Map raw labels to ``normal``/``attack``."""
    dataset = dataset or table.dataset
    raw = table.labels
    if dataset == NSLKDD:
        return np.where(raw == "normal", NORMAL, ATTACK).astype(object)
    if dataset == UNSW:
        vals = np.asarray([str(v).strip() for v in raw])
        bad = ~np.isin(vals, ["0", "1"])
        if bad.any():
            raise DataFormatError(f"UNSW label must be 0 or 1, got {vals[bad][0]!r}")
        return np.where(vals == "0", NORMAL, ATTACK).astype(object)
    raise ValueError(f"unknown dataset tag {dataset!r}")


FORMAT_NAME = "riemann-ids-bundle"
FORMAT_VERSION = 1

_CLASSIFIERS = {"mdrm": MdrmModel, "lda": LdaModel, "mlp": MlpModel, "ae": AeModel}


class BundleError(ValueError):
    pass


class BundleVersionError(BundleError):
    pass


class BundleCorruptError(BundleError):
    pass


def classifier_kind(model):
    for kind, cls in _CLASSIFIERS.items():
        if isinstance(model, cls):
            return kind
    raise TypeError(f"unsupported classifier {type(model).__name__}")


@dataclass
class ModelBundle:
    dataset: str
    preprocessor: FittedPreprocessor
    reshape: ReshapeSpec
    shrinkage: ShrinkageConfig
    classifier: object
    reference_mean: np.ndarray = None
    center_rows: bool = False
    config: dict = field(default_factory=dict)

    @property
    def kind(self):
        return classifier_kind(self.classifier)

    def to_dict(self):
        return {
            "dataset": self.dataset,
            "preprocessor": self.preprocessor.to_dict(),
            "reshape": {"rows_p": self.reshape.rows_p, "cols_t": self.reshape.cols_t, "order": self.reshape.order},
            "shrinkage": {"alpha": self.shrinkage.alpha, "trace_floor": self.shrinkage.trace_floor},
            "center_rows": self.center_rows,
            "reference_mean": None if self.reference_mean is None else self.reference_mean.tolist(),
            "classifier": {"kind": self.kind, "model": self.classifier.to_dict()},
            "config": self.config,
        }

    @classmethod
    def from_dict(cls, d):
        kind = d["classifier"]["kind"]
        if kind not in _CLASSIFIERS:
            raise BundleError(f"unknown classifier kind {kind!r}")
        ref = d.get("reference_mean")
        return cls(
            dataset=d["dataset"],
            preprocessor=FittedPreprocessor.from_dict(d["preprocessor"]),
            reshape=ReshapeSpec(**d["reshape"]),
            shrinkage=ShrinkageConfig(**d["shrinkage"]),
            classifier=_CLASSIFIERS[kind].from_dict(d["classifier"]["model"]),
            reference_mean=None if ref is None else np.asarray(ref, dtype=np.float64),
            center_rows=bool(d.get("center_rows", False)),
            config=d.get("config", {}),
        )


def _canonical(payload):
    return json.dumps(payload, sort_keys=True, separators=(",", ":"), allow_nan=False)


def save_bundle(bundle, path):
    """Write a self-describing JSON bundle with version and SHA-256 checksum.

    Floats are written with ``repr`` precision, so a reload reproduces every
    parameter exactly.
    """
    payload = bundle.to_dict()
    body = _canonical(payload)
    doc = {
        "format": FORMAT_NAME,
        "format_version": FORMAT_VERSION,
        "sha256": hashlib.sha256(body.encode()).hexdigest(),
        "payload": payload,
    }
    path = Path(path)
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(json.dumps(doc, indent=1, allow_nan=False))
    tmp.replace(path)
    return path


def load_bundle(path):
    path = Path(path)
    try:
        doc = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise BundleCorruptError(f"{path}: not a readable bundle ({exc})") from None
    if not isinstance(doc, dict) or doc.get("format") != FORMAT_NAME:
        raise BundleCorruptError(f"{path}: not a {FORMAT_NAME} file")
    if doc.get("format_version") != FORMAT_VERSION:
        raise BundleVersionError(
            f"{path}: bundle format version {doc.get('format_version')!r}, expected {FORMAT_VERSION}"
        )
    payload = doc.get("payload")
    if hashlib.sha256(_canonical(payload).encode()).hexdigest() != doc.get("sha256"):
        raise BundleCorruptError(f"{path}: checksum mismatch")
    return ModelBundle.from_dict(payload)


def write_roc(path, fpr, tpr):
    np.savetxt(path, np.column_stack([fpr, tpr]), fmt="%.17g", header="fpr tpr")


def write_tangent_coords(path, coords, labels):
    """One line per sample: coordinates, then the label."""
    coords = np.asarray(coords)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow([f"s{i}" for i in range(coords.shape[1])] + ["label"])
        for row, lab in zip(coords, labels):
            w.writerow([repr(float(v)) for v in row] + [lab])


def read_tangent_coords(path):
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))[1:]
    coords = np.array([[float(v) for v in r[:-1]] for r in rows])
    return coords, [r[-1] for r in rows]


def write_matrix_grid(path, matrix):
    np.savetxt(path, np.asarray(matrix), fmt="%.17g", delimiter=",")
