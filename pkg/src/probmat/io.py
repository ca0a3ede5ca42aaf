"""File formats: model/HMM JSON, COO text counts, one-symbol-per-line sequences."""
import json

import numpy as np

from probmat.models import CountMatrix, HmmModel, ProbabilityModel


def save_model(path, model):
    # P is stored column by column: one length-M list per latent component.
    doc = {
        "M": model.M,
        "R": model.R,
        "family": model.family,
        "P": model.P.T.tolist(),
        "W": model.W.tolist(),
        "psd_w": model.psd_w,
        "params": model.params,
    }
    with open(path, "w") as f:
        json.dump(doc, f, indent=1)


def load_model(path):
    with open(path) as f:
        doc = json.load(f)
    if "t" in doc and "p" in doc:
        raise ValueError(f"{path} holds an HMM; use load_hmm")
    return ProbabilityModel(
        int(doc["M"]), int(doc["R"]), np.array(doc["P"], dtype=float).T,
        np.array(doc["W"], dtype=float), family=doc.get("family", "custom"),
        psd_w=bool(doc.get("psd_w", False)), params=doc.get("params", {}),
    )


def save_hmm(path, h):
    with open(path, "w") as f:
        json.dump({"M": h.M, "t": h.t, "p": h.p.tolist(), "q": h.q.tolist()}, f, indent=1)


def load_hmm(path):
    with open(path) as f:
        doc = json.load(f)
    return HmmModel(float(doc["t"]), doc["p"], doc["q"])


def save_counts(path, C):
    """Header ``M nominal_N scheme batch_id`` then ``i j count`` lines."""
    exact = C.scheme == "exact"
    with open(path, "w") as f:
        f.write(f"{C.M} {_fmt_num(C.nominal_N)} {C.scheme} {C.batch_id}\n")
        for i, j, v in zip(C.rows.tolist(), C.cols.tolist(), C.vals.tolist()):
            f.write(f"{i} {j} {repr(float(v)) if exact else int(v)}\n")


def load_counts(path):
    with open(path) as f:
        header = f.readline().split()
        if len(header) != 4:
            raise ValueError(f"{path}: bad header {header!r}")
        M, nominal_N, scheme, batch_id = int(header[0]), float(header[1]), header[2], int(header[3])
        if nominal_N.is_integer():
            nominal_N = int(nominal_N)
        lines = f.read().split("\n")
    rows = [ln.split() for ln in lines if ln.strip()]
    body = np.array(rows, dtype=float if scheme == "exact" else np.int64).reshape(-1, 3)
    return CountMatrix(M, body[:, 0], body[:, 1], body[:, 2], nominal_N, scheme, batch_id)


def save_sequence(path, seq):
    np.savetxt(path, np.asarray(seq, dtype=np.int64), fmt="%d")


def load_sequence(path):
    return np.loadtxt(path, dtype=np.int64, ndmin=1)


def _fmt_num(x):
    x = float(x)
    return str(int(x)) if x.is_integer() else repr(x)


def save_estimate(path, est):
    doc = {
        "M": est.M,
        "R": int(est.S.size),
        "U": est.U.tolist(),
        "S": est.S.tolist(),
        "V": est.V.tolist(),
        "scale": est.scale.tolist(),
        "excluded": est.excluded.astype(int).tolist(),
    }
    with open(path, "w") as f:
        json.dump(doc, f)


def load_estimate(path):
    from probmat.estimator import Estimate

    with open(path) as f:
        doc = json.load(f)
    R = doc["R"]
    M = doc["M"]
    return Estimate(
        np.array(doc["U"], dtype=float).reshape(M, R), np.array(doc["S"], dtype=float),
        np.array(doc["V"], dtype=float).reshape(M, R), np.array(doc["scale"], dtype=float),
        np.array(doc["excluded"], dtype=bool),
    )


def write_json(path, doc):
    with open(path, "w") as f:
        json.dump(doc, f, indent=1, default=_jsonable)


def _jsonable(x):
    if isinstance(x, np.ndarray):
        return x.tolist()
    if isinstance(x, np.generic):
        return x.item()
    raise TypeError(f"cannot serialise {type(x).__name__}")
