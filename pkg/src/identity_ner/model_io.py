"""Model files: one self-describing file per trained model.

Layout: a single JSON header line (format version, model kind, alphabets,
feature config, array manifest, checksum) followed by the raw little-endian
float64 array payload.  The checksum is SHA-256 over the canonical header
(without the checksum field) plus the payload, so any tampered byte is
caught.  Roundtrips are bit-exact.
"""

from __future__ import annotations

import hashlib
import json
from pathlib import Path
from typing import Union

import numpy as np

from .classifier import ClassifierModel, class_from_wire, class_wire
from .crf import CrfModel
from .errors import CorruptFileError, FormatVersionError, ModelKindError
from .features import FeatureConfig

FORMAT_VERSION = 1

Model = Union[CrfModel, ClassifierModel]


def _array_payload(arrays: list[tuple[str, np.ndarray]]) -> tuple[list[dict], bytes]:
    manifest = []
    chunks = []
    for name, arr in arrays:
        data = np.ascontiguousarray(arr, dtype="<f8")
        manifest.append({"name": name, "shape": list(arr.shape)})
        chunks.append(data.tobytes())
    return manifest, b"".join(chunks)


def _checksum(header: dict, payload: bytes) -> str:
    canonical = json.dumps(header, sort_keys=True, separators=(",", ":")).encode()
    return hashlib.sha256(canonical + payload).hexdigest()


def save_model(model: Model, path: str | Path) -> None:
    if isinstance(model, CrfModel):
        kind = "crf"
        alphabet = {"tags": list(model.tag_set)}
        arrays = [("emission", model.emission), ("transitions", model.transitions)]
    elif isinstance(model, ClassifierModel):
        kind = "classifier"
        alphabet = {"classes": [class_wire(c) for c in model.classes]}
        arrays = [("weights", model.weights), ("bias", model.bias)]
    else:
        raise TypeError(f"not a saveable model: {type(model).__name__}")
    manifest, payload = _array_payload(arrays)
    header = {
        "format_version": FORMAT_VERSION,
        "kind": kind,
        "feature_config": model.feature_config.to_json(),
        "arrays": manifest,
        **alphabet,
    }
    header["checksum"] = _checksum(
        {k: v for k, v in header.items() if k != "checksum"}, payload
    )
    with open(path, "wb") as fh:
        fh.write(json.dumps(header, sort_keys=True, separators=(",", ":")).encode())
        fh.write(b"\n")
        fh.write(payload)


def load_model(path: str | Path) -> Model:
    with open(path, "rb") as fh:
        header_line = fh.readline()
        payload = fh.read()
    try:
        header = json.loads(header_line)
        version = header["format_version"]
        kind = header["kind"]
        stored_checksum = header["checksum"]
        manifest = header["arrays"]
    except (json.JSONDecodeError, KeyError, TypeError) as exc:
        raise CorruptFileError(f"{path}: unreadable model header") from exc
    if version != FORMAT_VERSION:
        raise FormatVersionError(
            f"{path}: format_version {version} (supported: {FORMAT_VERSION})"
        )
    expected = _checksum(
        {k: v for k, v in header.items() if k != "checksum"}, payload
    )
    if expected != stored_checksum:
        raise CorruptFileError(f"{path}: checksum mismatch")

    arrays = {}
    offset = 0
    for entry in manifest:
        count = int(np.prod(entry["shape"])) if entry["shape"] else 1
        nbytes = count * 8
        chunk = payload[offset : offset + nbytes]
        if len(chunk) != nbytes:
            raise CorruptFileError(f"{path}: truncated array payload")
        arrays[entry["name"]] = np.frombuffer(chunk, dtype="<f8").reshape(
            entry["shape"]
        ).copy()
        offset += nbytes
    if offset != len(payload):
        raise CorruptFileError(f"{path}: trailing bytes after arrays")

    cfg = FeatureConfig.from_json(header["feature_config"])
    try:
        if kind == "crf":
            return CrfModel(
                tuple(header["tags"]), cfg, arrays["emission"], arrays["transitions"]
            )
        if kind == "classifier":
            return ClassifierModel(
                tuple(class_from_wire(c) for c in header["classes"]),
                cfg,
                arrays["weights"],
                arrays["bias"],
            )
    except (KeyError, ValueError) as exc:
        raise CorruptFileError(f"{path}: inconsistent model contents: {exc}") from exc
    raise ModelKindError(f"{path}: unknown model kind {kind!r}")


def load_crf(path: str | Path) -> CrfModel:
    model = load_model(path)
    if not isinstance(model, CrfModel):
        raise ModelKindError(f"{path}: expected a tagger, found a classifier file")
    return model


def load_classifier(path: str | Path) -> ClassifierModel:
    model = load_model(path)
    if not isinstance(model, ClassifierModel):
        raise ModelKindError(f"{path}: expected a classifier, found a tagger file")
    return model
