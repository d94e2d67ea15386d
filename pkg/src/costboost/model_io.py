"""Model persistence: one canonical JSON document with a checksum.

The payload (format tag, version, label count, cost matrix, members with
their trees, optional cascade thresholds) is serialized with sorted keys,
no whitespace, and shortest round-trip decimals, then wrapped together with
its SHA-256.  Saving the same model twice yields byte-identical files;
loading verifies version and checksum before reconstructing anything.
"""

from __future__ import annotations

import hashlib
import json

from .boosting import Ensemble
from .cascade import CascadeThresholds
from .costs import CostMatrix
from .errors import ValidationError
from .tree import CostTree

MODEL_FORMAT = "costboost-model"
MODEL_VERSION = 1


class ModelFormatError(RuntimeError):
    """Unreadable, corrupted, or incompatible model file."""


def _canonical(payload: dict) -> str:
    return json.dumps(payload, sort_keys=True, separators=(",", ":"))


def _thresholds_payload(t: CascadeThresholds) -> dict:
    return {
        "mode": t.mode,
        "values": [float(v) for v in t.values],
        "n_members": int(t.n_members),
        "background_label": int(t.background_label),
        "n_calibration": int(t.n_calibration),
        "n_excluded": int(t.n_excluded),
    }


def save_model(ensemble: Ensemble, path, thresholds: CascadeThresholds | None = None) -> None:
    if len(ensemble.members) == 0:
        raise ValidationError("refusing to save a model with no members")
    payload = {
        "format": MODEL_FORMAT,
        "version": MODEL_VERSION,
        "k": int(ensemble.k),
        "n_features": int(ensemble.n_features),
        "feature_names": ensemble.feature_names,
        "cost": [[float(v) for v in row] for row in ensemble.cost.entries],
        "shrinkage": float(ensemble.shrinkage),
        "members": [
            {"beta": float(beta), "tree": tree.to_dict(), "depth_limit": int(tree.depth_limit)}
            for beta, tree in ensemble.members
        ],
        "thresholds": None if thresholds is None else _thresholds_payload(thresholds),
    }
    canonical = _canonical(payload)
    digest = hashlib.sha256(canonical.encode("utf-8")).hexdigest()
    document = _canonical({"payload": payload, "sha256": digest})
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(document + "\n")


def load_model(path) -> tuple[Ensemble, CascadeThresholds | None]:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            document = json.load(fh)
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise ModelFormatError(f"{path}: unreadable or truncated model file: {exc}") from exc
    if not isinstance(document, dict) or "payload" not in document or "sha256" not in document:
        raise ModelFormatError(f"{path}: not a model file")
    payload = document["payload"]
    digest = hashlib.sha256(_canonical(payload).encode("utf-8")).hexdigest()
    if digest != document["sha256"]:
        raise ModelFormatError(f"{path}: checksum mismatch; file was modified or corrupted")
    if payload.get("format") != MODEL_FORMAT:
        raise ModelFormatError(f"{path}: unknown format tag {payload.get('format')!r}")
    if payload.get("version") != MODEL_VERSION:
        raise ModelFormatError(
            f"{path}: model version {payload.get('version')!r} is not supported "
            f"(expected {MODEL_VERSION})"
        )

    n_features = int(payload["n_features"])
    members = [
        (
            float(rec["beta"]),
            CostTree.from_dict(rec["tree"], int(rec["depth_limit"]), n_features),
        )
        for rec in payload["members"]
    ]
    ensemble = Ensemble(
        cost=CostMatrix(payload["cost"]),
        members=members,
        shrinkage=float(payload["shrinkage"]),
        n_features=n_features,
        feature_names=payload.get("feature_names"),
    )
    raw = payload.get("thresholds")
    thresholds = None
    if raw is not None:
        thresholds = CascadeThresholds(
            mode=raw["mode"],
            values=raw["values"],
            n_members=int(raw["n_members"]),
            background_label=int(raw["background_label"]),
            n_calibration=int(raw["n_calibration"]),
            n_excluded=int(raw["n_excluded"]),
        )
    return ensemble, thresholds
