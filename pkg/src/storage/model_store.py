"""
Final model persistence as a versioned JSON document.
"""

import os

import numpy as np
from pydantic import ValidationError

from src.errors import InputError
from src.models.document import ClusterDocument, FinalModelDocument
from src.pipeline.final_model import FinalCluster, FinalModel


def to_document(fm: FinalModel) -> FinalModelDocument:
    return FinalModelDocument(
        p=fm.p,
        t=fm.t,
        lam=fm.energy,
        alpha=fm.alpha,
        beta=fm.beta,
        eta=fm.eta,
        clusters=[
            ClusterDocument(size=c.size, mu=c.mu.tolist(), sigma=c.sigma.reshape(-1).tolist())
            for c in fm.clusters
        ],
    )


def from_document(doc: FinalModelDocument) -> FinalModel:
    clusters = [
        FinalCluster.from_moments(np.array(c.mu), np.array(c.sigma).reshape(doc.p, doc.p), c.size)
        for c in doc.clusters
    ]
    return FinalModel(clusters=clusters, energy=doc.lam, alpha=doc.alpha, beta=doc.beta, eta=doc.eta)


def save_model(fm: FinalModel, path: str) -> str:
    with open(path, "w") as f:
        f.write(to_document(fm).model_dump_json(by_alias=True, indent=2))
    return path


def load_model(path: str) -> FinalModel:
    if not os.path.isfile(path):
        raise InputError(f"model file not found: {path}")
    with open(path) as f:
        raw = f.read()
    try:
        doc = FinalModelDocument.model_validate_json(raw)
    except ValidationError as e:
        raise InputError(f"{path} is not a valid final model document: {e}") from None
    return from_document(doc)
