from src.models.config import RunConfig
from src.models.document import FinalModelDocument
from src.models.params import DbscanParams, PsoConfig, TunedParams
from src.models.synth import GenSpec

__all__ = ["RunConfig", "FinalModelDocument", "DbscanParams", "PsoConfig", "TunedParams", "GenSpec"]
