"""Incremental partial dependence plots for models learning on data streams."""

from ._backend import BACKEND, NUMBA_ENABLED
from .batch_pdp import Dataset, batch_pdp, default_grid, ice_curve, ice_matrix
from .drift import ADWIN, DriftEvent, ExplanationDriftMonitor, fi_drift_pipeline
from .engine import (
    ExplanationFrame,
    IncrementalPDP,
    MinMaxRange,
    MultiExplainer,
    PdpConfig,
    PdpState,
    QuantileRange,
    debias,
    eval_points,
    explain_one,
    pdp_importance,
    update_estimate,
    update_grid_point,
)
from .model_api import (
    ConstantModel,
    IncrementalModel,
    LinearModel,
    PredictionFunction,
    SGDLinearRegression,
    SGDLogisticRegression,
    StaticModel,
    from_function,
)
from .prequential import run_prequential
from .storage import ExtremeValueStore, FrequencyReservoir, MinMaxStore
from .streams import (
    CONCEPT_A,
    CONCEPT_B,
    DriftSchedule,
    HyperplaneConcept,
    HyperplaneStream,
    StreamRecord,
    csv_source,
    write_csv,
)

__version__ = "0.1.0"
