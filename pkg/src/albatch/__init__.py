"""Batch-mode active learning for regression.

Pool-based selection strategies (random, committee variance, expected model
change) with an enhancement layer adding representative initialization,
outlier blacklisting, and within-batch diversity, plus the benchmark harness
and rank-based significance tables used to compare them.
"""

from .dataset import Dataset, LabelState, SynthConfig, SynthMeta, draw_pool, load_csv, save_csv, synth_generate
from .features import (
    BandPowerTable,
    DrowsinessRecord,
    PcaModel,
    build_feature_dataset,
    drowsiness_index,
    moving_average,
    pca_fit,
    project_and_scale,
    reject_channels,
    to_db,
    zscore_columns,
)
from .harness import ExperimentConfig, ResultRow, ResultsTable, learning_curves, pct_improvement, run_experiment
from .regression import RidgeModel, pearson_cc, predict, ridge_fit, rmse
from .clustering import Clustering, closest_to_centroid, kmeans
from .committee import CommitteePredictions, bootstrap_committee, committee_predict, emcm_scores, qbc_scores
from .stats import bh_fdr, comparison_table, dunn_pairwise
from .strategies import (
    BatchSelection,
    EnhancementFlags,
    STRATEGY_NAMES,
    StrategySpec,
    ebmal_init,
    ebmal_select,
    run_strategy,
    select_random,
    select_top_k,
    strategy_from_name,
)

__version__ = "0.1.0"
