"""fraudkit: from-scratch imbalanced-classification toolkit.

Modules: tabular (data model and splitting), cleanse (Tukey-fence outlier
pruning), resample (SMOTE), gbdt (histogram gradient-boosted trees),
baselines (kNN / logistic regression / CART), metrics (precision, recall,
F1, ROC AUC), embed (t-SNE), and the experiment/screening CLI.
"""

from .tabular import Dataset, ScaleParams, SplitPair, load_csv, minmax_scale, stratified_split
from .cleanse import Fences, RemovalReport, prune_class_outliers, quantile, tukey_fences
from .resample import SmoteParams, SynthesisDraw, smote_balance
from .gbdt import GbdtModel, GbdtParams, build_bins, load_model, predict_proba, save_model, train_gbdt
from .metrics import ConfusionMatrix, MetricsReport, RocCurve, confusion, prf1, roc_auc, roc_curve
from .embed import Embedding, TsneParams, joint_affinities, run_tsne
from .experiment import RunReport, ScreeningDecision, run_experiment, screen_transactions
from .config import ExperimentConfig, load_config

__version__ = "0.1.0"
