"""Bag-of-Genres video representation: frame descriptors, a linear-SVM genre
dictionary, histogram pooling, L2 retrieval and replicated evaluation."""

from .classifier import (
    GenreSet,
    LabeledFeature,
    LinearModel,
    TrainConfig,
    evaluate_accuracy,
    load_model,
    predict,
    sample_training_frames,
    save_model,
    standardize_fit,
    train,
)
from .descriptors import Descriptor, DescriptorConfig, FeatureVector, Image, extract
from .encoder import BoGVector, VideoRecord, bog_dimensionality, encode_corpus, encode_video
from .errors import BoGError, BoGWarning, ConfigError, FormatError, InvalidInputError
from .evaluation import (
    EvalReport,
    PairedDiffInterval,
    RelevanceJudge,
    aggregate_replications,
    average_precision,
    paired_diff_interval,
    per_genre_report,
    precision_at_k,
    student_t_quantile,
)
from .retrieval import QueryPlan, RankedList, build_query_plan, l2_distance, rank, run_retrieval

__version__ = "0.1.0"
