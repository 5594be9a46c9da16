"""Similarity-based modeling of graph operators over large graph datasets."""
__version__ = "0.1.0"

from .errors import ConfigError, ConvergenceError, GraphOpError, InfeasibleQuotaError, ParseError
from .graph import Graph, GraphDataset, degree, degree_vectors, leveled_degree, load_dataset, parse_edge_list
from .operators import OperatorKind, evaluate_operator
from .similarity import MeasureConfig, SimilarityMatrix, all_pairs_matrix, clustered_matrix
from .modeling import ModelConfig, TrainingSet, approximate_all, knn_predict
from .evaluation import mdape, nrmse, run_experiment
from .datagen import BAParams, generate_ba, generate_dataset
